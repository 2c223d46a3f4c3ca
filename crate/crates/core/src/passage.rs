//! Mean first-passage times and costs between neighbouring states.
//!
//! Everything is evaluated from the closed forms `P_n / (λ_n p_n)` and
//! friends in double-double; the first-order recurrences these satisfy are
//! only used as cross-checks in tests.

use serde::Serialize;

use crate::chain::ChainTables;
use crate::error::{Error, Result};
use crate::model::Convergence;
use crate::numeric::Dd;

/// Upward passage columns, indexed `0..=n_star`.
#[derive(Clone, Debug, PartialEq)]
pub struct Upward {
    /// `T_n^+ = P_n / (λ_n p_n)`.
    pub t_up: Vec<f64>,
    /// `H_n^+ = C_n / (λ_n p_n)`.
    pub h_up: Vec<f64>,
    /// `T_{0n} = Σ_{j<n} T_j^+`; zero at `n = 0`.
    pub t_0n: Vec<f64>,
    pub h_0n: Vec<f64>,
    /// `H_{0n} / T_{0n}`; NaN at `n = 0`.
    pub z_0n: Vec<f64>,
}

/// Downward passage columns, indexed `0..=n_star`.
#[derive(Clone, Debug, PartialEq)]
pub struct Downward {
    /// `T_{n+1}^- = P̄_n / (λ_n p_n)` at index `n`.
    pub t_down: Vec<f64>,
    /// `H_{n+1}^- = C̄_n / (λ_n p_n)` at index `n`.
    pub h_down: Vec<f64>,
    /// `T_{n0} = Σ_{j<n} T_{j+1}^-`; zero at `n = 0`.
    pub t_n0: Vec<f64>,
    pub h_n0: Vec<f64>,
    /// `H_{n0} / T_{n0}`; NaN at `n = 0`.
    pub z_n0: Vec<f64>,
    /// `Z_{n+1}^- = C̄_n / P̄_n` at index `n`.
    pub z_down: Vec<f64>,
}

/// Computes `T_n^+`, `H_n^+` and their cumulative sums.
pub fn upward_passage(tables: &ChainTables) -> Upward {
    let len = tables.len();
    let mut up = Upward {
        t_up: Vec::with_capacity(len),
        h_up: Vec::with_capacity(len),
        t_0n: Vec::with_capacity(len),
        h_0n: Vec::with_capacity(len),
        z_0n: Vec::with_capacity(len),
    };
    let (mut t, mut h) = (Dd::ZERO, Dd::ZERO);
    for n in 0..len {
        up.t_0n.push(t.to_f64());
        up.h_0n.push(h.to_f64());
        up.z_0n.push(if n == 0 { f64::NAN } else { (h / t).to_f64() });
        let flow = tables.flow_dd(n);
        let tn = tables.dd.p_cum[n] / flow;
        let hn = tables.dd.c_cum[n] / flow;
        up.t_up.push(tn.to_f64());
        up.h_up.push(hn.to_f64());
        t += tn;
        h += hn;
    }
    up
}

/// Computes `T_{n+1}^-`, `H_{n+1}^-` and their cumulative sums.
pub fn downward_passage(tables: &ChainTables) -> Downward {
    let len = tables.len();
    let mut down = Downward {
        t_down: Vec::with_capacity(len),
        h_down: Vec::with_capacity(len),
        t_n0: Vec::with_capacity(len),
        h_n0: Vec::with_capacity(len),
        z_n0: Vec::with_capacity(len),
        z_down: Vec::with_capacity(len),
    };
    let (mut t, mut h) = (Dd::ZERO, Dd::ZERO);
    for n in 0..len {
        down.t_n0.push(t.to_f64());
        down.h_n0.push(h.to_f64());
        down.z_n0.push(if n == 0 { f64::NAN } else { (h / t).to_f64() });
        let flow = tables.flow_dd(n);
        let tn = tables.dd.p_bar[n] / flow;
        let hn = tables.dd.c_bar[n] / flow;
        down.t_down.push(tn.to_f64());
        down.h_down.push(hn.to_f64());
        down.z_down.push((tables.dd.c_bar[n] / tables.dd.p_bar[n]).to_f64());
        t += tn;
        h += hn;
    }
    down
}

/// Both directions of passage quantities over `0..=n_star`.
#[derive(Clone, Debug, PartialEq)]
pub struct PassageTables {
    pub t_up: Vec<f64>,
    pub h_up: Vec<f64>,
    pub t_down: Vec<f64>,
    pub h_down: Vec<f64>,
    pub t_0n: Vec<f64>,
    pub h_0n: Vec<f64>,
    pub t_n0: Vec<f64>,
    pub h_n0: Vec<f64>,
    pub z_0n: Vec<f64>,
    pub z_n0: Vec<f64>,
    pub z_down: Vec<f64>,
}

impl PassageTables {
    pub fn new(tables: &ChainTables) -> Self {
        let up = upward_passage(tables);
        let down = downward_passage(tables);
        PassageTables {
            t_up: up.t_up,
            h_up: up.h_up,
            t_down: down.t_down,
            h_down: down.h_down,
            t_0n: up.t_0n,
            h_0n: up.h_0n,
            t_n0: down.t_n0,
            h_n0: down.h_n0,
            z_0n: up.z_0n,
            z_n0: down.z_n0,
            z_down: down.z_down,
        }
    }

    pub fn len(&self) -> usize {
        self.t_up.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_up.is_empty()
    }
}

/// A series summed up to the frontier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", content = "value", rename_all = "kebab-case")]
pub enum SeriesValue {
    Finite(f64),
    /// Partial sums keep growing; the value is the partial sum at the frontier.
    Divergent(f64),
}

impl SeriesValue {
    pub fn value(self) -> f64 {
        match self {
            SeriesValue::Finite(v) | SeriesValue::Divergent(v) => v,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, SeriesValue::Finite(_))
    }
}

/// Passage functionals at the boundary at infinity and from steady state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundaryFunctionals {
    /// `T_p0 = Σ P̄_n² / (λ_n p_n)`.
    pub t_p0: SeriesValue,
    /// `lim T_{n0}`.
    pub t_inf0: SeriesValue,
    /// `T_∞p = Σ P̄_n T_n^+`.
    pub t_infp: SeriesValue,
    pub sum_inv_mu: Convergence,
}

/// Relative growth of partial sums over the last quarter of `terms`.
fn tail_growth(terms: &[Dd]) -> (Dd, f64) {
    let q = 3 * terms.len() / 4;
    let mut total = Dd::ZERO;
    let mut head = Dd::ZERO;
    for (j, &t) in terms.iter().enumerate() {
        if j == q {
            head = total;
        }
        total += t;
    }
    let growth = if total.hi() == 0.0 {
        0.0
    } else {
        ((total - head) / total).to_f64()
    };
    (total, growth)
}

/// Sums `T_p0`, `T_∞0` and `T_∞p` over the frontier and classifies them.
pub fn boundary_functionals(tables: &ChainTables, passage: &PassageTables) -> Result<BoundaryFunctionals> {
    let tol = tables.policy().term_rel_tol;
    let len = tables.len();
    let mut down = Vec::with_capacity(len);
    let mut p0 = Vec::with_capacity(len);
    let mut infp = Vec::with_capacity(len);
    for n in 0..len {
        let flow = tables.flow_dd(n);
        let tm = tables.dd.p_bar[n] / flow;
        down.push(tm);
        p0.push(tm * tables.dd.p_bar[n]);
        infp.push((tables.dd.p_cum[n] / flow) * tables.dd.p_bar[n]);
    }
    debug_assert_eq!(passage.len(), len);
    let sum_inv_mu = tables.model().inverse_mu_series();

    let (t_inf0_sum, growth) = tail_growth(&down);
    let t_inf0 = match sum_inv_mu {
        Convergence::Convergent => SeriesValue::Finite(t_inf0_sum.to_f64()),
        Convergence::Divergent if growth > tol => SeriesValue::Divergent(t_inf0_sum.to_f64()),
        _ => return Err(Error::InconclusiveConvergence { quantity: "T_inf0" }),
    };

    let (t_p0_sum, p0_growth) = tail_growth(&p0);
    let t_p0 = if p0_growth <= tol || t_inf0.is_finite() {
        SeriesValue::Finite(t_p0_sum.to_f64())
    } else {
        return Err(Error::InconclusiveConvergence { quantity: "T_p0" });
    };

    // Termwise, T_{n+1}^- = P̄_n T_n^+ + P̄_n² / (λ_n p_n), so T_∞p shares the verdict of T_∞0.
    let (t_infp_sum, _) = tail_growth(&infp);
    let t_infp = match t_inf0 {
        SeriesValue::Finite(_) => SeriesValue::Finite(t_infp_sum.to_f64()),
        SeriesValue::Divergent(_) => SeriesValue::Divergent(t_infp_sum.to_f64()),
    };

    Ok(BoundaryFunctionals {
        t_p0,
        t_inf0,
        t_infp,
        sum_inv_mu,
    })
}
