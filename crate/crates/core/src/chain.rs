//! Steady-state tables of a birth–death chain up to an adaptive frontier.
//!
//! Cumulative sums are accumulated upward and tails downward, both in
//! double-double, so that `P̄_n` and `C̄_n` keep full relative accuracy deep
//! into the tail where `1 - P_n` would be pure rounding noise.

use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{BirthDeathModel, TruncationPolicy};
use crate::numeric::{frexp, ldexp, Dd};

/// Default number of states inspected by [`check_ergodicity`].
pub const DEFAULT_HORIZON: usize = 10_000;

/// `ρ_n` must stay below `1 - ERGODIC_MARGIN` over the inspected tail.
pub const ERGODIC_MARGIN: f64 = 1e-9;

/// Ergodicity evidence over a finite horizon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErgodicityReport {
    /// `sup ρ_n` over the last quarter of the horizon.
    pub rho_limsup_estimate: f64,
    /// `limsup ρ_n < 1`, judged on the last quarter.
    pub condition16_pass: bool,
    /// `Σ π_n < ∞` and `Σ 1/(λ_n π_n) = ∞`, judged from partial sums.
    pub condition15_checked: bool,
    pub horizon: usize,
}

/// Checks ergodicity from the rates over `horizon` states (fewer for tabulated models).
pub fn check_ergodicity(model: &BirthDeathModel, horizon: usize) -> Result<ErgodicityReport> {
    if horizon < 2 {
        return Err(Error::Config("ergodicity horizon must be at least 2".into()));
    }
    let h = model.available_states().map_or(horizon, |len| len.min(horizon));
    if h < 2 {
        return Err(Error::TabulatedTooShort {
            needed: 2,
            available: h,
        });
    }
    let burn = (3 * h / 4).max(1);
    let mut sup: f64 = 0.0;
    // ln π_n, and ln(1/(λ_n π_n)) at the burn-in index and at the end.
    let mut ln_pi = 0.0;
    let mut ln_max = 0.0f64;
    let mut ln_inv_burn = 0.0;
    let mut ln_inv_end = 0.0;
    let mut ln_pi_end = 0.0;
    for n in 1..h {
        let lam_prev = model.lambda(n - 1)?;
        let mu = model.mu(n)?;
        ln_pi += (lam_prev / mu).ln();
        ln_max = ln_max.max(ln_pi);
        let ln_inv = -(model.lambda(n)?.ln() + ln_pi);
        if n == burn {
            ln_inv_burn = ln_inv;
        }
        if n >= burn {
            sup = sup.max(model.lambda(n)? / mu);
        }
        ln_inv_end = ln_inv;
        ln_pi_end = ln_pi;
    }
    let condition16_pass = sup < 1.0 - ERGODIC_MARGIN;
    let mass_settled = ln_pi_end - ln_max < (1e-12f64).ln();
    // Constant terms still make the series diverge; allow rounding drift in the logs.
    let inverse_grows = ln_inv_end >= ln_inv_burn - 1e-9 * (1.0 + ln_inv_burn.abs());
    Ok(ErgodicityReport {
        rho_limsup_estimate: sup,
        condition16_pass,
        condition15_checked: condition16_pass || (mass_settled && inverse_grows),
        horizon: h,
    })
}

/// How to obtain the mean cost `ζ` used as right-hand side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZetaMode {
    /// The model's closed form, rounded to binary64.
    Analytic,
    /// `Σ c_n p_n` over the tables.
    Summed,
    /// The analytic value if present, else the summed one, moved `k` steps
    /// of `ε 2^e` where `ζ = m 2^e` with `0.5 <= |m| < 1`.
    Perturbed(i64),
}

impl FromStr for ZetaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(ZetaMode::Analytic),
            "summed" => Ok(ZetaMode::Summed),
            _ => {
                let k = s
                    .strip_prefix("perturbed:")
                    .ok_or_else(|| Error::Config(format!("unknown zeta mode {s:?}")))?;
                let k = k.strip_prefix('+').unwrap_or(k);
                k.parse::<i64>()
                    .map(ZetaMode::Perturbed)
                    .map_err(|_| Error::Config(format!("bad perturbation step count in {s:?}")))
            }
        }
    }
}

impl std::fmt::Display for ZetaMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ZetaMode::Analytic => write!(f, "analytic"),
            ZetaMode::Summed => write!(f, "summed"),
            ZetaMode::Perturbed(k) => write!(f, "perturbed:{k:+}"),
        }
    }
}

/// One perturbation step for `z`: `ε 2^e` with `z = m 2^e`, `0.5 <= |m| < 1`.
///
/// At `z ≈ 0.4` this is `2^-53`, i.e. two units in the last place.
pub fn perturbation_step(z: f64) -> f64 {
    let (_, e) = frexp(z);
    ldexp(f64::EPSILON, e)
}

#[derive(Clone, Debug, Default)]
pub(crate) struct DdColumns {
    pub p: Vec<Dd>,
    pub p_cum: Vec<Dd>,
    pub p_bar: Vec<Dd>,
    pub c_cum: Vec<Dd>,
    pub c_bar: Vec<Dd>,
    pub zeta: Dd,
}

/// Steady-state tables for states `0..=n_star`.
#[derive(Clone, Debug)]
pub struct ChainTables {
    model: BirthDeathModel,
    policy: TruncationPolicy,
    /// Truncation frontier.
    pub n_star: usize,
    /// Last state summed into the tails (`>= n_star`).
    pub guard: usize,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub cost: Vec<f64>,
    /// Potential coefficients `π_n 2^{-pi_scale}`.
    pub pi: Vec<f64>,
    /// Power-of-two scale of `pi`; zero unless `π_n` leaves the binary64 range.
    pub pi_scale: i32,
    pub p: Vec<f64>,
    /// `P_n = Σ_{j≤n} p_j`.
    pub p_cum: Vec<f64>,
    /// `P̄_n = Σ_{j>n} p_j`, accumulated downward.
    pub p_bar: Vec<f64>,
    /// `C_n = Σ_{j≤n} c_j p_j`.
    pub c_cum: Vec<f64>,
    /// `C̄_n = Σ_{j>n} c_j p_j`, accumulated downward.
    pub c_bar: Vec<f64>,
    /// `Z_n = C_n / P_n`.
    pub z: Vec<f64>,
    /// Summed mean cost.
    pub zeta: f64,
    pub ergodicity: ErgodicityReport,
    pub(crate) dd: DdColumns,
}

/// Builds steady-state tables, choosing the frontier from `policy`.
pub fn build_tables(model: &BirthDeathModel, policy: &TruncationPolicy) -> Result<ChainTables> {
    policy.validate()?;
    let ergodicity = check_ergodicity(model, DEFAULT_HORIZON)?;
    if !ergodicity.condition16_pass && !policy.assume_ergodic {
        return Err(Error::NonErgodic {
            rho_sup: ergodicity.rho_limsup_estimate,
        });
    }

    let cap = policy.max_states;
    let state_limit = |n: usize| -> Result<()> {
        if n >= cap {
            return Err(Error::TruncationOverflow { max_states: cap });
        }
        if let Some(len) = model.available_states() {
            if n >= len {
                return Err(Error::TabulatedTooShort {
                    needed: n + 1,
                    available: len,
                });
            }
        }
        Ok(())
    };

    // π_n = m_n 2^{e_n} with m_n in [0.5, 1).
    let mut mant: Vec<Dd> = vec![Dd::from(0.5)];
    let mut expo: Vec<i64> = vec![1];
    let mut lambda = vec![model.lambda(0)?];
    let mut mu = vec![0.0];
    let mut cost = vec![model.cost(0)?];
    // Running Σ π_j as (s, es).
    let mut sum = Dd::from(0.5);
    let mut sum_e: i64 = 1;

    let align = |x: Dd, shift: i64| x.ldexp(shift.clamp(-3000, 3000) as i32);
    let renorm = |x: Dd, e: i64| {
        let (_, fe) = frexp(x.hi());
        (x.ldexp(-fe), e + fe as i64)
    };

    let step = |n: usize,
                mant: &mut Vec<Dd>,
                expo: &mut Vec<i64>,
                lambda: &mut Vec<f64>,
                mu: &mut Vec<f64>,
                cost: &mut Vec<f64>|
     -> Result<()> {
        state_limit(n)?;
        let m_n = model.mu(n)?;
        let next = mant[n - 1].mul_f64(lambda[n - 1]) / Dd::from(m_n);
        if next.hi() == 0.0 || !next.is_finite() {
            return Err(Error::ProbabilityUnderflow { state: n });
        }
        let (m, e) = renorm(next, expo[n - 1]);
        mant.push(m);
        expo.push(e);
        lambda.push(model.lambda(n)?);
        mu.push(m_n);
        cost.push(model.cost(n)?);
        Ok(())
    };

    let mut n = 0;
    loop {
        n += 1;
        step(n, &mut mant, &mut expo, &mut lambda, &mut mu, &mut cost)?;
        sum += align(mant[n], expo[n] - sum_e);
        (sum, sum_e) = renorm(sum, sum_e);
        let ratio = ldexp(mant[n].hi() / sum.hi(), (expo[n] - sum_e).clamp(-3000, 3000) as i32);
        if ratio < policy.tail_mass_tol {
            break;
        }
    }
    let n_star = n;

    // Extend until the remaining tail is negligible relative to the tails at n_star.
    let (mut tail_pi, mut tail_c) = (Dd::ZERO, Dd::ZERO);
    let base_e = expo[n_star];
    loop {
        n += 1;
        step(n, &mut mant, &mut expo, &mut lambda, &mut mu, &mut cost)?;
        let t = align(mant[n], expo[n] - base_e);
        let tc = t.mul_f64(cost[n].abs());
        tail_pi += t;
        tail_c += tc;
        let pi_done = t.hi() <= policy.term_rel_tol * tail_pi.hi();
        let c_done = tc.hi() <= policy.term_rel_tol * tail_c.hi() || tail_c.hi() == 0.0;
        if pi_done && c_done {
            break;
        }
    }
    let guard = n;

    let e_max = *expo.iter().max().unwrap();
    let e_min = *expo.iter().min().unwrap();
    let pi_scale = if e_max <= 1000 && e_min >= -1000 { 0 } else { e_max };
    let pis: Vec<Dd> = mant
        .iter()
        .zip(&expo)
        .map(|(&m, &e)| align(m, e - pi_scale))
        .collect();

    let mut total = Dd::ZERO;
    for &x in &pis {
        total += x;
    }
    let p_dd: Vec<Dd> = pis.iter().map(|&x| x / total).collect();
    let cp: Vec<Dd> = p_dd.iter().zip(&cost).map(|(&p, &c)| p.mul_f64(c)).collect();

    let len = n_star + 1;
    let mut p_cum = Vec::with_capacity(len);
    let mut c_cum = Vec::with_capacity(len);
    let (mut acc_p, mut acc_c) = (Dd::ZERO, Dd::ZERO);
    for j in 0..len {
        acc_p += p_dd[j];
        acc_c += cp[j];
        p_cum.push(acc_p);
        c_cum.push(acc_c);
    }
    let mut p_bar = vec![Dd::ZERO; len];
    let mut c_bar = vec![Dd::ZERO; len];
    let (mut acc_p, mut acc_c) = (Dd::ZERO, Dd::ZERO);
    for j in (1..=guard).rev() {
        acc_p += p_dd[j];
        acc_c += cp[j];
        if j <= len {
            p_bar[j - 1] = acc_p;
            c_bar[j - 1] = acc_c;
        }
    }
    let zeta = c_cum[n_star] + c_bar[n_star];

    for (j, p) in p_dd.iter().enumerate().take(len) {
        if !(p.hi() > 0.0) {
            return Err(Error::ProbabilityUnderflow { state: j });
        }
    }

    let f = |v: &[Dd]| v.iter().map(|x| x.to_f64()).collect::<Vec<f64>>();
    lambda.truncate(len);
    mu.truncate(len);
    cost.truncate(len);
    let z = c_cum.iter().zip(&p_cum).map(|(&c, &p)| (c / p).to_f64()).collect();
    Ok(ChainTables {
        model: model.clone(),
        policy: *policy,
        n_star,
        guard,
        lambda,
        mu,
        cost,
        pi: pis[..len].iter().map(|x| x.to_f64()).collect(),
        pi_scale: pi_scale as i32,
        p: f(&p_dd[..len]),
        p_cum: f(&p_cum),
        p_bar: f(&p_bar),
        c_cum: f(&c_cum),
        c_bar: f(&c_bar),
        z,
        zeta: zeta.to_f64(),
        ergodicity,
        dd: DdColumns {
            p: p_dd[..len].to_vec(),
            p_cum,
            p_bar,
            c_cum,
            c_bar,
            zeta,
        },
    })
}

impl ChainTables {
    pub fn model(&self) -> &BirthDeathModel {
        &self.model
    }

    pub fn policy(&self) -> &TruncationPolicy {
        &self.policy
    }

    /// Number of stored states, `n_star + 1`.
    pub fn len(&self) -> usize {
        self.n_star + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `λ_n p_n` in double-double.
    pub(crate) fn flow_dd(&self, n: usize) -> Dd {
        self.dd.p[n].mul_f64(self.lambda[n])
    }

    pub(crate) fn zeta_dd(&self) -> Dd {
        self.dd.zeta
    }

    /// `λ_n p_n`.
    pub fn flow(&self, n: usize) -> f64 {
        self.flow_dd(n).to_f64()
    }

    /// Mean steady-state cost under `mode`.
    pub fn mean_cost(&self, mode: ZetaMode) -> Result<f64> {
        match mode {
            ZetaMode::Analytic => self.model.analytic_zeta().ok_or(Error::MissingAnalyticForm),
            ZetaMode::Summed => Ok(self.zeta),
            ZetaMode::Perturbed(k) => {
                let base = self.model.analytic_zeta().unwrap_or(self.zeta);
                Ok(base + k as f64 * perturbation_step(base))
            }
        }
    }

    /// True when every cost rate in the table is nonnegative.
    pub fn costs_nonnegative(&self) -> bool {
        self.cost.iter().all(|&c| c >= 0.0)
    }
}
