//! Error amplification factors of the three recurrence schemes.
//!
//! Input error only: with `E = ẑ - ζ`, the forward scheme gives
//! `φ̂_n - φ_n = T_n^+ E` exactly, the backward scheme tends to `-T_{n+1}^- E`
//! as `N → ∞`, and the mixed scheme takes whichever is smaller in magnitude.
//! Rounding inside the recurrences is not modelled.

use serde::Serialize;

use crate::chain::ChainTables;
use crate::error::{Error, Result};
use crate::passage::PassageTables;
use crate::poisson::{crossover_big_m, crossover_m, solve_exact, Scheme};

/// Relative factors are dropped where `|φ_n|` or `|b_n|` is below this.
pub const REL_FACTOR_FLOOR: f64 = 1e-300;

/// Behaviour of forward-scheme errors as `n` grows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DivergenceClass {
    /// `λ_n p_n → 0`: errors blow up.
    Explosive,
    /// `λ_n p_n` bounded away from 0: errors stay bounded.
    Bounded,
    Indeterminate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorRow {
    pub n: usize,
    pub abs_factor: f64,
    pub rel_factor: Option<f64>,
    pub b_abs_factor: f64,
    pub b_rel_factor: Option<f64>,
    pub predicted_abs_error: f64,
    pub observed_abs_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub scheme: Scheme,
    pub e_abs_input: f64,
    /// Factors are `N → ∞` limits (backward and mixed).
    pub limit_factors: bool,
    pub rows: Vec<ErrorRow>,
    /// Judged on the last quarter of the stored states only.
    pub divergence_class: DivergenceClass,
}

impl ErrorReport {
    /// Fills `observed_abs_error = computed_n - exact_n` where both exist.
    pub fn attach_observed(&mut self, computed: &[f64], exact: &[f64]) {
        for row in &mut self.rows {
            row.observed_abs_error = match (computed.get(row.n), exact.get(row.n)) {
                (Some(c), Some(e)) => Some(c - e),
                _ => None,
            };
        }
    }
}

/// Classifies `λ_n p_n` over the last quarter of the stored states.
pub fn divergence_class(tables: &ChainTables) -> DivergenceClass {
    let len = tables.len();
    let start = 3 * len / 4;
    let flows: Vec<f64> = (start..len).map(|n| tables.flow(n)).collect();
    if flows.len() < 2 {
        return DivergenceClass::Indeterminate;
    }
    let (first, last) = (flows[0], *flows.last().unwrap());
    let decreasing = flows.windows(2).all(|w| w[1] <= w[0]);
    let (lo, hi) = flows
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &f| (lo.min(f), hi.max(f)));
    if decreasing && last < 1e-3 * first {
        DivergenceClass::Explosive
    } else if lo / hi > 0.5 {
        DivergenceClass::Bounded
    } else {
        DivergenceClass::Indeterminate
    }
}

fn report<A, B>(
    tables: &ChainTables,
    scheme: Scheme,
    e_abs_input: f64,
    b0: f64,
    abs_factor: A,
    b_abs_factor: B,
) -> Result<ErrorReport>
where
    A: Fn(usize) -> f64,
    B: Fn(usize) -> f64,
{
    let zeta = tables.zeta;
    if zeta == 0.0 {
        return Err(Error::ZeroDenominator("zeta = 0, relative input error undefined".into()));
    }
    let exact = solve_exact(tables, b0)?;
    let rel = |factor: f64, denom: f64| {
        if denom.abs() < REL_FACTOR_FLOOR {
            None
        } else {
            Some(zeta * factor / denom)
        }
    };
    let rows = (0..tables.len())
        .map(|n| {
            let a = abs_factor(n);
            let b = b_abs_factor(n);
            ErrorRow {
                n,
                abs_factor: a,
                rel_factor: rel(a, exact.phi[n]),
                b_abs_factor: b,
                b_rel_factor: rel(b, exact.b[n]),
                predicted_abs_error: a * e_abs_input,
                observed_abs_error: None,
            }
        })
        .collect();
    Ok(ErrorReport {
        scheme,
        e_abs_input,
        limit_factors: scheme != Scheme::Forward,
        rows,
        divergence_class: divergence_class(tables),
    })
}

/// Forward scheme: `T_n^+` for `φ`, `T_{0n}` for `b`.
pub fn forward_error_factors(
    tables: &ChainTables,
    passage: &PassageTables,
    e_abs_input: f64,
    b0: f64,
) -> Result<ErrorReport> {
    report(
        tables,
        Scheme::Forward,
        e_abs_input,
        b0,
        |n| passage.t_up[n],
        |n| passage.t_0n[n],
    )
}

/// Backward scheme as `N → ∞`: `-T_{n+1}^-` for `φ`, `-T_{n0}` for `b`.
pub fn backward_error_factors(
    tables: &ChainTables,
    passage: &PassageTables,
    e_abs_input: f64,
    b0: f64,
) -> Result<ErrorReport> {
    report(
        tables,
        Scheme::Backward,
        e_abs_input,
        b0,
        |n| -passage.t_down[n],
        |n| -passage.t_n0[n],
    )
}

/// Mixed scheme as `N → ∞`: `A_n` and `B_n`, switching at `m` and `M`.
pub fn mixed_error_factors(
    tables: &ChainTables,
    passage: &PassageTables,
    e_abs_input: f64,
    b0: f64,
) -> Result<ErrorReport> {
    let m = crossover_m(tables);
    let big_m = crossover_big_m(passage).unwrap_or(usize::MAX);
    report(
        tables,
        Scheme::Mixed,
        e_abs_input,
        b0,
        |n| if n < m { passage.t_up[n] } else { -passage.t_down[n] },
        |n| if n < big_m { passage.t_0n[n] } else { -passage.t_n0[n] },
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub n: usize,
    /// Limiting backward/forward error ratio for `φ_n`: `-P̄_n / P_n`.
    pub phi_ratio: f64,
    /// Same for `b_n`: `-T_{n0} / T_{0n}`; absent at `n = 0`.
    pub b_ratio: Option<f64>,
}

/// Backward-versus-forward error ratios per state.
pub fn scheme_comparison(tables: &ChainTables, passage: &PassageTables) -> Vec<ComparisonRow> {
    (0..tables.len())
        .map(|n| ComparisonRow {
            n,
            phi_ratio: -(tables.dd.p_bar[n] / tables.dd.p_cum[n]).to_f64(),
            b_ratio: (n > 0).then(|| -passage.t_n0[n] / passage.t_0n[n]),
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayRow {
    pub n: usize,
    /// `λ_N p_N`.
    pub flow: f64,
    /// `λ_N p_N T_{N0} e`.
    pub time_term: f64,
    /// `λ_N p_N H_{N0} e`.
    pub cost_term: f64,
    /// `λ_N p_N √T_{0N} e`.
    pub sqrt_term: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayReport {
    pub rows: Vec<DecayRow>,
    /// Whether each column is nonincreasing over the rows after the crossover `m`.
    pub flow_monotone: bool,
    pub time_monotone: bool,
    pub cost_monotone: bool,
    pub sqrt_monotone: bool,
}

/// Left-hand sides of the seed-accuracy conditions, per candidate frontier `N`.
pub fn boundary_decay_diagnostics(tables: &ChainTables, passage: &PassageTables, e_seed: f64) -> DecayReport {
    let rows: Vec<DecayRow> = (0..tables.len())
        .map(|n| {
            let flow = tables.flow(n);
            DecayRow {
                n,
                flow,
                time_term: flow * passage.t_n0[n] * e_seed,
                cost_term: flow * passage.h_n0[n] * e_seed,
                sqrt_term: flow * passage.t_0n[n].sqrt() * e_seed,
            }
        })
        .collect();
    let from = crossover_m(tables).min(rows.len());
    let mono = |f: fn(&DecayRow) -> f64| rows[from..].windows(2).all(|w| f(&w[1]).abs() <= f(&w[0]).abs());
    DecayReport {
        flow_monotone: mono(|r| r.flow),
        time_monotone: mono(|r| r.time_term),
        cost_monotone: mono(|r| r.cost_term),
        sqrt_monotone: mono(|r| r.sqrt_term),
        rows,
    }
}
