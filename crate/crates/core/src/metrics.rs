//! Bias and asymptotic variance from the marginal relative cost.
//!
//! `β_0 = -Σ P̄_n φ_n`, `β_n = β_0 + Σ_{j<n} φ_j` and `σ² = 2 Σ λ_n p_n φ_n²`.
//! Both series are summed in double-double over whatever `φ` is supplied, so
//! a truncated or perturbed `φ` gives the truncated computed analogue.

use serde::Serialize;

use crate::chain::ChainTables;
use crate::error::{Error, Result};
use crate::numeric::Dd;
use crate::passage::{BoundaryFunctionals, PassageTables};
use crate::poisson::{solve_exact, PoissonSolution, Scheme};

/// Error `ẑ - ζ` of a right-hand-side constant, using the double-double `ζ`.
pub fn input_error(tables: &ChainTables, z: f64) -> f64 {
    (Dd::from(z) - tables.zeta_dd()).to_f64()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bias {
    pub beta0: f64,
    /// `β_n` for `n <= phi.len()`.
    pub beta: Vec<f64>,
    /// `P̄_K max|φ|` with `K` the last summed state: a bound on the dropped tail
    /// when `φ` stays bounded beyond `K`.
    pub remainder_bound: f64,
    /// Some cost rate is negative, so the summation interchange behind the
    /// `β_0` series is not covered.
    pub signed_costs: bool,
}

/// `β_0 = -Σ_{n<K} P̄_n φ_n` with `K = min(phi.len(), tables.len())`.
pub fn bias(phi: &[f64], tables: &ChainTables) -> Bias {
    let k = phi.len().min(tables.len());
    let mut acc = Dd::ZERO;
    for n in 0..k {
        acc += tables.dd.p_bar[n].mul_f64(phi[n]);
    }
    let beta0 = -acc;
    let mut beta = Vec::with_capacity(k + 1);
    let mut run = beta0;
    beta.push(run.to_f64());
    for &f in &phi[..k] {
        run += f;
        beta.push(run.to_f64());
    }
    let max_phi = phi[..k].iter().fold(0.0f64, |a, &f| a.max(f.abs()));
    let remainder_bound = if k == 0 { 0.0 } else { tables.p_bar[k - 1] * max_phi };
    Bias {
        beta0: beta0.to_f64(),
        beta,
        remainder_bound,
        signed_costs: !tables.costs_nonnegative(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesStatus {
    /// Last term below `term_rel_tol` times the sum.
    Converged,
    /// Terms growing at the end.
    Diverging,
    Unsettled,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Variance {
    pub sigma2: f64,
    pub status: SeriesStatus,
}

/// `2 Σ_{n<=N} λ_n p_n φ_n²` for every `N` covered by both `phi` and the tables.
pub fn sigma2_partial_sums(phi: &[f64], tables: &ChainTables) -> Vec<f64> {
    let k = phi.len().min(tables.len());
    let mut acc = Dd::ZERO;
    (0..k)
        .map(|n| {
            let f = Dd::from(phi[n]);
            acc += tables.flow_dd(n) * f * f;
            (acc + acc).to_f64()
        })
        .collect()
}

fn sigma2_status(phi: &[f64], tables: &ChainTables, partial: &[f64]) -> SeriesStatus {
    let k = partial.len();
    if k == 0 {
        return SeriesStatus::Converged;
    }
    let term = |n: usize| 2.0 * tables.flow(n) * phi[n] * phi[n];
    let total = partial[k - 1];
    let last = term(k - 1);
    if last <= tables.policy().term_rel_tol * total || total == 0.0 {
        SeriesStatus::Converged
    } else if k >= 3 && last > term(k - 2) && term(k - 2) > term(k - 3) {
        SeriesStatus::Diverging
    } else {
        SeriesStatus::Unsettled
    }
}

/// `σ² = 2 Σ λ_n p_n φ_n²` over the supplied `φ`.
///
/// A series whose last term is still significant and not growing is
/// reported as [`Error::InconclusiveConvergence`]; a growing one is returned
/// with status `Diverging`.
pub fn asymptotic_variance(phi: &[f64], tables: &ChainTables) -> Result<Variance> {
    let partial = sigma2_partial_sums(phi, tables);
    let status = sigma2_status(phi, tables, &partial);
    if status == SeriesStatus::Unsettled {
        return Err(Error::InconclusiveConvergence { quantity: "sigma2" });
    }
    Ok(Variance {
        sigma2: partial.last().copied().unwrap_or(0.0),
        status,
    })
}

/// First-order errors of `β_0` and `σ²` when `φ̂_n = φ_n + A_n E`:
/// `-E Σ P̄_n A_n` and `4E Σ λ_n p_n A_n φ_n + 2E² Σ λ_n p_n A_n²`.
fn propagated(tables: &ChainTables, exact_phi: &[f64], factors: &[f64], e: f64) -> (f64, f64) {
    let (mut b, mut s1, mut s2) = (Dd::ZERO, Dd::ZERO, Dd::ZERO);
    for (n, &a) in factors.iter().enumerate() {
        let flow_a = tables.flow_dd(n).mul_f64(a);
        b += tables.dd.p_bar[n].mul_f64(a);
        s1 += flow_a.mul_f64(exact_phi[n]);
        s2 += flow_a.mul_f64(a);
    }
    let beta = -(b.mul_f64(e)).to_f64();
    let sigma = (s1.mul_f64(4.0 * e) + s2.mul_f64(2.0 * e * e)).to_f64();
    (beta, sigma)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ForwardPrediction {
    pub n: usize,
    /// `β̂_{0,N} - β_{0,N} = -E Σ_{n<=N} P̄_n T_n^+`.
    pub beta0_error: f64,
    /// `σ̂²_N - σ²_N = 4E Σ P_n φ_n + 2E² Σ P_n T_n^+`.
    pub sigma2_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MixedLimits {
    pub m: usize,
    /// `(T_p0 - T_{m0}) E`.
    pub beta0_error: f64,
    /// `4 β_m E + 2 (T_p0 + T_{0m} - T_{m0}) E²`.
    pub sigma2_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncatedErrors {
    pub e_abs_input: f64,
    /// One row per `N` in `0..tables.len()`.
    pub forward: Vec<ForwardPrediction>,
    /// Forward `β̂_{0,N}` has no finite limit; holds exactly when `T_∞0` diverges.
    pub forward_beta0_diverges: bool,
    /// Forward `σ̂²_N` always diverges for `E ≠ 0`.
    pub forward_sigma2_diverges: bool,
    /// `N → ∞` limit predictions of the mixed scheme.
    pub mixed: MixedLimits,
}

/// Forward per-`N` predictions, computed with the exact `φ`.
pub fn forward_metric_errors(tables: &ChainTables, passage: &PassageTables, e_abs_input: f64) -> Result<Vec<ForwardPrediction>> {
    let exact = solve_exact(tables, 0.0)?;
    let e = e_abs_input;
    let (mut b, mut s1, mut s2) = (Dd::ZERO, Dd::ZERO, Dd::ZERO);
    Ok((0..tables.len())
        .map(|n| {
            let t = passage.t_up[n];
            b += tables.dd.p_bar[n].mul_f64(t);
            s1 += tables.dd.p_cum[n].mul_f64(exact.phi[n]);
            s2 += tables.dd.p_cum[n].mul_f64(t);
            ForwardPrediction {
                n,
                beta0_error: -(b.mul_f64(e)).to_f64(),
                sigma2_error: (s1.mul_f64(4.0 * e) + s2.mul_f64(2.0 * e * e)).to_f64(),
            }
        })
        .collect())
}

/// Limit predictions for the mixed scheme with forward/backward switch at `m`.
pub fn mixed_metric_limits(
    tables: &ChainTables,
    passage: &PassageTables,
    boundary: &BoundaryFunctionals,
    e_abs_input: f64,
    m: usize,
) -> Result<MixedLimits> {
    if !boundary.t_p0.is_finite() {
        return Err(Error::RequiresFiniteTp0);
    }
    if m >= tables.len() {
        return Err(Error::FrontierTooSmall {
            requested: m,
            available: tables.n_star,
        });
    }
    let t_p0 = boundary.t_p0.value();
    let exact = solve_exact(tables, 0.0)?;
    let beta_m = bias(&exact.phi, tables).beta[m];
    let e = e_abs_input;
    Ok(MixedLimits {
        m,
        beta0_error: (t_p0 - passage.t_n0[m]) * e,
        sigma2_error: 4.0 * beta_m * e + 2.0 * (t_p0 + passage.t_0n[m] - passage.t_n0[m]) * e * e,
    })
}

/// Forward predictions, divergence verdicts and mixed limits together.
pub fn truncated_metric_errors(
    tables: &ChainTables,
    passage: &PassageTables,
    boundary: &BoundaryFunctionals,
    e_abs_input: f64,
    m: usize,
) -> Result<TruncatedErrors> {
    let mixed = mixed_metric_limits(tables, passage, boundary, e_abs_input, m)?;
    Ok(TruncatedErrors {
        e_abs_input,
        forward: forward_metric_errors(tables, passage, e_abs_input)?,
        forward_beta0_diverges: e_abs_input != 0.0 && !boundary.t_inf0.is_finite(),
        forward_sigma2_diverges: e_abs_input != 0.0,
        mixed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub zeta: f64,
    pub beta0: f64,
    pub beta: Vec<f64>,
    pub sigma2: f64,
    pub sigma2_status: SeriesStatus,
    pub scheme: Scheme,
    pub n_used: usize,
    pub e_abs_input: f64,
    /// First-order propagated input error in `β_0`.
    pub predicted_beta0_error: f64,
    pub predicted_sigma2_error: f64,
    pub beta0_remainder_bound: f64,
    pub signed_costs: bool,
    /// `2 Σ_{n<=N} λ_n p_n φ_n²` for each `N`.
    pub partial_sums: Vec<f64>,
}

/// Metrics of a computed solution with first-order error predictions.
///
/// The prediction uses the scheme's limiting amplification factors, so for
/// backward and mixed solutions it ignores the frontier seed.
pub fn metrics_report(tables: &ChainTables, passage: &PassageTables, solution: &PoissonSolution) -> Result<MetricsReport> {
    let phi = &solution.phi;
    let b = bias(phi, tables);
    let variance = asymptotic_variance(phi, tables)?;
    let k = phi.len().min(tables.len());
    let e = if solution.scheme == Scheme::Exact {
        0.0
    } else {
        input_error(tables, solution.z_input)
    };
    let m = solution.crossover_m.unwrap_or_else(|| crate::poisson::crossover_m(tables));
    let factors: Vec<f64> = (0..k)
        .map(|n| match solution.scheme {
            Scheme::Exact => 0.0,
            Scheme::Forward => passage.t_up[n],
            Scheme::Backward => -passage.t_down[n],
            Scheme::Mixed if n < m => passage.t_up[n],
            Scheme::Mixed => -passage.t_down[n],
        })
        .collect();
    let exact = solve_exact(tables, 0.0)?;
    let (pb, ps) = propagated(tables, &exact.phi, &factors, e);
    Ok(MetricsReport {
        zeta: tables.zeta,
        beta0: b.beta0,
        beta: b.beta,
        sigma2: variance.sigma2,
        sigma2_status: variance.status,
        scheme: solution.scheme,
        n_used: k.saturating_sub(1),
        e_abs_input: e,
        predicted_beta0_error: pb,
        predicted_sigma2_error: ps,
        beta0_remainder_bound: b.remainder_bound,
        signed_costs: b.signed_costs,
        partial_sums: sigma2_partial_sums(phi, tables),
    })
}
