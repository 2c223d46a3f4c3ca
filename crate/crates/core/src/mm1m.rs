//! Closed forms for the M/M/1+M queue with abandonment cost.
//!
//! With `α = μ/θ`, `κ = λ/θ` and the series
//! `S(a) = Σ_k κ^k / (a (a+1) ... (a+k))`, so that `γ(a, κ) = κ^a e^{-κ} S(a)`:
//!
//! * `p_n = t_n / S(α)` where `t_n = κ^n / (α (α+1) ... (α+n))` is the n-th term of `S(α)`,
//! * `P̄_n = κ p_n S(α+n+1)`,
//! * `ζ = λ - μ + θ / S(α)`,
//! * `φ_n = 1 - S(α+n+1) / S(α)`.
//!
//! The series are summed in double-double, so ζ and φ come out correctly
//! rounded in practice. For `κ` beyond [`SERIES_KAPPA_MAX`] the terms overflow
//! and the log-gamma / incomplete-gamma route is used instead.

use crate::error::{Error, Result};
use crate::gamma::{lgamma, prefix, reg_gamma};
use crate::numeric::Dd;

/// Largest `κ` for which the direct series is used.
pub const SERIES_KAPPA_MAX: f64 = 600.0;

/// Rates of the M/M/1+M queue.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mm1mParams {
    pub lambda: f64,
    pub mu: f64,
    pub theta: f64,
}

impl Mm1mParams {
    pub fn new(lambda: f64, mu: f64, theta: f64) -> Result<Self> {
        let p = Mm1mParams { lambda, mu, theta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda", self.lambda), ("mu", self.mu), ("theta", self.theta)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::DomainError(format!("{name} = {v} must be positive and finite")));
            }
        }
        let (a, k) = (self.alpha(), self.kappa());
        if !a.is_finite() || !k.is_finite() || !(a > 0.0) || !(k > 0.0) {
            return Err(Error::DomainError(format!("alpha = {a}, kappa = {k}")));
        }
        Ok(())
    }

    /// `μ / θ`.
    pub fn alpha(&self) -> f64 {
        self.mu / self.theta
    }

    /// `λ / θ`.
    pub fn kappa(&self) -> f64 {
        self.lambda / self.theta
    }

    fn use_series(&self) -> bool {
        self.kappa() <= SERIES_KAPPA_MAX
    }
}

/// `S(a)` in double-double.
fn series(a: f64, kappa: f64) -> Dd {
    let mut term = Dd::ONE / Dd::from(a);
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term = term.mul_f64(kappa) / (Dd::from(a) + k);
        sum += term;
        if term.hi() < sum.hi() * 1e-34 || term.hi() == 0.0 {
            return sum;
        }
        k += 1.0;
    }
}

/// `ln 𝒫(a, κ)`.
fn ln_reg_lower(a: f64, kappa: f64) -> Result<f64> {
    let (p, _) = reg_gamma(a, kappa)?;
    if p > 0.0 {
        Ok(p.ln())
    } else {
        Err(Error::DomainError(format!("P({a}, {kappa}) underflows")))
    }
}

/// Steady-state probability `p_n`.
pub fn analytic_steady(params: &Mm1mParams, n: usize) -> Result<f64> {
    params.validate()?;
    let (a, k) = (params.alpha(), params.kappa());
    if params.use_series() {
        let mut t = Dd::ONE / Dd::from(a);
        for j in 1..=n {
            t = t.mul_f64(k) / (Dd::from(a) + j as f64);
        }
        Ok((t / series(a, k)).to_f64())
    } else {
        let an = a + n as f64;
        let ln_p = -k + an * k.ln() - lgamma(an + 1.0)? - ln_reg_lower(a, k)? - lgamma(a)?;
        Ok(ln_p.exp())
    }
}

/// Cumulative probabilities `(P_n, P̄_n)` with `P̄_n = 1 - P_n` formed without cancellation.
pub fn analytic_cumulative(params: &Mm1mParams, n: usize) -> Result<(f64, f64)> {
    params.validate()?;
    let (a, k) = (params.alpha(), params.kappa());
    if params.use_series() {
        let s = series(a, k);
        let mut t = Dd::ONE / Dd::from(a);
        for j in 1..=n {
            t = t.mul_f64(k) / (Dd::from(a) + j as f64);
        }
        let tail = (t * series(a + n as f64 + 1.0, k)).mul_f64(k) / s;
        Ok(((Dd::ONE - tail).to_f64(), tail.to_f64()))
    } else {
        let (num, _) = reg_gamma(a + n as f64 + 1.0, k)?;
        let (den, _) = reg_gamma(a, k)?;
        let tail = num / den;
        Ok((1.0 - tail, tail))
    }
}

/// Mean steady-state cost `ζ = λ - μ + θ κ^α e^{-κ} / γ(α, κ)`.
pub fn analytic_zeta(params: &Mm1mParams) -> Result<f64> {
    Ok(analytic_zeta_dd(params)?.to_f64())
}

pub(crate) fn analytic_zeta_dd(params: &Mm1mParams) -> Result<Dd> {
    params.validate()?;
    let (a, k) = (params.alpha(), params.kappa());
    let base = Dd::from(params.lambda) - Dd::from(params.mu);
    if params.use_series() {
        Ok(base + Dd::from(params.theta) / series(a, k))
    } else {
        let (p, _) = reg_gamma(a, k)?;
        Ok(base + params.theta * prefix(a, k)? / p)
    }
}

/// Marginal relative cost `φ_n = 1 - γ(α+n+1, κ) / (γ(α, κ) κ^{n+1})`.
pub fn analytic_phi(params: &Mm1mParams, n: usize) -> Result<f64> {
    params.validate()?;
    let (a, k) = (params.alpha(), params.kappa());
    if params.use_series() {
        let r = series(a + n as f64 + 1.0, k) / series(a, k);
        Ok((Dd::ONE - r).to_f64())
    } else {
        let an = a + n as f64 + 1.0;
        let ln_r = ln_reg_lower(an, k)? - ln_reg_lower(a, k)? + lgamma(an)? - lgamma(a)?
            - (n as f64 + 1.0) * k.ln();
        Ok(-ln_r.exp_m1())
    }
}
