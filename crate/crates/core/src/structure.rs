//! Structural checks: the rate/cost conditions under which `φ` is
//! nondecreasing, a direct monotonicity check on computed `φ`, and the
//! chain of lemmas behind it (`Z_n` and `ΔH_n^+/ΔT_n^+` rising to `ζ`).
//!
//! Everything here is judged on a finite prefix. A condition quantified over
//! all `n` can only be refuted, never confirmed, by these checks.

use std::fmt;

use serde::Serialize;

use crate::chain::ChainTables;
use crate::error::Result;
use crate::model::BirthDeathModel;
use crate::numeric::Dd;
use crate::passage::PassageTables;

/// Default relative slack for monotonicity checks on computed values.
pub const DEFAULT_SLACK: f64 = 1e-12;

/// Units in the last place tolerated when comparing differences of rounded rates.
pub const ULP_SLACK: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Holds on every state the model defines.
    Pass,
    /// First violating index.
    Fail(usize),
    /// Holds on the inspected prefix of an unbounded model.
    HorizonLimited,
    NotApplicable,
}

impl Verdict {
    /// No violation found.
    pub fn holds(self) -> bool {
        matches!(self, Verdict::Pass | Verdict::HorizonLimited)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::Fail(n) => write!(f, "fail({n})"),
            Verdict::HorizonLimited => write!(f, "horizon-limited"),
            Verdict::NotApplicable => write!(f, "not-applicable"),
        }
    }
}

/// Comparisons on the model's rates with `d_n = μ_n - λ_n`, `d_0 = -λ_0`,
/// and backward differences `Δx_n = x_n - x_{n-1}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssumptionReport {
    /// `Δd_n >= 0` and `Δd_1 > 0`.
    pub i_a: Verdict,
    /// `Δd_{n+1} <= Δd_n`.
    pub i_b: Verdict,
    /// `c_n >= 0` and `Δc_n >= 0`.
    pub ii_a: Verdict,
    /// `Δc_{n+1} >= Δc_n`.
    pub ii_b: Verdict,
    pub horizon: usize,
    pub d: Vec<f64>,
}

impl AssumptionReport {
    pub fn holds(&self) -> bool {
        [self.i_a, self.i_b, self.ii_a, self.ii_b].iter().all(|v| v.holds())
    }
}

fn verdict(first_fail: Option<usize>, exhaustive: bool) -> Verdict {
    match first_fail {
        Some(n) => Verdict::Fail(n),
        None if exhaustive => Verdict::Pass,
        None => Verdict::HorizonLimited,
    }
}

/// Checks the four rate/cost conditions on states `0..=horizon`.
pub fn check_assumption(model: &BirthDeathModel, horizon: usize) -> Result<AssumptionReport> {
    let horizon = horizon.max(3);
    let (last, exhaustive) = match model.available_states() {
        Some(len) if len <= horizon + 1 => (len - 1, true),
        _ => (horizon, false),
    };
    let mut lam = Vec::with_capacity(last + 1);
    let mut mu = Vec::with_capacity(last + 1);
    let mut c = Vec::with_capacity(last + 1);
    for n in 0..=last {
        lam.push(model.lambda(n)?);
        mu.push(if n == 0 { 0.0 } else { model.mu(n)? });
        c.push(model.cost(n)?);
    }
    let d: Vec<f64> = (0..=last).map(|n| mu[n] - lam[n]).collect();
    // Differences of the supplied values are formed without rounding. Rates
    // such as `μ + nθ` are themselves rounded, so comparisons between
    // differences allow a few units in the last place of the values involved.
    let diff = |x: f64, y: f64| Dd::from(x) - Dd::from(y);
    let dd: Vec<Dd> = (0..=last)
        .map(|n| if n == 0 { Dd::ZERO } else { diff(mu[n], mu[n - 1]) - diff(lam[n], lam[n - 1]) })
        .collect();
    let dc: Vec<Dd> = (0..=last)
        .map(|n| if n == 0 { Dd::ZERO } else { diff(c[n], c[n - 1]) })
        .collect();
    let scale = |x: &[f64], lo: usize, hi: usize| x[lo..=hi].iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let rate_slack = |lo: usize, hi: usize| Dd::from(ULP_SLACK * f64::EPSILON * scale(&mu, lo, hi).max(scale(&lam, lo, hi)));
    let cost_slack = |lo: usize, hi: usize| Dd::from(ULP_SLACK * f64::EPSILON * scale(&c, lo, hi));
    let zero = Dd::ZERO;

    let i_a = if last >= 1 && dd[1] <= zero {
        Some(1)
    } else {
        (2..=last).find(|&n| dd[n] < -rate_slack(n - 1, n))
    };
    let i_b = (2..=last).find(|&n| dd[n] > dd[n - 1] + rate_slack(n - 2, n));
    let ii_a = (0..=last).find(|&n| c[n] < 0.0 || (n >= 1 && dc[n] < -cost_slack(n - 1, n)));
    let ii_b = (2..=last).find(|&n| dc[n] < dc[n - 1] - cost_slack(n - 2, n));

    Ok(AssumptionReport {
        i_a: verdict(i_a, exhaustive),
        i_b: verdict(i_b, exhaustive),
        ii_a: verdict(ii_a, exhaustive),
        ii_b: verdict(ii_b, exhaustive),
        horizon: last,
        d,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Convexity {
    pub is_nondecreasing: bool,
    /// Smallest `n` with `φ_n < φ_{n-1} - tol max(1, |φ_{n-1}|)`.
    pub first_violation: Option<usize>,
}

/// Whether `φ` is nondecreasing, i.e. `b` is convex.
pub fn verify_convexity(phi: &[f64], tol: f64) -> Convexity {
    let first_violation = (1..phi.len()).find(|&n| phi[n] < phi[n - 1] - tol * phi[n - 1].abs().max(1.0));
    Convexity {
        is_nondecreasing: first_violation.is_none(),
        first_violation,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AppendixReport {
    /// `Z_n = C_n / P_n` nondecreasing.
    pub z_monotone: Verdict,
    /// `ΔT_n^+ > 0`.
    pub delta_t_positive: Verdict,
    /// `r_n = ΔH_n^+ / ΔT_n^+` nondecreasing.
    pub ratio_monotone: Verdict,
    /// `r_n <= ζ`.
    pub ratio_below_zeta: Verdict,
    /// `r_n` closer to `ζ` at the end of the tables than halfway.
    pub ratio_approaches_zeta: Verdict,
    /// `Z_n <= r_n`.
    pub mediant_sandwich: Verdict,
}

/// `r_n = ΔH_n^+ / ΔT_n^+` for `n >= 1`; `r[0]` is NaN.
pub fn passage_ratio(passage: &PassageTables) -> Vec<f64> {
    let mut r = vec![f64::NAN; passage.len()];
    for n in 1..passage.len() {
        r[n] = (passage.h_up[n] - passage.h_up[n - 1]) / (passage.t_up[n] - passage.t_up[n - 1]);
    }
    r
}

fn rises(a: f64, b: f64, slack: f64) -> bool {
    b >= a - slack * a.abs().max(b.abs())
}

/// Lemma diagnostics with [`DEFAULT_SLACK`] relative slack, gated on `assumption`.
pub fn appendix_diagnostics(tables: &ChainTables, passage: &PassageTables, assumption: &AssumptionReport) -> AppendixReport {
    if !assumption.holds() {
        let na = Verdict::NotApplicable;
        return AppendixReport {
            z_monotone: na,
            delta_t_positive: na,
            ratio_monotone: na,
            ratio_below_zeta: na,
            ratio_approaches_zeta: na,
            mediant_sandwich: na,
        };
    }
    let s = DEFAULT_SLACK;
    let zeta = tables.zeta;
    let r = passage_ratio(passage);
    // Stop where T^+ leaves the binary64 range.
    let last = (1..passage.len())
        .take_while(|&n| passage.t_up[n].is_finite() && passage.h_up[n].is_finite())
        .last()
        .unwrap_or(0);
    let exhaustive = tables.model().available_states() == Some(last + 1);
    let v = |f: Option<usize>| verdict(f, exhaustive);

    let z_fail = (1..=last).find(|&n| !rises(tables.z[n - 1], tables.z[n], s));
    let dt_fail = (1..=last).find(|&n| passage.t_up[n] - passage.t_up[n - 1] <= 0.0);
    let rm_fail = (2..=last).find(|&n| !rises(r[n - 1], r[n], s));
    let rz_fail = (1..=last).find(|&n| r[n] > zeta + s * zeta.abs());
    let sandwich = (1..=last).find(|&n| !rises(tables.z[n], r[n], s));
    let approach = if last < 2 {
        Verdict::NotApplicable
    } else {
        let (end, mid) = ((r[last] - zeta).abs(), (r[last / 2] - zeta).abs());
        // Both residuals can already be at rounding level.
        v((end > mid && end > s * zeta.abs()).then_some(last))
    };
    AppendixReport {
        z_monotone: v(z_fail),
        delta_t_positive: v(dt_fail),
        ratio_monotone: v(rm_fail),
        ratio_below_zeta: v(rz_fail),
        ratio_approaches_zeta: approach,
        mediant_sandwich: v(sandwich),
    }
}

/// One line of the structure table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StructureRow {
    pub n: usize,
    pub d: f64,
    pub delta_d: f64,
    pub delta_c: f64,
    pub phi: f64,
    pub delta_phi: f64,
    pub ratio: f64,
}

/// Rows `(n, d_n, Δd_n, Δc_n, φ_n, Δφ_n, r_n)`; differences are NaN at `n = 0`.
pub fn structure_rows(tables: &ChainTables, passage: &PassageTables, phi: &[f64]) -> Vec<StructureRow> {
    let r = passage_ratio(passage);
    let k = phi.len().min(tables.len());
    let d: Vec<f64> = (0..k).map(|n| tables.mu[n] - tables.lambda[n]).collect();
    (0..k)
        .map(|n| {
            let diff = |x: &[f64]| if n == 0 { f64::NAN } else { x[n] - x[n - 1] };
            StructureRow {
                n,
                d: d[n],
                delta_d: diff(&d),
                delta_c: diff(&tables.cost),
                phi: phi[n],
                delta_phi: diff(phi),
                ratio: r[n],
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureReport {
    pub assumption: AssumptionReport,
    pub convexity: Convexity,
    pub appendix: AppendixReport,
}

/// All three checks, with convexity judged on `phi`.
pub fn structure_report(
    tables: &ChainTables,
    passage: &PassageTables,
    phi: &[f64],
    horizon: usize,
    tol: f64,
) -> Result<StructureReport> {
    let assumption = check_assumption(tables.model(), horizon)?;
    let appendix = appendix_diagnostics(tables, passage, &assumption);
    Ok(StructureReport {
        assumption,
        convexity: verify_convexity(phi, tol),
        appendix,
    })
}
