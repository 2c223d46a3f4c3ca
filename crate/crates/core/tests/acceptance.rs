//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Exits nonzero on any failure outside the expected-failure list, and on any
//! listed criterion that starts passing.

mod common;

use std::time::Instant;

use bdpoisson::chain::{build_tables, perturbation_step, ChainTables, ZetaMode};
use bdpoisson::error_analysis::mixed_error_factors;
use bdpoisson::gamma::reg_gamma;
use bdpoisson::metrics::{input_error, metrics_report, sigma2_partial_sums};
use bdpoisson::mm1m::{analytic_zeta, Mm1mParams};
use bdpoisson::model::{BirthDeathModel, TruncationPolicy};
use bdpoisson::numeric::{agrees_to_sig, fmt_sig, UNIT_ROUNDOFF};
use bdpoisson::passage::{boundary_functionals, PassageTables};
use bdpoisson::poisson::{
    backward_recurrence, crossover_big_m, crossover_m, forward_recurrence, solve_exact, solve_forward, solve_mixed,
};
use bdpoisson::structure::{appendix_diagnostics, check_assumption, verify_convexity};
use common::{q, qf, qi, rel_diff, to_f64, ExactChain, Q};
use num_traits::{Signed, Zero};

// Forward-scheme reference values, n = 0..29.
const T1_P: [&str; 30] = [
    "5.0e-1", "3.0e-1", "1.4e-1", "4.9e-2", "1.5e-2", "3.7e-3", "8.4e-4", "1.7e-4", "3.0e-5", "5.0e-6", "7.4e-7",
    "1.0e-7", "1.3e-8", "1.6e-9", "1.8e-10", "1.9e-11", "1.9e-12", "1.8e-13", "1.6e-14", "1.4e-15", "1.1e-16",
    "8.9e-18", "6.6e-19", "4.8e-20", "3.3e-21", "2.2e-22", "1.4e-23", "8.8e-25", "5.3e-26", "3.1e-27",
];
const T1_HAT: [&str; 30] = [
    "0.44279513", "0.62523145", "0.72108723", "0.77914855", "0.81773474", "0.84509690", "0.86544800", "0.88114626",
    "0.89360768", "0.90373094", "0.91211248", "0.91916304", "0.92517434", "0.93035909", "0.93487590", "0.9388453",
    "0.9423595", "0.9454791", "0.9481179", "0.9486149", "0.9258667", "0.6066468", "-3.7e0", "-6.4e1", "-9.3e2",
    "-1.4e4", "-2.2e5", "-3.5e6", "-5.8e7", "-1.0e9",
];
const T1_TILDE: [&str; 30] = [
    "0.44279513", "0.62523145", "0.72108723", "0.77914855", "0.81773474", "0.84509690", "0.86544800", "0.88114626",
    "0.89360768", "0.90373094", "0.91211248", "0.91916304", "0.92517435", "0.93035915", "0.93487647", "0.9388507",
    "0.9424134", "0.9460477", "0.9544357", "1.0223229", "1.8267420", "1.2e1", "1.5e2", "2.1e3", "3.0e4", "4.5e5",
    "7.0e6", "1.1e8", "1.9e9", "3.2e10",
];

// Mixed-scheme reference values, n = 12..29.
const T2_PHI: [&str; 18] = [
    "0.925174342237504", "0.930359089413224", "0.934875921107126", "0.938845492334662", "0.942361160780650",
    "0.945496267896444", "0.948309214061184", "0.950847068147842", "0.953148181463212", "0.955244111686174",
    "0.957161059916347", "0.958920958494403", "0.960542304575400", "0.962040806065022", "0.963429887334373",
    "0.964721088932251", "0.965924386304869", "0.967048446017873",
];
const T2_REL: [&str; 18] = [
    "6.47e-2", "6.00e-2", "5.57e-2", "5.21e-2", "4.89e-2", "4.61e-2", "4.36e-2", "4.13e-2", "3.93e-2", "3.75e-2",
    "3.58e-2", "3.42e-2", "3.28e-2", "3.15e-2", "3.03e-2", "2.92e-2", "2.82e-2", "2.72e-2",
];
const T2_TDOWN: [&str; 18] = [
    "0.150", "0.140", "0.131", "0.123", "0.116", "0.109", "0.104", "0.099", "0.094", "0.090", "0.086", "0.082", "0.079",
    "0.076", "0.073", "0.071", "0.068", "0.066",
];
const T2_TUP: [&str; 18] = [
    "8.4e7", "7.0e8", "6.2e9", "5.9e10", "5.9e11", "6.2e12", "6.9e13", "8.4e14", "9.8e15", "1.3e17", "1.7e18", "2.3e19",
    "3.4e20", "5.0e21", "7.8e22", "1.3e24", "2.1e25", "3.6e26",
];

/// Significant digits printed in a decimal string.
fn printed_digits(s: &str) -> i32 {
    let mantissa = s.split(['e', 'E']).next().unwrap();
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    digits.trim_start_matches('0').len().max(1) as i32
}

/// Agreement with a printed reference to within one unit of its last digit.
fn matches_printed(x: f64, s: &str) -> bool {
    agrees_to_sig(x, s.parse().unwrap(), printed_digits(s))
}

fn example_tables() -> (BirthDeathModel, ChainTables, PassageTables) {
    let model = BirthDeathModel::mm1m(0.9, 1.0, 0.5).unwrap();
    let tables = build_tables(&model, &TruncationPolicy::default()).unwrap();
    let passage = PassageTables::new(&tables);
    (model, tables, passage)
}

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn criterion1() -> Outcome {
    let p = Mm1mParams::new(0.9, 1.0, 0.5).unwrap();
    let z = analytic_zeta(&p).unwrap();
    let reps = 1000;
    let start = Instant::now();
    for _ in 0..reps {
        std::hint::black_box(analytic_zeta(std::hint::black_box(&p)).unwrap());
    }
    let per_call = start.elapsed().as_secs_f64() / reps as f64;
    let digits_ok = fmt_sig(z, 15) == fmt_sig(0.398515613690624, 15);
    (
        digits_ok && per_call < 1e-3,
        format!("zeta = {z:.17}, {:.1} us per call", per_call * 1e6),
    )
}

fn criterion2() -> Outcome {
    let (model, tables, _) = example_tables();
    let z = model.analytic_zeta().unwrap();
    let zp = tables.mean_cost(ZetaMode::Perturbed(1)).unwrap();
    let hat = solve_forward(&tables, z, 29, 0.0).unwrap();
    let tilde = solve_forward(&tables, zp, 29, 0.0).unwrap();
    let mut misses = Vec::new();
    for n in 0..30 {
        if !matches_printed(tables.p[n], T1_P[n]) {
            misses.push(format!("p{n}"));
        }
        if !matches_printed(hat.phi[n], T1_HAT[n]) {
            misses.push(format!("hat{n}={}", hat.phi[n]));
        }
        if !matches_printed(tilde.phi[n], T1_TILDE[n]) {
            misses.push(format!("tilde{n}={}", tilde.phi[n]));
        }
    }
    (
        misses.is_empty() && zp - z == perturbation_step(z),
        format!(
            "90 entries, misses {misses:?}; phi_hat22 = {:.3}, phi_hat29 = {:.3e}, phi_tilde29 = {:.3e}",
            hat.phi[22], hat.phi[29], tilde.phi[29]
        ),
    )
}

fn criterion3() -> Outcome {
    let (model, tables, passage) = example_tables();
    let z = model.analytic_zeta().unwrap();
    let mixed = solve_mixed(&tables, &passage, z, 42, 0.0, 0.0).unwrap();
    let factors = mixed_error_factors(&tables, &passage, input_error(&tables, z), 0.0).unwrap();
    let c = ExactChain::example(90);
    let oracle = c.phi();
    let mut misses = Vec::new();
    // Misses where the computed value agrees with the exact oracle instead.
    let mut oracle_backed = 0;
    let mut check = |name: &str, n: usize, x: f64, printed: &str, exact: &Q| {
        if !matches_printed(x, printed) {
            let backed = x.is_finite() && rel_diff(&qf(x), exact) < 1e-12;
            oracle_backed += backed as usize;
            misses.push(format!("{name}{n}: computed {x:.4e}, printed {printed}, oracle agrees: {backed}"));
        }
    };
    for (i, n) in (12..=29).enumerate() {
        let phi_ok = agrees_to_sig(mixed.phi[n], to_f64(&oracle[n]), 15);
        check("phi", n, if phi_ok { mixed.phi[n] } else { f64::NAN }, T2_PHI[i], &oracle[n]);
        // Printed as magnitudes; the signed factor is negative above the crossover.
        let rel = factors.rows[n].rel_factor.unwrap_or(f64::NAN).abs();
        check("rel", n, rel, T2_REL[i], &(&c.zeta * &c.t_down[n] / &oracle[n]));
        check("t_down", n, passage.t_down[n], T2_TDOWN[i], &c.t_down[n]);
        check("t_up", n, passage.t_up[n], T2_TUP[i], &c.t_up[n]);
    }
    (
        misses.is_empty(),
        format!("{} of 72 entries match; {oracle_backed} misses confirmed by the exact oracle {misses:?}", 72 - misses.len()),
    )
}

fn criterion4() -> Outcome {
    let (model, tables, passage) = example_tables();
    let z = model.analytic_zeta().unwrap();
    let mixed = solve_mixed(&tables, &passage, z, 42, 0.0, 0.0).unwrap();
    let r = metrics_report(&tables, &passage, &mixed).unwrap();
    let bf = boundary_functionals(&tables, &passage).unwrap();

    let oracle = ExactChain::example(90);
    let phi = oracle.phi();
    let beta = oracle.beta(&phi);
    let sigma2 = oracle.sigma2(&phi);
    let e_beta = rel_diff(&qf(r.beta0), &beta[0]) / UNIT_ROUNDOFF;
    let e_sigma = rel_diff(&qf(r.sigma2), &sigma2) / UNIT_ROUNDOFF;

    let checks = [
        ("beta0", matches_printed(r.beta0, "-0.417521221604055")),
        ("sigma2", matches_printed(r.sigma2, "0.589053281069282")),
        ("t_p0", matches_printed(bf.t_p0.value(), "0.761")),
        ("t_10", matches_printed(passage.t_n0[1], "1.117")),
        ("beta1", matches_printed(r.beta[1], "0.025")),
        ("beta0_err", e_beta <= 10.0 * 0.34),
        ("sigma2_err", e_sigma <= 10.0 * 0.07),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    (
        failed.is_empty(),
        format!(
            "beta0 = {:.17}, sigma2 = {:.17}, T_p0 = {:.4}, T_10 = {:.4}, beta1 = {:.4}, errors {e_beta:.3}u and {e_sigma:.3}u; failed {failed:?}",
            r.beta0,
            r.sigma2,
            bf.t_p0.value(),
            passage.t_n0[1],
            r.beta[1]
        ),
    )
}

/// Largest relative residual of the identity suite on one exact chain.
fn identity_residual(c: &ExactChain, nmax: usize, e: &Q) -> f64 {
    let mut worst: f64 = 0.0;
    let mut track = |a: &Q, b: &Q| worst = worst.max(rel_diff(a, b));
    let phi = c.phi();
    for n in 0..=nmax {
        let flow = c.flow(n);
        track(&(&c.t_up[n] * &flow), &c.p_cum[n]);
        track(&(&c.t_down[n] * &flow), &c.p_bar[n]);
        track(&(&c.p_cum[n] * &c.t_down[n]), &(&c.p_bar[n] * &c.t_up[n]));
        let up = (&c.h_up[n] + &c.h_down[n]) / (&c.t_up[n] + &c.t_down[n]);
        track(&up, &c.zeta);
        if n > 0 {
            let agg = (&c.h_0n[n] + &c.h_n0[n]) / (&c.t_0n[n] + &c.t_n0[n]);
            track(&agg, &c.zeta);
        }
    }
    // Affinity in z of the forward recurrence.
    let z1 = &c.zeta + e;
    let z2 = &c.zeta - e * qi(3);
    let f1 = forward_recurrence(&c.lambda, &c.mu, &c.cost, &z1, nmax);
    let f2 = forward_recurrence(&c.lambda, &c.mu, &c.cost, &z2, nmax);
    for n in 0..=nmax {
        track(&(&f1[n] - &f2[n]), &(&c.t_up[n] * (&z1 - &z2)));
    }
    // Backward aggregate identity at a frontier N with an arbitrary seed.
    let big_n = nmax + 5;
    let seed = q(7, 3);
    let fb = backward_recurrence(&c.lambda, &c.mu, &c.cost, &z1, big_n, seed.clone());
    for n in 0..=big_n {
        let mut rhs = &c.flow(big_n) * &seed;
        for j in n + 1..=big_n {
            rhs += &c.cost[j] * &c.p[j] - &z1 * &c.p[j];
        }
        track(&(c.flow(n) * &fb[n]), &rhs);
    }
    // Forward decompositions of the truncated bias and variance.
    let fhat = forward_recurrence(&c.lambda, &c.mu, &c.cost, &z1, nmax);
    for big in [nmax / 2, nmax] {
        let (mut b_hat, mut b_ex, mut b_pred) = (Q::zero(), Q::zero(), Q::zero());
        let (mut s_hat, mut s_ex, mut s1, mut s2) = (Q::zero(), Q::zero(), Q::zero(), Q::zero());
        for n in 0..=big {
            b_hat -= &c.p_bar[n] * &fhat[n];
            b_ex -= &c.p_bar[n] * &phi[n];
            b_pred -= e * &c.p_bar[n] * &c.t_up[n];
            s_hat += qi(2) * c.flow(n) * &fhat[n] * &fhat[n];
            s_ex += qi(2) * c.flow(n) * &phi[n] * &phi[n];
            s1 += &c.p_cum[n] * &phi[n];
            s2 += &c.p_cum[n] * &c.t_up[n];
        }
        track(&(&b_hat - &b_ex), &b_pred);
        track(&s_hat, &(s_ex + qi(4) * e * s1 + qi(2) * e * e * s2));
    }
    worst
}

fn criterion5() -> Outcome {
    let example = ExactChain::example(90);
    let mm1 = ExactChain::mm1(160);
    let e = qf(1e-17);
    let r1 = identity_residual(&example, 30, &e);
    let r2 = identity_residual(&mm1, 30, &e);
    (
        r1 <= 1e-25 && r2 <= 1e-25,
        format!("worst relative residual {r1:e} (M/M/1+M), {r2:e} (M/M/1), exact rational arithmetic"),
    )
}

fn criterion6() -> Outcome {
    let (model, tables, passage) = example_tables();
    let mut notes = Vec::new();

    // Forward law in binary64 with an input error large enough to dominate rounding.
    let z = model.analytic_zeta().unwrap() + 2f64.powi(-10);
    let e = input_error(&tables, z);
    let hat = solve_forward(&tables, z, 20, 0.0).unwrap();
    let exact = solve_exact(&tables, 0.0).unwrap();
    let fwd = (0..=20)
        .map(|n| ((hat.phi[n] - exact.phi[n]) - passage.t_up[n] * e).abs() / (passage.t_up[n] * e).abs())
        .fold(0.0f64, f64::max);
    notes.push(format!("forward law {fwd:.1e}"));

    // Backward finite-N error identity, exact.
    let c = ExactChain::example(90);
    let phi = c.phi();
    let big_n = 40;
    let ez = qf(1e-16);
    let zhat = &c.zeta + &ez;
    let seed = q(1, 5);
    let fb = backward_recurrence(&c.lambda, &c.mu, &c.cost, &zhat, big_n, seed.clone());
    let seed_err = &seed - &phi[big_n];
    let mut bwd: f64 = 0.0;
    let mut b_err = Q::zero();
    let (mut inv, mut wsum) = (Q::zero(), Q::zero());
    for n in 0..big_n {
        let lhs = c.flow(n) * (&fb[n] - &phi[n]);
        let rhs = c.flow(big_n) * &seed_err - (&c.p_cum[big_n] - &c.p_cum[n]) * &ez;
        bwd = bwd.max(rel_diff(&lhs, &rhs));
        b_err += &fb[n] - &phi[n];
        inv += Q::from_integer(1.into()) / c.flow(n);
        wsum += (&c.p_cum[big_n] - &c.p_cum[n]) / c.flow(n);
        let pred = c.flow(big_n) * &seed_err * &inv - &ez * &wsum;
        bwd = bwd.max(rel_diff(&b_err, &pred));
    }
    notes.push(format!("backward identity {bwd:e}"));

    // Mixed factor magnitude.
    let f = mixed_error_factors(&tables, &passage, 1.0, 0.0).unwrap();
    let mixed_ok = f
        .rows
        .iter()
        .all(|r| r.abs_factor.abs() == passage.t_up[r.n].min(passage.t_down[r.n]));
    notes.push(format!("mixed |A_n| = min over {} rows: {mixed_ok}", f.rows.len()));

    // m <= M on random presets satisfying the assumption.
    let mut checked = 0;
    let mut order_ok = true;
    for m in common::random_presets(6, 400) {
        if checked == 100 {
            break;
        }
        if !check_assumption(&m, 200).unwrap().holds() {
            continue;
        }
        let t = build_tables(&m, &TruncationPolicy::default()).unwrap();
        let p = PassageTables::new(&t);
        if let Some(big_m) = crossover_big_m(&p) {
            order_ok &= crossover_m(&t) <= big_m;
        }
        checked += 1;
    }
    notes.push(format!("m <= M on {checked} presets: {order_ok}"));

    (
        fwd <= 1e-12 && bwd <= 1e-25 && mixed_ok && order_ok && checked == 100,
        notes.join("; "),
    )
}

fn criterion7() -> Outcome {
    let mut checked = 0;
    let mut failures = Vec::new();
    for (i, m) in common::random_presets(7, 400).into_iter().enumerate() {
        if checked == 100 {
            break;
        }
        let a = check_assumption(&m, 200).unwrap();
        if !a.holds() {
            continue;
        }
        checked += 1;
        let t = build_tables(&m, &TruncationPolicy::default()).unwrap();
        let p = PassageTables::new(&t);
        let exact = solve_exact(&t, 0.0).unwrap();
        let upto = t.n_star.min(200);
        let conv = verify_convexity(&exact.phi[..=upto], 1e-12);
        let x = appendix_diagnostics(&t, &p, &a);
        let lemmas = [
            x.z_monotone,
            x.delta_t_positive,
            x.ratio_monotone,
            x.ratio_below_zeta,
            x.ratio_approaches_zeta,
        ];
        if !conv.is_nondecreasing || !lemmas.iter().all(|v| v.holds()) {
            failures.push(format!("preset {i}: {:?} {:?}", conv.first_violation, x));
        }
    }
    (
        checked == 100 && failures.is_empty(),
        format!("{checked} presets, failures {failures:?}"),
    )
}

fn criterion8() -> Outcome {
    let (model, tables, _) = example_tables();
    let z = model.analytic_zeta().unwrap();
    let exact = solve_exact(&tables, 0.0).unwrap();
    let sigma2 = bdpoisson::metrics::asymptotic_variance(&exact.phi, &tables).unwrap().sigma2;
    let hat = solve_forward(&tables, z, tables.n_star, 0.0).unwrap();
    let partial = sigma2_partial_sums(&hat.phi, &tables);
    let blowup = partial.iter().position(|&s| s > 10.0 * sigma2);

    let frontier = 29;
    let mut signs = Vec::new();
    for k in [-1i64, 1] {
        let zk = tables.mean_cost(ZetaMode::Perturbed(k)).unwrap();
        let e = input_error(&tables, zk);
        let f = solve_forward(&tables, zk, frontier, 0.0).unwrap();
        signs.push((f.phi[frontier] - exact.phi[frontier]).signum() == e.signum() && e != 0.0);
    }
    // Same law in exact arithmetic.
    let c = ExactChain::example(90);
    let phi = c.phi();
    let mut exact_signs = true;
    for e in [qf(-1e-17), qf(1e-17)] {
        let f = forward_recurrence(&c.lambda, &c.mu, &c.cost, &(&c.zeta + &e), frontier);
        exact_signs &= (&f[frontier] - &phi[frontier]).signum() == e.signum();
    }
    (
        blowup.is_some_and(|n| n < tables.n_star) && signs.iter().all(|&s| s) && exact_signs,
        format!(
            "sigma2 = {sigma2:.6}, forward partial sum passes 10x at N = {blowup:?} (n_star = {}); sign law {signs:?}, exact {exact_signs}",
            tables.n_star
        ),
    )
}

fn criterion9() -> Outcome {
    let model = BirthDeathModel::mm1(1.0, 2.0).unwrap();
    let tables = build_tables(&model, &TruncationPolicy::default()).unwrap();
    let exact = solve_exact(&tables, 0.0).unwrap();
    // Oracle check: T_n^+ (ζ - Z_n) equals n + 1 on a long truncated chain.
    let c = ExactChain::mm1(240);
    let mut oracle: f64 = 0.0;
    let mut lib: f64 = 0.0;
    for n in 0..=50 {
        let z_n = &c.c_cum[n] / &c.p_cum[n];
        let v = &c.t_up[n] * (&c.zeta - z_n);
        oracle = oracle.max(rel_diff(&v, &qi(n + 1)));
        let want = (n + 1) as f64;
        lib = lib.max((exact.phi[n] - want).abs() / want);
    }
    (
        oracle < 1e-25 && lib <= 1e-12,
        format!("oracle residual {oracle:e}, library max relative error {lib:e} over n <= 50"),
    )
}

fn criterion10() -> Outcome {
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    let mut worst: f64 = 0.0;
    let (p11, _) = reg_gamma(1.0, 1.0).unwrap();
    worst = worst.max(rel(p11, 1.0 - (-1.0f64).exp()));
    let mut zero_ok = true;
    for a in [0.1, 0.5, 1.0, 7.5, 300.0] {
        let (p, qq) = reg_gamma(a, 0.0).unwrap();
        zero_ok &= p == 0.0 && qq == 1.0;
    }
    // P(1/2, x²) = erf(x).
    for (x, erf) in [
        (0.5, 0.520_499_877_813_046_5),
        (1.0, 0.842_700_792_949_714_9),
        (2.0, 0.995_322_265_018_952_7),
    ] {
        worst = worst.max(rel(reg_gamma(0.5, x * x).unwrap().0, erf));
    }
    // Q(1, x) = e^{-x}, through the continued fraction.
    for x in [2.5, 5.0, 20.0] {
        worst = worst.max(rel(reg_gamma(1.0, x).unwrap().1, (-x).exp()));
    }
    let mut sum_ulps: f64 = 0.0;
    for i in 0..10 {
        for j in 0..10 {
            let a = 0.1 * 1.9f64.powi(i);
            let x = 0.05 * 2.1f64.powi(j);
            let (p, qq) = reg_gamma(a, x).unwrap();
            sum_ulps = sum_ulps.max(((p + qq) - 1.0).abs() / f64::EPSILON);
        }
    }
    (
        worst <= 1e-15 && zero_ok && sum_ulps <= 2.0,
        format!("worst relative error {worst:e}, P(a,0) exact {zero_ok}, max |P+Q-1| = {sum_ulps} ulps"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("zeta reproduction", criterion1),
        ("first table (forward scheme)", criterion2),
        ("second table (mixed scheme)", criterion3),
        ("example metrics", criterion4),
        ("identity suite", criterion5),
        ("error laws", criterion6),
        ("nondecreasing phi", criterion7),
        ("forward divergence", criterion8),
        ("M/M/1 closed form", criterion9),
        ("incomplete gamma", criterion10),
    ];
    // Criteria whose printed reference values cannot all be met, with the reason.
    let known_red: &[(usize, &str)] = &[(
        3,
        "two printed entries disagree with the exact values and with the neighbouring printed entries",
    )];
    let mut unexpected = 0;
    let mut passed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (ok, detail) = f();
        let known = known_red.iter().find(|k| k.0 == i + 1);
        println!("{} criterion {} ({name}): {detail}", if ok { "PASS" } else { "FAIL" }, i + 1);
        match (ok, known) {
            (true, None) => passed += 1,
            (false, Some((_, why))) => println!("     expected failure: {why}"),
            (true, Some(_)) => {
                println!("     listed as an expected failure but passed; update the list");
                unexpected += 1;
            }
            (false, None) => unexpected += 1,
        }
    }
    println!("acceptance: {passed} of {} criteria pass", criteria.len());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
