//! Bias and asymptotic variance of the M/M/1+M example via the mixed scheme.

use bdpoisson::chain::build_tables;
use bdpoisson::metrics::{bias, input_error, metrics_report, truncated_metric_errors};
use bdpoisson::model::{BirthDeathModel, TruncationPolicy};
use bdpoisson::numeric::UNIT_ROUNDOFF;
use bdpoisson::passage::{boundary_functionals, PassageTables};
use bdpoisson::poisson::{default_frontier, solve_exact, solve_mixed};

fn main() -> bdpoisson::error::Result<()> {
    let model = BirthDeathModel::mm1m(0.9, 1.0, 0.5)?;
    let tables = build_tables(&model, &TruncationPolicy::default())?;
    let passage = PassageTables::new(&tables);
    let boundary = boundary_functionals(&tables, &passage)?;

    let z = model.analytic_zeta().unwrap();
    let n = default_frontier(&tables, &passage, 29)?;
    let mixed = solve_mixed(&tables, &passage, z, n, 0.0, 0.0)?;
    let report = metrics_report(&tables, &passage, &mixed)?;

    let exact = solve_exact(&tables, 0.0)?;
    let exact_bias = bias(&exact.phi, &tables);
    let exact_var = bdpoisson::metrics::asymptotic_variance(&exact.phi, &tables)?;

    println!("N = {n}, m = {:?}, M = {:?}", mixed.crossover_m, mixed.crossover_big_m);
    println!("beta0  (mixed) = {:.15}", report.beta0);
    println!("sigma2 (mixed) = {:.15}", report.sigma2);
    println!("beta0  (exact) = {:.17}", exact_bias.beta0);
    println!("sigma2 (exact) = {:.17}", exact_var.sigma2);
    println!("beta1 = {:.4}", exact_bias.beta[1]);
    println!("T_p0 = {:.4}, T_10 = {:.4}", boundary.t_p0.value(), passage.t_n0[1]);

    let e = input_error(&tables, z);
    let limits = truncated_metric_errors(&tables, &passage, &boundary, e, 1)?.mixed;
    let rel_b = (report.beta0 - exact_bias.beta0) / exact_bias.beta0.abs() / UNIT_ROUNDOFF;
    let rel_s = (report.sigma2 - exact_var.sigma2) / exact_var.sigma2 / UNIT_ROUNDOFF;
    println!("E_abs(z) = {e:e}");
    println!(
        "beta0 error: observed {rel_b:.3}u, limit prediction {:.3}u",
        limits.beta0_error / exact_bias.beta0.abs() / UNIT_ROUNDOFF
    );
    println!(
        "sigma2 error: observed {rel_s:.3}u, limit prediction {:.3}u",
        limits.sigma2_error / exact_var.sigma2 / UNIT_ROUNDOFF
    );
    Ok(())
}
