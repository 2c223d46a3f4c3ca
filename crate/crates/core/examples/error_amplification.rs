//! Predicted error factors for the three schemes next to observed errors.

use bdpoisson::chain::build_tables;
use bdpoisson::error_analysis::{forward_error_factors, mixed_error_factors, scheme_comparison};
use bdpoisson::metrics::input_error;
use bdpoisson::model::{BirthDeathModel, TruncationPolicy};
use bdpoisson::passage::PassageTables;
use bdpoisson::poisson::{solve_exact, solve_forward};

fn main() -> bdpoisson::error::Result<()> {
    let model = BirthDeathModel::mm1m(0.9, 1.0, 0.5)?;
    let tables = build_tables(&model, &TruncationPolicy::default())?;
    let passage = PassageTables::new(&tables);
    let z = model.analytic_zeta().unwrap();
    let e = input_error(&tables, z);
    println!("E_abs(fl(zeta)) = {e:e}");

    let exact = solve_exact(&tables, 0.0)?;
    let forward = solve_forward(&tables, z, 29, 0.0)?;
    let mut fwd = forward_error_factors(&tables, &passage, e, 0.0)?;
    fwd.attach_observed(&forward.phi, &exact.phi);
    let mixed = mixed_error_factors(&tables, &passage, e, 0.0)?;
    println!("divergence class: {:?}", fwd.divergence_class);

    println!("{:>3} {:>12} {:>12} {:>12} {:>12}", "n", "fwd factor", "predicted", "observed", "mixed rel");
    for (f, m) in fwd.rows.iter().zip(&mixed.rows).take(30).step_by(3) {
        println!(
            "{:>3} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}",
            f.n,
            f.abs_factor,
            f.predicted_abs_error,
            f.observed_abs_error.unwrap_or(f64::NAN),
            m.rel_factor.unwrap_or(f64::NAN)
        );
    }

    let cmp = scheme_comparison(&tables, &passage);
    println!("backward/forward phi factor ratio at n = 0, 5, 10: {:.3e} {:.3e} {:.3e}", cmp[0].phi_ratio, cmp[5].phi_ratio, cmp[10].phi_ratio);
    Ok(())
}
