//! Forward below the crossover `m`, backward from the frontier above it.

use bdpoisson::chain::build_tables;
use bdpoisson::model::{BirthDeathModel, TruncationPolicy};
use bdpoisson::passage::PassageTables;
use bdpoisson::poisson::{default_frontier, solve_backward, solve_exact, solve_mixed};

fn main() -> bdpoisson::error::Result<()> {
    let model = BirthDeathModel::mm1m(0.9, 1.0, 0.5)?;
    let tables = build_tables(&model, &TruncationPolicy::default())?;
    let passage = PassageTables::new(&tables);
    let z = model.analytic_zeta().unwrap();

    let n = default_frontier(&tables, &passage, 29)?;
    let mixed = solve_mixed(&tables, &passage, z, n, 0.0, 0.0)?;
    let backward = solve_backward(&tables, z, n, 0.0, 0.0)?;
    let exact = solve_exact(&tables, 0.0)?;
    println!("N = {n}, m = {:?}, M = {:?}", mixed.crossover_m, mixed.crossover_big_m);

    println!("{:>3} {:>22} {:>12} {:>12}", "n", "phi (mixed)", "rel mixed", "rel backward");
    for k in 0..=29 {
        let rel = |x: f64| (x - exact.phi[k]).abs() / exact.phi[k].abs();
        println!("{k:>3} {:>22.15e} {:>12.2e} {:>12.2e}", mixed.phi[k], rel(mixed.phi[k]), rel(backward.phi[k]));
    }
    Ok(())
}
