//! The forward recurrence amplifies the rounding error in `ζ` by `T_n^+`.
//!
//! Perturbing `z` by one ulp flips the sign of the blow-up.

use bdpoisson::chain::build_tables;
use bdpoisson::model::{BirthDeathModel, TruncationPolicy};
use bdpoisson::poisson::{solve_exact, solve_forward};

fn main() -> bdpoisson::error::Result<()> {
    let model = BirthDeathModel::mm1m(0.9, 1.0, 0.5)?;
    let tables = build_tables(&model, &TruncationPolicy::default())?;
    let z = model.analytic_zeta().unwrap();
    let z_up = f64::from_bits(z.to_bits() + 1);

    let exact = solve_exact(&tables, 0.0)?;
    let lo = solve_forward(&tables, z, 29, 0.0)?;
    let hi = solve_forward(&tables, z_up, 29, 0.0)?;

    println!("{:>3} {:>14} {:>14} {:>14}", "n", "exact", "z = fl(zeta)", "z + 1 ulp");
    for n in (0..=29).step_by(3) {
        println!("{n:>3} {:>14.6e} {:>14.6e} {:>14.6e}", exact.phi[n], lo.phi[n], hi.phi[n]);
    }
    Ok(())
}
