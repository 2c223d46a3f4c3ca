//! Steady-state tables for the M/M/1+M example, checked against the
//! incomplete-gamma closed form.

use bdpoisson::chain::{build_tables, ZetaMode};
use bdpoisson::mm1m::{analytic_steady, analytic_zeta, Mm1mParams};
use bdpoisson::model::{BirthDeathModel, TruncationPolicy};

fn main() -> bdpoisson::error::Result<()> {
    let model = BirthDeathModel::mm1m(0.9, 1.0, 0.5)?;
    let tables = build_tables(&model, &TruncationPolicy::default())?;
    let params = Mm1mParams::new(0.9, 1.0, 0.5)?;

    println!("frontier n* = {}, guard = {}", tables.n_star, tables.guard);
    println!("ergodicity: {:?}", tables.ergodicity);
    println!("{:>3} {:>24} {:>24} {:>24}", "n", "p_n", "closed form", "P_bar_n");
    for n in 0..=10 {
        println!(
            "{n:>3} {:>24.17e} {:>24.17e} {:>24.17e}",
            tables.p[n],
            analytic_steady(&params, n)?,
            tables.p_bar[n]
        );
    }
    println!("zeta (summed)   = {:.17}", tables.mean_cost(ZetaMode::Summed)?);
    println!("zeta (analytic) = {:.17}", analytic_zeta(&params)?);
    Ok(())
}
