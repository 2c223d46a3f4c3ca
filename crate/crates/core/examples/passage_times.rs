//! Mean first-passage times for M/M/1 (λ = 1, μ = 2), where
//! `T_n^+ = (1 - ρ^{n+1}) / (λ (1 - ρ) ρ^n)` with `ρ = 1/2`.

use bdpoisson::chain::build_tables;
use bdpoisson::model::{BirthDeathModel, TruncationPolicy};
use bdpoisson::passage::{boundary_functionals, PassageTables};

fn main() -> bdpoisson::error::Result<()> {
    let model = BirthDeathModel::mm1(1.0, 2.0)?;
    let tables = build_tables(&model, &TruncationPolicy::default())?;
    let passage = PassageTables::new(&tables);

    println!("{:>3} {:>12} {:>12} {:>12} {:>12} {:>12}", "n", "T+_n", "closed", "T-_{n+1}", "T_0n", "T_n0");
    for n in 0..8 {
        let rho: f64 = 0.5;
        let closed = (1.0 - rho.powi(n as i32 + 1)) / ((1.0 - rho) * rho.powi(n as i32));
        println!(
            "{n:>3} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
            passage.t_up[n], closed, passage.t_down[n], passage.t_0n[n], passage.t_n0[n]
        );
    }

    let boundary = boundary_functionals(&tables, &passage)?;
    println!("T_p0 = {:?}", boundary.t_p0);
    println!("T_inf0 = {:?}", boundary.t_inf0);
    println!("T_infp = {:?}", boundary.t_infp);
    println!("sum 1/mu_n: {:?}", boundary.sum_inv_mu);
    Ok(())
}
