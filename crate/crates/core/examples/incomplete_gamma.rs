//! Regularized incomplete gamma functions and log-gamma.

use bdpoisson::gamma::{lgamma, reg_gamma};

fn main() -> bdpoisson::error::Result<()> {
    println!("lgamma(0.5) = {:.17} (ln sqrt(pi) = {:.17})", lgamma(0.5)?, 0.5 * std::f64::consts::PI.ln());
    println!("{:>8} {:>8} {:>24} {:>24}", "a", "x", "P(a,x)", "Q(a,x)");
    for (a, x) in [(1.0, 1.0), (0.5, 2.0), (5.0, 3.0), (30.0, 25.0), (100.0, 120.0)] {
        let (p, q) = reg_gamma(a, x)?;
        println!("{a:>8} {x:>8} {p:>24.17e} {q:>24.17e}");
    }
    // P(1, x) = 1 - e^{-x}.
    let (p, _) = reg_gamma(1.0, 1.0)?;
    println!("P(1,1) - (1 - 1/e) = {:e}", p - (1.0 - (-1.0f64).exp()));
    Ok(())
}
