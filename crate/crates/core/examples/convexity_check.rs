//! Structural assumptions, monotone `φ`, and the passage-ratio diagnostics.

use bdpoisson::chain::build_tables;
use bdpoisson::model::{BirthDeathModel, TruncationPolicy};
use bdpoisson::passage::PassageTables;
use bdpoisson::poisson::solve_exact;
use bdpoisson::structure::{appendix_diagnostics, check_assumption, verify_convexity, DEFAULT_SLACK};

fn main() -> bdpoisson::error::Result<()> {
    for spec in ["mm1m(0.9,1,0.5)", "mm1(1,2)", "mm1m(2,1,0.1)"] {
        let model = BirthDeathModel::parse_inline(spec)?;
        let tables = build_tables(&model, &TruncationPolicy::default())?;
        let passage = PassageTables::new(&tables);
        let assumption = check_assumption(&model, 1000)?;
        let phi = solve_exact(&tables, 0.0)?.phi;
        let convex = verify_convexity(&phi, DEFAULT_SLACK);
        let appendix = appendix_diagnostics(&tables, &passage, &assumption);

        println!("{spec}");
        println!(
            "  assumption: i_a {} i_b {} ii_a {} ii_b {}",
            assumption.i_a, assumption.i_b, assumption.ii_a, assumption.ii_b
        );
        println!("  phi nondecreasing: {} (first violation {:?})", convex.is_nondecreasing, convex.first_violation);
        println!(
            "  Z monotone {}, dT positive {}, ratio monotone {}, below zeta {}, approaches zeta {}",
            appendix.z_monotone,
            appendix.delta_t_positive,
            appendix.ratio_monotone,
            appendix.ratio_below_zeta,
            appendix.ratio_approaches_zeta
        );
    }

    // A decreasing cost breaks the hypothesis.
    let model = BirthDeathModel::tabulate(400, |n| (0.9, if n == 0 { 0.0 } else { 1.0 }, -(n as f64)))?;
    let assumption = check_assumption(&model, 1000)?;
    println!("c_n = -n: ii_a {}", assumption.ii_a);
    Ok(())
}
