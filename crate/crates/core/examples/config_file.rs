//! Loading a model from JSON and running a small parameter sweep.

use bdpoisson::chain::build_tables;
use bdpoisson::metrics::asymptotic_variance;
use bdpoisson::model::ModelConfig;
use bdpoisson::poisson::solve_exact;

const CONFIG: &str = r#"{
    "kind": "mserver-balk-abandon",
    "params": { "lambda": 2.5, "servers": 3, "mu": 1.0, "theta": 0.2 },
    "cost": { "abandonment": 1.0, "holding": [0.0, 0.5] },
    "truncation": { "tail_mass_tol": 1e-40 }
}"#;

fn main() -> bdpoisson::error::Result<()> {
    let config = ModelConfig::from_json_str(CONFIG)?;
    println!("kind = {}, truncation = {:?}", config.model.kind().as_str(), config.truncation);
    let tables = build_tables(&config.model, &config.truncation)?;
    println!("n* = {}, zeta = {:.12}", tables.n_star, tables.zeta);

    for lambda in [1.0, 2.0, 2.5, 2.9] {
        let text = CONFIG.replace("2.5", &lambda.to_string());
        let cfg = ModelConfig::from_json_str(&text)?;
        let t = build_tables(&cfg.model, &cfg.truncation)?;
        let phi = solve_exact(&t, 0.0)?.phi;
        let var = asymptotic_variance(&phi, &t)?;
        println!("lambda = {lambda:>4}: zeta = {:.6}, sigma2 = {:.6}", t.zeta, var.sigma2);
    }

    match ModelConfig::from_json_str(r#"{ "kind": "mm1m", "params": { "lambda": 1 } }"#) {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
