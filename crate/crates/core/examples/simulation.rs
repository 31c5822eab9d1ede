//! Seeded simulation of a mixed population of agents.
//!
//! cargo run --release --example simulation

use peershare::io::load_experiment_spec;
use peershare::sim::run_experiment;

fn main() -> peershare::Result<()> {
    let spec = load_experiment_spec(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/sim_spec.json"))?;
    let report = run_experiment(&spec, None)?;
    println!("{} runs of {} with n={}", report.runs.len(), spec.mechanism, spec.config.n);
    for s in &report.policy_stats {
        println!(
            "  {:<15} agents {} mean gain {:>10} min {} max {}",
            s.policy,
            s.agents,
            s.mean_gain.to_decimal_string(4),
            s.min_gain.to_decimal_string(4),
            s.max_gain.to_decimal_string(4)
        );
    }
    let first = &report.runs[0];
    println!("run 0 shares: {:?}", first.shares);

    let mut csv = Vec::new();
    report.write_csv(&mut csv, 4)?;
    let text = String::from_utf8(csv).expect("csv is utf-8");
    for line in text.lines().take(4) {
        println!("{line}");
    }
    Ok(())
}
