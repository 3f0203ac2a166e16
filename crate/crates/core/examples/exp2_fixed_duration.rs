//! Fixed 6 hour budget spread over 1..7 days, with and without between-day
//! drift in the synthetic cohort.
//!
//! cargo run --release --example exp2_fixed_duration -- [reps]

use dpi::experiments::{run_experiment2_fixed_duration, ExperimentConfig};
use dpi::synth::{gen_cohort, CohortSpec};

fn main() -> dpi::Result<()> {
    let reps: usize = std::env::args().nth(1).map_or(50, |a| a.parse().expect("reps"));
    let cfg = ExperimentConfig::default();
    for (label, spec) in [("drift on", CohortSpec::default()), ("drift off", CohortSpec::default().without_day_drift())] {
        let report = run_experiment2_fixed_duration(&gen_cohort(&spec)?, reps, 5, &cfg)?;
        println!("{label}");
        for p in &report.curve {
            println!("  k={}  {:6.2} +/- {:4.2} %", p.days, p.accuracy_pct.mean, p.accuracy_pct.std);
        }
        if let Some(c) = report.comparison("days4_vs_days1").and_then(|c| c.t_test) {
            println!("  k=4 vs k=1: t = {:.2}, one-sided p = {:.2e}", c.t, c.p_greater());
        }
        println!("  {:?}", report.window_audit.unwrap());
    }
    Ok(())
}
