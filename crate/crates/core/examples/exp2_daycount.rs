//! Accuracy versus number of monitoring days, with the power-law fit and
//! its marginal-gain thresholds.
//!
//! cargo run --release --example exp2_daycount -- [reps] [out_dir]

use std::path::PathBuf;

use dpi::experiments::{run_experiment2_daycount, ExperimentConfig};
use dpi::io::emit_plot_data;
use dpi::synth::{gen_cohort, CohortSpec};

fn main() -> dpi::Result<()> {
    let reps: usize = std::env::args().nth(1).map_or(100, |a| a.parse().expect("reps"));
    let out = PathBuf::from(std::env::args().nth(2).unwrap_or_else(|| "exp2a_out".into()));
    let cohort = gen_cohort(&CohortSpec::default())?;
    let report = run_experiment2_daycount(&cohort, reps, 3, &ExperimentConfig::default())?;

    println!("days  accuracy (%)    D(h1h2 std)  D(nsam skew)");
    for p in &report.curve {
        println!(
            "{:4}  {:6.2} +/- {:4.2}  {:11.2}  {:12.2}",
            p.days,
            p.accuracy_pct.mean,
            p.accuracy_pct.std,
            p.d_h1h2_std.unwrap_or(f64::NAN),
            p.d_nsam_skewness.unwrap_or(f64::NAN)
        );
    }
    if let Some(f) = report.power_fit {
        println!("fit y = {:.3} x^{:.3} + {:.3}", f.a, f.b, f.c);
    }
    for t in &report.thresholds {
        println!("gain < {} pp from day {:?}", t.threshold_pp, t.day);
    }
    emit_plot_data(&report, &out)?;
    Ok(())
}
