//! In-lab versus in-field DPI on a synthetic cohort whose lab recordings
//! carry no group information.
//!
//! cargo run --release --example exp1_lab_vs_field -- [out_dir]

use std::path::PathBuf;

use dpi::experiments::{run_experiment1, ExperimentConfig};
use dpi::io::{emit_plot_data, write_results, ResultsDocument};
use dpi::signal::Condition;
use dpi::synth::{gen_cohort, CohortSpec};

fn main() -> dpi::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "exp1_out".into()));
    let spec = CohortSpec { day_hours: 2.0, ..CohortSpec::default() };
    let cfg = ExperimentConfig { min_hours: 2.0, ..ExperimentConfig::default() };
    let cohort = gen_cohort(&spec)?;
    let report = run_experiment1(&cohort, Condition::LabRainbow, 10, 1, &cfg)?;
    for c in &report.conditions {
        println!("{:>12}: {:.1} +/- {:.1} %, AUC {:.3}", c.condition, 100.0 * c.summary.accuracy.mean, 100.0 * c.summary.accuracy.std, c.auc.unwrap_or(f64::NAN));
    }
    let cmp = &report.comparisons[0];
    println!("{}: p = {:.2e}, D = {:.2}", cmp.name, cmp.t_test.map_or(f64::NAN, |t| t.p), cmp.cohens_d.unwrap_or(f64::NAN));

    std::fs::create_dir_all(&out).map_err(|e| dpi::Error::Parse(e.to_string()))?;
    write_results(&ResultsDocument::new("exp1", 1, &(&spec, &cfg), &report)?, &out.join("exp1.json"))?;
    for p in emit_plot_data(&report, &out)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
