//! Chance-level accuracy bound from uninformative features.
//!
//! cargo run --release --example null_baseline -- [pairs] [reps] [seed]

use dpi::experiments::{run_null_baseline, NullDistribution};
use dpi::model::LogisticConfig;

fn main() -> dpi::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let pairs = *args.first().unwrap_or(&134) as usize;
    let reps = *args.get(1).unwrap_or(&1000) as usize;
    let seed = *args.get(2).unwrap_or(&7);

    let t = std::time::Instant::now();
    let res = run_null_baseline(pairs, reps, 10, seed, NullDistribution::Normal, &LogisticConfig::default())?;
    println!("{pairs} pairs x {reps} repetitions ({:.1?})", t.elapsed());
    println!("mean accuracy      {:.2} %", 100.0 * res.mean_accuracy);
    println!("95th percentile    {:.2} %", 100.0 * res.upper_95);
    for b in res.histogram.iter().filter(|b| b.count > 0) {
        println!("{:>4} % {}", b.bin, "#".repeat((b.count * 60 / reps).max(1)));
    }
    Ok(())
}
