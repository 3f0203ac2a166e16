//! Saturating learning-curve fit and the day after which an extra day adds
//! less than a given gain.

use dpi::stats::{fit_power_law, marginal_gain, threshold_day, PowerFitConfig};

fn main() -> dpi::Result<()> {
    let curve = [(1.0, 66.5), (2.0, 69.9), (3.0, 71.6), (4.0, 72.6), (5.0, 73.6), (6.0, 74.3), (7.0, 75.0)];
    let fit = fit_power_law(&curve, &PowerFitConfig::default())?;
    println!("y = {:.3} x^{:.3} + {:.3}   (sse {:.4})", fit.a, fit.b, fit.c, fit.sse);
    for d in 1..=7 {
        println!("day {d} -> {}: predicted {:.2}, gain {:.3} pp", d + 1, fit.predict(d as f64), marginal_gain(&fit, d));
    }
    for t in [1.0, 0.5] {
        println!("gain < {t} pp from day {}", threshold_day(&fit, t, 365)?);
    }
    Ok(())
}
