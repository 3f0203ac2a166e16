//! H1-H2 against its analytic value over a grid of f0 and amplitude ratios.

use dpi::signal::{compute_h1h2, frame_signal};
use dpi::synth::gen_harmonic_signal;

fn main() -> dpi::Result<()> {
    let mut worst = 0.0f64;
    println!("  f0   A1/A2   expected  computed");
    for f0 in [120.0, 160.0, 200.0, 300.0, 400.0] {
        for ratio in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let (a1, a2) = if ratio >= 1.0 { (0.8, 0.8 / ratio) } else { (0.8 * ratio, 0.8) };
            let rec = gen_harmonic_signal(f0, &[a1, a2], 11_025, 0.1)?;
            let frame = frame_signal(&rec, 50.0)?[0];
            let got = compute_h1h2(&frame, f0)?;
            let want = 20.0 * ratio.log10();
            worst = worst.max((got - want).abs());
            println!("{f0:5} {ratio:6}  {want:8.3}  {got:8.3}");
        }
    }
    println!("max |error| = {worst:.4} dB");
    let pure = gen_harmonic_signal(200.0, &[1.0], 11_025, 0.1)?;
    println!("pure tone: {:?}", compute_h1h2(&frame_signal(&pure, 50.0)?[0], 200.0));
    Ok(())
}
