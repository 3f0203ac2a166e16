//! Frame-level extraction on a synthetic two-harmonic signal with a silent
//! gap: voicing, f0, H1-H2 and NSAM per 50 ms frame.

use dpi::signal::{extract_frame_features, AccelRecording, Condition, ExtractionConfig};
use dpi::synth::gen_harmonic_signal;

fn main() -> dpi::Result<()> {
    let tone = gen_harmonic_signal(210.0, &[0.5, 0.25], 11_025, 1.0)?;
    let mut samples = tone.samples().to_vec();
    samples.extend(std::iter::repeat_n(0.0, 11_025 / 2));
    let rec = AccelRecording::new(samples, 11_025, "demo", Condition::LabRainbow, None)?;

    let ff = extract_frame_features(&rec, &ExtractionConfig::default())?;
    println!("{} frames, {} voiced, {} demoted", ff.rows.len(), ff.voiced_count(), ff.demoted_frames);
    println!("frame  voiced  f0_hz    h1h2_db  nsam_db");
    for r in ff.rows.iter().step_by(3) {
        let f = |x: Option<f64>| x.map(|v| format!("{v:8.2}")).unwrap_or_else(|| "       -".into());
        println!("{:5}  {:6}  {} {} {}", r.frame_index, r.voiced, f(r.f0_hz), f(r.h1h2_db), f(r.nsam_db));
    }
    println!("expected H1-H2: {:.2} dB", 20.0 * (0.5f64 / 0.25).log10());
    Ok(())
}
