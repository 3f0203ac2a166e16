//! WAV round trip and the frame-feature CSV cache.

use dpi::io::{read_frame_csv, read_wav, write_frame_csv, write_wav, FrameTable};
use dpi::signal::{extract_frame_features, Condition, ExtractionConfig};
use dpi::synth::gen_harmonic_signal;

fn main() -> dpi::Result<()> {
    let dir = std::env::temp_dir().join("dpi_wav_cache_example");
    std::fs::create_dir_all(&dir).map_err(|e| dpi::Error::Parse(e.to_string()))?;
    let wav = dir.join("tone.wav");
    let rec = gen_harmonic_signal(190.0, &[0.4, 0.3, 0.1], 11_025, 2.0)?;
    write_wav(&rec, &wav)?;
    let back = read_wav(&wav, "subj01", Condition::Field, Some(0))?;
    let lsb = rec.samples().iter().zip(back.samples()).map(|(a, b)| (a - b).abs() * 32768.0).fold(0.0, f64::max);
    println!("{}: {} samples, max error {lsb:.2} LSB", wav.display(), back.samples().len());

    let rows = extract_frame_features(&back, &ExtractionConfig::default())?.rows;
    let csv = dir.join("tone.csv");
    write_frame_csv(&[FrameTable { subject_id: "subj01".into(), condition: Condition::Field, day: Some(0), rows: rows.clone() }], &csv)?;
    let cached = read_frame_csv(&csv)?;
    let worst = rows
        .iter()
        .zip(&cached[0].rows)
        .filter_map(|(a, b)| Some((a.h1h2_db? - b.h1h2_db?).abs()))
        .fold(0.0, f64::max);
    println!("{}: {} rows, max H1-H2 difference after caching {worst:.2e} dB", csv.display(), cached[0].rows.len());
    Ok(())
}
