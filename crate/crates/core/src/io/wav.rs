use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{Error, Result};
use crate::signal::{AccelRecording, Condition, NOMINAL_SAMPLE_RATE_HZ};

fn map_hound(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::io(path, io),
        hound::Error::Unsupported => Error::UnsupportedFormat(format!("{}: unsupported encoding", path.display())),
        other => Error::CorruptHeader(format!("{}: {other}", path.display())),
    }
}

/// Reads a mono 16-bit PCM file; samples are divided by 32768.
pub fn read_wav(path: &Path, subject_id: &str, condition: Condition, day_index: Option<u32>) -> Result<AccelRecording> {
    let reader = WavReader::open(path).map_err(|e| map_hound(path, e))?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::UnsupportedFormat(format!("{}: {} channels, expected mono", path.display(), spec.channels)));
    }
    if spec.sample_format != SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::UnsupportedFormat(format!(
            "{}: {}-bit {:?}, expected 16-bit PCM",
            path.display(),
            spec.bits_per_sample,
            spec.sample_format
        )));
    }
    if spec.sample_rate != NOMINAL_SAMPLE_RATE_HZ {
        log::warn!("{}: sample rate {} Hz (expected {NOMINAL_SAMPLE_RATE_HZ})", path.display(), spec.sample_rate);
    }
    let samples = reader
        .into_samples::<i16>()
        .map(|s| s.map(|v| v as f64 / 32768.0))
        .collect::<std::result::Result<Vec<f64>, _>>()
        .map_err(|e| map_hound(path, e))?;
    AccelRecording::new(samples, spec.sample_rate, subject_id, condition, day_index)
}

/// Writes a recording as mono 16-bit PCM (`round(x * 32768)`, clamped).
pub fn write_wav(rec: &AccelRecording, path: &Path) -> Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: rec.sample_rate_hz(),
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut w = WavWriter::create(path, spec).map_err(|e| map_hound(path, e))?;
    for &x in rec.samples() {
        let v = (x * 32768.0).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16;
        w.write_sample(v).map_err(|e| map_hound(path, e))?;
    }
    w.finalize().map_err(|e| map_hound(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::gen_harmonic_signal;

    #[test]
    fn round_trip_within_one_lsb() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.wav");
        let rec = gen_harmonic_signal(180.0, &[0.6, 0.3], 11_025, 0.5).unwrap();
        write_wav(&rec, &p).unwrap();
        let back = read_wav(&p, "s", Condition::LabRainbow, None).unwrap();
        assert_eq!(back.sample_rate_hz(), 11_025);
        assert_eq!(back.samples().len(), rec.samples().len());
        let worst = rec.samples().iter().zip(back.samples()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(worst <= 1.0 / 32768.0);
    }

    #[test]
    fn scale_law() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.wav");
        let spec = WavSpec { channels: 1, sample_rate: 11_025, bits_per_sample: 16, sample_format: SampleFormat::Int };
        let mut w = WavWriter::create(&p, spec).unwrap();
        for v in [i16::MIN, 0, 16384, i16::MAX] {
            w.write_sample(v).unwrap();
        }
        w.finalize().unwrap();
        let r = read_wav(&p, "s", Condition::LabRainbow, None).unwrap();
        assert_eq!(r.samples(), &[-1.0, 0.0, 0.5, 32767.0 / 32768.0]);
    }

    #[test]
    fn rejects_stereo_and_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("st.wav");
        let spec = WavSpec { channels: 2, sample_rate: 11_025, bits_per_sample: 16, sample_format: SampleFormat::Int };
        let mut w = WavWriter::create(&p, spec).unwrap();
        w.write_sample(0i16).unwrap();
        w.write_sample(0i16).unwrap();
        w.finalize().unwrap();
        assert!(matches!(read_wav(&p, "s", Condition::LabRainbow, None), Err(Error::UnsupportedFormat(_))));

        let g = dir.path().join("g.wav");
        std::fs::write(&g, b"RIFX0000WAVEjunkjunk").unwrap();
        assert!(matches!(read_wav(&g, "s", Condition::LabRainbow, None), Err(Error::CorruptHeader(_))));
    }
}
