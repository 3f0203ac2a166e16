//! Fixed-duration window sampling: a 6 hour budget split over k days, with
//! the voiced-frame rule enforced on every window.

use dpi::features::{sample_fixed_duration_windows, window_length_frames, DayMoments, WindowConfig};
use dpi::synth::{gen_cohort, CohortSpec};

fn main() -> dpi::Result<()> {
    let cohort = gen_cohort(&CohortSpec { n_pvh: 1, n_control: 0, ..CohortSpec::default() })?;
    let days: Vec<DayMoments> = (0..7).map(|d| DayMoments::from_rows(d, &cohort.day_rows(0, d))).collect();
    let voicing: Vec<_> = days.iter().map(|d| d.voicing.clone()).collect();
    let cfg = WindowConfig::default();
    for k in 1..=7 {
        let windows = sample_fixed_duration_windows(&voicing, k, &cfg, 100 + k as u64)?;
        let feats: Vec<[f64; 2]> = windows
            .iter()
            .map(|w| days.iter().find(|d| d.voicing.day_index == w.day_index).unwrap().window_features(w))
            .collect::<dpi::Result<_>>()?;
        let mean = |j: usize| feats.iter().map(|f| f[j]).sum::<f64>() / k as f64;
        println!(
            "k={k}: {} frames/window on days {:?}, min voiced {}, features [{:.3}, {:+.3}]",
            window_length_frames(cfg.total_hours, k),
            windows.iter().map(|w| w.day_index).collect::<Vec<_>>(),
            windows.iter().map(|w| w.voiced_frame_count).min().unwrap(),
            mean(0),
            mean(1)
        );
    }
    Ok(())
}
