//! Day summaries for one synthetic subject, the validity filter and the
//! k-day average.

use dpi::features::{aggregate_days, filter_valid_days, summarize_day};
use dpi::synth::{gen_cohort, CohortSpec};

fn main() -> dpi::Result<()> {
    let spec = CohortSpec { n_pvh: 1, n_control: 1, day_hours: 1.0, ..CohortSpec::default() };
    let cohort = gen_cohort(&spec)?;
    for (i, s) in cohort.subjects.iter().enumerate() {
        let days = (0..spec.days_per_subject as u32)
            .map(|d| summarize_day(&cohort.day_rows(i, d), &s.meta.id, d))
            .collect::<dpi::Result<Vec<_>>>()?;
        println!("{} ({})", s.meta.id, s.meta.group.as_str());
        for d in &days {
            println!("  day {}  h1h2 std {:.3}  nsam skew {:+.3}  voiced {}/{}", d.day_index, d.h1h2_std, d.nsam_skewness, d.voiced_frame_count, d.total_frame_count);
        }
        let valid = filter_valid_days(&days, 1.0);
        for k in [1, 3, 7] {
            let f = aggregate_days(&s.meta, &valid, k)?;
            println!("  {k}-day features {:.3?}", f.feature_vector);
        }
    }
    Ok(())
}
