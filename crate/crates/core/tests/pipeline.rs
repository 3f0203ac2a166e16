//! End-to-end behaviour of the experiment drivers, the frame cache and the
//! command line.

use std::path::{Path, PathBuf};
use std::process::Command;

use dpi::eval::{run_cross_validation, undersample_balance, MeanStd};
use dpi::experiments::{
    field_day_features, run_experiment1, run_experiment2_daycount, run_experiment2_fixed_duration, run_null_baseline,
    CohortSource, Comparison, ExperimentConfig, NullDistribution,
};
use dpi::features::{aggregate_days, filter_valid_days, summarize_day, Group, SubjectFeatures, SubjectMeta, WindowConfig};
use dpi::io::{emit_plot_data, load_manifest, read_frame_csv, write_frame_csv, FrameTable, write_manifest, write_wav, Manifest, ManifestCohort, ManifestSubject, RecordingEntry};
use dpi::model::LogisticConfig;
use dpi::rng::{derive_seed, repetition_seed, rng_from, stream};
use dpi::signal::{AccelRecording, Condition, ExtractionConfig, FrameFeatureRow};
use dpi::synth::{gen_cohort, gen_harmonic_signal, Cohort, CohortSpec};
use dpi::Result;
use rand::Rng;

fn small_spec(n: usize, days: usize, hours: f64) -> CohortSpec {
    CohortSpec { n_pvh: n, n_control: n, days_per_subject: days, day_hours: hours, ..CohortSpec::default() }
}

fn small_cfg(days: usize, hours: f64, folds: usize) -> ExperimentConfig {
    ExperimentConfig {
        folds,
        min_hours: hours,
        max_days: days,
        windows: WindowConfig { total_hours: hours, min_voiced_frames: 200, ..WindowConfig::default() },
        ..ExperimentConfig::default()
    }
}

fn dpi_bin(args: &[&str], dir: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_dpi")).args(args).current_dir(dir).output().unwrap()
}

/// Speech-like test signal: 0.3 s segments of random harmonic complexes at
/// random levels, with roughly a third of the segments silent.
fn speechlike(seconds: f64, group: Group, seed: u64, subject: &str, condition: Condition, day: Option<u32>) -> AccelRecording {
    let mut rng = rng_from(seed);
    let mut samples = Vec::new();
    let tilt = if group == Group::Pvh { 0.5 } else { 0.8 };
    while (samples.len() as f64) < seconds * 11_025.0 {
        if rng.random::<f64>() < 0.3 {
            samples.extend(std::iter::repeat_n(0.0, 3307));
            continue;
        }
        let f0 = rng.random_range(120.0..300.0);
        let a1 = rng.random_range(0.3..1.0);
        let amps = [a1, a1 * tilt * rng.random_range(0.5..1.5), a1 * 0.2];
        let gain = 10f64.powf(rng.random_range(-2.0..-0.2));
        let seg = gen_harmonic_signal(f0, &amps, 11_025, 0.3).unwrap();
        let peak = amps.iter().sum::<f64>();
        samples.extend(seg.samples().iter().map(|x| x * gain / peak.max(1.0)));
    }
    AccelRecording::new(samples, 11_025, subject, condition, day).unwrap()
}

/// Writes a WAV cohort with a manifest and returns the manifest path.
fn wav_cohort(dir: &Path, n: usize, days: u32) -> PathBuf {
    let mut subjects = Vec::new();
    for i in 0..2 * n {
        let group = if i < n { Group::Pvh } else { Group::Control };
        let id = format!("s{i:02}");
        let mut recordings = Vec::new();
        let mut add = |condition: Condition, day: Option<u32>, seconds: f64| {
            let name = format!("{id}_{condition}_{}.wav", day.map_or("lab".into(), |d| d.to_string()));
            let seed = (i as u64) << 8 | day.map_or(200, u64::from);
            write_wav(&speechlike(seconds, group, seed, &id, condition, day), &dir.join(&name)).unwrap();
            recordings.push(RecordingEntry { path: name.into(), condition, day });
        };
        add(Condition::LabRainbow, None, 8.0);
        for d in 0..days {
            add(Condition::Field, Some(d), 20.0);
        }
        subjects.push(ManifestSubject { id, group, pair_id: None, recordings });
    }
    let p = dir.join("manifest.json");
    write_manifest(&Manifest { subjects, base_dir: dir.to_path_buf() }, &p).unwrap();
    p
}

#[test]
fn cached_frames_reproduce_wav_features() {
    let tmp = tempfile::tempdir().unwrap();
    let wav_dir = tmp.path().join("wav");
    std::fs::create_dir_all(&wav_dir).unwrap();
    let wav_manifest = wav_cohort(&wav_dir, 6, 2);

    let out = dpi_bin(&["--quiet", "--out", "cache", "extract", "--manifest", "wav/manifest.json"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let raw = ManifestCohort::new(load_manifest(&wav_manifest).unwrap(), ExtractionConfig::default());
    let cached = ManifestCohort::new(load_manifest(&tmp.path().join("cache/manifest.json")).unwrap(), ExtractionConfig::default());
    let metas = raw.subjects();
    assert_eq!(metas, cached.subjects());
    let mut worst = 0.0f64;
    for (i, m) in metas.iter().enumerate() {
        let a = field_day_features(&raw, i, m).unwrap();
        let b = field_day_features(&cached, i, m).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((x.voiced_frame_count, x.total_frame_count), (y.voiced_frame_count, y.total_frame_count));
            worst = worst.max((x.h1h2_std - y.h1h2_std).abs()).max((x.nsam_skewness - y.nsam_skewness).abs());
        }
        let la = raw.lab_rows(i, Condition::LabRainbow).unwrap().unwrap();
        let lb = cached.lab_rows(i, Condition::LabRainbow).unwrap().unwrap();
        let (la, lb) = (summarize_day(&la, &m.id, 0).unwrap(), summarize_day(&lb, &m.id, 0).unwrap());
        worst = worst.max((la.h1h2_std - lb.h1h2_std).abs()).max((la.nsam_skewness - lb.nsam_skewness).abs());
    }
    // 9 significant digits per value; short clips do not average it away
    assert!(worst <= 1e-7, "cache changed features by {worst:e}");

    let cfg = small_cfg(2, 0.005, 3);
    let from_wav = run_experiment1(&raw, Condition::LabRainbow, 3, 5, &cfg).unwrap();
    let from_csv = run_experiment1(&cached, Condition::LabRainbow, 3, 5, &cfg).unwrap();
    for (a, b) in from_wav.conditions.iter().zip(&from_csv.conditions) {
        assert_eq!(a.fold_accuracies(), b.fold_accuracies());
    }

    std::fs::write(tmp.path().join("c.toml"), "[experiment]\nmin_hours = 0.005\n").unwrap();
    let out = dpi_bin(&["--quiet", "--config", "c.toml", "--out", "feat", "features", "--manifest", "cache/manifest.json"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let subj = std::fs::read_to_string(tmp.path().join("feat/subject_features.csv")).unwrap();
    assert_eq!(subj.lines().count(), 13);
    let out = dpi_bin(&["--quiet", "--folds", "3", "--out", "feat", "crossval", "feat/subject_features.csv"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("feat/crossval.json").exists());
}

#[test]
fn cache_is_exact_to_1e9_on_day_length_recordings() {
    let cohort = gen_cohort(&small_spec(2, 2, 6.0)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut worst = 0.0f64;
    for (i, s) in cohort.subjects.iter().enumerate() {
        for d in 0..2 {
            let rows = cohort.day_rows(i, d);
            let p = dir.path().join(format!("{i}_{d}.csv"));
            let table = FrameTable { subject_id: s.meta.id.clone(), condition: Condition::Field, day: Some(d), rows };
            write_frame_csv(std::slice::from_ref(&table), &p).unwrap();
            let back = read_frame_csv(&p).unwrap().remove(0);
            assert_eq!(back.rows.len(), table.rows.len());
            let a = summarize_day(&table.rows, &s.meta.id, d).unwrap();
            let b = summarize_day(&back.rows, &s.meta.id, d).unwrap();
            worst = worst.max((a.h1h2_std - b.h1h2_std).abs()).max((a.nsam_skewness - b.nsam_skewness).abs());
        }
    }
    assert!(worst <= 1e-9, "cache changed day features by {worst:e}");
}

/// A synthetic cohort with some subjects damaged.
struct Damaged {
    inner: Cohort,
    /// Subject with only its first day.
    short: usize,
    /// Subject whose second day has no voicing at all.
    silent_day: usize,
    /// Subject without lab recordings.
    no_lab: usize,
}

impl CohortSource for Damaged {
    fn subjects(&self) -> Vec<SubjectMeta> {
        self.inner.subjects()
    }
    fn field_days(&self, subject: usize) -> Vec<u32> {
        let days = self.inner.field_days(subject);
        if subject == self.short {
            days[..1].to_vec()
        } else {
            days
        }
    }
    fn field_rows(&self, subject: usize, day: u32) -> Result<Vec<FrameFeatureRow>> {
        let rows = self.inner.field_rows(subject, day)?;
        if subject == self.silent_day && day == 1 {
            return Ok(rows.iter().map(|r| FrameFeatureRow::unvoiced(r.frame_index, r.nsam_db)).collect());
        }
        Ok(rows)
    }
    fn lab_rows(&self, subject: usize, condition: Condition) -> Result<Option<Vec<FrameFeatureRow>>> {
        if subject == self.no_lab {
            return Ok(None);
        }
        CohortSource::lab_rows(&self.inner, subject, condition)
    }
}

#[test]
fn exclusions_are_accounted() {
    let source = Damaged { inner: gen_cohort(&small_spec(8, 2, 0.1)).unwrap(), short: 1, silent_day: 9, no_lab: 3 };
    let cfg = small_cfg(2, 0.1, 5);

    let r = run_experiment2_daycount(&source, 2, 1, &cfg).unwrap();
    assert_eq!(r.cohort.input, 16);
    assert_eq!(r.cohort.included.len() + r.cohort.excluded.len(), 16);
    let ids: Vec<&str> = r.cohort.excluded.iter().map(|x| x.subject_id.as_str()).collect();
    assert_eq!(ids, ["pvh0001", "ctl0009"]);
    assert!(r.cohort.excluded.iter().all(|x| x.reason.contains("day")));

    let r = run_experiment1(&source, Condition::LabRainbow, 2, 1, &cfg).unwrap();
    assert_eq!(r.cohort.included.len() + r.cohort.excluded.len(), 16);
    let x: Vec<_> = r.cohort.excluded.iter().map(|x| (x.subject_id.as_str(), x.reason.contains("lab_rainbow"))).collect();
    assert_eq!(x, [("pvh0003", true)]);
}

#[test]
fn daycount_curve_matches_direct_pipeline() {
    let cohort = gen_cohort(&small_spec(10, 3, 0.25)).unwrap();
    let cfg = small_cfg(3, 0.25, 5);
    let (n_reps, seed) = (4, 21);
    let report = run_experiment2_daycount(&cohort, n_reps, seed, &cfg).unwrap();

    let subjects: Vec<SubjectFeatures> = cohort
        .subjects()
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let days = filter_valid_days(&field_day_features(&cohort, i, m).unwrap(), 0.25);
            aggregate_days(m, &days, 3).unwrap()
        })
        .collect();
    let logistic = LogisticConfig::default();
    for r in 0..n_reps {
        let rep_seed = repetition_seed(seed, r as u64);
        assert_eq!(rep_seed, seed ^ r as u64);
        let subset = undersample_balance(&subjects, derive_seed(rep_seed, stream::UNDERSAMPLE));
        let direct = run_cross_validation(&subset, 5, rep_seed, &logistic).unwrap();
        let acc = 100.0 * MeanStd::of(&direct.fold_accuracies()).mean;
        assert_eq!(acc, report.curve[2].rep_accuracy_pct[r], "repetition {r}");
    }
}

/// Every field day of a subject is a copy of its first day, and the lab
/// session is that same day again.
struct RepeatedDay(Cohort);

impl CohortSource for RepeatedDay {
    fn subjects(&self) -> Vec<SubjectMeta> {
        self.0.subjects()
    }
    fn field_days(&self, subject: usize) -> Vec<u32> {
        self.0.field_days(subject)
    }
    fn field_rows(&self, subject: usize, _day: u32) -> Result<Vec<FrameFeatureRow>> {
        self.0.field_rows(subject, 0)
    }
    fn lab_rows(&self, subject: usize, _condition: Condition) -> Result<Option<Vec<FrameFeatureRow>>> {
        self.0.field_rows(subject, 0).map(Some)
    }
}

#[test]
fn identical_days_give_flat_curve_and_null_comparison() {
    let source = RepeatedDay(gen_cohort(&small_spec(12, 4, 0.1)).unwrap());
    let report = run_experiment2_daycount(&source, 3, 2, &small_cfg(4, 0.1, 5)).unwrap();
    let first = report.curve[0].accuracy_pct.mean;
    for p in &report.curve {
        assert!((p.accuracy_pct.mean - first).abs() < 1e-9, "k={} {} vs {first}", p.days, p.accuracy_pct.mean);
    }

    let one_day = RepeatedDay(gen_cohort(&small_spec(12, 1, 0.1)).unwrap());
    let r = run_experiment1(&one_day, Condition::LabRainbow, 3, 2, &small_cfg(1, 0.1, 5)).unwrap();
    let (field, lab) = (&r.conditions[0], &r.conditions[1]);
    assert_eq!(field.fold_accuracies(), lab.fold_accuracies());
    let t = r.comparisons[0].t_test.unwrap();
    assert_eq!(t.t, 0.0);
    assert!((t.p - 1.0).abs() < 1e-12);
    assert_eq!(r.comparisons[0].cohens_d, Some(0.0));

    let c = Comparison::of("same", &[0.5, 0.6, 0.7], &[0.5, 0.6, 0.7]);
    assert_eq!(c.t_test.map(|t| (t.t, t.p)), Some((0.0, 1.0)));
}

#[test]
fn field_beats_uninformative_lab() {
    let cohort = gen_cohort(&small_spec(50, 7, 1.0)).unwrap();
    let r = run_experiment1(&cohort, Condition::LabRainbow, 10, 3, &small_cfg(7, 1.0, 10)).unwrap();
    let (field, lab) = (r.condition("field").unwrap(), r.condition("lab_rainbow").unwrap());
    assert_eq!(field.fold_accuracies().len(), 100);
    assert_eq!(lab.fold_accuracies().len(), 100);
    assert!(field.summary.accuracy.mean > lab.summary.accuracy.mean);
    let cmp = r.comparison("field_vs_lab_rainbow").unwrap();
    assert!(cmp.cohens_d.unwrap() > 0.8, "{cmp:?}");
    assert!(cmp.t_test.unwrap().p < 1e-6);
}

#[test]
fn experiments_are_deterministic() {
    let cohort = gen_cohort(&small_spec(10, 3, 0.25)).unwrap();
    let cfg = small_cfg(3, 0.25, 5);
    let a = run_experiment2_daycount(&cohort, 2, 9, &cfg).unwrap();
    let b = run_experiment2_daycount(&cohort, 2, 9, &cfg).unwrap();
    assert_eq!(a, b);
    let a = run_experiment2_fixed_duration(&cohort, 2, 9, &cfg).unwrap();
    let b = run_experiment2_fixed_duration(&cohort, 2, 9, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.window_audit.unwrap().violations, 0);
}

#[test]
fn null_bound_is_insensitive_to_feature_distribution() {
    let cfg = LogisticConfig::default();
    let normal = run_null_baseline(134, 1000, 10, 3, NullDistribution::Normal, &cfg).unwrap();
    let uniform = run_null_baseline(134, 1000, 10, 3, NullDistribution::Uniform, &cfg).unwrap();
    for r in [&normal, &uniform] {
        assert!((r.mean_accuracy - 0.5).abs() < 0.01);
        assert!((0.54..0.58).contains(&r.upper_95), "{}", r.upper_95);
        assert_eq!(r.histogram.iter().map(|b| b.count).sum::<usize>(), 1000);
    }
    assert!((normal.upper_95 - uniform.upper_95).abs() < 0.015);
}

#[test]
fn plot_data_is_complete_and_idempotent() {
    let cohort = gen_cohort(&small_spec(8, 7, 0.1)).unwrap();
    let report = run_experiment2_daycount(&cohort, 2, 4, &small_cfg(7, 0.1, 4)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let first = emit_plot_data(&report, dir.path()).unwrap();
    let bytes: Vec<Vec<u8>> = first.iter().map(|p| std::fs::read(p).unwrap()).collect();
    let acc = std::fs::read_to_string(dir.path().join("accuracy_vs_days.csv")).unwrap();
    assert_eq!(acc.lines().count(), 8);
    assert_eq!(acc.lines().next(), Some("days,mean,std"));
    let eff = std::fs::read_to_string(dir.path().join("effectsize_vs_days.csv")).unwrap();
    assert_eq!(eff.lines().count(), 8);

    let second = emit_plot_data(&report, dir.path()).unwrap();
    assert_eq!(first, second);
    for (p, b) in second.iter().zip(&bytes) {
        assert_eq!(&std::fs::read(p).unwrap(), b, "{}", p.display());
    }
}

#[test]
fn cli_null_prints_bound_and_writes_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let out = dpi_bin(&["null", "--pairs", "134", "--reps", "200", "--seed", "7", "--out", "."], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("mean accuracy"), "{stdout}");
    assert!(stdout.contains("95th percentile"), "{stdout}");
    let hist = std::fs::read_to_string(dir.path().join("null_hist.csv")).unwrap();
    let total: usize = hist.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(total, 200);
    assert!(dir.path().join("null.json").exists());

    assert_eq!(dpi_bin(&["nonsense"], dir.path()).status.code(), Some(1));
    assert_eq!(dpi_bin(&["exp2a", "--manifest", "missing.json"], dir.path()).status.code(), Some(2));
}

#[test]
fn cli_synth_feeds_exp1_and_exp2b() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.toml"),
        "[reps]\nexp1 = 2\nexp2 = 2\n[experiment]\nfolds = 4\nmin_hours = 0.1\nmax_days = 2\n\
         [experiment.windows]\ntotal_hours = 0.1\nmin_voiced_frames = 200\n\
         [synth]\nn_pvh = 6\nn_control = 6\ndays_per_subject = 2\nday_hours = 0.1\n",
    )
    .unwrap();
    let run = |args: &[&str]| {
        let mut full = vec!["--quiet", "--config", "c.toml", "--seed", "3"];
        full.extend_from_slice(args);
        let out = dpi_bin(&full, dir.path());
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    };
    run(&["--out", "cohort", "synth"]);
    let m = load_manifest(&dir.path().join("cohort/manifest.json")).unwrap();
    assert_eq!(m.subjects.len(), 12);
    assert_eq!(m.subjects[0].recordings.len(), 4);
    run(&["--out", "r", "exp1", "--manifest", "cohort/manifest.json", "--lab", "lab_spontaneous"]);
    run(&["--out", "r", "exp2b", "--manifest", "cohort/manifest.json"]);
    for f in ["exp1.json", "exp2b.json", "roc.csv", "roc_field.csv", "roc_lab_spontaneous.csv", "accuracy_vs_days.csv"] {
        assert!(dir.path().join("r").join(f).exists(), "{f}");
    }
}
