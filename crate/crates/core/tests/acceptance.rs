//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any failed.
//!
//! cargo test --release --test acceptance

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use dpi::eval::{auc, run_fold, stratified_kfold_split, undersample_indices, ScoredLabel};
use dpi::experiments::{
    run_experiment2_daycount, run_experiment2_fixed_duration, run_null_baseline, ExperimentConfig,
    NullDistribution,
};
use dpi::features::{aggregate_days, filter_valid_days, skewness, summarize_day, Group, SubjectFeatures, SubjectMeta};
use dpi::model::LogisticConfig;
use dpi::rng::rng_from;
use dpi::signal::{apply_calibration, compute_h1h2, frame_signal, CalibrationModel};
use dpi::stats::{cohens_d, fit_power_law, marginal_gain, spearman_rho, t_two_sided_p, PowerFitConfig};
use dpi::synth::{gen_cohort, gen_harmonic_signal, CohortSpec};
use dpi::Error;
use rand::Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

static NULL_BOUNDS: OnceLock<Result<(f64, f64, f64), String>> = OnceLock::new();

/// Both null runs, computed once and shared by criteria 1 and 2.
fn null_bounds() -> Result<(f64, f64, f64), String> {
    NULL_BOUNDS.get_or_init(compute_null_bounds).clone()
}

fn compute_null_bounds() -> Result<(f64, f64, f64), String> {
    let cfg = LogisticConfig::default();
    let big = run_null_baseline(134, 5000, 10, 7, NullDistribution::Normal, &cfg).map_err(err)?;
    let small = run_null_baseline(64, 5000, 10, 7, NullDistribution::Normal, &cfg).map_err(err)?;
    Ok((100.0 * big.mean_accuracy, 100.0 * big.upper_95, 100.0 * small.upper_95))
}

fn c1_null_134() -> Outcome {
    let (mean, upper, _) = null_bounds()?;
    ensure((54.5..=57.5).contains(&upper), || format!("upper bound {upper:.2} % outside [54.5, 57.5]"))?;
    ensure((mean - 50.0).abs() <= 1.0, || format!("mean {mean:.2} % not within 50 +/- 1"))?;
    Ok(format!("134 pairs: mean {mean:.2} %, 95th percentile {upper:.2} %"))
}

fn c2_null_64() -> Outcome {
    let (_, upper134, upper) = null_bounds()?;
    ensure((57.0..=60.5).contains(&upper), || format!("upper bound {upper:.2} % outside [57.0, 60.5]"))?;
    ensure(upper > upper134, || format!("64-pair bound {upper:.2} not above 134-pair bound {upper134:.2}"))?;
    Ok(format!("64 pairs: 95th percentile {upper:.2} % (> {upper134:.2} %)"))
}

fn c3_h1h2_grid() -> Outcome {
    let mut worst = 0.0f64;
    for f0 in [120.0, 160.0, 200.0, 300.0, 400.0] {
        for ratio in [0.25f64, 0.5, 1.0, 2.0, 4.0] {
            let (a1, a2) = if ratio >= 1.0 { (0.8, 0.8 / ratio) } else { (0.8 * ratio, 0.8) };
            let rec = gen_harmonic_signal(f0, &[a1, a2], 11_025, 0.05).map_err(err)?;
            let frames = frame_signal(&rec, 50.0).map_err(err)?;
            let got = compute_h1h2(&frames[0], f0).map_err(err)?;
            worst = worst.max((got - 20.0 * ratio.log10()).abs());
        }
    }
    ensure(worst <= 0.1, || format!("max |error| {worst:.4} dB"))?;
    let pure = gen_harmonic_signal(200.0, &[1.0], 11_025, 0.05).map_err(err)?;
    let res = compute_h1h2(&frame_signal(&pure, 50.0).map_err(err)?[0], 200.0);
    ensure(matches!(res, Err(Error::HarmonicNotFound { .. })), || format!("pure tone gave {res:?}"))?;
    Ok(format!("25 grid points, max |error| {worst:.2e} dB; pure tone -> HarmonicNotFound"))
}

fn c4_skew_invariance() -> Outcome {
    let mut rng = rng_from(4);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(3..200);
        let xs: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal).powi(3) * 5.0 - 20.0).collect();
        let base = skewness(&xs).map_err(err)?;
        for _ in 0..100 {
            let a = rng.random_range(0.01..100.0);
            let b = rng.random_range(-200.0..200.0);
            let ys: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
            worst = worst.max((skewness(&ys).map_err(err)? - base).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("max skewness change {worst:e}"))?;

    let spec = CohortSpec { n_pvh: 2, n_control: 2, days_per_subject: 3, day_hours: 0.5, ..CohortSpec::default() };
    let cohort = gen_cohort(&spec).map_err(err)?;
    let cal = CalibrationModel { slope: 1.37, intercept: 112.5, residual_rms: 0.0 };
    let mut worst_feat = 0.0f64;
    for (i, s) in cohort.subjects.iter().enumerate() {
        let mut nsam_days = Vec::new();
        let mut spl_days = Vec::new();
        for d in 0..3 {
            let rows = cohort.day_rows(i, d);
            let spl: Vec<_> = rows
                .iter()
                .map(|r| {
                    let mut r = r.clone();
                    r.nsam_db = r.nsam_db.map(|v| apply_calibration(&cal, v));
                    r
                })
                .collect();
            nsam_days.push(summarize_day(&rows, &s.meta.id, d).map_err(err)?);
            spl_days.push(summarize_day(&spl, &s.meta.id, d).map_err(err)?);
        }
        let a = aggregate_days(&s.meta, &filter_valid_days(&nsam_days, 0.5), 3).map_err(err)?;
        let b = aggregate_days(&s.meta, &filter_valid_days(&spl_days, 0.5), 3).map_err(err)?;
        for j in 0..2 {
            worst_feat = worst_feat.max((a.feature_vector[j] - b.feature_vector[j]).abs());
        }
    }
    ensure(worst_feat <= 1e-9, || format!("NSAM vs SPL subject features differ by {worst_feat:e}"))?;
    Ok(format!("10000 transforms, max change {worst:.1e}; subject features NSAM vs SPL {worst_feat:.1e}"))
}

fn c5_leakage() -> Outcome {
    let cfg = LogisticConfig::default();
    let mut rng = rng_from(5);
    let mut folds_checked = 0;
    for c in 0..50 {
        let (n_pvh, n_ctl) = (rng.random_range(10..60), rng.random_range(10..60));
        let subjects: Vec<SubjectFeatures> = (0..n_pvh + n_ctl)
            .map(|i| {
                let group = if i < n_pvh { Group::Pvh } else { Group::Control };
                let shift = if group == Group::Pvh { 0.7 } else { 0.0 };
                let meta = SubjectMeta { id: format!("c{c}s{i}"), group, pair_id: None };
                let x = [rng.sample::<f64, _>(StandardNormal) + shift, rng.random::<f64>() * 3.0];
                SubjectFeatures::new(&meta, x, 1)
            })
            .collect();
        let labels: Vec<Group> = subjects.iter().map(|s| s.group).collect();
        let assignment = stratified_kfold_split(&labels, 10, rng.random()).map_err(err)?;
        for fold in 0..10 {
            let clean = run_fold(&subjects, &assignment, fold, &cfg).0.model.ok_or("fold failed")?;
            let mut perturbed = subjects.clone();
            for i in assignment.test_indices(fold) {
                perturbed[i].feature_vector[0] += 1000.0;
                perturbed[i].feature_vector[1] += 1000.0;
            }
            let dirty = run_fold(&perturbed, &assignment, fold, &cfg).0.model.ok_or("fold failed")?;
            let same_norm = clean.normalizer.means.map(f64::to_bits) == dirty.normalizer.means.map(f64::to_bits)
                && clean.normalizer.stds.map(f64::to_bits) == dirty.normalizer.stds.map(f64::to_bits);
            let same_w = clean.weights.map(f64::to_bits) == dirty.weights.map(f64::to_bits)
                && clean.bias.to_bits() == dirty.bias.to_bits();
            ensure(same_norm && same_w, || format!("cohort {c} fold {fold}: training state changed"))?;
            folds_checked += 1;
        }
    }
    Ok(format!("50 cohorts, {folds_checked} folds: normalizers and weights bit-identical"))
}

fn mann_whitney(data: &[ScoredLabel]) -> f64 {
    let pos: Vec<f64> = data.iter().filter(|s| s.label == Group::Pvh).map(|s| s.score).collect();
    let neg: Vec<f64> = data.iter().filter(|s| s.label == Group::Control).map(|s| s.score).collect();
    let mut wins = 0.0;
    for p in &pos {
        for q in &neg {
            wins += if p > q { 1.0 } else if p == q { 0.5 } else { 0.0 };
        }
    }
    wins / (pos.len() * neg.len()) as f64
}

fn c6_auc_oracle() -> Outcome {
    let mut rng = rng_from(6);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(2..=200);
        let levels = rng.random_range(2..20);
        let mut data: Vec<ScoredLabel> = (0..n)
            .map(|_| ScoredLabel {
                score: rng.random_range(0..levels) as f64 / levels as f64,
                label: if rng.random::<bool>() { Group::Pvh } else { Group::Control },
            })
            .collect();
        data[0].label = Group::Pvh;
        data[1].label = Group::Control;
        worst = worst.max((auc(&data).map_err(err)? - mann_whitney(&data)).abs());
    }
    ensure(worst <= 1e-12, || format!("max |AUC - U| {worst:e}"))?;
    Ok(format!("200 tied instances, max |AUC - U/(n+ n-)| {worst:.1e}"))
}

fn c7_power_fit() -> Outcome {
    let cfg = PowerFitConfig::default();
    let exact: Vec<(f64, f64)> = [1.0, 2.0, 4.0].iter().map(|&x: &f64| (x, -10.0 / x + 80.0)).collect();
    let f = fit_power_law(&exact, &cfg).map_err(err)?;
    ensure(
        (f.a + 10.0).abs() < 1e-6 && (f.b + 1.0).abs() < 1e-6 && (f.c - 80.0).abs() < 1e-6 && f.sse <= 1e-10,
        || format!("exact fit gave {f:?}"),
    )?;
    let mut rng = rng_from(7);
    for i in 0..50 {
        let (a, b, c) = (rng.random_range(-20.0..-2.0), rng.random_range(-2.5..-0.1), rng.random_range(55.0..85.0));
        let pts: Vec<(f64, f64)> = (1..=7)
            .map(|x| {
                let x = x as f64;
                (x, a * x.powf(b) + c + 0.5 * rng.sample::<f64, _>(StandardNormal))
            })
            .collect();
        let gen_sse: f64 = pts.iter().map(|(x, y)| (y - a * x.powf(b) - c).powi(2)).sum();
        let fit = fit_power_law(&pts, &cfg).map_err(err)?;
        ensure(fit.sse <= gen_sse, || format!("curve {i}: fitted sse {} > generating sse {gen_sse}", fit.sse))?;
    }
    Ok(format!("exact recovery sse {:.1e}; 50 noisy curves fit at or below generator sse", f.sse))
}

fn c8_daycount() -> Outcome {
    let cohort = gen_cohort(&CohortSpec::default()).map_err(err)?;
    let r = run_experiment2_daycount(&cohort, 200, 8, &ExperimentConfig::default()).map_err(err)?;
    let acc: Vec<f64> = r.curve.iter().map(|p| p.accuracy_pct.mean).collect();
    ensure(acc.len() == 7, || format!("{} curve points", acc.len()))?;
    let gain = acc[6] - acc[0];
    ensure(gain >= 2.0, || format!("7-day minus 1-day accuracy {gain:.2} pp"))?;
    let fit = r.power_fit.ok_or("no power fit")?;
    ensure(fit.b < 0.0, || format!("exponent b = {}", fit.b))?;
    let gains: Vec<f64> = (1..=7).map(|x| marginal_gain(&fit, x)).collect();
    ensure(gains.windows(2).all(|w| w[1] < w[0]), || format!("gains not strictly decreasing: {gains:?}"))?;
    let rho = r.correlation.ok_or("no correlation")?;
    ensure(rho.rho > 0.0 && rho.p < 0.05, || format!("rho {} p {}", rho.rho, rho.p))?;
    Ok(format!(
        "accuracy {:.2} -> {:.2} % (+{gain:.2} pp), b = {:.3}, rho = {:.3} (p = {:.1e})",
        acc[0], acc[6], fit.b, rho.rho, rho.p
    ))
}

fn c9_fixed_duration() -> Outcome {
    let cfg = ExperimentConfig::default();
    let on = run_experiment2_fixed_duration(&gen_cohort(&CohortSpec::default()).map_err(err)?, 200, 9, &cfg).map_err(err)?;
    let off = run_experiment2_fixed_duration(&gen_cohort(&CohortSpec::default().without_day_drift()).map_err(err)?, 200, 9, &cfg)
        .map_err(err)?;
    let t = on.comparison("days4_vs_days1").and_then(|c| c.t_test).ok_or("no k=4 vs k=1 test")?;
    let (k1, k4) = (on.curve[0].accuracy_pct.mean, on.curve[3].accuracy_pct.mean);
    ensure(k4 > k1 && t.p_greater() < 0.05, || format!("drift on: k=1 {k1:.2}, k=4 {k4:.2}, one-sided p {}", t.p_greater()))?;
    let flat = (off.curve[3].accuracy_pct.mean - off.curve[0].accuracy_pct.mean).abs();
    ensure(flat <= 1.5, || format!("drift off: |k=4 - k=1| = {flat:.2} pp"))?;
    for (label, r) in [("on", &on), ("off", &off)] {
        let a = r.window_audit.ok_or("no audit")?;
        ensure(a.violations == 0 && a.min_voiced_frames_seen >= a.required_voiced_frames, || format!("drift {label}: {a:?}"))?;
    }
    Ok(format!(
        "drift on k=1 {k1:.2} -> k=4 {k4:.2} % (p = {:.1e}); drift off |diff| {flat:.2} pp; audit clean",
        t.p_greater()
    ))
}

fn c10_stratification() -> Outcome {
    let mut rng = rng_from(10);
    for seed in 0..1000u64 {
        let (n_pvh, n_ctl) = (rng.random_range(10..150), rng.random_range(10..150));
        let mut labels = vec![Group::Pvh; n_pvh];
        labels.extend(vec![Group::Control; n_ctl]);
        let a = stratified_kfold_split(&labels, 10, seed).map_err(err)?;
        for g in [Group::Pvh, Group::Control] {
            let sizes: Vec<usize> = (0..10).map(|f| a.test_indices(f).iter().filter(|&&i| labels[i] == g).count()).collect();
            let spread = sizes.iter().max().unwrap() - sizes.iter().min().unwrap();
            ensure(spread <= 1, || format!("seed {seed} {g:?}: fold sizes {sizes:?}"))?;
        }
        let mut lab = vec![Group::Pvh; 92];
        lab.extend(vec![Group::Control; 112]);
        let keep = undersample_indices(&lab, seed);
        let pvh = keep.iter().filter(|&&i| i < 92).count();
        ensure(pvh == 92 && keep.len() == 184, || format!("seed {seed}: kept {} pvh of {}", pvh, keep.len()))?;
    }
    Ok("1000 seeds: per-class fold sizes within 1; (92, 112) -> 92 + 92".into())
}

fn t_density_tail(t: f64, df: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    let ln_c = ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
    let f = |x: f64| (ln_c - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp();
    // composite Simpson on [0, |t|]
    let n = 20_000;
    let h = t.abs() / n as f64;
    let mut s = f(0.0) + f(t.abs());
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    1.0 - 2.0 * s * h / 3.0
}

fn brute_spearman(x: &[f64], y: &[f64]) -> f64 {
    let rank = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .map(|a| {
                let below = v.iter().filter(|b| *b < a).count() as f64;
                let equal = v.iter().filter(|b| *b == a).count() as f64;
                below + (equal + 1.0) / 2.0
            })
            .collect()
    };
    let (rx, ry) = (rank(x), rank(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let sxy: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

fn c11_stats_oracles() -> Outcome {
    let d1 = cohens_d(&[0.0, 1.0, 2.0], &[-1.0, 0.0, 1.0]).map_err(err)?;
    let d2 = cohens_d(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]).map_err(err)?;
    let d3 = cohens_d(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).map_err(err)?;
    ensure(d1 == 1.0 && d2 == -1.0 && d3 == 0.0, || format!("Cohen's D hand cases {d1} {d2} {d3}"))?;

    let mut rng = rng_from(11);
    let mut worst_p = 0.0f64;
    for _ in 0..20 {
        let t = rng.random_range(-5.0..5.0);
        let df = rng.random_range(1.0..60.0);
        worst_p = worst_p.max((t_two_sided_p(t, df) - t_density_tail(t, df)).abs());
    }
    ensure(worst_p <= 1e-6, || format!("Welch p vs quadrature {worst_p:e}"))?;

    let mut worst_rho = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(3..40);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0..6) as f64).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(0..4) as f64).collect();
        if let Ok(r) = spearman_rho(&x, &y) {
            worst_rho = worst_rho.max((r.rho - brute_spearman(&x, &y)).abs());
        }
    }
    ensure(worst_rho <= 1e-12, || format!("Spearman vs brute force {worst_rho:e}"))?;
    Ok(format!("Cohen's D exact; Welch p vs quadrature {worst_p:.1e}; Spearman with ties {worst_rho:.1e}"))
}

const SMALL_CONFIG: &str = "seed = 11
[reps]
exp2 = 20
[experiment]
min_hours = 0.25
max_days = 3
[experiment.windows]
total_hours = 0.25
min_voiced_frames = 300
[synth]
n_pvh = 10
n_control = 10
days_per_subject = 3
day_hours = 0.25
";

fn dpi(args: &[&str], dir: &Path) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_dpi"))
        .args(args)
        .arg("--quiet")
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("dpi {args:?}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn c12_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = tmp.path();
    std::fs::write(dir.join("small.toml"), SMALL_CONFIG).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for (run, workers) in [("a", "1"), ("b", "1"), ("c", "3")] {
        dpi(&["--config", "small.toml", "--out", run, "--workers", workers, "synth"], dir)?;
        let manifest = format!("{run}/manifest.json");
        dpi(&["--config", "small.toml", "--out", run, "--workers", workers, "exp2a", "--manifest", &manifest], dir)?;
        outputs.push(std::fs::read(dir.join(run).join("exp2a.json")).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == outputs[1], || "two runs with one worker differ".into())?;
    ensure(outputs[0] == outputs[2], || "1 and 3 workers differ".into())?;
    Ok(format!("synth -> exp2a: {} bytes, identical across 2 runs and 1/3 workers", outputs[0].len()))
}

fn main() {
    let started = Instant::now();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 null baseline, 134 pairs", Box::new(c1_null_134)),
        ("2 null baseline, 64 pairs", Box::new(c2_null_64)),
        ("3 H1-H2 analytic grid", Box::new(c3_h1h2_grid)),
        ("4 skewness invariance", Box::new(c4_skew_invariance)),
        ("5 leakage guard", Box::new(c5_leakage)),
        ("6 AUC equals Mann-Whitney", Box::new(c6_auc_oracle)),
        ("7 power-law fit", Box::new(c7_power_fit)),
        ("8 day-count curve shape", Box::new(c8_daycount)),
        ("9 fixed-duration windows", Box::new(c9_fixed_duration)),
        ("10 stratification and undersampling", Box::new(c10_stratification)),
        ("11 statistics oracles", Box::new(c11_stats_oracles)),
        ("12 end-to-end determinism", Box::new(c12_determinism)),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  criterion {name}: {detail} [{secs:.1}s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {name}: {why} [{secs:.1}s]");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed ({:.0}s)",
        criteria.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
