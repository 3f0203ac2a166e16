//! The `dpi` command line. Exit codes: 0 success, 1 usage error, 2 data error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::eval::repeat_cross_validation;
use crate::experiments::{
    field_day_features, run_experiment1, run_experiment2_daycount, run_experiment2_fixed_duration, run_null_baseline, CohortSource,
    ConditionResult, ExperimentReport, NullDistribution,
};
use crate::features::{aggregate_days, filter_valid_days, Group, SubjectFeatures};
use crate::io::{
    emit_plot_data, load_manifest, read_wav, write_frame_csv, write_manifest, write_results, FrameTable, Manifest, ManifestCohort,
    ManifestSubject, RecordingEntry, ResultsDocument,
};
use crate::signal::{extract_frame_features, fit_calibration, Condition};
use crate::stats::{fit_power_law, marginal_gain, threshold_day};
use crate::synth::{gen_cohort, Cohort};

#[derive(Parser, Debug)]
#[command(name = "dpi", version, about = "Daily Phonotrauma Index toolkit")]
struct Cli {
    /// TOML (or .json) configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, env = "DPI_SEED")]
    seed: Option<u64>,
    /// Repetitions for the selected command.
    #[arg(long, global = true)]
    reps: Option<usize>,
    #[arg(long, global = true)]
    folds: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[arg(long, short, global = true)]
    quiet: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

fn parse_condition(s: &str) -> std::result::Result<Condition, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_distribution(s: &str) -> std::result::Result<NullDistribution, String> {
    match s {
        "normal" => Ok(NullDistribution::Normal),
        "uniform" => Ok(NullDistribution::Uniform),
        _ => Err(format!("unknown distribution {s:?} (normal, uniform)")),
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// WAV -> frame-feature CSV (single files, or every WAV of a manifest).
    Extract {
        wavs: Vec<PathBuf>,
        #[arg(long, conflicts_with = "wavs")]
        manifest: Option<PathBuf>,
        #[arg(long)]
        subject: Option<String>,
        #[arg(long, value_parser = parse_condition, default_value = "field")]
        condition: Condition,
        #[arg(long)]
        day: Option<u32>,
    },
    /// Frame CSVs of a manifest -> day and subject features.
    Features {
        #[arg(long)]
        manifest: PathBuf,
        /// Days averaged per subject (default: every valid day).
        #[arg(long)]
        days: Option<usize>,
    },
    /// Fit the NSAM -> SPL line from a `nsam_db,spl_db` CSV.
    Calibrate { pairs: PathBuf },
    /// Repeated stratified cross-validation on a subject-features CSV.
    Crossval { features: PathBuf },
    /// In-lab vs in-field DPI.
    Exp1 {
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, value_parser = parse_condition, default_value = "lab_rainbow")]
        lab: Condition,
    },
    /// Accuracy vs number of monitoring days.
    Exp2a {
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Accuracy vs number of days under a fixed recording budget.
    Exp2b {
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Random-feature chance bound.
    Null {
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long, value_parser = parse_distribution)]
        distribution: Option<NullDistribution>,
    },
    /// Write a synthetic cohort as manifest plus frame CSVs.
    Synth,
    /// Power-law fit of a `days,accuracy` CSV.
    FitCurve { curve: PathBuf },
}

/// Parses `args` (including the program name) and runs the command.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = if cli.quiet { log::LevelFilter::Warn } else { log::LevelFilter::Info };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().try_init();

    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.workers.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(()) => 0,
        Err(Error::Usage(msg)) => {
            eprintln!("error: {msg}\n\nUsage: dpi [OPTIONS] <COMMAND>\nRun `dpi --help` for the list of commands.");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

struct Ctx {
    cfg: Config,
    seed: u64,
    out: PathBuf,
    quiet: bool,
}

impl Ctx {
    fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }

    fn save(&self, experiment: &str, results: &impl Serialize) -> Result<PathBuf> {
        let doc = ResultsDocument::new(experiment, self.seed, &self.cfg, results)?;
        let p = self.out.join(format!("{experiment}.json"));
        write_results(&doc, &p)?;
        Ok(p)
    }

    fn save_report(&self, report: &ExperimentReport) -> Result<()> {
        let p = self.save(&report.experiment, report)?;
        emit_plot_data(report, &self.out)?;
        self.say(format!("results: {}", p.display()));
        Ok(())
    }
}

fn run(cli: &Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(k) = cli.folds {
        if k < 2 {
            return Err(Error::Usage("--folds must be at least 2".into()));
        }
        cfg.experiment.folds = k;
    }
    if let Some(r) = cli.reps {
        match cli.command {
            Command::Exp1 { .. } => cfg.reps.exp1 = r,
            Command::Exp2a { .. } | Command::Exp2b { .. } => cfg.reps.exp2 = r,
            Command::Null { .. } => cfg.reps.null = r,
            Command::Crossval { .. } => cfg.reps.crossval = r,
            _ => {}
        }
    }
    if let Command::Synth = cli.command {
        if let Some(s) = cli.seed {
            cfg.synth.seed = s;
        }
    }
    std::fs::create_dir_all(&cli.out).map_err(|e| Error::io(&cli.out, e))?;
    let ctx = Ctx { seed: cfg.seed, cfg, out: cli.out.clone(), quiet: cli.quiet };

    match &cli.command {
        Command::Extract { wavs, manifest, subject, condition, day } => extract(&ctx, wavs, manifest.as_deref(), subject.as_deref(), *condition, *day),
        Command::Features { manifest, days } => features(&ctx, manifest, *days),
        Command::Calibrate { pairs } => calibrate(&ctx, pairs),
        Command::Crossval { features } => crossval(&ctx, features),
        Command::Exp1 { manifest, lab } => {
            let r = with_source(&ctx, manifest.as_deref(), |s| run_experiment1(s, *lab, ctx.cfg.reps.exp1, ctx.seed, &ctx.cfg.experiment))?;
            for c in &r.conditions {
                ctx.say(format!("{:>16}: accuracy {:.1} +/- {:.1} %, AUC {}", c.condition, 100.0 * c.summary.accuracy.mean, 100.0 * c.summary.accuracy.std, fmt_opt(c.auc)));
            }
            for c in &r.comparisons {
                ctx.say(format!("{}: p = {}, D = {}", c.name, fmt_opt(c.t_test.map(|t| t.p)), fmt_opt(c.cohens_d)));
            }
            ctx.save_report(&r)
        }
        Command::Exp2a { manifest } => {
            let r = with_source(&ctx, manifest.as_deref(), |s| run_experiment2_daycount(s, ctx.cfg.reps.exp2, ctx.seed, &ctx.cfg.experiment))?;
            print_curve(&ctx, &r);
            ctx.save_report(&r)
        }
        Command::Exp2b { manifest } => {
            let r = with_source(&ctx, manifest.as_deref(), |s| run_experiment2_fixed_duration(s, ctx.cfg.reps.exp2, ctx.seed, &ctx.cfg.experiment))?;
            print_curve(&ctx, &r);
            if let Some(a) = r.window_audit {
                ctx.say(format!("windows audited: {} (min voiced {}, violations {}, redraws {})", a.windows, a.min_voiced_frames_seen, a.violations, a.redraws));
            }
            ctx.save_report(&r)
        }
        Command::Null { pairs, distribution } => {
            let pairs = pairs.unwrap_or(ctx.cfg.null.pairs);
            let dist = distribution.unwrap_or(ctx.cfg.null.distribution);
            let res = run_null_baseline(pairs, ctx.cfg.reps.null, ctx.cfg.experiment.folds, ctx.seed, dist, &ctx.cfg.experiment.logistic)?;
            ctx.say(format!("null baseline, {pairs} pairs, {} reps", res.n_reps));
            ctx.say(format!("mean accuracy: {:.2} %", 100.0 * res.mean_accuracy));
            ctx.say(format!("95th percentile (one-sided 95% bound): {:.2} %", 100.0 * res.upper_95));
            let mut r = ExperimentReport::new("null", &ctx.cfg.experiment, ctx.seed, res.n_reps);
            r.null = Some(res);
            ctx.save_report(&r)
        }
        Command::Synth => synth(&ctx),
        Command::FitCurve { curve } => fit_curve(&ctx, curve),
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.4}")).unwrap_or_else(|| "n/a".into())
}

fn with_source<T>(ctx: &Ctx, manifest: Option<&Path>, f: impl FnOnce(&dyn CohortSource) -> Result<T>) -> Result<T> {
    match manifest {
        Some(p) => f(&ManifestCohort::new(load_manifest(p)?, ctx.cfg.extraction.clone())),
        None => {
            log::info!("no manifest given; using the synthetic cohort from the config");
            f(&gen_cohort(&ctx.cfg.synth)?)
        }
    }
}

fn print_curve(ctx: &Ctx, r: &ExperimentReport) {
    ctx.say(format!("subjects: {} included, {} excluded", r.cohort.included.len(), r.cohort.excluded.len()));
    for p in &r.curve {
        ctx.say(format!("days {}: accuracy {:.2} +/- {:.2} %", p.days, p.accuracy_pct.mean, p.accuracy_pct.std));
    }
    if let Some(f) = &r.power_fit {
        ctx.say(format!("fit: y = {:.4} x^{:.4} + {:.4}", f.a, f.b, f.c));
    }
    for t in &r.thresholds {
        ctx.say(format!("gain < {} pp from day {}", t.threshold_pp, t.day.map(|d| d.to_string()).unwrap_or_else(|| "n/a".into())));
    }
    if let Some(c) = &r.correlation {
        ctx.say(format!("spearman rho = {:.4}, p = {:.3e}", c.rho, c.p));
    }
}

fn frames_name(subject: &str, condition: Condition, day: Option<u32>) -> String {
    match day {
        Some(d) => format!("{subject}_{condition}_d{d}.csv"),
        None => format!("{subject}_{condition}.csv"),
    }
}

fn extract(ctx: &Ctx, wavs: &[PathBuf], manifest: Option<&Path>, subject: Option<&str>, condition: Condition, day: Option<u32>) -> Result<()> {
    let cfg = &ctx.cfg.extraction;
    if let Some(mp) = manifest {
        let m = load_manifest(mp)?;
        let frames_dir = ctx.out.join("frames");
        std::fs::create_dir_all(&frames_dir).map_err(|e| Error::io(&frames_dir, e))?;
        let subjects = m
            .subjects
            .par_iter()
            .map(|s| {
                let recordings = s
                    .recordings
                    .iter()
                    .map(|r| {
                        let rec = read_wav(&m.resolve(&r.path), &s.id, r.condition, r.day)?;
                        let rows = extract_frame_features(&rec, cfg)?.rows;
                        let name = frames_name(&s.id, r.condition, r.day);
                        write_frame_csv(&[FrameTable { subject_id: s.id.clone(), condition: r.condition, day: r.day, rows }], &frames_dir.join(&name))?;
                        Ok(RecordingEntry { path: Path::new("frames").join(name), condition: r.condition, day: r.day })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(ManifestSubject { recordings, ..s.clone() })
            })
            .collect::<Result<Vec<_>>>()?;
        let out = ctx.out.join("manifest.json");
        write_manifest(&Manifest { subjects, base_dir: ctx.out.clone() }, &out)?;
        ctx.say(format!("frame manifest: {}", out.display()));
        return Ok(());
    }
    if wavs.is_empty() {
        return Err(Error::Usage("extract needs WAV paths or --manifest".into()));
    }
    for w in wavs {
        let stem = w.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "recording".into());
        let id = subject.unwrap_or(&stem);
        let rec = read_wav(w, id, condition, day)?;
        let ff = extract_frame_features(&rec, cfg)?;
        let out = ctx.out.join(format!("{stem}.csv"));
        let voiced = ff.voiced_count();
        write_frame_csv(&[FrameTable { subject_id: id.to_owned(), condition, day, rows: ff.rows }], &out)?;
        ctx.say(format!("{}: {voiced} voiced frames -> {}", w.display(), out.display()));
    }
    Ok(())
}

fn features(ctx: &Ctx, manifest: &Path, days: Option<usize>) -> Result<()> {
    let cohort = ManifestCohort::new(load_manifest(manifest)?, ctx.cfg.extraction.clone());
    let metas = cohort.subjects();
    let per_subject = metas
        .par_iter()
        .enumerate()
        .map(|(i, m)| field_day_features(&cohort, i, m).map(|d| filter_valid_days(&d, ctx.cfg.experiment.min_hours)))
        .collect::<Result<Vec<_>>>()?;

    let day_path = ctx.out.join("day_features.csv");
    let mut dw = csv::Writer::from_path(&day_path).map_err(|e| Error::Parse(e.to_string()))?;
    let subj_path = ctx.out.join("subject_features.csv");
    let mut sw = csv::Writer::from_path(&subj_path).map_err(|e| Error::Parse(e.to_string()))?;
    let csv_err = |e: csv::Error| Error::Parse(e.to_string());
    dw.write_record(["subject_id", "day", "h1h2_std", "nsam_skewness", "voiced_frames", "total_frames"]).map_err(csv_err)?;
    sw.write_record(["subject_id", "group", "pair_id", "h1h2_std", "nsam_skewness", "days_used"]).map_err(csv_err)?;
    for (m, valid) in metas.iter().zip(&per_subject) {
        for d in valid {
            dw.write_record([
                d.subject_id.clone(),
                d.day_index.to_string(),
                d.h1h2_std.to_string(),
                d.nsam_skewness.to_string(),
                d.voiced_frame_count.to_string(),
                d.total_frame_count.to_string(),
            ])
            .map_err(csv_err)?;
        }
        let k = days.unwrap_or(valid.len());
        match aggregate_days(m, valid, k) {
            Ok(f) => sw
                .write_record([
                    f.subject_id,
                    f.group.as_str().to_owned(),
                    f.pair_id.unwrap_or_default(),
                    f.feature_vector[0].to_string(),
                    f.feature_vector[1].to_string(),
                    f.days_used.to_string(),
                ])
                .map_err(csv_err)?,
            Err(e) => log::warn!("{} skipped: {e}", m.id),
        }
    }
    dw.flush().map_err(|e| Error::io(&day_path, e))?;
    sw.flush().map_err(|e| Error::io(&subj_path, e))?;
    ctx.say(format!("{} and {}", day_path.display(), subj_path.display()));
    Ok(())
}

fn read_csv_rows(path: &Path) -> Result<(Vec<String>, Vec<csv::StringRecord>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = r.headers().map_err(|e| Error::Parse(e.to_string()))?.iter().map(str::to_owned).collect();
    let rows = r.records().collect::<std::result::Result<Vec<_>, _>>().map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    Ok((header, rows))
}

fn column(header: &[String], name: &str, path: &Path) -> Result<usize> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::SchemaMismatch(format!("{}: no column {name:?}", path.display())))
}

fn num(rec: &csv::StringRecord, i: usize) -> Result<f64> {
    let s = rec.get(i).unwrap_or("");
    s.parse().map_err(|_| Error::Parse(format!("bad number {s:?}")))
}

fn calibrate(ctx: &Ctx, path: &Path) -> Result<()> {
    let (header, rows) = read_csv_rows(path)?;
    let (x, y) = (column(&header, "nsam_db", path)?, column(&header, "spl_db", path)?);
    let pairs = rows.iter().map(|r| Ok((num(r, x)?, num(r, y)?))).collect::<Result<Vec<_>>>()?;
    let model = fit_calibration(&pairs)?;
    ctx.say(format!("spl = {:.6} * nsam + {:.6} (residual rms {:.4} dB)", model.slope, model.intercept, model.residual_rms));
    ctx.save("calibration", &model)?;
    Ok(())
}

fn crossval(ctx: &Ctx, path: &Path) -> Result<()> {
    let (header, rows) = read_csv_rows(path)?;
    let col = |n: &str| column(&header, n, path);
    let (id, group, h, s) = (col("subject_id")?, col("group")?, col("h1h2_std")?, col("nsam_skewness")?);
    let subjects = rows
        .iter()
        .map(|r| {
            Ok(SubjectFeatures {
                subject_id: r.get(id).unwrap_or("").to_owned(),
                group: r.get(group).unwrap_or("").parse::<Group>()?,
                pair_id: None,
                feature_vector: [num(r, h)?, num(r, s)?],
                days_used: 0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let cfg = &ctx.cfg;
    let report = repeat_cross_validation(&subjects, cfg.experiment.folds, cfg.reps.crossval, ctx.seed, &cfg.experiment.logistic)?;
    ctx.say(format!(
        "accuracy {:.1} +/- {:.1} %, sensitivity {:.1} %, specificity {:.1} %, AUC {}",
        100.0 * report.summary.accuracy.mean,
        100.0 * report.summary.accuracy.std,
        100.0 * report.summary.sensitivity.mean,
        100.0 * report.summary.specificity.mean,
        fmt_opt(report.auc)
    ));
    let mut r = ExperimentReport::new("crossval", &cfg.experiment, ctx.seed, cfg.reps.crossval);
    r.cohort.input = subjects.len();
    r.cohort.included = subjects.iter().map(|s| s.subject_id.clone()).collect();
    r.conditions.push(ConditionResult::from_report("features", report));
    ctx.save_report(&r)
}

fn write_synthetic(cohort: &Cohort, out: &Path) -> Result<Manifest> {
    let frames_dir = out.join("frames");
    std::fs::create_dir_all(&frames_dir).map_err(|e| Error::io(&frames_dir, e))?;
    let lab = [Condition::LabRainbow, Condition::LabSpontaneous];
    let subjects = (0..cohort.subjects.len())
        .into_par_iter()
        .map(|i| {
            let meta = &cohort.subjects[i].meta;
            let mut recordings = Vec::new();
            let mut write = |condition: Condition, day: Option<u32>, rows| -> Result<()> {
                let name = frames_name(&meta.id, condition, day);
                write_frame_csv(&[FrameTable { subject_id: meta.id.clone(), condition, day, rows }], &frames_dir.join(&name))?;
                recordings.push(RecordingEntry { path: Path::new("frames").join(name), condition, day });
                Ok(())
            };
            for c in lab {
                write(c, None, cohort.lab_rows(i, c))?;
            }
            for d in 0..cohort.spec.days_per_subject as u32 {
                write(Condition::Field, Some(d), cohort.day_rows(i, d))?;
            }
            Ok(ManifestSubject { id: meta.id.clone(), group: meta.group, pair_id: meta.pair_id.clone(), recordings })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Manifest { subjects, base_dir: out.to_path_buf() })
}

fn synth(ctx: &Ctx) -> Result<()> {
    let cohort = gen_cohort(&ctx.cfg.synth)?;
    let manifest = write_synthetic(&cohort, &ctx.out)?;
    let p = ctx.out.join("manifest.json");
    write_manifest(&manifest, &p)?;
    ctx.say(format!("{} subjects -> {}", manifest.subjects.len(), p.display()));
    Ok(())
}

#[derive(Serialize)]
struct CurveFitResult {
    fit: crate::stats::PowerFit,
    marginal_gains: Vec<f64>,
    thresholds: Vec<crate::experiments::ThresholdDay>,
}

fn fit_curve(ctx: &Ctx, path: &Path) -> Result<()> {
    let (header, rows) = read_csv_rows(path)?;
    if header.len() < 2 {
        return Err(Error::SchemaMismatch(format!("{}: need days and accuracy columns", path.display())));
    }
    let points = rows.iter().map(|r| Ok((num(r, 0)?, num(r, 1)?))).collect::<Result<Vec<_>>>()?;
    let cfg = &ctx.cfg.experiment;
    let fit = fit_power_law(&points, &cfg.power)?;
    ctx.say(format!("y = {:.6} x^{:.6} + {:.6} (sse {:.3e})", fit.a, fit.b, fit.c, fit.sse));
    let max_x = points.iter().map(|p| p.0).fold(1.0, f64::max) as u32;
    let marginal_gains: Vec<f64> = (1..=max_x).map(|d| marginal_gain(&fit, d)).collect();
    let thresholds = cfg
        .gain_thresholds_pp
        .iter()
        .map(|&t| crate::experiments::ThresholdDay { threshold_pp: t, day: threshold_day(&fit, t, cfg.horizon_days).ok() })
        .collect::<Vec<_>>();
    for t in &thresholds {
        ctx.say(format!("gain < {} from day {}", t.threshold_pp, t.day.map(|d| d.to_string()).unwrap_or_else(|| "n/a".into())));
    }
    ctx.save("fit_curve", &CurveFitResult { fit, marginal_gains, thresholds })?;
    Ok(())
}
