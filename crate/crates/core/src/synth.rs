//! Deterministic generators: analytic test signals, calibration sweeps and
//! planted-effect cohorts at the frame-feature level.
//!
//! A cohort subject's frames are generated on demand from seeds derived from
//! the cohort seed, the subject index and the day index, so a week of 50 ms
//! frames never has to be held in memory at once.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{frames_in_hours, Group, SubjectMeta};
use crate::rng::{derive_seed, rng_from, stream, DpiRng};
use crate::signal::{AccelRecording, Condition, FrameFeatureRow};

/// `sum_h A_h sin(2 pi h f0 t)`, rescaled only if its peak exceeds 1.
pub fn gen_harmonic_signal(f0: f64, amplitudes: &[f64], fs: u32, duration_s: f64) -> Result<AccelRecording> {
    let nyquist = fs as f64 / 2.0;
    let top = f0 * amplitudes.len() as f64;
    if top >= nyquist {
        return Err(Error::AliasedHarmonic { freq_hz: top, nyquist_hz: nyquist });
    }
    let n = (duration_s * fs as f64).round() as usize;
    let mut samples: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / fs as f64;
            amplitudes
                .iter()
                .enumerate()
                .map(|(h, a)| a * (2.0 * PI * (h + 1) as f64 * f0 * t).sin())
                .sum()
        })
        .collect();
    let peak = samples.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if peak > 1.0 {
        samples.iter_mut().for_each(|x| *x /= peak);
    }
    AccelRecording::new(samples, fs, "synthetic", Condition::LabRainbow, None)
}

/// NSAM range of the loud-to-soft calibration sweep, dB re full scale.
pub const CALIBRATION_SWEEP_DB: (f64, f64) = (-45.0, -10.0);

/// `(nsam_db, spl_db)` pairs on a line plus Gaussian noise.
pub fn gen_calibration_pairs(slope: f64, intercept: f64, noise_std: f64, n: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    let mut rng = rng_from(derive_seed(seed, stream::CALIBRATION));
    let (lo, hi) = CALIBRATION_SWEEP_DB;
    Ok((0..n)
        .map(|_| {
            let x = rng.random_range(lo..hi);
            let e: f64 = if noise_std > 0.0 { noise_std * rng.sample::<f64, _>(StandardNormal) } else { 0.0 };
            (x, slope * x + intercept + e)
        })
        .collect())
}

/// Per-group generator parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupParams {
    pub h1h2_mean: f64,
    /// Within-day standard deviation of frame H1-H2 (dB).
    pub h1h2_within_std: f64,
    pub nsam_location: f64,
    pub nsam_scale: f64,
    /// Skew-normal shape of frame NSAM.
    pub nsam_shape: f64,
}

/// Random perturbations of the parameters that shape each feature.
///
/// `h1h2_log_std` scales the H1-H2 spread multiplicatively (log-normal),
/// `nsam_shape` shifts the skew-normal shape, and the two offsets move the
/// feature means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Variation {
    pub h1h2_offset: f64,
    pub h1h2_log_std: f64,
    pub nsam_offset: f64,
    pub nsam_shape: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabSpec {
    pub seconds: f64,
    pub voicing_rate: f64,
    /// When false both groups draw lab frames from the control parameters.
    pub informative: bool,
}

impl Default for LabSpec {
    fn default() -> Self {
        LabSpec { seconds: 30.0, voicing_rate: 0.6, informative: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CohortSpec {
    pub n_pvh: usize,
    pub n_control: usize,
    pub days_per_subject: usize,
    pub day_hours: f64,
    pub voicing_rate: f64,
    pub pvh: GroupParams,
    pub control: GroupParams,
    /// Spread of subjects around their group parameters.
    pub between_subject: Variation,
    /// Spread of days around their subject parameters.
    pub between_day: Variation,
    pub lab: LabSpec,
    pub seed: u64,
}

impl Default for CohortSpec {
    fn default() -> Self {
        CohortSpec {
            n_pvh: 50,
            n_control: 50,
            days_per_subject: 7,
            day_hours: 6.0,
            voicing_rate: 0.2,
            pvh: GroupParams {
                h1h2_mean: 8.0,
                h1h2_within_std: 3.0,
                nsam_location: -20.0,
                nsam_scale: 6.0,
                nsam_shape: -2.0,
            },
            control: GroupParams {
                h1h2_mean: 9.0,
                h1h2_within_std: 3.45,
                nsam_location: -24.0,
                nsam_scale: 6.0,
                nsam_shape: -1.0,
            },
            between_subject: Variation {
                h1h2_offset: 1.0,
                h1h2_log_std: 0.12,
                nsam_offset: 2.0,
                nsam_shape: 1.0,
            },
            between_day: Variation {
                h1h2_offset: 1.0,
                h1h2_log_std: 0.15,
                nsam_offset: 2.0,
                nsam_shape: 1.2,
            },
            lab: LabSpec::default(),
            seed: 1,
        }
    }
}

impl CohortSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::DegenerateInput(format!("cohort spec: {m}")));
        if !(self.voicing_rate > 0.0 && self.voicing_rate < 1.0) {
            return bad("voicing_rate must be in (0, 1)");
        }
        if !(self.lab.voicing_rate > 0.0 && self.lab.voicing_rate < 1.0) {
            return bad("lab.voicing_rate must be in (0, 1)");
        }
        if !(self.day_hours > 0.0) || !(self.lab.seconds >= 0.0) {
            return bad("durations must be positive");
        }
        for g in [&self.pvh, &self.control] {
            if !(g.h1h2_within_std >= 0.0) || !(g.nsam_scale >= 0.0) {
                return bad("group spreads must be non-negative");
            }
        }
        for v in [&self.between_subject, &self.between_day] {
            if [v.h1h2_offset, v.h1h2_log_std, v.nsam_offset, v.nsam_shape].iter().any(|s| !(*s >= 0.0)) {
                return bad("variation spreads must be non-negative");
            }
        }
        Ok(())
    }

    /// Removes every source of between-day variation.
    pub fn without_day_drift(mut self) -> Self {
        self.between_day = Variation::default();
        self
    }
}

/// Draws from a skew-normal with the given shape (location 0, scale 1).
pub fn sample_skew_normal(rng: &mut DpiRng, shape: f64) -> f64 {
    let delta = shape / (1.0 + shape * shape).sqrt();
    let u0: f64 = rng.sample(StandardNormal);
    let u1: f64 = rng.sample(StandardNormal);
    delta * u0.abs() + (1.0 - delta * delta).sqrt() * u1
}

/// Closed-form skewness of a skew-normal with the given shape.
pub fn skew_normal_skewness(shape: f64) -> f64 {
    let delta = shape / (1.0 + shape * shape).sqrt();
    let m = delta * (2.0 / PI).sqrt();
    (4.0 - PI) / 2.0 * m.powi(3) / (1.0 - m * m).powf(1.5)
}

/// Parameters of one frame distribution (a subject, a day or a lab session).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameParams {
    pub h1h2_mean: f64,
    pub h1h2_std: f64,
    pub nsam_location: f64,
    pub nsam_scale: f64,
    pub nsam_shape: f64,
}

impl FrameParams {
    fn from_group(g: &GroupParams) -> Self {
        FrameParams {
            h1h2_mean: g.h1h2_mean,
            h1h2_std: g.h1h2_within_std,
            nsam_location: g.nsam_location,
            nsam_scale: g.nsam_scale,
            nsam_shape: g.nsam_shape,
        }
    }

    fn perturbed(&self, v: &Variation, rng: &mut DpiRng) -> Self {
        let mut z = || -> f64 { rng.sample(StandardNormal) };
        FrameParams {
            h1h2_mean: self.h1h2_mean + v.h1h2_offset * z(),
            h1h2_std: self.h1h2_std * (v.h1h2_log_std * z()).exp(),
            nsam_location: self.nsam_location + v.nsam_offset * z(),
            nsam_scale: self.nsam_scale,
            nsam_shape: self.nsam_shape + v.nsam_shape * z(),
        }
    }
}

/// Background NSAM of unvoiced frames.
const UNVOICED_NSAM: (f64, f64) = (-55.0, 3.0);
/// f0 reported for voiced synthetic frames.
const SYNTH_F0_HZ: f64 = 200.0;

fn gen_rows(params: &FrameParams, n_frames: usize, voicing_rate: f64, rng: &mut DpiRng) -> Vec<FrameFeatureRow> {
    let h1h2 = Normal::new(params.h1h2_mean, params.h1h2_std).expect("finite spread");
    let background = Normal::new(UNVOICED_NSAM.0, UNVOICED_NSAM.1).expect("finite spread");
    (0..n_frames)
        .map(|i| {
            if rng.random_bool(voicing_rate) {
                let nsam = params.nsam_location + params.nsam_scale * sample_skew_normal(rng, params.nsam_shape);
                FrameFeatureRow {
                    frame_index: i as u64,
                    voiced: true,
                    f0_hz: Some(SYNTH_F0_HZ),
                    h1h2_db: Some(h1h2.sample(rng)),
                    nsam_db: Some(nsam),
                }
            } else {
                FrameFeatureRow::unvoiced(i as u64, Some(background.sample(rng)))
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSubject {
    pub meta: SubjectMeta,
    pub params: FrameParams,
    seed: u64,
}

/// A generated cohort; frame rows are produced on request.
#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    pub spec: CohortSpec,
    pub subjects: Vec<SyntheticSubject>,
}

/// Builds the subject roster (PVH first, then controls) and draws each
/// subject's parameters.
pub fn gen_cohort(spec: &CohortSpec) -> Result<Cohort> {
    spec.validate()?;
    let groups = std::iter::repeat_n(Group::Pvh, spec.n_pvh).chain(std::iter::repeat_n(Group::Control, spec.n_control));
    let subjects = groups
        .enumerate()
        .map(|(i, group)| {
            let seed = derive_seed(spec.seed, stream::SUBJECT.wrapping_mul(1 << 32) + i as u64);
            let mut rng = rng_from(seed);
            let base = FrameParams::from_group(match group {
                Group::Pvh => &spec.pvh,
                Group::Control => &spec.control,
            });
            let prefix = if group == Group::Pvh { "pvh" } else { "ctl" };
            SyntheticSubject {
                meta: SubjectMeta { id: format!("{prefix}{i:04}"), group, pair_id: None },
                params: base.perturbed(&spec.between_subject, &mut rng),
                seed,
            }
        })
        .collect();
    Ok(Cohort { spec: spec.clone(), subjects })
}

impl Cohort {
    pub fn frames_per_day(&self) -> usize {
        frames_in_hours(self.spec.day_hours)
    }

    pub fn day_params(&self, subject: usize, day: u32) -> FrameParams {
        let s = &self.subjects[subject];
        let mut rng = rng_from(derive_seed(s.seed, stream::DAY.wrapping_mul(1 << 32) + day as u64));
        s.params.perturbed(&self.spec.between_day, &mut rng)
    }

    /// Frame rows of one monitoring day.
    pub fn day_rows(&self, subject: usize, day: u32) -> Vec<FrameFeatureRow> {
        let s = &self.subjects[subject];
        let mut rng = rng_from(derive_seed(s.seed, stream::DAY.wrapping_mul(1 << 32) + day as u64));
        let params = s.params.perturbed(&self.spec.between_day, &mut rng);
        gen_rows(&params, self.frames_per_day(), self.spec.voicing_rate, &mut rng)
    }

    /// Frame rows of the in-lab recording for `condition`.
    pub fn lab_rows(&self, subject: usize, condition: Condition) -> Vec<FrameFeatureRow> {
        let s = &self.subjects[subject];
        let tag = stream::LAB.wrapping_mul(1 << 32) + condition as u64;
        let mut rng = rng_from(derive_seed(s.seed, tag));
        let params = if self.spec.lab.informative {
            s.params
        } else {
            FrameParams::from_group(&self.spec.control).perturbed(&self.spec.between_subject, &mut rng)
        };
        let params = params.perturbed(&self.spec.between_day, &mut rng);
        let n = (self.spec.lab.seconds / crate::features::FRAME_SECONDS).round() as usize;
        gen_rows(&params, n, self.spec.lab.voicing_rate, &mut rng)
    }
}
