//! Seeded "simulated actor" cohorts with plantable structure.
//!
//! Value ranges are plausible placeholders, not published statistics.
//! Derived values are always recomputed from the generated raw series
//! (`<raw>_mean`); speech variables have no raw counterpart and are drawn
//! directly. Silent videos omit acoustics and speech entirely.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{au_variable_id, pearson, pearson_pairs, Emotion, SUPPORTED_AUS};
use crate::io::write_cohort;
use crate::model::{Category, Cohort, Kind, ModelError, RawSeries, VariableDescriptor, VideoRecord};

pub const FACIAL_RATE_HZ: f64 = 30.0;
pub const MOVEMENT_RATE_HZ: f64 = 30.0;
pub const ACOUSTIC_RATE_HZ: f64 = 100.0;
pub const GENERATOR_LOG_FILE: &str = "generator_log.json";

pub const DEFAULT_TASKS: [&str; 5] = [
    "describe a picture",
    "describe a memory",
    "describe your day",
    "read a passage",
    "vowel or facial expression",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedCorrelation {
    pub var_a: String,
    pub var_b: String,
    pub target_r: f64,
}

/// One video whose head roll is negatively coupled to every emotion series
/// except happiness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedIndividual {
    pub target_r: f64,
}

impl Default for PlantedIndividual {
    fn default() -> Self {
        Self { target_r: -0.6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub seed: u64,
    pub n_videos: usize,
    pub task_labels: Vec<String>,
    pub n_silent: usize,
    pub planted_correlations: Vec<PlantedCorrelation>,
    pub planted_individual: Option<PlantedIndividual>,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            seed: 7,
            n_videos: 95,
            task_labels: DEFAULT_TASKS.iter().map(|s| s.to_string()).collect(),
            n_silent: 10,
            planted_correlations: Vec::new(),
            planted_individual: Some(PlantedIndividual::default()),
        }
    }
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// What the generator planted, written next to the cohort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorLog {
    pub spec: SyntheticSpec,
    pub silent_video_ids: Vec<String>,
    pub face_gap_video_ids: Vec<String>,
    pub planted_correlations: Vec<RealizedCorrelation>,
    pub individual_video_id: Option<String>,
    /// Roll vs each emotion series of the planted individual video.
    pub individual_roll_r: BTreeMap<String, Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizedCorrelation {
    pub var_a: String,
    pub var_b: String,
    pub target_r: f64,
    pub realized_r: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone)]
pub struct Synthetic {
    pub cohort: Cohort,
    pub log: GeneratorLog,
}

/// Level-driven variable: per-video level `base + scale * L` with `L`
/// standard normal unless planted.
#[derive(Debug, Clone, Copy)]
struct LevelVar {
    raw_id: &'static str,
    category: Category,
    label: &'static str,
    units: &'static str,
    base: f64,
    scale: f64,
    /// Within-video fluctuation (raw series only).
    within: f64,
    /// Probability that a frame is missing on its own (e.g. unvoiced pitch).
    dropout: f64,
}

const fn level(
    raw_id: &'static str,
    category: Category,
    label: &'static str,
    units: &'static str,
    base: f64,
    scale: f64,
    within: f64,
) -> LevelVar {
    LevelVar {
        raw_id,
        category,
        label,
        units,
        base,
        scale,
        within,
        dropout: 0.0,
    }
}

const SPEECH: [LevelVar; 4] = [
    level("spe_word_count", Category::Speech, "Word count", "words", 180.0, 45.0, 0.0),
    level("spe_pronoun_count", Category::Speech, "Pronoun count", "words", 20.0, 6.0, 0.0),
    level("spe_verb_count", Category::Speech, "Verb count", "words", 30.0, 8.0, 0.0),
    level("spe_adjective_count", Category::Speech, "Adjective count", "words", 12.0, 4.0, 0.0),
];

const ACOUSTICS: [LevelVar; 5] = [
    level("aco_int", Category::Acoustics, "Audio intensity", "dB", 62.0, 4.0, 6.0),
    LevelVar {
        dropout: 0.1,
        ..level("aco_ff", Category::Acoustics, "Fundamental frequency", "Hz", 118.0, 12.0, 15.0)
    },
    level("aco_gne", Category::Acoustics, "Glottal-to-noise excitation ratio", "", 0.72, 0.06, 0.08),
    level("aco_jitter", Category::Acoustics, "Jitter", "", 0.012, 0.003, 0.004),
    level("aco_shimmer", Category::Acoustics, "Shimmer", "", 0.06, 0.012, 0.015),
];

const MOVEMENT: [LevelVar; 3] = [
    level("mov_yaw", Category::Movement, "Head yaw", "deg", 0.0, 3.0, 4.0),
    level("mov_roll", Category::Movement, "Head roll", "deg", 0.0, 2.0, 3.0),
    level("mov_pitch", Category::Movement, "Head pitch", "deg", -2.0, 3.0, 4.0),
];

const EMOTIONS: [LevelVar; 7] = [
    level("fac_hap_exp", Category::Facial, "Happiness expressivity", "", 0.3, 0.06, 0.08),
    level("fac_sad_exp", Category::Facial, "Sadness expressivity", "", 0.3, 0.06, 0.08),
    level("fac_ang_exp", Category::Facial, "Anger expressivity", "", 0.3, 0.06, 0.08),
    level("fac_fea_exp", Category::Facial, "Fear expressivity", "", 0.3, 0.06, 0.08),
    level("fac_sur_exp", Category::Facial, "Surprise expressivity", "", 0.3, 0.06, 0.08),
    level("fac_dis_exp", Category::Facial, "Disgust expressivity", "", 0.3, 0.06, 0.08),
    level("fac_con_exp", Category::Facial, "Contempt expressivity", "", 0.3, 0.06, 0.08),
];

const ASYMMETRY: [LevelVar; 4] = [
    level("fac_asym_eyebrow", Category::Facial, "Eyebrow asymmetry", "", 0.1, 0.03, 0.03),
    level("fac_asym_eye", Category::Facial, "Eye asymmetry", "", 0.1, 0.03, 0.03),
    level("fac_asym_cheek", Category::Facial, "Cheek asymmetry", "", 0.1, 0.03, 0.03),
    level("fac_asym_mouth", Category::Facial, "Mouth asymmetry", "", 0.1, 0.03, 0.03),
];

fn emotion_of(index: usize) -> Emotion {
    Emotion::ALL[index]
}

pub fn emotion_variable_id(emotion: Emotion) -> &'static str {
    EMOTIONS[Emotion::ALL.iter().position(|e| *e == emotion).unwrap()].raw_id
}

const UPPER_FACE_AUS: [u8; 7] = [1, 2, 4, 5, 6, 7, 45];
const PAIN_ID: &str = "fac_pain_exp";
const EXPRESSIVITY_IDS: [&str; 3] = ["fac_exp_overall", "fac_exp_upper", "fac_exp_lower"];

fn level_vars() -> impl Iterator<Item = &'static LevelVar> {
    SPEECH
        .iter()
        .chain(ACOUSTICS.iter())
        .chain(MOVEMENT.iter())
        .chain(EMOTIONS.iter())
        .chain(ASYMMETRY.iter())
}

/// Derived id of a level variable (speech variables are their own id).
fn derived_id(var: &LevelVar) -> String {
    if var.category == Category::Speech {
        var.raw_id.to_string()
    } else {
        format!("{}_mean", var.raw_id)
    }
}

fn descriptor(id: String, category: Category, kind: Kind, label: String, units: &str) -> VariableDescriptor {
    VariableDescriptor {
        id,
        category,
        kind,
        label,
        units: units.to_string(),
    }
}

/// Registry of every variable the generator can emit.
pub fn synthetic_registry() -> Vec<VariableDescriptor> {
    let mut raw: Vec<(String, Category, String, String)> = Vec::new();
    for v in level_vars().filter(|v| v.category != Category::Speech) {
        raw.push((v.raw_id.into(), v.category, v.label.into(), v.units.into()));
    }
    for au in SUPPORTED_AUS {
        raw.push((au_variable_id(au), Category::Facial, format!("AU{au:02} intensity"), String::new()));
    }
    raw.push((PAIN_ID.into(), Category::Facial, "Pain expressivity".into(), String::new()));
    for (id, label) in EXPRESSIVITY_IDS
        .iter()
        .zip(["Overall expressivity", "Upper face expressivity", "Lower face expressivity"])
    {
        raw.push((id.to_string(), Category::Facial, label.into(), String::new()));
    }

    let mut registry: Vec<VariableDescriptor> = SPEECH
        .iter()
        .map(|v| descriptor(v.raw_id.into(), v.category, Kind::Derived, v.label.into(), v.units))
        .collect();
    for (id, category, label, units) in &raw {
        registry.push(descriptor(format!("{id}_mean"), *category, Kind::Derived, format!("{label} (mean)"), units));
    }
    for (id, category, label, units) in raw {
        registry.push(descriptor(id, category, Kind::Raw, label, &units));
    }
    registry
}

fn plantable(id: &str) -> Option<&'static LevelVar> {
    level_vars().find(|v| derived_id(v) == id)
}

fn validate(spec: &SyntheticSpec) -> Result<(), SynthError> {
    let invalid = |m: String| Err(SynthError::InvalidSpec(m));
    if spec.n_silent > spec.n_videos {
        return invalid(format!("{} silent videos but only {} videos", spec.n_silent, spec.n_videos));
    }
    if spec.task_labels.is_empty() {
        return invalid("at least one task label is required".into());
    }
    let mut used = BTreeSet::new();
    for p in &spec.planted_correlations {
        if !(p.target_r.is_finite() && (-1.0..=1.0).contains(&p.target_r)) {
            return invalid(format!("target r {} outside [-1, 1]", p.target_r));
        }
        if p.var_a == p.var_b {
            return invalid(format!("cannot plant `{}` against itself", p.var_a));
        }
        for id in [&p.var_a, &p.var_b] {
            if plantable(id).is_none() {
                return invalid(format!("`{id}` is not a plantable derived variable"));
            }
            if !used.insert(id.clone()) {
                return invalid(format!("`{id}` appears in more than one planted pair"));
            }
        }
    }
    if let Some(ind) = &spec.planted_individual {
        if !(ind.target_r.is_finite() && (-1.0..=0.0).contains(&ind.target_r)) {
            return invalid(format!("individual target r {} outside [-1, 0]", ind.target_r));
        }
        if spec.n_videos == 0 {
            return invalid("planted individual needs at least one video".into());
        }
    }
    Ok(())
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| normal(rng)).collect()
}

/// Stationary AR(1) process with unit variance.
fn ar1(rng: &mut ChaCha8Rng, n: usize, phi: f64) -> Vec<f64> {
    let innovation = (1.0 - phi * phi).sqrt();
    let mut x = normal(rng);
    (0..n)
        .map(|_| {
            let current = x;
            x = phi * x + innovation * normal(rng);
            current
        })
        .collect()
}

/// Centers the vectors and makes them mutually orthogonal with unit
/// variance (modified Gram-Schmidt), so their sample correlations are
/// exactly zero. Only positions in `mask` take part.
fn orthonormalize(vectors: &mut [Vec<f64>], mask: &[bool]) {
    let n = mask.iter().filter(|m| **m).count() as f64;
    for i in 0..vectors.len() {
        let mean = dot_masked(&vectors[i], &vec![1.0; vectors[i].len()], mask) / n;
        for x in &mut vectors[i] {
            *x -= mean;
        }
        for j in 0..i {
            let (done, rest) = vectors.split_at_mut(i);
            let proj = dot_masked(&rest[0], &done[j], mask) / dot_masked(&done[j], &done[j], mask);
            for (x, y) in rest[0].iter_mut().zip(&done[j]) {
                *x -= proj * y;
            }
        }
        let sd = (dot_masked(&vectors[i], &vectors[i], mask) / n).sqrt();
        for x in &mut vectors[i] {
            *x /= sd;
        }
    }
}

fn dot_masked(a: &[f64], b: &[f64], mask: &[bool]) -> f64 {
    a.iter()
        .zip(b)
        .zip(mask)
        .filter(|(_, m)| **m)
        .map(|((x, y), _)| x * y)
        .sum()
}

/// Zero mean over the present frames.
fn center_present(values: &mut [f64], present: &[bool]) {
    let n = present.iter().filter(|p| **p).count();
    if n == 0 {
        return;
    }
    let mean = dot_masked(values, &vec![1.0; values.len()], present) / n as f64;
    for x in values.iter_mut() {
        *x -= mean;
    }
}

fn round_to(x: f64, decimals: i32) -> f64 {
    let f = 10f64.powi(decimals);
    (x * f).round() / f
}

fn to_series(id: &str, rate: f64, values: &[f64], present: &[bool]) -> RawSeries {
    let samples = values
        .iter()
        .zip(present)
        .map(|(v, p)| p.then(|| round_to(*v, 4)))
        .collect();
    RawSeries::new(id, rate, samples)
}

fn mean_of(series: &RawSeries) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0;
    for v in series.samples.iter().flatten() {
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

struct VideoPlan {
    id: String,
    task: usize,
    duration_s: f64,
    silent: bool,
    individual: bool,
    condition_mdd: bool,
    face_gap: Option<(f64, f64)>,
}

pub fn generate(spec: &SyntheticSpec) -> Result<Synthetic, SynthError> {
    validate(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_videos;

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let silent: BTreeSet<usize> = order[..spec.n_silent].iter().copied().collect();

    let n_tasks = spec.task_labels.len();
    let individual = spec.planted_individual.as_ref().map(|_| {
        (0..n)
            .find(|i| i % n_tasks == 0 && !silent.contains(i))
            .or_else(|| (0..n).find(|i| !silent.contains(i)))
            .unwrap_or(0)
    });

    let mut plans = Vec::with_capacity(n);
    for i in 0..n {
        let duration_s = (rng.random_range(30.0..120.0f64) * 1000.0).floor() / 1000.0;
        let condition_mdd = rng.random_bool(0.4);
        let gap = rng.random_bool(0.2) && Some(i) != individual;
        let face_gap = if gap {
            let len = rng.random_range(1.0..5.0);
            let start = rng.random_range(0.0..duration_s - len);
            Some((start, start + len))
        } else {
            None
        };
        plans.push(VideoPlan {
            id: format!("vid_{:03}", i + 1),
            task: i % n_tasks,
            duration_s,
            silent: silent.contains(&i),
            individual: Some(i) == individual,
            condition_mdd,
            face_gap,
        });
    }

    // Per-video standardized levels, then planted pairs overwrite theirs.
    let mut levels: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for var in level_vars() {
        levels.insert(derived_id(var), normals(&mut rng, n));
    }
    let mut planted_ids = BTreeSet::new();
    for p in &spec.planted_correlations {
        let vars = [plantable(&p.var_a).unwrap(), plantable(&p.var_b).unwrap()];
        let mask: Vec<bool> = plans
            .iter()
            .map(|plan| !(plan.silent && vars.iter().any(|v| is_audio(v.category))))
            .collect();
        if mask.iter().filter(|m| **m).count() < 4 {
            return Err(SynthError::InvalidSpec(format!(
                "too few videos carry both `{}` and `{}`",
                p.var_a, p.var_b
            )));
        }
        let mut basis = vec![normals(&mut rng, n), normals(&mut rng, n), normals(&mut rng, n)];
        orthonormalize(&mut basis, &mask);
        let rho = p.target_r.abs().sqrt();
        let sign = if p.target_r < 0.0 { -1.0 } else { 1.0 };
        let rest = (1.0 - rho * rho).sqrt();
        let a: Vec<f64> = (0..n).map(|i| rho * basis[0][i] + rest * basis[1][i]).collect();
        let b: Vec<f64> = (0..n).map(|i| sign * rho * basis[0][i] + rest * basis[2][i]).collect();
        levels.insert(p.var_a.clone(), a);
        levels.insert(p.var_b.clone(), b);
        planted_ids.insert(p.var_a.clone());
        planted_ids.insert(p.var_b.clone());
    }

    let registry = synthetic_registry();
    let mut videos = Vec::with_capacity(n);
    let mut individual_r = BTreeMap::new();
    for (i, plan) in plans.iter().enumerate() {
        let level_of = |var: &LevelVar| -> f64 {
            let id = derived_id(var);
            let mut l = levels[&id][i];
            if !planted_ids.contains(&id) {
                l += task_effect(var, plan);
            }
            var.base + var.scale * l
        };
        let video = build_video(&mut rng, plan, &spec.task_labels, level_of, spec.planted_individual.as_ref());
        if plan.individual {
            for e in Emotion::ALL {
                let r = pearson(
                    &video.raw["mov_roll"].samples,
                    &video.raw[emotion_variable_id(e)].samples,
                )
                .ok()
                .and_then(|c| c.r);
                individual_r.insert(e.as_str().to_string(), r);
            }
        }
        videos.push(video);
    }

    let cohort = Cohort::new(registry, videos)?;
    let planted = spec
        .planted_correlations
        .iter()
        .map(|p| {
            let pairs: Vec<(f64, f64)> = cohort
                .videos()
                .iter()
                .filter_map(|v| Some((*v.derived.get(&p.var_a)?, *v.derived.get(&p.var_b)?)))
                .collect();
            let c = pearson_pairs(&pairs);
            RealizedCorrelation {
                var_a: p.var_a.clone(),
                var_b: p.var_b.clone(),
                target_r: p.target_r,
                realized_r: c.r,
                n: c.n,
            }
        })
        .collect();

    let log = GeneratorLog {
        spec: spec.clone(),
        silent_video_ids: plans.iter().filter(|p| p.silent).map(|p| p.id.clone()).collect(),
        face_gap_video_ids: plans.iter().filter(|p| p.face_gap.is_some()).map(|p| p.id.clone()).collect(),
        planted_correlations: planted,
        individual_video_id: individual.map(|i| plans[i].id.clone()),
        individual_roll_r: individual_r,
    };
    Ok(Synthetic { cohort, log })
}

fn is_audio(category: Category) -> bool {
    matches!(category, Category::Speech | Category::Acoustics)
}

/// Task and condition shifts, in level units.
fn task_effect(var: &LevelVar, plan: &VideoPlan) -> f64 {
    let reading_or_vowel = plan.task >= 3;
    match var.raw_id {
        "aco_ff" if reading_or_vowel => -0.8,
        "aco_gne" if plan.task == 4 => 1.2,
        "spe_word_count" | "spe_verb_count" if plan.task == 4 => -1.5,
        "fac_sad_exp" if plan.condition_mdd => 0.8,
        "fac_hap_exp" if plan.condition_mdd => -0.6,
        "mov_pitch" if plan.condition_mdd => -0.5,
        _ => 0.0,
    }
}

fn build_video<F>(
    rng: &mut ChaCha8Rng,
    plan: &VideoPlan,
    tasks: &[String],
    level_of: F,
    individual: Option<&PlantedIndividual>,
) -> VideoRecord
where
    F: Fn(&LevelVar) -> f64,
{
    let mut video = VideoRecord::new(plan.id.clone(), plan.duration_s);
    video.attributes.insert("task".into(), tasks[plan.task].clone());
    video.attributes.insert(
        "simulated_condition".into(),
        if plan.condition_mdd { "mdd" } else { "none" }.into(),
    );

    if !plan.silent {
        for var in &SPEECH {
            let value = (level_of(var)).round().max(0.0);
            video.derived.insert(var.raw_id.to_string(), value);
        }
        let len = (plan.duration_s * ACOUSTIC_RATE_HZ).floor() as usize;
        for var in &ACOUSTICS {
            let present: Vec<bool> = (0..len).map(|_| !rng.random_bool(var.dropout)).collect();
            let mut noise = ar1(rng, len, 0.9);
            center_present(&mut noise, &present);
            let lvl = level_of(var);
            let values: Vec<f64> = noise.iter().map(|x| lvl + var.within * x).collect();
            video.raw.insert(var.raw_id.into(), to_series(var.raw_id, ACOUSTIC_RATE_HZ, &values, &present));
        }
    }

    // Face and head pose share capture: a gap removes both.
    let len = (plan.duration_s * FACIAL_RATE_HZ).floor() as usize;
    let present: Vec<bool> = (0..len)
        .map(|f| {
            let t = f as f64 / FACIAL_RATE_HZ;
            !plan.face_gap.is_some_and(|(a, b)| t >= a && t < b)
        })
        .collect();

    let coupling = individual.filter(|_| plan.individual);
    let mut emotion_signals: Vec<Vec<f64>>;
    let roll_signal: Option<Vec<f64>>;
    if let Some(ind) = coupling {
        // shared driver, one independent part per emotion, one for roll
        let mut basis: Vec<Vec<f64>> = (0..9).map(|_| ar1(rng, len, 0.9)).collect();
        orthonormalize(&mut basis, &present);
        let c = ind.target_r.abs().sqrt();
        let rest = (1.0 - c * c).sqrt();
        emotion_signals = (0..7)
            .map(|k| {
                if emotion_of(k) == Emotion::Happiness {
                    basis[1 + k].clone()
                } else {
                    (0..len).map(|f| c * basis[0][f] + rest * basis[1 + k][f]).collect()
                }
            })
            .collect();
        roll_signal = Some((0..len).map(|f| -c * basis[0][f] + rest * basis[8][f]).collect());
    } else {
        emotion_signals = (0..7).map(|_| ar1(rng, len, 0.95)).collect();
        for s in &mut emotion_signals {
            center_present(s, &present);
        }
        roll_signal = None;
    }

    let mut emotions: Vec<Vec<f64>> = Vec::with_capacity(7);
    for (k, var) in EMOTIONS.iter().enumerate() {
        let mut lvl = level_of(var);
        if plan.individual && emotion_of(k) != Emotion::Happiness {
            lvl += 0.15;
        }
        let values: Vec<f64> = emotion_signals[k].iter().map(|x| lvl + var.within * x).collect();
        video.raw.insert(var.raw_id.into(), to_series(var.raw_id, FACIAL_RATE_HZ, &values, &present));
        emotions.push(values);
    }

    for var in &ASYMMETRY {
        let mut noise = ar1(rng, len, 0.95);
        center_present(&mut noise, &present);
        let lvl = level_of(var);
        let values: Vec<f64> = noise.iter().map(|x| lvl + var.within * x).collect();
        video.raw.insert(var.raw_id.into(), to_series(var.raw_id, FACIAL_RATE_HZ, &values, &present));
    }

    // Action units follow the emotions that recruit them.
    let mut aus: BTreeMap<u8, Vec<f64>> = BTreeMap::new();
    for au in SUPPORTED_AUS {
        let recruiting: Vec<usize> = (0..7).filter(|&k| emotion_of(k).action_units().contains(&au)).collect();
        let jitter = ar1(rng, len, 0.8);
        let values: Vec<f64> = (0..len)
            .map(|f| {
                let drive = if recruiting.is_empty() {
                    0.3
                } else {
                    recruiting.iter().map(|&k| emotions[k][f]).sum::<f64>() / recruiting.len() as f64
                };
                round_to((4.0 * drive - 0.2 + 0.15 * jitter[f]).clamp(0.0, 5.0), 4)
            })
            .collect();
        let id = au_variable_id(au);
        video.raw.insert(id.clone(), to_series(&id, FACIAL_RATE_HZ, &values, &present));
        aus.insert(au, values);
    }

    let pain: Vec<f64> = (0..len)
        .map(|f| aus[&4][f] + aus[&6][f].max(aus[&7][f]) + aus[&9][f].max(aus[&10][f]))
        .collect();
    video.raw.insert(PAIN_ID.into(), to_series(PAIN_ID, FACIAL_RATE_HZ, &pain, &present));

    let average = |set: &[u8], f: usize| set.iter().map(|au| aus[au][f]).sum::<f64>() / set.len() as f64;
    let lower: Vec<u8> = SUPPORTED_AUS.iter().copied().filter(|au| !UPPER_FACE_AUS.contains(au)).collect();
    let parts: [Vec<f64>; 3] = [
        (0..len).map(|f| average(&SUPPORTED_AUS, f)).collect(),
        (0..len).map(|f| average(&UPPER_FACE_AUS, f)).collect(),
        (0..len).map(|f| average(&lower, f)).collect(),
    ];
    for (id, values) in EXPRESSIVITY_IDS.iter().zip(parts.iter()) {
        video.raw.insert(id.to_string(), to_series(id, FACIAL_RATE_HZ, values, &present));
    }

    for var in &MOVEMENT {
        let signal = match (&roll_signal, var.raw_id) {
            (Some(roll), "mov_roll") => roll.clone(),
            _ => {
                let mut noise = ar1(rng, len, 0.95);
                center_present(&mut noise, &present);
                noise
            }
        };
        let lvl = level_of(var);
        let values: Vec<f64> = signal.iter().map(|x| lvl + var.within * x).collect();
        video.raw.insert(var.raw_id.into(), to_series(var.raw_id, MOVEMENT_RATE_HZ, &values, &present));
    }

    let means: Vec<(String, f64)> = video
        .raw
        .values()
        .filter_map(|s| Some((format!("{}_mean", s.variable_id), mean_of(s)?)))
        .collect();
    video.derived.extend(means);
    video
}

/// Generates the cohort and writes it plus `generator_log.json`.
pub fn generate_to_dir(spec: &SyntheticSpec, out_dir: &Path) -> Result<Synthetic, SynthError> {
    let synthetic = generate(spec)?;
    write_cohort(&synthetic.cohort, out_dir)?;
    let mut json = serde_json::to_string_pretty(&synthetic.log).expect("log serializes");
    json.push('\n');
    let path = out_dir.join(GENERATOR_LOG_FILE);
    std::fs::write(&path, json).map_err(|source| ModelError::Io { path, source })?;
    Ok(synthetic)
}
