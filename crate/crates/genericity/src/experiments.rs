//! Census and asymptotics runs over the built-in systems (or an automaton
//! loaded from an interchange file), with machine-readable reports.
//!
//! A genericity run walks each sphere length, counts rigid words and (when
//! the backend carries a geometric action) how many of them act
//! loxodromically, runs the geometric checks on every rigid word, and
//! aggregates ball statistics from the sphere statistics. Exhaustive mode is
//! exact and refuses spheres beyond the configured budget; sample mode draws
//! exactly uniform words with per-shard generators derived from the master
//! seed, so reports are reproducible byte for byte (runtime metadata aside).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::automaton::{Automaton, AutomatonError, InterchangeError, NamedAutomaton, Word};
use crate::counting::{self, CountError};
use crate::freegroup::{self, FreeGroupError, TreeBackend};
use crate::garside::{self, GarsideError};
use crate::geometry::{self, ActionBackend, ClassTag, GeometryError};
use crate::parallel;
use crate::psl2z::{self, FareyBackend, Psl2zError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("exhaustive budget exceeded at length {l}: sphere holds {sphere} words, budget {budget}")]
    BudgetExceeded {
        l: usize,
        sphere: BigUint,
        budget: u64,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Garside(#[from] GarsideError),
    #[error(transparent)]
    FreeGroup(#[from] FreeGroupError),
    #[error(transparent)]
    Psl2z(#[from] Psl2zError),
    #[error(transparent)]
    Interchange(#[from] InterchangeError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Which system to run on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BackendSelector {
    Psl2z,
    Braid { strands: usize },
    Free { rank: usize },
    /// Automaton interchange file; no geometry.
    File { path: PathBuf },
}

impl BackendSelector {
    /// `psl2z`, `braid:N`, `free:K`, or a path to an interchange file.
    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        if text == "psl2z" {
            return Ok(BackendSelector::Psl2z);
        }
        if let Some(n) = text.strip_prefix("braid:") {
            let strands = n
                .parse()
                .map_err(|_| ExperimentError::InvalidConfig(format!("bad strand count {n:?}")))?;
            return Ok(BackendSelector::Braid { strands });
        }
        if let Some(k) = text.strip_prefix("free:") {
            let rank = k
                .parse()
                .map_err(|_| ExperimentError::InvalidConfig(format!("bad rank {k:?}")))?;
            return Ok(BackendSelector::Free { rank });
        }
        Ok(BackendSelector::File {
            path: PathBuf::from(text),
        })
    }

    pub fn label(&self) -> String {
        match self {
            BackendSelector::Psl2z => "psl2z".to_string(),
            BackendSelector::Braid { strands } => format!("braid:{strands}"),
            BackendSelector::Free { rank } => format!("free:{rank}"),
            BackendSelector::File { path } => path.display().to_string(),
        }
    }

    /// Default geodesic-words radius for the backend.
    pub fn default_radius(&self) -> u64 {
        match self {
            BackendSelector::Psl2z => 1,
            BackendSelector::Free { .. } => 0,
            _ => 0,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mode {
    Exhaustive,
    Sample,
}

impl Mode {
    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        match text {
            "exhaustive" => Ok(Mode::Exhaustive),
            "sample" => Ok(Mode::Sample),
            other => Err(ExperimentError::InvalidConfig(format!(
                "mode must be exhaustive or sample, got {other:?}"
            ))),
        }
    }
}

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub backend: BackendSelector,
    pub l_min: usize,
    pub l_max: usize,
    pub mode: Mode,
    pub samples: usize,
    pub seed: u64,
    /// Geodesic-words radius R.
    pub radius: u64,
    /// Orbit horizon for dynamic classification.
    pub horizon: usize,
    /// Power bound for the axis checks.
    pub k_max: usize,
    /// Largest sphere enumerated exhaustively.
    pub budget: u64,
    pub json_out: Option<PathBuf>,
    pub csv_out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(backend: BackendSelector) -> Self {
        let radius = backend.default_radius();
        ExperimentConfig {
            backend,
            l_min: 1,
            l_max: 8,
            mode: Mode::Exhaustive,
            samples: 10_000,
            seed: 1,
            radius,
            horizon: 50,
            k_max: 5,
            budget: DEFAULT_BUDGET,
            json_out: None,
            csv_out: None,
        }
    }

    fn validate(&self) -> Result<(), ExperimentError> {
        if self.l_min > self.l_max {
            return Err(ExperimentError::InvalidConfig(format!(
                "l range {}..{} is empty",
                self.l_min, self.l_max
            )));
        }
        if self.mode == Mode::Sample && self.samples == 0 {
            return Err(ExperimentError::InvalidConfig(
                "sample mode requires at least one sample".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct ConfigEcho {
    pub backend: String,
    pub l_min: usize,
    pub l_max: usize,
    pub mode: String,
    pub samples: usize,
    pub seed: u64,
    pub radius: u64,
    pub horizon: usize,
    pub k_max: usize,
    pub budget: u64,
}

#[derive(Serialize, Clone, Debug, PartialEq)]
pub struct Proportion {
    pub exact: String,
    pub decimal: String,
}

fn proportion(num: &BigUint, den: &BigUint) -> Proportion {
    if den.is_zero() {
        return Proportion {
            exact: "0/0".into(),
            decimal: "".into(),
        };
    }
    let r = BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()));
    Proportion {
        exact: format!("{}/{}", r.numer(), r.denom()),
        decimal: decimal12(&r),
    }
}

/// Twelve decimal digits of an exact rational.
pub fn decimal12(r: &BigRational) -> String {
    let scale = BigInt::from(10u32).pow(12);
    let scaled = (r * BigRational::from_integer(scale.clone())).round();
    let units = scaled.to_integer();
    let (int_part, frac_part) = (&units / &scale, (&units % &scale).abs());
    let mut out = String::new();
    if units.sign() == num_bigint::Sign::Minus && int_part.is_zero() {
        out.push('-');
    }
    let _ = write!(out, "{int_part}.{frac_part:012}");
    out
}

#[derive(Serialize, Clone, Debug)]
pub struct ReportRow {
    pub l: usize,
    pub sphere: String,
    pub ball: String,
    pub rigid: String,
    pub rigid_loxodromic: Option<String>,
    pub p_rigid: Proportion,
    pub p_rigid_lox: Option<Proportion>,
    pub violations: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_rigid_stderr: Option<f64>,
}

#[derive(Serialize, Clone, Debug)]
pub struct Certificate {
    pub exact: String,
    pub decimal: String,
    /// |value(l) - value(l + 10)|, a finite-length stand-in for convergence.
    pub cauchy_delta: f64,
}

#[derive(Serialize, Clone, Debug)]
pub struct AvoidanceBound {
    pub pattern: String,
    pub rate: f64,
    /// `lambda - rate`; positive margin certifies exponential decay.
    pub margin: f64,
}

#[derive(Serialize, Clone, Debug)]
pub struct AsymptoticBounds {
    pub witness: Option<String>,
    pub probe_length: usize,
    pub prefix_proportion: Option<Certificate>,
    pub end_state_proportion: Option<Certificate>,
    pub synthesized_rigid_lower_bound: Option<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub avoidance: Option<AvoidanceBound>,
}

#[derive(Serialize, Clone, Debug)]
pub struct AsymptoticsReport {
    pub lambda: f64,
    pub dominated: bool,
    pub recurrence_index: Option<usize>,
    pub bounds: AsymptoticBounds,
}

#[derive(Serialize, Clone, Debug)]
pub struct ReportMeta {
    pub seed: u64,
    pub config_hash: String,
    pub runtime_ms: u128,
}

#[derive(Serialize, Clone, Debug)]
pub struct ExperimentReport {
    pub config: ConfigEcho,
    pub rows: Vec<ReportRow>,
    pub asymptotics: Option<AsymptoticsReport>,
    pub meta: ReportMeta,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    pub fn violation_count(&self) -> usize {
        self.rows.iter().map(|r| r.violations.len()).sum()
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), ExperimentError> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record([
            "l",
            "sphere",
            "ball",
            "rigid",
            "rigid_loxodromic",
            "p_rigid",
            "p_rigid_lox",
            "violations",
        ])?;
        for row in &self.rows {
            w.write_record([
                row.l.to_string(),
                row.sphere.clone(),
                row.ball.clone(),
                row.rigid.clone(),
                row.rigid_loxodromic.clone().unwrap_or_default(),
                row.p_rigid.decimal.clone(),
                row.p_rigid_lox
                    .as_ref()
                    .map(|p| p.decimal.clone())
                    .unwrap_or_default(),
                row.violations.join(" | "),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn config_echo(cfg: &ExperimentConfig) -> ConfigEcho {
    ConfigEcho {
        backend: cfg.backend.label(),
        l_min: cfg.l_min,
        l_max: cfg.l_max,
        mode: match cfg.mode {
            Mode::Exhaustive => "exhaustive".into(),
            Mode::Sample => "sample".into(),
        },
        samples: cfg.samples,
        seed: cfg.seed,
        radius: cfg.radius,
        horizon: cfg.horizon,
        k_max: cfg.k_max,
        budget: cfg.budget,
    }
}

/// A resolved system: its recognizer plus whatever geometry it carries.
enum System {
    Psl2z(NamedAutomaton, FareyBackend),
    Free(NamedAutomaton, TreeBackend),
    Braid(NamedAutomaton),
    Plain(Automaton),
}

impl System {
    fn resolve(sel: &BackendSelector) -> Result<System, ExperimentError> {
        Ok(match sel {
            BackendSelector::Psl2z => System::Psl2z(psl2z::build_automaton(), psl2z::backend()),
            BackendSelector::Free { rank } => {
                System::Free(freegroup::build_automaton(*rank)?, freegroup::tree_backend(*rank)?)
            }
            BackendSelector::Braid { strands } => System::Braid(garside::build_automaton(*strands)?),
            BackendSelector::File { path } => {
                System::Plain(Automaton::read_interchange_file(path)?)
            }
        })
    }

    fn automaton(&self) -> &Automaton {
        match self {
            System::Psl2z(named, _) | System::Free(named, _) | System::Braid(named) => {
                &named.automaton
            }
            System::Plain(aut) => aut,
        }
    }

    fn parse_word(&self, text: &str) -> Result<Word, ExperimentError> {
        match self {
            System::Psl2z(..) => Ok(psl2z::parse_word(text)?),
            System::Free(named, b) => {
                let _ = named;
                Ok(freegroup::parse_word(b.rank(), text)?)
            }
            System::Braid(named) => {
                let n = strands_of(named);
                Ok(garside::parse_braid_word(n, text)?)
            }
            System::Plain(aut) => {
                let mut letters = Vec::new();
                for token in text.split_whitespace() {
                    let x = aut.letter_named(token).ok_or_else(|| {
                        ExperimentError::InvalidConfig(format!("unknown letter {token:?}"))
                    })?;
                    letters.push(x);
                }
                Ok(Word::new(letters))
            }
        }
    }
}

fn strands_of(named: &NamedAutomaton) -> usize {
    // alphabet is the n! - 1 nontrivial permutations
    let mut n = 2;
    let mut fact = 2;
    while fact - 1 < named.automaton.alphabet_len() {
        n += 1;
        fact *= n;
    }
    n
}

/// Per-length census tallies.
#[derive(Default)]
struct Tally {
    examined: u64,
    rigid: u64,
    rigid_loxodromic: u64,
    violations: Vec<String>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.examined += other.examined;
        self.rigid += other.rigid;
        self.rigid_loxodromic += other.rigid_loxodromic;
        self.violations.extend(other.violations);
        self
    }
}

/// Examines one word: rigidity, classification, geometric checks.
fn examine_word<B: ActionBackend>(
    aut: &Automaton,
    backend: Option<&B>,
    word: &Word,
    end: crate::automaton::StateId,
    l: usize,
    radius: u64,
    k_max: usize,
    tally: &mut Tally,
) {
    tally.examined += 1;
    if !aut.is_rigid_from(word, end) {
        return;
    }
    tally.rigid += 1;
    let Some(b) = backend else {
        return;
    };
    let report = geometry::check_rigid_geometry(b, aut, word, radius, k_max)
        .expect("word is rigid and letters are valid");
    if report.class.tag == ClassTag::Loxodromic {
        tally.rigid_loxodromic += 1;
    }
    for v in &report.violations {
        tally.violations.push(format!(
            "l={l} w={} [{}]: {v}",
            aut.format_word(word),
            report.class.tag
        ));
    }
}

fn census_exhaustive<B: ActionBackend + Sync>(
    aut: &Automaton,
    backend: Option<&B>,
    l: usize,
    radius: u64,
    k_max: usize,
) -> Tally {
    counting::fold_sphere(
        aut,
        l,
        Tally::default,
        |tally, letters, end| {
            let word = Word::new(letters.to_vec());
            examine_word(aut, backend, &word, end, l, radius, k_max, tally);
        },
        Tally::merge,
    )
}

const SAMPLE_SHARDS: usize = 8;

fn census_sample<B: ActionBackend + Sync>(
    aut: &Automaton,
    backend: Option<&B>,
    l: usize,
    samples: usize,
    seed: u64,
    radius: u64,
    k_max: usize,
) -> Result<Tally, ExperimentError> {
    let sampler = counting::SphereSampler::new(aut, l)?;
    let shards: Vec<(usize, usize)> = (0..SAMPLE_SHARDS)
        .map(|i| {
            let base = samples / SAMPLE_SHARDS;
            let extra = usize::from(i < samples % SAMPLE_SHARDS);
            (i, base + extra)
        })
        .filter(|&(_, count)| count > 0)
        .collect();
    let results = parallel::map_shards(shards, |(shard, count)| {
        let shard_seed = seed
            .wrapping_add((l as u64) << 32)
            .wrapping_add(shard as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(shard_seed);
        let mut tally = Tally::default();
        for _ in 0..count {
            let word = sampler.sample(&mut rng);
            let end = *aut.trace(&word).expect("sampled word is valid").last().unwrap();
            examine_word(aut, backend, &word, end, l, radius, k_max, &mut tally);
        }
        tally
    });
    Ok(results.into_iter().fold(Tally::default(), Tally::merge))
}

fn run_census(
    system: &System,
    cfg: &ExperimentConfig,
    l: usize,
) -> Result<Tally, ExperimentError> {
    let aut = system.automaton();
    match cfg.mode {
        Mode::Exhaustive => {
            let sphere = counting::count_sphere(aut, l);
            if sphere > BigUint::from(cfg.budget) {
                return Err(ExperimentError::BudgetExceeded {
                    l,
                    sphere,
                    budget: cfg.budget,
                });
            }
            Ok(match system {
                System::Psl2z(_, b) => census_exhaustive(aut, Some(b), l, cfg.radius, cfg.k_max),
                System::Free(_, b) => census_exhaustive(aut, Some(b), l, cfg.radius, cfg.k_max),
                System::Braid(_) | System::Plain(_) => {
                    census_exhaustive::<FareyBackend>(aut, None, l, cfg.radius, cfg.k_max)
                }
            })
        }
        Mode::Sample => Ok(match system {
            System::Psl2z(_, b) => {
                census_sample(aut, Some(b), l, cfg.samples, cfg.seed, cfg.radius, cfg.k_max)?
            }
            System::Free(_, b) => {
                census_sample(aut, Some(b), l, cfg.samples, cfg.seed, cfg.radius, cfg.k_max)?
            }
            System::Braid(_) | System::Plain(_) => census_sample::<FareyBackend>(
                aut,
                None,
                l,
                cfg.samples,
                cfg.seed,
                cfg.radius,
                cfg.k_max,
            )?,
        }),
    }
}

/// Runs the genericity census over the configured length range.
pub fn run_genericity(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    cfg.validate()?;
    let started = Instant::now();
    let system = System::resolve(&cfg.backend)?;
    let aut = system.automaton();
    let has_geometry = matches!(system, System::Psl2z(..) | System::Free(..));
    let sphere_counts = counting::sphere_counts_up_to(aut, cfg.l_max);

    let mut rows = Vec::new();
    let mut ball = BigUint::from(1u32); // the identity element
    for l in 1..=cfg.l_max {
        let sphere = sphere_counts[l].clone();
        ball += &sphere;
        if l < cfg.l_min {
            continue;
        }
        let tally = run_census(&system, cfg, l)?;
        let (rigid, rigid_lox, examined) = (
            BigUint::from(tally.rigid),
            BigUint::from(tally.rigid_loxodromic),
            BigUint::from(tally.examined),
        );
        let denominator = match cfg.mode {
            Mode::Exhaustive => sphere.clone(),
            Mode::Sample => examined.clone(),
        };
        let p_rigid = proportion(&rigid, &denominator);
        let p_rigid_stderr = match cfg.mode {
            Mode::Sample => {
                let n = examined.to_f64().unwrap_or(1.0);
                let p = tally.rigid as f64 / n;
                Some((p * (1.0 - p) / n).sqrt())
            }
            Mode::Exhaustive => None,
        };
        rows.push(ReportRow {
            l,
            sphere: sphere.to_string(),
            ball: ball.to_string(),
            rigid: rigid.to_string(),
            rigid_loxodromic: has_geometry.then(|| rigid_lox.to_string()),
            p_rigid,
            p_rigid_lox: has_geometry.then(|| proportion(&rigid_lox, &denominator)),
            violations: tally.violations,
            p_rigid_stderr,
        });
    }

    let asymptotics = Some(asymptotics_for(aut, cfg.l_max.max(20), None)?);
    let echo = config_echo(cfg);
    let config_hash = format!("{:016x}", fnv1a(serde_json::to_string(&echo)?.as_bytes()));
    let report = ExperimentReport {
        config: echo,
        rows,
        asymptotics,
        meta: ReportMeta {
            seed: cfg.seed,
            config_hash,
            runtime_ms: started.elapsed().as_millis(),
        },
    };
    if let Some(path) = &cfg.json_out {
        std::fs::write(path, report.to_json() + "\n")?;
    }
    if let Some(path) = &cfg.csv_out {
        report.write_csv(path)?;
    }
    Ok(report)
}

/// Growth, domination, recurrence and the proportion certificates for the
/// given backend; `avoid_pattern` adds a factor-avoidance rate.
pub fn run_asymptotics(
    backend: &BackendSelector,
    probe_length: usize,
    avoid_pattern: Option<&str>,
) -> Result<AsymptoticsReport, ExperimentError> {
    let system = System::resolve(backend)?;
    let pattern = match avoid_pattern {
        Some(text) => Some(system.parse_word(text)?),
        None => None,
    };
    asymptotics_for(system.automaton(), probe_length, pattern.as_ref())
}

fn asymptotics_for(
    aut: &Automaton,
    probe_length: usize,
    pattern: Option<&Word>,
) -> Result<AsymptoticsReport, ExperimentError> {
    let report = aut.check_anf_hypothesis();
    let lambda = report.accessible_growth;
    let l = probe_length.max(1);
    let mut bounds = AsymptoticBounds {
        witness: report
            .witness
            .as_ref()
            .map(|(w, _)| aut.format_word(w)),
        probe_length: l,
        prefix_proportion: None,
        end_state_proportion: None,
        synthesized_rigid_lower_bound: None,
        avoidance: None,
    };
    if let Some((witness, end_state)) = &report.witness {
        let at = counting::prefix_proportion(aut, witness, l)?;
        let ahead = counting::prefix_proportion(aut, witness, l + 10)?;
        let prefix_cert = Certificate {
            exact: format!("{}/{}", at.numer(), at.denom()),
            decimal: decimal12(&at),
            cauchy_delta: rational_gap(&at, &ahead),
        };
        let end_at = counting::end_state_proportion(aut, witness, *end_state, l)?;
        let end_ahead = counting::end_state_proportion(aut, witness, *end_state, l + 10)?;
        let end_cert = Certificate {
            exact: format!("{}/{}", end_at.numer(), end_at.denom()),
            decimal: decimal12(&end_at),
            cauchy_delta: rational_gap(&end_at, &end_ahead),
        };
        // rigid words of length l include those with the witness as prefix
        // whose run returns to the witness end state, so the product of the
        // two proportions is a lower-bound synthesis for the rigid share
        let product_at = &at * &end_at;
        let product_ahead = &ahead * &end_ahead;
        bounds.synthesized_rigid_lower_bound = Some(Certificate {
            exact: format!("{}/{}", product_at.numer(), product_at.denom()),
            decimal: decimal12(&product_at),
            cauchy_delta: rational_gap(&product_at, &product_ahead),
        });
        bounds.prefix_proportion = Some(prefix_cert);
        bounds.end_state_proportion = Some(end_cert);
    }
    if let Some(p) = pattern {
        let est = counting::avoidance_growth_rate(aut, p)?;
        bounds.avoidance = Some(AvoidanceBound {
            pattern: aut.format_word(p),
            rate: est.rate,
            margin: lambda - est.rate,
        });
    }
    Ok(AsymptoticsReport {
        lambda,
        dominated: report.dominated,
        recurrence_index: report.recurrence_index,
        bounds,
    })
}

fn rational_gap(a: &BigRational, b: &BigRational) -> f64 {
    let d = a - b;
    let num = d.numer().to_f64().unwrap_or(f64::NAN);
    let den = d.denom().to_f64().unwrap_or(f64::NAN);
    (num / den).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strip_runtime(json: &str) -> String {
        let mut value: serde_json::Value = serde_json::from_str(json).unwrap();
        value["meta"]["runtime_ms"] = serde_json::Value::from(0);
        serde_json::to_string_pretty(&value).unwrap()
    }

    #[test]
    fn backend_parsing() {
        assert_eq!(
            BackendSelector::parse("psl2z").unwrap(),
            BackendSelector::Psl2z
        );
        assert_eq!(
            BackendSelector::parse("braid:4").unwrap(),
            BackendSelector::Braid { strands: 4 }
        );
        assert_eq!(
            BackendSelector::parse("free:2").unwrap(),
            BackendSelector::Free { rank: 2 }
        );
        assert!(matches!(
            BackendSelector::parse("some/file.json").unwrap(),
            BackendSelector::File { .. }
        ));
        assert!(BackendSelector::parse("braid:x").is_err());
    }

    #[test]
    fn decimal_formatting() {
        let r = BigRational::new(1.into(), 4.into());
        assert_eq!(decimal12(&r), "0.250000000000");
        let r = BigRational::new(1.into(), 3.into());
        assert_eq!(decimal12(&r), "0.333333333333");
        let r = BigRational::new((-1).into(), 4.into());
        assert_eq!(decimal12(&r), "-0.250000000000");
    }

    #[test]
    fn reports_are_deterministic() {
        let mut cfg = ExperimentConfig::new(BackendSelector::Psl2z);
        cfg.l_min = 1;
        cfg.l_max = 5;
        let a = run_genericity(&cfg).unwrap().to_json();
        let b = run_genericity(&cfg).unwrap().to_json();
        assert_eq!(strip_runtime(&a), strip_runtime(&b));

        cfg.mode = Mode::Sample;
        cfg.samples = 500;
        cfg.seed = 99;
        let a = run_genericity(&cfg).unwrap().to_json();
        let b = run_genericity(&cfg).unwrap().to_json();
        assert_eq!(strip_runtime(&a), strip_runtime(&b));
    }

    #[test]
    fn exhaustive_census_psl2z_small() {
        let mut cfg = ExperimentConfig::new(BackendSelector::Psl2z);
        cfg.l_min = 2;
        cfg.l_max = 6;
        let report = run_genericity(&cfg).unwrap();
        assert_eq!(report.rows.len(), 5);
        for row in &report.rows {
            assert!(row.violations.is_empty(), "violations: {:?}", row.violations);
            let rigid: u64 = row.rigid.parse().unwrap();
            let riglox: u64 = row.rigid_loxodromic.as_ref().unwrap().parse().unwrap();
            assert!(riglox <= rigid);
            assert!(riglox > 0, "no loxodromic rigid words at l={}", row.l);
        }
        let asym = report.asymptotics.as_ref().unwrap();
        assert!(asym.dominated);
        assert!((asym.lambda - (1.0 + 2f64.sqrt())).abs() < 1e-9);
    }

    #[test]
    fn sample_mode_tracks_exhaustive_within_three_sigma() {
        let mut cfg = ExperimentConfig::new(BackendSelector::Psl2z);
        cfg.l_min = 6;
        cfg.l_max = 6;
        let exact = run_genericity(&cfg).unwrap();
        let p_exact: f64 = exact.rows[0].p_rigid.decimal.parse().unwrap();

        cfg.mode = Mode::Sample;
        cfg.samples = 4_000;
        cfg.seed = 7;
        let sampled = run_genericity(&cfg).unwrap();
        let p_sample: f64 = sampled.rows[0].p_rigid.decimal.parse().unwrap();
        let se = sampled.rows[0].p_rigid_stderr.unwrap();
        assert!(
            (p_sample - p_exact).abs() <= 3.0 * se.max(1e-9),
            "sampled {p_sample} vs exact {p_exact} (se {se})"
        );
    }

    #[test]
    fn ball_column_is_cumulative() {
        let mut cfg = ExperimentConfig::new(BackendSelector::Psl2z);
        cfg.l_min = 1;
        cfg.l_max = 4;
        let report = run_genericity(&cfg).unwrap();
        let balls: Vec<u64> = report
            .rows
            .iter()
            .map(|r| r.ball.parse().unwrap())
            .collect();
        assert_eq!(balls, vec![5, 17, 45, 113]);
        // ball proportion lies between the extremes of the sphere proportions
        let spheres: Vec<f64> = report
            .rows
            .iter()
            .map(|r| r.p_rigid.decimal.parse().unwrap())
            .collect();
        let rigid_total: u64 = report
            .rows
            .iter()
            .map(|r| r.rigid.parse::<u64>().unwrap())
            .sum();
        let p_ball = rigid_total as f64 / balls.last().unwrap().to_f64().unwrap();
        let lo = spheres.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = spheres.iter().cloned().fold(0.0f64, f64::max);
        // identity dilutes the ball slightly below the weighted sphere mean
        assert!(p_ball <= hi && p_ball >= lo * 0.8);
    }

    #[test]
    fn budget_refusal_is_explicit() {
        let mut cfg = ExperimentConfig::new(BackendSelector::Psl2z);
        cfg.l_min = 12;
        cfg.l_max = 12;
        cfg.budget = 100;
        match run_genericity(&cfg) {
            Err(ExperimentError::BudgetExceeded { l, sphere, budget }) => {
                assert_eq!(l, 12);
                assert_eq!(budget, 100);
                assert!(sphere > BigUint::from(100u32));
            }
            other => panic!("expected budget refusal, got {other:?}"),
        }
    }

    #[test]
    fn braid_census_has_no_loxodromy_column() {
        let mut cfg = ExperimentConfig::new(BackendSelector::Braid { strands: 3 });
        cfg.l_min = 1;
        cfg.l_max = 6;
        let report = run_genericity(&cfg).unwrap();
        for row in &report.rows {
            assert!(row.rigid_loxodromic.is_none());
            assert!(row.p_rigid_lox.is_none());
            assert!(row.violations.is_empty());
            assert!(row.rigid.parse::<u64>().unwrap() > 0);
        }
    }

    #[test]
    fn free_group_rigid_proportion_matches_cyclically_reduced() {
        let mut cfg = ExperimentConfig::new(BackendSelector::Free { rank: 2 });
        cfg.l_min = 1;
        cfg.l_max = 8;
        let report = run_genericity(&cfg).unwrap();
        let aut = freegroup::build_automaton(2).unwrap().automaton;
        for row in &report.rows {
            let cyclically_reduced = counting::enumerate_sphere(&aut, row.l)
                .filter(freegroup::is_cyclically_reduced)
                .count() as u64;
            assert_eq!(row.rigid.parse::<u64>().unwrap(), cyclically_reduced);
            // in the tree every rigid word acts loxodromically
            assert_eq!(row.rigid, *row.rigid_loxodromic.as_ref().unwrap());
            assert!(row.violations.is_empty());
        }
    }

    #[test]
    fn asymptotics_psl2z_constants() {
        let report = run_asymptotics(&BackendSelector::Psl2z, 30, Some("AbAbAbAbAbAb")).unwrap();
        assert!((report.lambda - (1.0 + 2f64.sqrt())).abs() < 1e-9);
        assert!(report.dominated);
        assert!(report.recurrence_index.is_some());
        let bounds = &report.bounds;
        let prefix: f64 = bounds
            .prefix_proportion
            .as_ref()
            .unwrap()
            .decimal
            .parse()
            .unwrap();
        assert!((prefix - 0.25).abs() < 1e-3);
        let end: f64 = bounds
            .end_state_proportion
            .as_ref()
            .unwrap()
            .decimal
            .parse()
            .unwrap();
        assert!((end - 1.0 / (4.0 * 2f64.sqrt())).abs() < 1e-2);
        let synth: f64 = bounds
            .synthesized_rigid_lower_bound
            .as_ref()
            .unwrap()
            .decimal
            .parse()
            .unwrap();
        assert!((synth - 1.0 / (16.0 * 2f64.sqrt())).abs() < 1e-2);
        let avoidance = bounds.avoidance.as_ref().unwrap();
        assert!(avoidance.margin > 1e-6);
    }

    #[test]
    fn asymptotics_braid() {
        let report = run_asymptotics(&BackendSelector::Braid { strands: 3 }, 20, None).unwrap();
        assert!(report.dominated);
        assert!(report.lambda > 1.0);
    }

    #[test]
    fn csv_export_shape() {
        let dir = tempfile::tempdir().unwrap();
        let csv_path = dir.path().join("rows.csv");
        let json_path = dir.path().join("report.json");
        let mut cfg = ExperimentConfig::new(BackendSelector::Psl2z);
        cfg.l_min = 1;
        cfg.l_max = 3;
        cfg.csv_out = Some(csv_path.clone());
        cfg.json_out = Some(json_path.clone());
        run_genericity(&cfg).unwrap();
        let text = std::fs::read_to_string(&csv_path).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "l,sphere,ball,rigid,rigid_loxodromic,p_rigid,p_rigid_lox,violations"
        );
        assert_eq!(lines.count(), 3);
        let json = std::fs::read_to_string(&json_path).unwrap();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(value["rows"].as_array().unwrap().len() == 3);
        assert!(value["asymptotics"]["lambda"].as_f64().unwrap() > 2.4);
    }
}
