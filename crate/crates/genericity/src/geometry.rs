//! The abstract isometric-action layer.
//!
//! An [`ActionBackend`] exposes a space only through what the census
//! machinery needs: a base point, a letter-to-isometry map, composition, and
//! an exact integer-valued distance. On top of that this module implements
//! displacement, translation-length estimation, the elliptic/loxodromic
//! classification (exact when the backend provides it, a dynamic fallback
//! otherwise) and the slack-triangle certificates:
//!
//! * the geodesic-words check — the orbit trace of a word satisfies
//!   `d(p_i, p_m) + d(p_m, p_j) <= d(p_i, p_j) + 2R` for all `i < m < j`,
//!   which holds whenever the trace stays within `R` of every geodesic
//!   between its endpoints;
//! * for rigid words that act elliptically, the orbit stays within `3R` of
//!   the base point and no contiguous subword displaces it by more than
//!   `5R`;
//! * for rigid words that act loxodromically, the base point satisfies the
//!   `2R`-slack axis condition on all small powers.

use std::fmt;

use thiserror::Error;

use crate::automaton::{Automaton, AutomatonError, Letter, Word};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error("letter {letter} out of range for backend alphabet of size {alphabet}")]
    LetterOutOfRange { letter: usize, alphabet: usize },
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("word is not rigid for the given automaton")]
    NotRigid,
}

/// How a word acts: bounded orbit, positive drift, or undecided within the
/// inspected horizon. Backends with an exact classification never report
/// `Undetermined`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ClassTag {
    Elliptic,
    Loxodromic,
    Undetermined,
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClassTag::Elliptic => "elliptic",
            ClassTag::Loxodromic => "loxodromic",
            ClassTag::Undetermined => "undetermined",
        };
        f.write_str(s)
    }
}

/// Classification of one isometry, with the orbit displacements that
/// witnessed it.
#[derive(Clone, Debug)]
pub struct IsometryClass {
    pub tag: ClassTag,
    /// Estimate of the translation length; positive for loxodromics.
    pub translation_length: f64,
    /// `d(P, w^n P)` for `n = 1..=N`.
    pub evidence: Vec<u64>,
}

/// A pluggable isometric action: base point, letter isometries, exact
/// distances. Implementations are immutable and safe to share across
/// threads.
pub trait ActionBackend {
    type Element: Clone;
    type Point: Clone + PartialEq;

    fn alphabet_size(&self) -> usize;
    fn base_point(&self) -> Self::Point;
    fn identity(&self) -> Self::Element;
    fn letter_element(&self, x: Letter) -> Result<Self::Element, GeometryError>;
    fn compose(&self, a: &Self::Element, b: &Self::Element) -> Self::Element;
    /// `None` for backends without inverses (monoid actions).
    fn inverse(&self, _a: &Self::Element) -> Option<Self::Element> {
        None
    }
    fn act(&self, g: &Self::Element, p: &Self::Point) -> Self::Point;
    fn dist(&self, a: &Self::Point, b: &Self::Point) -> u64;

    /// Exact classification of the word's action, when the backend has one.
    fn exact_tag(&self, _w: &Word) -> Option<ClassTag> {
        None
    }

    /// Exact translation length, when the backend can compute one.
    fn exact_translation_length(&self, _w: &Word) -> Option<f64> {
        None
    }

    fn evaluate(&self, w: &Word) -> Result<Self::Element, GeometryError> {
        let mut acc = self.identity();
        for &x in w {
            acc = self.compose(&acc, &self.letter_element(x)?);
        }
        Ok(acc)
    }

    /// Largest displacement of the base point by a single letter.
    fn max_generator_displacement(&self) -> u64 {
        let p = self.base_point();
        (0..self.alphabet_size())
            .map(|x| {
                let g = self
                    .letter_element(Letter(x as u16))
                    .expect("letter index in range");
                self.dist(&p, &self.act(&g, &p))
            })
            .max()
            .unwrap_or(0)
    }
}

fn pow<B: ActionBackend>(b: &B, g: &B::Element, n: usize) -> B::Element {
    let mut result = b.identity();
    let mut base = g.clone();
    let mut n = n;
    loop {
        if n & 1 == 1 {
            result = b.compose(&result, &base);
        }
        n >>= 1;
        if n == 0 {
            return result;
        }
        base = b.compose(&base, &base);
    }
}

/// Distance the word's action moves the base point.
pub fn displacement<B: ActionBackend>(b: &B, w: &Word) -> Result<u64, GeometryError> {
    let g = b.evaluate(w)?;
    let p = b.base_point();
    Ok(b.dist(&p, &b.act(&g, &p)))
}

/// `d(P, w^N P) / N`, a finite-horizon estimate of the translation length.
pub fn translation_length_estimate<B: ActionBackend>(
    b: &B,
    w: &Word,
    n: usize,
) -> Result<f64, GeometryError> {
    if n == 0 {
        return Err(GeometryError::ZeroHorizon);
    }
    let g = b.evaluate(w)?;
    let gn = pow(b, &g, n);
    let p = b.base_point();
    Ok(b.dist(&p, &b.act(&gn, &p)) as f64 / n as f64)
}

/// Orbit displacements `d(P, w^n P)` for `n = 1..=horizon`.
fn orbit_displacements<B: ActionBackend>(
    b: &B,
    g: &B::Element,
    horizon: usize,
) -> (Vec<u64>, Vec<B::Point>) {
    let p = b.base_point();
    let mut dists = Vec::with_capacity(horizon);
    let mut points = Vec::with_capacity(horizon);
    let mut cur = p.clone();
    for _ in 0..horizon {
        cur = b.act(g, &cur);
        dists.push(b.dist(&p, &cur));
        points.push(cur.clone());
    }
    (dists, points)
}

/// Classifies the action of `w`, preferring the backend's exact rule. The
/// generic fallback inspects the orbit up to `horizon`: elliptic when the
/// orbit revisits a point while staying within `rho` of the base point,
/// loxodromic when the displacement grows at least linearly with slope
/// `c / 10`, undetermined otherwise.
pub fn classify<B: ActionBackend>(
    b: &B,
    w: &Word,
    horizon: usize,
    rho: f64,
) -> Result<IsometryClass, GeometryError> {
    if horizon == 0 {
        return Err(GeometryError::ZeroHorizon);
    }
    let g = b.evaluate(w)?;
    let (evidence, points) = orbit_displacements(b, &g, horizon);
    if let Some(tag) = b.exact_tag(w) {
        let translation_length = match tag {
            ClassTag::Loxodromic => match b.exact_translation_length(w) {
                Some(t) => t,
                None => *evidence.last().expect("horizon >= 1") as f64 / horizon as f64,
            },
            _ => 0.0,
        };
        return Ok(IsometryClass {
            tag,
            translation_length,
            evidence,
        });
    }
    let bounded = evidence.iter().all(|&d| (d as f64) <= rho);
    let revisits = points
        .iter()
        .enumerate()
        .any(|(i, p)| points[..i].contains(p) || *p == b.base_point());
    if bounded && revisits {
        return Ok(IsometryClass {
            tag: ClassTag::Elliptic,
            translation_length: 0.0,
            evidence,
        });
    }
    let slope = b.max_generator_displacement() as f64 / 10.0;
    if slope > 0.0
        && evidence
            .iter()
            .enumerate()
            .all(|(i, &d)| d as f64 >= slope * (i + 1) as f64)
    {
        let translation_length = *evidence.last().unwrap() as f64 / horizon as f64;
        return Ok(IsometryClass {
            tag: ClassTag::Loxodromic,
            translation_length,
            evidence,
        });
    }
    Ok(IsometryClass {
        tag: ClassTag::Undetermined,
        translation_length: 0.0,
        evidence,
    })
}

/// Checks the implementable consequence of staying `R`-close to geodesics:
/// for all `i < m < j`, `d(p_i, p_m) + d(p_m, p_j) <= d(p_i, p_j) + 2R`
/// over the prefix points `p_k` of the word's orbit trace.
pub fn check_geodesic_words<B: ActionBackend>(
    b: &B,
    w: &Word,
    r: u64,
) -> Result<bool, GeometryError> {
    let points = prefix_points(b, w)?;
    let n = points.len();
    let mut d = vec![0u64; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let dist = b.dist(&points[i], &points[j]);
            d[i * n + j] = dist;
            d[j * n + i] = dist;
        }
    }
    for i in 0..n {
        for m in i + 1..n {
            for j in m + 1..n {
                if d[i * n + m] + d[m * n + j] > d[i * n + j] + 2 * r {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Orbit trace `P, x1.P, x1x2.P, ...` of the prefixes of `w`.
fn prefix_points<B: ActionBackend>(b: &B, w: &Word) -> Result<Vec<B::Point>, GeometryError> {
    let p = b.base_point();
    let mut points = Vec::with_capacity(w.len() + 1);
    points.push(p.clone());
    let mut prefix = b.identity();
    for &x in w {
        prefix = b.compose(&prefix, &b.letter_element(x)?);
        points.push(b.act(&prefix, &p));
    }
    Ok(points)
}

/// Verdict of the rigid-loxodromy certificate.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LoxodromicVerdict {
    CertifiedLoxodromic,
    Inconclusive,
}

/// Certificate: a rigid word with some contiguous subword displacing the
/// base point by more than `5R` cannot act elliptically, and rigid words
/// never act parabolically, so it acts loxodromically.
pub fn certify_loxodromic_rigid<B: ActionBackend>(
    b: &B,
    aut: &Automaton,
    w: &Word,
    r: u64,
) -> Result<LoxodromicVerdict, GeometryError> {
    if w.is_empty() || !aut.is_rigid_word(w)? {
        return Ok(LoxodromicVerdict::Inconclusive);
    }
    let bound = 5 * r;
    for i in 0..w.len() {
        for j in i + 1..=w.len() {
            if displacement(b, &w.slice(i, j))? > bound {
                return Ok(LoxodromicVerdict::CertifiedLoxodromic);
            }
        }
    }
    Ok(LoxodromicVerdict::Inconclusive)
}

/// A single failed geometric assertion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeometryViolation {
    /// Elliptic orbit point farther than `3R` from base.
    OrbitDisplacement { n: usize, dist: u64, bound: u64 },
    /// Contiguous subword of an elliptic rigid word displacing more than `5R`.
    SubwordDisplacement {
        start: usize,
        end: usize,
        dist: u64,
        bound: u64,
    },
    /// `2R`-slack axis condition failed at power `k`.
    AxisSlack { k: usize, lhs: u64, rhs: u64 },
}

impl fmt::Display for GeometryViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryViolation::OrbitDisplacement { n, dist, bound } => {
                write!(f, "orbit point n={n} at distance {dist} > {bound}")
            }
            GeometryViolation::SubwordDisplacement {
                start,
                end,
                dist,
                bound,
            } => write!(
                f,
                "subword [{start}..{end}) displaces {dist} > {bound}"
            ),
            GeometryViolation::AxisSlack { k, lhs, rhs } => {
                write!(f, "axis slack at k={k}: {lhs} > {rhs}")
            }
        }
    }
}

/// Outcome of the per-word geometric checks on a rigid word.
#[derive(Clone, Debug)]
pub struct RigidGeometryReport {
    pub class: IsometryClass,
    pub violations: Vec<GeometryViolation>,
}

impl RigidGeometryReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Runs the geometric assertions appropriate to the word's class:
/// elliptic rigid words must keep their orbit within `3R` and every
/// contiguous subword within `5R`; loxodromic ones must pass the `2R`-slack
/// axis condition for powers up to `k_max` (two-sided when the backend has
/// inverses, forward-shifted otherwise). The word must be rigid.
pub fn check_rigid_geometry<B: ActionBackend>(
    b: &B,
    aut: &Automaton,
    w: &Word,
    r: u64,
    k_max: usize,
) -> Result<RigidGeometryReport, GeometryError> {
    if w.is_empty() || !aut.is_rigid_word(w)? {
        return Err(GeometryError::NotRigid);
    }
    let horizon = k_max.max(1);
    // The classification radius is only consulted by the generic fallback;
    // both exact backends ignore it.
    let class = classify(b, w, horizon, (6 * r + 6) as f64)?;
    let mut violations = Vec::new();
    match class.tag {
        ClassTag::Elliptic => {
            let g = b.evaluate(w)?;
            let p = b.base_point();
            let mut cur = p.clone();
            for n in 1..=k_max {
                cur = b.act(&g, &cur);
                let dist = b.dist(&p, &cur);
                if dist > 3 * r {
                    violations.push(GeometryViolation::OrbitDisplacement {
                        n,
                        dist,
                        bound: 3 * r,
                    });
                }
            }
            for i in 0..w.len() {
                for j in i + 1..=w.len() {
                    let dist = displacement(b, &w.slice(i, j))?;
                    if dist > 5 * r {
                        violations.push(GeometryViolation::SubwordDisplacement {
                            start: i,
                            end: j,
                            dist,
                            bound: 5 * r,
                        });
                    }
                }
            }
        }
        ClassTag::Loxodromic => {
            let g = b.evaluate(w)?;
            let p = b.base_point();
            for k in 1..=k_max {
                let gk = pow(b, &g, k);
                let fwd = b.act(&gk, &p);
                let (lhs, rhs) = match b.inverse(&gk) {
                    Some(gmk) => {
                        let back = b.act(&gmk, &p);
                        (
                            b.dist(&back, &p) + b.dist(&p, &fwd),
                            b.dist(&back, &fwd) + 2 * r,
                        )
                    }
                    None => {
                        let fwd2 = b.act(&pow(b, &g, 2 * k), &p);
                        (
                            b.dist(&p, &fwd) + b.dist(&fwd, &fwd2),
                            b.dist(&p, &fwd2) + 2 * r,
                        )
                    }
                };
                if lhs > rhs {
                    violations.push(GeometryViolation::AxisSlack { k, lhs, rhs });
                }
            }
        }
        ClassTag::Undetermined => {}
    }
    Ok(RigidGeometryReport { class, violations })
}
