//! The PSL(2,Z) system: its normal-form recognizer over the four letters
//! `A`, `a` (= A^-1), `B`, `b` (= B^-1), exact projective 2x2 integer
//! matrices, and the exact Farey-graph metric.
//!
//! The recognizer accepts the reduced words (no letter followed by its
//! inverse) that contain none of the eight banned triples
//! `ABA, aba, BAB, bab, ABa, BAb, abA, baB`. A banned triple can only start
//! at a pair in `{AB, BA, ab, ba}`, and from such a pair exactly one
//! continuation survives (repeating the last letter), so the recognizer
//! keeps those four pairs as individual states and merges everything else by
//! last letter. That yields eight interior states, all accepting, all
//! accessible, named `AB`, `BA`, `ab`, `ba` and `X¬A B`, `X¬B A`, `X¬a b`,
//! `X¬b a` (read: "any letter but A, or no letter, then B", and so on).
//!
//! Farey graph: vertices are reduced fractions `p/q` together with
//! `∞ = 1/0`; two vertices are adjacent iff `|p s - q r| = 1`. The group
//! acts by Möbius transformations with base point `0/1`. The primary
//! distance algorithm walks the pivot fans of the continued-fraction
//! tessellation strip; an independent clipped breadth-first search serves as
//! a cross-validation oracle.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::automaton::{Automaton, Letter, NamedAutomaton, Word};
use crate::geometry::{ActionBackend, ClassTag, GeometryError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Psl2zError {
    #[error("invalid letter {0:?}: expected one of A a B b")]
    BadLetter(char),
    #[error("invalid fraction {0:?}: expected p/q or an integer")]
    BadFraction(String),
    #[error("0/0 does not denote a vertex")]
    ZeroOverZero,
    #[error("adjacency is only defined for distinct vertices")]
    SameVertex,
    #[error("oracle height bound {bound} below the endpoint heights")]
    OracleBoundBelowInputs { bound: u64 },
    #[error("oracle and inputs must fit machine integers (bound {0} too large)")]
    OracleBoundTooLarge(u64),
    #[error("no path within height bound {bound}")]
    OracleBoundTooSmall { bound: u64 },
    #[error("metric cross-check failed: primary {primary}, oracle {oracle}")]
    MetricMismatch { primary: u64, oracle: u64 },
}

pub const LETTER_A: Letter = Letter(0);
pub const LETTER_A_INV: Letter = Letter(1);
pub const LETTER_B: Letter = Letter(2);
pub const LETTER_B_INV: Letter = Letter(3);

const LETTER_NAMES: [&str; 4] = ["A", "a", "B", "b"];

fn inverse_letter(x: Letter) -> Letter {
    Letter(x.0 ^ 1)
}

/// An element of PSL(2,Z): an integer matrix of determinant one, normalized
/// so that the first nonzero entry of `(a, b, c, d)` is positive.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ProjMatrix {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl ProjMatrix {
    fn new_normalized(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Self {
        debug_assert!((&a * &d - &b * &c).is_one(), "determinant must be one");
        let flip = [&a, &b, &c, &d]
            .iter()
            .find(|v| !v.is_zero())
            .map(|v| v.is_negative())
            .unwrap_or(false);
        if flip {
            ProjMatrix {
                a: -a,
                b: -b,
                c: -c,
                d: -d,
            }
        } else {
            ProjMatrix { a, b, c, d }
        }
    }

    pub fn identity() -> Self {
        ProjMatrix::new_normalized(
            BigInt::one(),
            BigInt::zero(),
            BigInt::zero(),
            BigInt::one(),
        )
    }

    pub fn mul(&self, other: &ProjMatrix) -> ProjMatrix {
        ProjMatrix::new_normalized(
            &self.a * &other.a + &self.b * &other.c,
            &self.a * &other.b + &self.b * &other.d,
            &self.c * &other.a + &self.d * &other.c,
            &self.c * &other.b + &self.d * &other.d,
        )
    }

    pub fn inverse(&self) -> ProjMatrix {
        ProjMatrix::new_normalized(
            self.d.clone(),
            -self.b.clone(),
            -self.c.clone(),
            self.a.clone(),
        )
    }

    /// Absolute value of the trace of either lift.
    pub fn trace_abs(&self) -> BigInt {
        (&self.a + &self.d).abs()
    }
}

/// Generator matrix for a letter.
pub fn letter_matrix(x: Letter) -> Result<ProjMatrix, Psl2zError> {
    let (a, b, c, d) = match x.0 {
        0 => (1, 1, 0, 1),   // A
        1 => (1, -1, 0, 1),  // A^-1
        2 => (1, 0, -1, 1),  // B
        3 => (1, 0, 1, 1),   // B^-1
        _ => return Err(Psl2zError::BadLetter('?')),
    };
    Ok(ProjMatrix::new_normalized(
        BigInt::from(a),
        BigInt::from(b),
        BigInt::from(c),
        BigInt::from(d),
    ))
}

/// Product of the generator matrices of `w`, projectively normalized.
pub fn evaluate(w: &Word) -> Result<ProjMatrix, Psl2zError> {
    let mut acc = ProjMatrix::identity();
    for &x in w {
        acc = acc.mul(&letter_matrix(x)?);
    }
    Ok(acc)
}

/// Exact classification of the action on the Farey graph: loxodromic iff
/// `|trace| > 2`; matrices with `|trace| <= 2` have finite order or are
/// parabolic and in both cases keep a bounded orbit on the graph.
pub fn classify_exact(m: &ProjMatrix) -> ClassTag {
    if m.trace_abs() > BigInt::from(2) {
        ClassTag::Loxodromic
    } else {
        ClassTag::Elliptic
    }
}

/// Parses `A a B b` sequences; whitespace is ignored.
pub fn parse_word(text: &str) -> Result<Word, Psl2zError> {
    let mut letters = Vec::new();
    for ch in text.chars() {
        if ch.is_whitespace() {
            continue;
        }
        let x = match ch {
            'A' => LETTER_A,
            'a' => LETTER_A_INV,
            'B' => LETTER_B,
            'b' => LETTER_B_INV,
            other => return Err(Psl2zError::BadLetter(other)),
        };
        letters.push(x);
    }
    Ok(Word::new(letters))
}

pub fn word_to_string(w: &Word) -> String {
    w.letters()
        .iter()
        .map(|&x| LETTER_NAMES[x.index()])
        .collect()
}

/// A vertex of the Farey graph: a reduced fraction `p/q` with `q >= 0`,
/// where `(1, 0)` denotes the point at infinity.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FareyVertex {
    p: BigInt,
    q: BigInt,
}

impl FareyVertex {
    pub fn new(p: BigInt, q: BigInt) -> Result<Self, Psl2zError> {
        if p.is_zero() && q.is_zero() {
            return Err(Psl2zError::ZeroOverZero);
        }
        let g = p.gcd(&q);
        let (mut p, mut q) = (p / &g, q / &g);
        if q.is_negative() || (q.is_zero() && p.is_negative()) {
            p = -p;
            q = -q;
        }
        Ok(FareyVertex { p, q })
    }

    pub fn from_ints(p: i64, q: i64) -> Result<Self, Psl2zError> {
        FareyVertex::new(BigInt::from(p), BigInt::from(q))
    }

    pub fn infinity() -> Self {
        FareyVertex {
            p: BigInt::one(),
            q: BigInt::zero(),
        }
    }

    pub fn zero() -> Self {
        FareyVertex {
            p: BigInt::zero(),
            q: BigInt::one(),
        }
    }

    pub fn is_infinity(&self) -> bool {
        self.q.is_zero()
    }

    pub fn numerator(&self) -> &BigInt {
        &self.p
    }

    pub fn denominator(&self) -> &BigInt {
        &self.q
    }

    /// `|p| + q`, the height used by the oracle's clipping.
    pub fn height(&self) -> BigInt {
        self.p.abs() + &self.q
    }

    pub fn parse(text: &str) -> Result<Self, Psl2zError> {
        let bad = || Psl2zError::BadFraction(text.to_string());
        let t = text.trim();
        if let Some((ps, qs)) = t.split_once('/') {
            let p: BigInt = ps.trim().parse().map_err(|_| bad())?;
            let q: BigInt = qs.trim().parse().map_err(|_| bad())?;
            FareyVertex::new(p, q).map_err(|_| bad())
        } else {
            let p: BigInt = t.parse().map_err(|_| bad())?;
            Ok(FareyVertex::new(p, BigInt::one()).expect("q = 1"))
        }
    }
}

impl std::fmt::Display for FareyVertex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

/// Möbius action of a matrix on a vertex: column action on `(p, q)`.
pub fn apply(m: &ProjMatrix, v: &FareyVertex) -> FareyVertex {
    let p = &m.a * &v.p + &m.b * &v.q;
    let q = &m.c * &v.p + &m.d * &v.q;
    // determinant one keeps the pair coprime; only the sign needs fixing
    FareyVertex::new(p, q).expect("image of a vertex is a vertex")
}

/// Farey adjacency: `|p_u q_v - q_u p_v| = 1`.
pub fn farey_adjacent(u: &FareyVertex, v: &FareyVertex) -> Result<bool, Psl2zError> {
    if u == v {
        return Err(Psl2zError::SameVertex);
    }
    Ok((&u.p * &v.q - &u.q * &v.p).abs().is_one())
}

/// A matrix sending `u` to infinity.
fn to_infinity(u: &FareyVertex) -> ProjMatrix {
    // bottom row (-q, p) kills the denominator; complete to determinant one
    let e = u.p.extended_gcd(&u.q);
    debug_assert!(e.gcd.is_one());
    ProjMatrix::new_normalized(e.x, e.y, -u.q.clone(), u.p.clone())
}

/// Graph distance from infinity, by greedy hops over the pivot fans of the
/// continued-fraction strip. Each pivot is a convergent; a pivot is usable
/// once the strip has been covered up to the triangle before its fan, and it
/// covers the strip through the first triangle of the next fan.
fn dist_to_infinity(v: &FareyVertex) -> u64 {
    if v.q.is_zero() {
        return 0;
    }
    if v.q.is_one() {
        return 1;
    }
    // prefix sums of the continued-fraction terms a_1..a_n of p/q
    let a0 = v.p.div_floor(&v.q);
    let mut num = v.q.clone();
    let mut rem = &v.p - a0 * &v.q;
    let mut sums = vec![BigInt::zero()];
    while !rem.is_zero() {
        let den = rem;
        let a = num.div_floor(&den);
        rem = num - &a * &den;
        num = den;
        let next = sums.last().unwrap() + a;
        sums.push(next);
    }
    let n = sums.len() - 1;
    let last_triangle = &sums[n] - 1;
    let mut covered = BigInt::zero();
    let mut hops: u64 = 0;
    let mut k = 0usize;
    while covered < last_triangle {
        while k + 1 < n && sums[k + 1] <= &covered + 1 {
            k += 1;
        }
        let reach = &sums[k + 1];
        covered = if reach <= &last_triangle {
            reach.clone()
        } else {
            last_triangle.clone()
        };
        hops += 1;
    }
    hops + 1
}

/// Exact Farey-graph distance. Moves `u` to infinity by an isometry and
/// walks the continued-fraction pivot fans of the image of `v`. Validate
/// against [`farey_distance_oracle`]; see [`farey_distance_validated`].
pub fn farey_distance(u: &FareyVertex, v: &FareyVertex) -> u64 {
    if u == v {
        return 0;
    }
    dist_to_infinity(&apply(&to_infinity(u), v))
}

fn vertex_to_i64(v: &FareyVertex) -> Option<(i64, i64)> {
    use num_traits::ToPrimitive;
    Some((v.p.to_i64()?, v.q.to_i64()?))
}

/// Neighbors of `(p, q)` with height at most `bound`: the one-parameter
/// families `(r0 + t p, s0 + t q)` and `(-r0 + t p, -s0 + t q)` where
/// `p s0 - q r0 = 1`, normalized to nonnegative denominators.
fn clipped_neighbors(p: i64, q: i64, bound: i64, out: &mut Vec<(i64, i64)>) {
    out.clear();
    let e = p.extended_gcd(&q);
    debug_assert_eq!(e.gcd.abs(), 1);
    // p*x + q*y = gcd; flip signs so that p*s0 - q*r0 = 1
    let (mut r0, mut s0) = (-e.y, e.x);
    if e.gcd < 0 {
        r0 = -r0;
        s0 = -s0;
    }
    let (pp, qq) = (p as i128, q as i128);
    for family in 0..2 {
        let (fr, fs) = if family == 0 {
            (r0 as i128, s0 as i128)
        } else {
            (-r0 as i128, -s0 as i128)
        };
        let height = |t: i128| (fr + t * pp).abs() + (fs + t * qq).abs();
        // the height is convex piecewise-linear in t: start near a breakpoint
        let mut candidates = vec![0i128];
        if pp != 0 {
            let t = -fr / pp;
            candidates.extend([t - 1, t, t + 1]);
        }
        if qq != 0 {
            let t = -fs / qq;
            candidates.extend([t - 1, t, t + 1]);
        }
        let center = *candidates
            .iter()
            .min_by_key(|&&t| height(t))
            .expect("nonempty");
        if height(center) > bound as i128 {
            continue;
        }
        let mut push = |t: i128| {
            let (r, s) = (fr + t * pp, fs + t * qq);
            let (r, s) = if s < 0 || (s == 0 && r < 0) {
                (-r, -s)
            } else {
                (r, s)
            };
            out.push((r as i64, s as i64));
        };
        let mut t = center;
        while height(t) <= bound as i128 {
            push(t);
            t += 1;
        }
        t = center - 1;
        while height(t) <= bound as i128 {
            push(t);
            t -= 1;
        }
    }
    out.sort_unstable();
    out.dedup();
}

/// Independent distance oracle: bidirectional breadth-first search over the
/// vertices of height `|p| + q` at most `bound`. The result is the exact
/// distance of the clipped graph, an upper bound for the true distance that
/// matches it once the bound is large enough to contain a geodesic.
pub fn farey_distance_oracle(
    u: &FareyVertex,
    v: &FareyVertex,
    bound: u64,
) -> Result<u64, Psl2zError> {
    if bound > i32::MAX as u64 {
        return Err(Psl2zError::OracleBoundTooLarge(bound));
    }
    let b = bound as i64;
    let (up, uq) = vertex_to_i64(u).ok_or(Psl2zError::OracleBoundTooLarge(bound))?;
    let (vp, vq) = vertex_to_i64(v).ok_or(Psl2zError::OracleBoundTooLarge(bound))?;
    if up.abs() + uq > b || vp.abs() + vq > b {
        return Err(Psl2zError::OracleBoundBelowInputs { bound });
    }
    if (up, uq) == (vp, vq) {
        return Ok(0);
    }
    let mut dist_f: HashMap<(i64, i64), u64> = HashMap::from([((up, uq), 0)]);
    let mut dist_b: HashMap<(i64, i64), u64> = HashMap::from([((vp, vq), 0)]);
    let mut frontier_f = vec![(up, uq)];
    let mut frontier_b = vec![(vp, vq)];
    let (mut radius_f, mut radius_b) = (0u64, 0u64);
    let mut best: Option<u64> = None;
    let mut scratch = Vec::new();
    loop {
        if let Some(d) = best {
            // any shorter path would already have been recorded
            if d <= radius_f + radius_b {
                return Ok(d);
            }
        }
        if frontier_f.is_empty() && frontier_b.is_empty() {
            return match best {
                Some(d) => Ok(d),
                None => Err(Psl2zError::OracleBoundTooSmall { bound }),
            };
        }
        let forward = if frontier_f.is_empty() {
            false
        } else if frontier_b.is_empty() {
            true
        } else {
            frontier_f.len() <= frontier_b.len()
        };
        let (mine, other, frontier, radius) = if forward {
            (&mut dist_f, &dist_b, &mut frontier_f, &mut radius_f)
        } else {
            (&mut dist_b, &dist_f, &mut frontier_b, &mut radius_b)
        };
        let mut next = Vec::new();
        for &(p, q) in frontier.iter() {
            clipped_neighbors(p, q, b, &mut scratch);
            for &nb in scratch.iter() {
                if let Some(&d_other) = other.get(&nb) {
                    let candidate = *radius + 1 + d_other;
                    best = Some(best.map_or(candidate, |bst| bst.min(candidate)));
                }
                if !mine.contains_key(&nb) {
                    mine.insert(nb, *radius + 1);
                    next.push(nb);
                }
            }
        }
        *radius += 1;
        *frontier = next;
    }
}

/// Default oracle clipping bound `(|p_u| + q_u + |p_v| + q_v)^2`, clamped to
/// a machine-safe range.
pub fn default_oracle_bound(u: &FareyVertex, v: &FareyVertex) -> u64 {
    use num_traits::ToPrimitive;
    let sum = (u.height() + v.height()).to_u64().unwrap_or(u64::MAX);
    sum.saturating_mul(sum).clamp(64, i32::MAX as u64)
}

/// Primary distance cross-checked by the oracle with an escalating height
/// bound: starts at twice the endpoint heights and grows toward the default
/// bound until the oracle confirms the primary value, finds a shorter path
/// (reported as [`Psl2zError::MetricMismatch`]), or the escalation is
/// exhausted.
pub fn farey_distance_validated(u: &FareyVertex, v: &FareyVertex) -> Result<u64, Psl2zError> {
    use num_traits::ToPrimitive;
    let primary = farey_distance(u, v);
    let cap = default_oracle_bound(u, v);
    let mut bound = (u.height() + v.height())
        .to_u64()
        .unwrap_or(u64::MAX)
        .saturating_mul(2)
        .clamp(64, cap);
    loop {
        match farey_distance_oracle(u, v, bound) {
            Ok(d) if d == primary => return Ok(primary),
            Ok(d) if d < primary => {
                return Err(Psl2zError::MetricMismatch {
                    primary,
                    oracle: d,
                })
            }
            Ok(_) | Err(Psl2zError::OracleBoundTooSmall { .. }) => {
                if bound >= cap {
                    return Err(Psl2zError::OracleBoundTooSmall { bound });
                }
                bound = bound.saturating_mul(4).min(cap);
            }
            Err(other) => return Err(other),
        }
    }
}

/// The isometric action on the Farey graph with base point `0/1`.
#[derive(Clone, Copy, Debug, Default)]
pub struct FareyBackend;

/// Action backend with base point `0/1` and exact distances.
pub fn backend() -> FareyBackend {
    FareyBackend
}

impl ActionBackend for FareyBackend {
    type Element = ProjMatrix;
    type Point = FareyVertex;

    fn alphabet_size(&self) -> usize {
        4
    }

    fn base_point(&self) -> FareyVertex {
        FareyVertex::zero()
    }

    fn identity(&self) -> ProjMatrix {
        ProjMatrix::identity()
    }

    fn letter_element(&self, x: Letter) -> Result<ProjMatrix, GeometryError> {
        letter_matrix(x).map_err(|_| GeometryError::LetterOutOfRange {
            letter: x.index(),
            alphabet: 4,
        })
    }

    fn compose(&self, a: &ProjMatrix, b: &ProjMatrix) -> ProjMatrix {
        a.mul(b)
    }

    fn inverse(&self, a: &ProjMatrix) -> Option<ProjMatrix> {
        Some(a.inverse())
    }

    fn act(&self, g: &ProjMatrix, p: &FareyVertex) -> FareyVertex {
        apply(g, p)
    }

    fn dist(&self, a: &FareyVertex, b: &FareyVertex) -> u64 {
        farey_distance(a, b)
    }

    fn exact_tag(&self, w: &Word) -> Option<ClassTag> {
        evaluate(w).ok().map(|m| classify_exact(&m))
    }
}

/// Whether the pair `(y, z)` opens a banned triple: the four pairs
/// `AB, BA, ab, ba` (letters from different generator families with equal
/// exponent sign).
fn critical_pair(y: Letter, z: Letter) -> bool {
    (y.0 >> 1) != (z.0 >> 1) && (y.0 & 1) == (z.0 & 1)
}

/// Builds the normal-form recognizer: reduced words with none of the eight
/// banned triples. Eight interior states, all accepting, all accessible.
pub fn build_automaton() -> NamedAutomaton {
    let names: Vec<String> = LETTER_NAMES.iter().map(|s| s.to_string()).collect();
    let free = |x: Letter| 2 + x.index(); // merged "last letter" states
    let crit = |y: Letter, z: Letter| match (y.0, z.0) {
        (0, 2) => 6, // AB
        (2, 0) => 7, // BA
        (1, 3) => 8, // ab
        (3, 1) => 9, // ba
        _ => unreachable!("not a critical pair"),
    };
    let mut transitions = Vec::new();
    for z in 0..4u16 {
        transitions.push((0usize, Letter(z), free(Letter(z))));
    }
    for y in (0..4u16).map(Letter) {
        for z in (0..4u16).map(Letter) {
            if z == inverse_letter(y) {
                continue; // to fail
            }
            let target = if critical_pair(y, z) {
                crit(y, z)
            } else {
                free(z)
            };
            transitions.push((free(y), z, target));
        }
        // from the pair state (x, y) only the repetition of y survives
    }
    for (y, z) in [(0u16, 2u16), (2, 0), (1, 3), (3, 1)] {
        let state = crit(Letter(y), Letter(z));
        transitions.push((state, Letter(z), free(Letter(z))));
    }
    let automaton = Automaton::new(names, 10, 0, 1, 2..=9, &transitions)
        .expect("recognizer table is well formed");
    let state_names = vec![
        "start".to_string(),
        "fail".to_string(),
        "X¬B A".to_string(),
        "X¬b a".to_string(),
        "X¬A B".to_string(),
        "X¬a b".to_string(),
        "AB".to_string(),
        "BA".to_string(),
        "ab".to_string(),
        "ba".to_string(),
    ];
    NamedAutomaton::new(automaton, state_names)
}
