//! The positive braid monoid with its permutation-braid alphabet.
//!
//! Letters are the nontrivial permutation braids (permutations of the
//! strands written in one-line notation, e.g. `213` for the first Artin
//! generator in B3 and `321` for the half twist). A sequence of letters is
//! a normal form when every adjacent pair `(x, y)` is left-weighted: the
//! starting set of `y` is contained in the finishing set of `x`. The
//! recognizer has one state per letter, an edge labelled `g` ends in the
//! state `g` or in the fail state, and every letter state accepts.
//!
//! There is no metric action here; braids get rigidity statistics only.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::automaton::{Automaton, Letter, NamedAutomaton, Word};
use crate::counting;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GarsideError {
    #[error("strand count {0} outside the supported range 3..=5")]
    StrandCountOutOfRange(usize),
    #[error("token {0:?} is not a permutation of 1..={1}")]
    BadPermutationToken(String, usize),
    #[error("the identity permutation is not a letter")]
    IdentityLetter,
}

/// A permutation in one-line notation: `perm[i]` is the image of position
/// `i` (0-based internally, 1-based in display).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Perm(Vec<u8>);

impl Perm {
    pub fn identity(n: usize) -> Perm {
        Perm((0..n as u8).collect())
    }

    /// The half twist: the order-reversing permutation.
    pub fn delta(n: usize) -> Perm {
        Perm((0..n as u8).rev().collect())
    }

    /// Artin generator `i` (1-based), swapping positions `i` and `i + 1`.
    pub fn transposition(n: usize, i: usize) -> Perm {
        let mut v: Vec<u8> = (0..n as u8).collect();
        v.swap(i - 1, i);
        Perm(v)
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &v)| v == i as u8)
    }

    /// Apply `self` first, then `other`.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm(self.0.iter().map(|&v| other.0[v as usize]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut out = vec![0u8; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            out[v as usize] = i as u8;
        }
        Perm(out)
    }

    /// Number of inversions; the word length of the permutation braid.
    pub fn inversions(&self) -> usize {
        let v = &self.0;
        let mut count = 0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                if v[i] > v[j] {
                    count += 1;
                }
            }
        }
        count
    }

    /// Descent positions (1-based `i` with `perm(i) > perm(i + 1)`).
    pub fn descents(&self) -> BTreeSet<usize> {
        (1..self.0.len())
            .filter(|&i| self.0[i - 1] > self.0[i])
            .collect()
    }

    /// One-line display, e.g. `213`.
    pub fn one_line(&self) -> String {
        self.0.iter().map(|&v| (b'1' + v) as char).collect()
    }

    pub fn parse(token: &str, n: usize) -> Result<Perm, GarsideError> {
        let bad = || GarsideError::BadPermutationToken(token.to_string(), n);
        if token.chars().count() != n {
            return Err(bad());
        }
        let mut seen = vec![false; n];
        let mut v = Vec::with_capacity(n);
        for ch in token.chars() {
            let d = ch.to_digit(10).ok_or_else(bad)? as usize;
            if d < 1 || d > n || seen[d - 1] {
                return Err(bad());
            }
            seen[d - 1] = true;
            v.push((d - 1) as u8);
        }
        Ok(Perm(v))
    }

    /// A positive word of Artin generators (1-based indices) realizing the
    /// permutation braid, of length equal to the inversion count.
    pub fn canonical_word(&self) -> Vec<u8> {
        let mut word = Vec::with_capacity(self.inversions());
        let mut p = self.clone();
        while !p.is_identity() {
            // peel a final letter: i is a descent of the inverse
            let i = *p
                .inverse()
                .descents()
                .iter()
                .next()
                .expect("nontrivial permutation has a descent");
            word.push(i as u8);
            p = p.compose(&Perm::transposition(p.n(), i));
        }
        word.reverse();
        word
    }
}

/// Which side's descent set plays the role of the starting set. The
/// `ByPermutation` convention is the one validated by the brute-force
/// uniqueness oracle; `ByInverse` is the plausible alternative that the
/// oracle rejects.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DescentConvention {
    ByPermutation,
    ByInverse,
}

pub fn starting_set_with(x: &Perm, conv: DescentConvention) -> BTreeSet<usize> {
    match conv {
        DescentConvention::ByPermutation => x.descents(),
        DescentConvention::ByInverse => x.inverse().descents(),
    }
}

pub fn finishing_set_with(x: &Perm, conv: DescentConvention) -> BTreeSet<usize> {
    match conv {
        DescentConvention::ByPermutation => x.inverse().descents(),
        DescentConvention::ByInverse => x.descents(),
    }
}

pub fn is_left_weighted_with(x: &Perm, y: &Perm, conv: DescentConvention) -> bool {
    starting_set_with(y, conv).is_subset(&finishing_set_with(x, conv))
}

/// Starting set: the Artin generators that can begin the permutation braid.
pub fn starting_set(x: &Perm) -> BTreeSet<usize> {
    starting_set_with(x, DescentConvention::ByPermutation)
}

/// Finishing set: the Artin generators that can end the permutation braid.
pub fn finishing_set(x: &Perm) -> BTreeSet<usize> {
    finishing_set_with(x, DescentConvention::ByPermutation)
}

/// Left-weighting of an adjacent factor pair.
pub fn is_left_weighted(x: &Perm, y: &Perm) -> bool {
    is_left_weighted_with(x, y, DescentConvention::ByPermutation)
}

/// Greatest common prefix (meet in the prefix order), peeled one common
/// starting generator at a time.
fn meet(u: &Perm, v: &Perm) -> Perm {
    let n = u.n();
    let mut s = Perm::identity(n);
    let mut u = u.clone();
    let mut v = v.clone();
    loop {
        let common: Vec<usize> = starting_set(&u)
            .intersection(&starting_set(&v))
            .copied()
            .collect();
        let Some(&i) = common.first() else {
            return s;
        };
        let t = Perm::transposition(n, i);
        s = s.compose(&t);
        u = t.compose(&u);
        v = t.compose(&v);
    }
}

/// One local sliding step: move the largest possible prefix of `y` into `x`.
/// The result `(x', y')` is left-weighted and represents the same product.
fn slide(x: &Perm, y: &Perm) -> (Perm, Perm) {
    let complement = x.inverse().compose(&Perm::delta(x.n())); // x * c = delta
    let s = meet(&complement, y);
    (x.compose(&s), s.inverse().compose(y))
}

/// The left-weighted factorization of the product of `factors`, by repeated
/// local sliding. Identity factors are dropped; the empty product is the
/// empty normal form.
pub fn normal_form(factors: &[Perm]) -> Vec<Perm> {
    let mut nf: Vec<Perm> = factors.iter().filter(|p| !p.is_identity()).cloned().collect();
    loop {
        let mut changed = false;
        let mut i = 0;
        while i + 1 < nf.len() {
            if !is_left_weighted(&nf[i], &nf[i + 1]) {
                let (x, y) = slide(&nf[i], &nf[i + 1]);
                changed = true;
                if y.is_identity() {
                    nf[i] = x;
                    nf.remove(i + 1);
                } else {
                    nf[i] = x;
                    nf[i + 1] = y;
                }
                // a slide can break the pair to the left
                i = i.saturating_sub(1);
            } else {
                i += 1;
            }
        }
        if !changed {
            return nf;
        }
    }
}

fn check_strands(n: usize) -> Result<(), GarsideError> {
    if (3..=5).contains(&n) {
        Ok(())
    } else {
        Err(GarsideError::StrandCountOutOfRange(n))
    }
}

/// All nontrivial permutation braids on `n` strands, sorted by one-line
/// notation; this ordering fixes the letter indices of the recognizer.
pub fn letters(n: usize) -> Vec<Perm> {
    let mut perms = Vec::new();
    let mut stack = vec![Vec::new()];
    while let Some(partial) = stack.pop() {
        if partial.len() == n {
            let p = Perm(partial);
            if !p.is_identity() {
                perms.push(p);
            }
            continue;
        }
        for v in (0..n as u8).rev() {
            if !partial.contains(&v) {
                let mut next = partial.clone();
                next.push(v);
                stack.push(next);
            }
        }
    }
    perms.sort();
    perms
}

/// The normal-form recognizer: a state per nontrivial permutation braid
/// (all accepting), an edge labelled `g` from state `x` to state `g` iff
/// `(x, g)` is left-weighted, and from the start state on every letter.
pub fn build_automaton(n: usize) -> Result<NamedAutomaton, GarsideError> {
    check_strands(n)?;
    let perms = letters(n);
    let names: Vec<String> = perms.iter().map(|p| p.one_line()).collect();
    let state_of = |i: usize| 2 + i;
    let mut transitions = Vec::new();
    for (g, _) in perms.iter().enumerate() {
        transitions.push((0usize, Letter(g as u16), state_of(g)));
    }
    for (x, px) in perms.iter().enumerate() {
        for (g, pg) in perms.iter().enumerate() {
            if is_left_weighted(px, pg) {
                transitions.push((state_of(x), Letter(g as u16), state_of(g)));
            }
        }
    }
    let automaton = Automaton::new(
        names.clone(),
        perms.len() + 2,
        0,
        1,
        2..perms.len() + 2,
        &transitions,
    )
    .expect("left-weighting table is well formed");
    let mut state_names = vec!["start".to_string(), "fail".to_string()];
    state_names.extend(names);
    Ok(NamedAutomaton::new(automaton, state_names))
}

/// Parses a space-separated sequence of one-line permutations into letters
/// of `build_automaton(n)`.
pub fn parse_braid_word(n: usize, text: &str) -> Result<Word, GarsideError> {
    check_strands(n)?;
    let perms = letters(n);
    let mut out = Vec::new();
    for token in text.split_whitespace() {
        let p = Perm::parse(token, n)?;
        if p.is_identity() {
            return Err(GarsideError::IdentityLetter);
        }
        let idx = perms.binary_search(&p).expect("nontrivial perms are letters");
        out.push(Letter(idx as u16));
    }
    Ok(Word::new(out))
}

pub fn word_to_factors(n: usize, w: &Word) -> Vec<Perm> {
    let perms = letters(n);
    w.letters().iter().map(|&x| perms[x.index()].clone()).collect()
}

/// Exact counts over the sphere of normal forms of length exactly `l`:
/// total accepted words and how many of them are rigid.
pub fn rigid_census(n: usize, l: usize) -> Result<(BigUint, BigUint), GarsideError> {
    let aut = build_automaton(n)?.automaton;
    let total = counting::count_sphere(&aut, l);
    let rigid = counting::rigid_sphere_count(&aut, l);
    Ok((total, rigid))
}

/// Sphere proportion of rigid normal forms and the derived lower bound for
/// the ball: every ball element factors over a sphere element through a
/// power of the half twist, losing at most half the proportion.
#[derive(Clone, Debug)]
pub struct BallBoundReport {
    pub n: usize,
    pub l: usize,
    pub sphere_total: BigUint,
    pub sphere_rigid: BigUint,
    pub sphere_proportion: BigRational,
    pub ball_lower_bound: BigRational,
}

pub fn ball_bound_report(n: usize, l: usize) -> Result<BallBoundReport, GarsideError> {
    let (total, rigid) = rigid_census(n, l)?;
    let proportion = if total.is_zero() {
        BigRational::zero()
    } else {
        BigRational::new(rigid.clone().into(), total.clone().into())
    };
    let ball_lower_bound = &proportion / BigRational::from_integer(2.into());
    Ok(BallBoundReport {
        n,
        l,
        sphere_total: total,
        sphere_rigid: rigid,
        sphere_proportion: proportion,
        ball_lower_bound,
    })
}
