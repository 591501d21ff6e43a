//! Exact word counting and growth analysis for recognizers.
//!
//! Counts are arbitrary-precision integers throughout; proportions are exact
//! rationals built from those counts. Floating point appears only inside
//! [`GrowthEstimate`], the output of the power-iteration eigenvalue
//! machinery.
//!
//! The counting recurrences all run over the full state space with the fail
//! state carrying a permanent zero, which keeps start/interior/fail handling
//! uniform: `completions[r][s]` is the number of length-`r` continuations
//! from `s` that end in an accept state, and `completions[l][start]` is the
//! sphere count at length `l`.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::automaton::{Automaton, AutomatonError, Letter, StateId, Word};
use crate::parallel;

#[derive(Debug, Error)]
pub enum CountError {
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error("no accepted words of length {0}")]
    EmptySphere(usize),
    #[error("prefix of length {prefix} exceeds word length {length}")]
    PrefixTooLong { prefix: usize, length: usize },
    #[error("target state {0} is not an accept state")]
    TargetNotAccept(StateId),
    #[error("no accepted words of length {length} with the given prefix")]
    EmptyConditioningSet { length: usize },
    #[error("pattern must be nonempty")]
    EmptyPattern,
}

/// Transition-count matrix of a restriction: entry `(i, j)` is the number of
/// letters leading from the `i`-th to the `j`-th state of the restriction.
/// Start and fail states never appear.
#[derive(Clone, Debug)]
pub struct CountMatrix {
    states: Vec<StateId>,
    entries: Vec<BigUint>,
}

impl CountMatrix {
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// The original state ids backing the rows/columns, in order.
    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigUint {
        &self.entries[i * self.states.len() + j]
    }

    pub fn row_sums(&self) -> Vec<BigUint> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.entry(i, j)).sum())
            .collect()
    }

    fn to_f64(&self) -> Vec<f64> {
        self.entries
            .iter()
            .map(|e| e.to_f64().unwrap_or(f64::MAX))
            .collect()
    }

    /// Whether the `l`-th power of the matrix is entrywise positive.
    /// Positivity only depends on the boolean pattern, so this never builds
    /// big integers.
    pub fn power_entrywise_positive(&self, l: usize) -> bool {
        let n = self.dim();
        if n == 0 {
            return false;
        }
        if l == 0 {
            return n == 1;
        }
        let adj: Vec<bool> = self.entries.iter().map(|e| !e.is_zero()).collect();
        let mut power = adj.clone();
        for _ in 1..l {
            let mut next = vec![false; n * n];
            for i in 0..n {
                for m in 0..n {
                    if power[i * n + m] {
                        for j in 0..n {
                            if adj[m * n + j] {
                                next[i * n + j] = true;
                            }
                        }
                    }
                }
            }
            power = next;
        }
        power.iter().all(|&b| b)
    }
}

/// Restriction of the transition counts to `states`, which must not contain
/// the start or fail state.
pub fn transition_matrix(aut: &Automaton, states: &BTreeSet<StateId>) -> CountMatrix {
    assert!(
        !states.contains(&aut.start()) && !states.contains(&aut.fail()),
        "restriction must exclude start and fail"
    );
    let idx: Vec<StateId> = states.iter().copied().collect();
    let pos: HashMap<StateId, usize> = idx.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let n = idx.len();
    let mut entries = vec![BigUint::zero(); n * n];
    for (i, &s) in idx.iter().enumerate() {
        for x in 0..aut.alphabet_len() {
            let t = aut.next(s, Letter(x as u16));
            if let Some(&j) = pos.get(&t) {
                entries[i * n + j] += 1u32;
            }
        }
    }
    CountMatrix {
        states: idx,
        entries,
    }
}

/// One backward step of the completion recurrence.
fn step_back(aut: &Automaton, v: &[BigUint]) -> Vec<BigUint> {
    let k = aut.alphabet_len();
    (0..aut.state_count())
        .map(|s| {
            let mut acc = BigUint::zero();
            for x in 0..k {
                acc += &v[aut.next(s, Letter(x as u16))];
            }
            acc
        })
        .collect()
}

fn accept_indicator(aut: &Automaton) -> Vec<BigUint> {
    (0..aut.state_count())
        .map(|s| {
            if aut.is_accept(s) {
                BigUint::one()
            } else {
                BigUint::zero()
            }
        })
        .collect()
}

/// Exact number of accepted words of length exactly `l`. Zero for `l = 0`:
/// the empty word is never accepted.
pub fn count_sphere(aut: &Automaton, l: usize) -> BigUint {
    let mut v = accept_indicator(aut);
    for _ in 0..l {
        v = step_back(aut, &v);
    }
    if l == 0 {
        BigUint::zero()
    } else {
        v[aut.start()].clone()
    }
}

/// Sphere counts for every length `0..=l` in one backward sweep.
pub fn sphere_counts_up_to(aut: &Automaton, l: usize) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero()];
    let mut v = accept_indicator(aut);
    for _ in 1..=l {
        v = step_back(aut, &v);
        out.push(v[aut.start()].clone());
    }
    out
}

/// Number of elements whose normal form has length at most `l`: the identity
/// (the unique length-0 element, counted separately) plus all spheres up to
/// `l`.
pub fn count_ball(aut: &Automaton, l: usize) -> BigUint {
    sphere_counts_up_to(aut, l)
        .into_iter()
        .sum::<BigUint>()
        + 1u32
}

/// Result of a dominant-eigenvalue estimation.
#[derive(Clone, Copy, Debug)]
pub struct GrowthEstimate {
    pub rate: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl GrowthEstimate {
    fn exact_zero() -> Self {
        GrowthEstimate {
            rate: 0.0,
            residual: 0.0,
            iterations: 0,
            converged: true,
        }
    }
}

const POWER_ITERATION_CAP: usize = 100_000;

fn power_iterate(dense: &[f64], n: usize, tol: f64) -> GrowthEstimate {
    if n == 0 {
        return GrowthEstimate::exact_zero();
    }
    let mut v = vec![1.0; n];
    let mut rate = 0.0;
    let mut residual = f64::INFINITY;
    for it in 1..=POWER_ITERATION_CAP {
        let mut w = vec![0.0; n];
        for i in 0..n {
            let vi = v[i];
            if vi != 0.0 {
                for j in 0..n {
                    w[j] += vi * dense[i * n + j];
                }
            }
        }
        let norm = w.iter().cloned().fold(0.0f64, f64::max);
        if norm == 0.0 {
            // nilpotent: only boundedly many words readable
            return GrowthEstimate {
                rate: 0.0,
                residual: 0.0,
                iterations: it,
                converged: true,
            };
        }
        for x in w.iter_mut() {
            *x /= norm;
        }
        residual = v
            .iter()
            .zip(&w)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        v = w;
        rate = norm;
        if residual <= tol {
            return GrowthEstimate {
                rate,
                residual,
                iterations: it,
                converged: true,
            };
        }
    }
    GrowthEstimate {
        rate,
        residual,
        iterations: POWER_ITERATION_CAP,
        converged: false,
    }
}

/// Dominant-eigenvalue estimate by power iteration with max-norm
/// normalization, starting from the all-ones vector. Converges to the Perron
/// root for primitive matrices; non-convergence within the iteration cap is
/// reported through `converged`/`residual`, never as an error.
pub fn growth_rate(m: &CountMatrix, tol: f64) -> GrowthEstimate {
    // Row-vector iteration: v <- v M.
    power_iterate(&m.to_f64(), m.dim(), tol)
}

/// Growth rate of the words readable inside `states`, robust to reducible
/// restrictions: 0 when the restriction has no cycle, the exact spectral
/// radius otherwise (computed per strongly connected component on the
/// shifted matrix `A + I`, which is primitive on an irreducible component).
pub fn restriction_growth(aut: &Automaton, states: &BTreeSet<StateId>, tol: f64) -> GrowthEstimate {
    if states.is_empty() {
        return GrowthEstimate::exact_zero();
    }
    let m = transition_matrix(aut, states);
    let n = m.dim();
    let mut graph = petgraph::graph::DiGraph::<(), ()>::new();
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if !m.entry(i, j).is_zero() {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let mut rate = 0.0f64;
    let mut residual = 0.0f64;
    let mut iterations = 0usize;
    let mut converged = true;
    for scc in petgraph::algo::tarjan_scc(&graph) {
        let members: Vec<usize> = scc.iter().map(|ix| ix.index()).collect();
        let cyclic = members.len() > 1 || !m.entry(members[0], members[0]).is_zero();
        if !cyclic {
            continue; // acyclic block: bounded word length, rate 0
        }
        let k = members.len();
        let mut dense = vec![0.0; k * k];
        for (a, &i) in members.iter().enumerate() {
            for (b, &j) in members.iter().enumerate() {
                dense[a * k + b] = m.entry(i, j).to_f64().unwrap_or(f64::MAX);
            }
            dense[a * k + a] += 1.0; // shift: primitive on an irreducible block
        }
        let est = power_iterate(&dense, k, tol);
        rate = rate.max(est.rate - 1.0);
        residual = residual.max(est.residual);
        iterations += est.iterations;
        converged = converged && est.converged;
    }
    GrowthEstimate {
        rate,
        residual,
        iterations,
        converged,
    }
}

/// Number of length-`m` accepted continuations from each state.
fn completions_after(aut: &Automaton, m: usize) -> Vec<BigUint> {
    let mut v = accept_indicator(aut);
    for _ in 0..m {
        v = step_back(aut, &v);
    }
    v
}

/// Exact ratio of accepted length-`l` words with prefix `p` among all
/// accepted length-`l` words.
pub fn prefix_proportion(aut: &Automaton, p: &Word, l: usize) -> Result<BigRational, CountError> {
    if p.len() > l {
        return Err(CountError::PrefixTooLong {
            prefix: p.len(),
            length: l,
        });
    }
    let denominator = count_sphere(aut, l);
    if denominator.is_zero() {
        return Err(CountError::EmptySphere(l));
    }
    let end = *aut.trace(p)?.last().expect("trace is nonempty");
    let numerator = if end == aut.fail() {
        BigUint::zero()
    } else {
        completions_after(aut, l - p.len())[end].clone()
    };
    Ok(BigRational::new(
        BigInt::from(numerator),
        BigInt::from(denominator),
    ))
}

/// Among accepted length-`l` words with prefix `p`, the exact fraction whose
/// run ends at `target`.
pub fn end_state_proportion(
    aut: &Automaton,
    p: &Word,
    target: StateId,
    l: usize,
) -> Result<BigRational, CountError> {
    if p.len() > l {
        return Err(CountError::PrefixTooLong {
            prefix: p.len(),
            length: l,
        });
    }
    if !aut.is_accept(target) {
        return Err(CountError::TargetNotAccept(target));
    }
    let end = *aut.trace(p)?.last().expect("trace is nonempty");
    let m = l - p.len();
    let denominator = if end == aut.fail() {
        BigUint::zero()
    } else {
        completions_after(aut, m)[end].clone()
    };
    if denominator.is_zero() {
        return Err(CountError::EmptyConditioningSet { length: l });
    }
    // paths of length m from `end` landing exactly on `target`
    let mut v = vec![BigUint::zero(); aut.state_count()];
    v[target] = BigUint::one();
    for _ in 0..m {
        v = step_back(aut, &v);
    }
    Ok(BigRational::new(
        BigInt::from(v[end].clone()),
        BigInt::from(denominator),
    ))
}

/// `viable[r][s]`: an accept state is reachable from `s` in exactly `r`
/// steps. Drives pruned enumeration.
fn viability_table(aut: &Automaton, l: usize) -> Vec<Vec<bool>> {
    let mut table = Vec::with_capacity(l + 1);
    table.push((0..aut.state_count()).map(|s| aut.is_accept(s)).collect::<Vec<_>>());
    for r in 1..=l {
        let prev = &table[r - 1];
        let row = (0..aut.state_count())
            .map(|s| {
                (0..aut.alphabet_len()).any(|x| prev[aut.next(s, Letter(x as u16))])
            })
            .collect();
        table.push(row);
    }
    table
}

fn dfs_words<F: FnMut(&[Letter], StateId)>(
    aut: &Automaton,
    viable: &[Vec<bool>],
    word: &mut Vec<Letter>,
    s: StateId,
    remaining: usize,
    f: &mut F,
) {
    if remaining == 0 {
        f(word, s);
        return;
    }
    for x in 0..aut.alphabet_len() {
        let t = aut.next(s, Letter(x as u16));
        if viable[remaining - 1][t] {
            word.push(Letter(x as u16));
            dfs_words(aut, viable, word, t, remaining - 1, f);
            word.pop();
        }
    }
}

/// Folds a visitor over every accepted word of length `l`, sharded by first
/// letter (in parallel with the `parallel` feature). Shard results are
/// merged in alphabet order, so the fold is deterministic.
pub(crate) fn fold_sphere<A, I, S, M>(aut: &Automaton, l: usize, init: I, step: S, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    S: Fn(&mut A, &[Letter], StateId) + Sync + Send,
    M: Fn(A, A) -> A,
{
    if l == 0 {
        return init();
    }
    let viable = viability_table(aut, l);
    let shards: Vec<Letter> = (0..aut.alphabet_len())
        .map(|x| Letter(x as u16))
        .filter(|&x| viable[l - 1][aut.next(aut.start(), x)])
        .collect();
    let results = parallel::map_shards(shards, |first| {
        let mut acc = init();
        let mut word = vec![first];
        let s = aut.next(aut.start(), first);
        dfs_words(aut, &viable, &mut word, s, l - 1, &mut |w, end| {
            step(&mut acc, w, end)
        });
        acc
    });
    results.into_iter().fold(init(), merge)
}

/// Exact number of accepted words of length `l` that are rigid, decided by
/// enumeration with a per-word rigidity check.
pub fn rigid_sphere_count(aut: &Automaton, l: usize) -> BigUint {
    let n: u64 = fold_sphere(
        aut,
        l,
        || 0u64,
        |acc, w, end| {
            if aut.is_rigid_from(&Word::new(w.to_vec()), end) {
                *acc += 1;
            }
        },
        |a, b| a + b,
    );
    BigUint::from(n)
}

/// Lexicographic stream (by letter index) over the accepted words of length
/// exactly `l`.
pub fn enumerate_sphere(aut: &Automaton, l: usize) -> SphereIter<'_> {
    let viable = viability_table(aut, l);
    SphereIter {
        aut,
        viable,
        l,
        word: Vec::new(),
        stack: Vec::new(),
        started: false,
    }
}

pub struct SphereIter<'a> {
    aut: &'a Automaton,
    viable: Vec<Vec<bool>>,
    l: usize,
    word: Vec<Letter>,
    stack: Vec<(StateId, u16)>,
    started: bool,
}

impl Iterator for SphereIter<'_> {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.l == 0 {
            return None;
        }
        if !self.started {
            self.started = true;
            self.stack.push((self.aut.start(), 0));
        } else if self.word.len() == self.l {
            // resume after a yield: drop the leaf
            self.stack.pop();
            self.word.pop();
        }
        let k = self.aut.alphabet_len() as u16;
        loop {
            let top = self.stack.last_mut()?;
            if top.1 >= k {
                self.stack.pop();
                if self.stack.is_empty() {
                    return None;
                }
                self.word.pop();
                continue;
            }
            let x = Letter(top.1);
            top.1 += 1;
            let t = self.aut.next(top.0, x);
            let remaining = self.l - self.word.len() - 1;
            if self.viable[remaining][t] {
                self.word.push(x);
                self.stack.push((t, 0));
                if remaining == 0 {
                    return Some(Word::new(self.word.clone()));
                }
            }
        }
    }
}

/// Standard failure-function factor matcher: `table[q][x]` is the next match
/// length after reading `x` in state `q`; reaching `pattern.len()` means the
/// pattern occurred.
fn kmp_table(pattern: &[Letter], alphabet: usize) -> Vec<Vec<usize>> {
    let m = pattern.len();
    let mut fail_link = vec![0usize; m];
    for q in 1..m {
        let mut f = fail_link[q - 1];
        while f > 0 && pattern[f] != pattern[q] {
            f = fail_link[f - 1];
        }
        if pattern[f] == pattern[q] {
            f += 1;
        }
        fail_link[q] = f;
    }
    let mut table = vec![vec![0usize; alphabet]; m];
    for q in 0..m {
        for x in 0..alphabet {
            let letter = Letter(x as u16);
            let mut f = q;
            loop {
                if pattern[f] == letter {
                    table[q][x] = f + 1;
                    break;
                }
                if f == 0 {
                    table[q][x] = 0;
                    break;
                }
                f = fail_link[f - 1];
            }
        }
    }
    table
}

/// Recognizer for "accepted by `aut` and avoiding `pattern` as a factor":
/// the reachable product of `aut` with the factor matcher, where either
/// component failing or the pattern completing is absorbed by the product's
/// fail state.
pub fn avoidance_automaton(aut: &Automaton, pattern: &Word) -> Result<Automaton, CountError> {
    if pattern.is_empty() {
        return Err(CountError::EmptyPattern);
    }
    for &x in pattern {
        if x.index() >= aut.alphabet_len() {
            return Err(AutomatonError::LetterOutOfRange {
                letter: x.index(),
                alphabet: aut.alphabet_len(),
            }
            .into());
        }
    }
    let m = pattern.len();
    let kmp = kmp_table(pattern.letters(), aut.alphabet_len());
    let start_pair = (aut.start(), 0usize);
    let mut ids: HashMap<(StateId, usize), StateId> = HashMap::new();
    ids.insert(start_pair, 0);
    let fail_id = 1;
    let mut order = vec![start_pair];
    let mut transitions: Vec<(StateId, Letter, StateId)> = Vec::new();
    let mut queue = VecDeque::from([start_pair]);
    while let Some((s, q)) = queue.pop_front() {
        let from = ids[&(s, q)];
        for x in 0..aut.alphabet_len() {
            let t = aut.next(s, Letter(x as u16));
            let q2 = kmp[q][x];
            if t == aut.fail() || q2 == m {
                continue; // defaults to fail
            }
            let next_id = match ids.get(&(t, q2)) {
                Some(&id) => id,
                None => {
                    let id = order.len() + 1; // slot 1 is fail
                    ids.insert((t, q2), id);
                    order.push((t, q2));
                    queue.push_back((t, q2));
                    id
                }
            };
            transitions.push((from, Letter(x as u16), next_id));
        }
    }
    let accept: Vec<StateId> = order
        .iter()
        .enumerate()
        .filter(|(_, (s, _))| aut.is_accept(*s))
        .map(|(i, _)| if i == 0 { 0 } else { i + 1 })
        .collect();
    Ok(Automaton::new(
        aut.alphabet().to_vec(),
        order.len() + 1,
        0,
        fail_id,
        accept,
        &transitions,
    )?)
}

/// Growth rate of the accepted words avoiding `pattern` as a factor. The
/// avoidance proportion decays exponentially iff this rate is strictly below
/// the growth rate of the full language.
pub fn avoidance_growth_rate(aut: &Automaton, pattern: &Word) -> Result<GrowthEstimate, CountError> {
    let product = avoidance_automaton(aut, pattern)?;
    let interior: BTreeSet<StateId> = product.interior_states().collect();
    Ok(restriction_growth(&product, &interior, 1e-12))
}

/// Exactly-uniform sampler over the accepted words of a fixed length, via a
/// backward table of completion counts and forward sampling proportional to
/// them.
pub struct SphereSampler<'a> {
    aut: &'a Automaton,
    l: usize,
    // completions[r][s]: accepted continuations of length r from s
    completions: Vec<Vec<BigUint>>,
}

impl<'a> SphereSampler<'a> {
    pub fn new(aut: &'a Automaton, l: usize) -> Result<Self, CountError> {
        let mut completions = Vec::with_capacity(l + 1);
        completions.push(accept_indicator(aut));
        for r in 1..=l {
            let prev = &completions[r - 1];
            completions.push(step_back(aut, prev));
        }
        if completions[l][aut.start()].is_zero() {
            return Err(CountError::EmptySphere(l));
        }
        Ok(SphereSampler {
            aut,
            l,
            completions,
        })
    }

    pub fn sphere_size(&self) -> &BigUint {
        &self.completions[self.l][self.aut.start()]
    }

    pub fn sample<R: rand::Rng>(&self, rng: &mut R) -> Word {
        let mut letters = Vec::with_capacity(self.l);
        let mut state = self.aut.start();
        for r in (1..=self.l).rev() {
            let total = &self.completions[r][state];
            let mut pick = rng.gen_biguint_below(total);
            for x in 0..self.aut.alphabet_len() {
                let t = self.aut.next(state, Letter(x as u16));
                let c = &self.completions[r - 1][t];
                if &pick < c {
                    letters.push(Letter(x as u16));
                    state = t;
                    break;
                }
                pick -= c;
            }
        }
        debug_assert_eq!(letters.len(), self.l);
        Word::new(letters)
    }
}

/// Draws one word, exactly uniform over the accepted words of length `l`,
/// deterministically from `seed`.
pub fn sample_uniform(aut: &Automaton, l: usize, seed: u64) -> Result<Word, CountError> {
    let sampler = SphereSampler::new(aut, l)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sampler.sample(&mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{freegroup, psl2z};

    fn silver() -> f64 {
        1.0 + 2.0f64.sqrt()
    }

    #[test]
    fn psl2z_small_sphere_counts() {
        let aut = psl2z::build_automaton().automaton;
        assert_eq!(count_sphere(&aut, 0), BigUint::zero());
        assert_eq!(count_sphere(&aut, 1), BigUint::from(4u32));
        assert_eq!(count_sphere(&aut, 2), BigUint::from(12u32));
        // 36 reduced three-letter words minus the 8 banned triples
        assert_eq!(count_sphere(&aut, 3), BigUint::from(28u32));
    }

    #[test]
    fn psl2z_ball_counts() {
        let aut = psl2z::build_automaton().automaton;
        assert_eq!(count_ball(&aut, 0), BigUint::from(1u32));
        assert_eq!(count_ball(&aut, 1), BigUint::from(5u32));
        assert_eq!(count_ball(&aut, 2), BigUint::from(17u32));
    }

    #[test]
    fn sphere_counts_match_enumeration_on_all_builtins() {
        let systems = vec![
            psl2z::build_automaton().automaton,
            freegroup::build_automaton(2).unwrap().automaton,
            crate::garside::build_automaton(3).unwrap().automaton,
        ];
        for aut in &systems {
            for l in 0..=8 {
                let counted = count_sphere(aut, l);
                let enumerated = enumerate_sphere(aut, l).count();
                assert_eq!(counted, BigUint::from(enumerated), "length {l}");
            }
        }
    }

    #[test]
    fn enumeration_is_lexicographic_and_accepted() {
        let aut = psl2z::build_automaton().automaton;
        let words: Vec<Word> = enumerate_sphere(&aut, 4).collect();
        for w in &words {
            assert!(aut.accepts(w).unwrap());
            assert_eq!(w.len(), 4);
        }
        let mut sorted = words.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted, words);
    }

    #[test]
    fn free_group_sphere_formula() {
        let aut = freegroup::build_automaton(2).unwrap().automaton;
        assert_eq!(enumerate_sphere(&aut, 3).count(), 36); // 4 * 3^2
        for l in 1..=10 {
            let expected = BigUint::from(4u32) * BigUint::from(3u32).pow(l as u32 - 1);
            assert_eq!(count_sphere(&aut, l), expected);
        }
    }

    #[test]
    fn silver_ratio_growth() {
        let aut = psl2z::build_automaton().automaton;
        let acc = aut.accessible_subautomaton();
        assert_eq!(acc.len(), 8);
        let m = transition_matrix(&aut, &acc);
        let est = growth_rate(&m, 1e-12);
        assert!(est.converged);
        assert!((est.rate - silver()).abs() < 1e-9, "rate {}", est.rate);
        // robust path agrees on the primitive restriction
        let est2 = restriction_growth(&aut, &acc, 1e-12);
        assert!((est2.rate - silver()).abs() < 1e-9);
    }

    #[test]
    fn free_group_growth_is_three() {
        let aut = freegroup::build_automaton(2).unwrap().automaton;
        let acc = aut.accessible_subautomaton();
        let m = transition_matrix(&aut, &acc);
        for sum in m.row_sums() {
            assert_eq!(sum, BigUint::from(3u32));
        }
        let est = growth_rate(&m, 1e-12);
        assert!((est.rate - 3.0).abs() < 1e-12);
    }

    #[test]
    fn trivial_matrices() {
        let aut = psl2z::build_automaton().automaton;
        let empty = transition_matrix(&aut, &BTreeSet::new());
        assert_eq!(empty.dim(), 0);
        assert_eq!(growth_rate(&empty, 1e-12).rate, 0.0);

        // identity-like 1x1 matrix from a single self-looping state
        let one = Automaton::new(
            vec!["x".into(), "y".into()],
            3,
            0,
            1,
            [2],
            &[(0, Letter(0), 2), (2, Letter(0), 2)],
        )
        .unwrap();
        let states: BTreeSet<_> = [2usize].into_iter().collect();
        let m = transition_matrix(&one, &states);
        assert_eq!(m.entry(0, 0), &BigUint::one());
        let est = growth_rate(&m, 1e-12);
        assert!((est.rate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_ratio_approaches_growth_rate() {
        let aut = psl2z::build_automaton().automaton;
        let counts = sphere_counts_up_to(&aut, 41);
        let ratio = counts[41].to_f64().unwrap() / counts[40].to_f64().unwrap();
        assert!((ratio - silver()).abs() < 1e-3);
    }

    #[test]
    fn prefix_proportions_exact_and_boundary() {
        let aut = psl2z::build_automaton().automaton;
        let b = Word::new(vec![aut.letter_named("B").unwrap()]);
        let a = Word::new(vec![aut.letter_named("A").unwrap()]);
        for l in 1..=8 {
            // cross-check against enumeration
            let total = enumerate_sphere(&aut, l).count();
            let with_b = enumerate_sphere(&aut, l)
                .filter(|w| w.letters()[0] == b.letters()[0])
                .count();
            let exact = prefix_proportion(&aut, &b, l).unwrap();
            assert_eq!(
                exact,
                BigRational::new(BigInt::from(with_b), BigInt::from(total))
            );
        }
        // empty prefix conditions on nothing
        assert_eq!(
            prefix_proportion(&aut, &Word::empty(), 5).unwrap(),
            BigRational::one()
        );
        // the four letters play symmetric roles
        assert_eq!(
            prefix_proportion(&aut, &a, 30).unwrap(),
            prefix_proportion(&aut, &b, 30).unwrap()
        );
        assert!(matches!(
            prefix_proportion(&aut, &b, 0),
            Err(CountError::EmptySphere(0))
        ));
    }

    #[test]
    fn end_state_proportion_examples() {
        let named = psl2z::build_automaton();
        let aut = &named.automaton;
        let b = Word::new(vec![aut.letter_named("B").unwrap()]);
        let target = named.state_named("X¬A B").unwrap();
        // conditioning on the word itself pins its own end state
        let w = Word::new(vec![
            aut.letter_named("A").unwrap(),
            aut.letter_named("B").unwrap(),
        ]);
        let end = *aut.trace(&w).unwrap().last().unwrap();
        assert_eq!(
            end_state_proportion(aut, &w, end, w.len()).unwrap(),
            BigRational::one()
        );
        // exact agreement with enumeration at small lengths
        for l in 2..=8 {
            let words: Vec<Word> = enumerate_sphere(aut, l)
                .filter(|w| w.letters()[0] == b.letters()[0])
                .collect();
            let hits = words
                .iter()
                .filter(|w| *aut.trace(w).unwrap().last().unwrap() == target)
                .count();
            let exact = end_state_proportion(aut, &b, target, l).unwrap();
            assert_eq!(
                exact,
                BigRational::new(BigInt::from(hits), BigInt::from(words.len()))
            );
        }
        assert!(matches!(
            end_state_proportion(aut, &b, aut.start(), 5),
            Err(CountError::TargetNotAccept(_))
        ));
    }

    #[test]
    fn rigid_count_small() {
        let aut = psl2z::build_automaton().automaton;
        // at length 1 all four letters are rigid (no banned square exists)
        assert_eq!(rigid_sphere_count(&aut, 1), BigUint::from(4u32));
        assert_eq!(rigid_sphere_count(&aut, 0), BigUint::zero());
        // agreement with direct enumeration
        for l in 1..=7 {
            let direct = enumerate_sphere(&aut, l)
                .filter(|w| aut.is_rigid_word(w).unwrap())
                .count();
            assert_eq!(rigid_sphere_count(&aut, l), BigUint::from(direct));
        }
    }

    #[test]
    fn avoidance_counts_match_brute_force() {
        let aut = psl2z::build_automaton().automaton;
        let contains = |w: &Word, p: &Word| -> bool {
            if p.len() > w.len() {
                return false;
            }
            (0..=w.len() - p.len()).any(|i| &w.slice(i, i + p.len()) == p)
        };
        let patterns = vec![
            Word::from_indices(&[0]),          // single letter
            Word::from_indices(&[0, 2]),       // A B
            Word::from_indices(&[2, 2]),       // B B
            Word::from_indices(&[0, 3, 0, 3]), // A b A b
        ];
        for p in &patterns {
            let product = avoidance_automaton(&aut, p).unwrap();
            for l in 0..=8 {
                let brute = enumerate_sphere(&aut, l)
                    .filter(|w| !contains(w, p))
                    .count();
                assert_eq!(
                    count_sphere(&product, l),
                    BigUint::from(brute),
                    "pattern {p:?} length {l}"
                );
            }
        }
    }

    #[test]
    fn avoidance_rate_below_full_rate() {
        let aut = psl2z::build_automaton().automaton;
        let a = Word::from_indices(&[0]);
        let est = avoidance_growth_rate(&aut, &a).unwrap();
        assert!(est.converged);
        assert!(est.rate < silver() - 1e-6);
        // counts agree with the full language below the pattern length
        let long_pattern = Word::from_indices(&[0; 9]);
        let product = avoidance_automaton(&aut, &long_pattern).unwrap();
        for l in 0..9 {
            assert_eq!(count_sphere(&product, l), count_sphere(&aut, l));
        }
        assert!(matches!(
            avoidance_growth_rate(&aut, &Word::empty()),
            Err(CountError::EmptyPattern)
        ));
    }

    #[test]
    fn sampler_is_deterministic_and_in_sphere() {
        let aut = psl2z::build_automaton().automaton;
        let w1 = sample_uniform(&aut, 12, 42).unwrap();
        let w2 = sample_uniform(&aut, 12, 42).unwrap();
        assert_eq!(w1, w2);
        assert!(aut.accepts(&w1).unwrap());
        let w3 = sample_uniform(&aut, 12, 43).unwrap();
        assert!(w3.len() == 12);
        assert!(matches!(
            sample_uniform(&aut, 0, 1),
            Err(CountError::EmptySphere(0))
        ));
    }

    #[test]
    fn sampler_letter_frequencies_at_length_one() {
        let aut = psl2z::build_automaton().automaton;
        let sampler = SphereSampler::new(&aut, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut counts = [0usize; 4];
        let n = 40_000;
        for _ in 0..n {
            let w = sampler.sample(&mut rng);
            counts[w.letters()[0].index()] += 1;
        }
        for c in counts {
            let p = c as f64 / n as f64;
            // 5 sigma around 1/4
            let sigma = (0.25 * 0.75 / n as f64).sqrt();
            assert!((p - 0.25).abs() < 5.0 * sigma, "letter frequency {p}");
        }
    }

    #[test]
    fn completion_counts_are_exact_integers() {
        // spot check: no floating point in the counting path
        let aut = psl2z::build_automaton().automaton;
        let big = count_sphere(&aut, 120);
        assert!(big > BigUint::from(u128::MAX)); // exceeds machine integers
    }
}
