//! Free groups acting on their Cayley trees.
//!
//! The tree is the exactly solvable case: reduced words are the normal
//! forms, they are exactly the tree geodesics, every nontrivial element acts
//! loxodromically with translation length the length of its cyclic
//! reduction, and a word is rigid iff it is cyclically reduced.
//!
//! Letters: index `2i` is the `i`-th generator, `2i + 1` its inverse.
//! Textual syntax: `a b c ...` for generators, `a' b' ...` for inverses.

use thiserror::Error;

use crate::automaton::{Automaton, Letter, NamedAutomaton, Word};
use crate::geometry::{ActionBackend, ClassTag, GeometryError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FreeGroupError {
    #[error("rank must be at least 2, got {0}")]
    RankTooSmall(usize),
    #[error("rank {0} exceeds the letter syntax (max 26)")]
    RankTooLarge(usize),
    #[error("unknown letter token {0:?}")]
    BadToken(String),
    #[error("operation requires a nonempty reduced word")]
    EmptyWord,
}

fn inverse_letter(x: Letter) -> Letter {
    Letter(x.0 ^ 1)
}

fn letter_names(rank: usize) -> Vec<String> {
    let mut names = Vec::with_capacity(2 * rank);
    for i in 0..rank {
        let c = (b'a' + i as u8) as char;
        names.push(c.to_string());
        names.push(format!("{c}'"));
    }
    names
}

pub fn parse_word(rank: usize, text: &str) -> Result<Word, FreeGroupError> {
    let names = letter_names(rank);
    let mut letters = Vec::new();
    for token in text.split_whitespace() {
        let idx = names
            .iter()
            .position(|n| n == token)
            .ok_or_else(|| FreeGroupError::BadToken(token.to_string()))?;
        letters.push(Letter(idx as u16));
    }
    Ok(Word::new(letters))
}

pub fn word_to_string(rank: usize, w: &Word) -> String {
    let names = letter_names(rank);
    w.letters()
        .iter()
        .map(|&x| names[x.index()].as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Free reduction: cancels adjacent inverse pairs to a fixed point.
pub fn reduce(w: &Word) -> Word {
    let mut stack: Vec<Letter> = Vec::with_capacity(w.len());
    for &x in w {
        if stack.last() == Some(&inverse_letter(x)) {
            stack.pop();
        } else {
            stack.push(x);
        }
    }
    Word::new(stack)
}

fn invert(w: &Word) -> Word {
    Word::new(w.letters().iter().rev().map(|&x| inverse_letter(x)).collect())
}

/// Splits a word as `conjugator * core * conjugator^-1` with the core
/// cyclically reduced. Reduces its input first.
pub fn cyclically_reduce(w: &Word) -> (Word, Word) {
    let reduced = reduce(w);
    let letters = reduced.letters();
    let mut lo = 0;
    let mut hi = letters.len();
    while hi - lo >= 2 && letters[lo] == inverse_letter(letters[hi - 1]) {
        lo += 1;
        hi -= 1;
    }
    (
        Word::new(letters[..lo].to_vec()),
        Word::new(letters[lo..hi].to_vec()),
    )
}

pub fn is_cyclically_reduced(w: &Word) -> bool {
    let (conj, _) = cyclically_reduce(w);
    conj.is_empty() && reduce(w) == *w
}

/// Recognizer for reduced words: a state per last letter, inverse pairs
/// banned, everything else free.
pub fn build_automaton(rank: usize) -> Result<NamedAutomaton, FreeGroupError> {
    if rank < 2 {
        return Err(FreeGroupError::RankTooSmall(rank));
    }
    if rank > 26 {
        return Err(FreeGroupError::RankTooLarge(rank));
    }
    let names = letter_names(rank);
    let k = 2 * rank;
    let state_of = |x: usize| 2 + x;
    let mut transitions = Vec::new();
    for x in 0..k {
        transitions.push((0usize, Letter(x as u16), state_of(x)));
    }
    for y in 0..k {
        for x in 0..k {
            if x != y ^ 1 {
                transitions.push((state_of(y), Letter(x as u16), state_of(x)));
            }
        }
    }
    let automaton = Automaton::new(names.clone(), k + 2, 0, 1, 2..k + 2, &transitions)
        .expect("reduced-word table is well formed");
    let mut state_names = vec!["start".to_string(), "fail".to_string()];
    state_names.extend(names);
    Ok(NamedAutomaton::new(automaton, state_names))
}

/// The Cayley-tree action: points and elements are reduced words, the base
/// point is the identity vertex, and distance is the length of the reduced
/// quotient.
#[derive(Clone, Copy, Debug)]
pub struct TreeBackend {
    rank: usize,
}

pub fn tree_backend(rank: usize) -> Result<TreeBackend, FreeGroupError> {
    if rank < 2 {
        return Err(FreeGroupError::RankTooSmall(rank));
    }
    if rank > 26 {
        return Err(FreeGroupError::RankTooLarge(rank));
    }
    Ok(TreeBackend { rank })
}

impl TreeBackend {
    pub fn rank(&self) -> usize {
        self.rank
    }
}

impl ActionBackend for TreeBackend {
    type Element = Word;
    type Point = Word;

    fn alphabet_size(&self) -> usize {
        2 * self.rank
    }

    fn base_point(&self) -> Word {
        Word::empty()
    }

    fn identity(&self) -> Word {
        Word::empty()
    }

    fn letter_element(&self, x: Letter) -> Result<Word, GeometryError> {
        if x.index() >= 2 * self.rank {
            return Err(GeometryError::LetterOutOfRange {
                letter: x.index(),
                alphabet: 2 * self.rank,
            });
        }
        Ok(Word::new(vec![x]))
    }

    fn compose(&self, a: &Word, b: &Word) -> Word {
        reduce(&a.concat(b))
    }

    fn inverse(&self, a: &Word) -> Option<Word> {
        Some(invert(a))
    }

    fn act(&self, g: &Word, p: &Word) -> Word {
        reduce(&g.concat(p))
    }

    fn dist(&self, a: &Word, b: &Word) -> u64 {
        reduce(&invert(a).concat(b)).len() as u64
    }

    fn exact_tag(&self, w: &Word) -> Option<ClassTag> {
        let (_, core) = cyclically_reduce(w);
        Some(if core.is_empty() {
            ClassTag::Elliptic
        } else {
            ClassTag::Loxodromic
        })
    }

    fn exact_translation_length(&self, w: &Word) -> Option<f64> {
        let (_, core) = cyclically_reduce(w);
        Some(core.len() as f64)
    }
}

/// Appends at most one letter so that the result is cyclically reduced
/// (hence rigid and loxodromic, with axis through the base point). The
/// appended letter differs from the inverses of both the first and the last
/// letter, which exist for rank at least 2. Returns the input unchanged when
/// it is already cyclically reduced.
pub fn loxodromize(rank: usize, w: &Word) -> Result<Word, FreeGroupError> {
    if rank < 2 {
        return Err(FreeGroupError::RankTooSmall(rank));
    }
    let reduced = reduce(w);
    if reduced.is_empty() {
        return Err(FreeGroupError::EmptyWord);
    }
    let (conj, _) = cyclically_reduce(&reduced);
    if conj.is_empty() {
        return Ok(reduced);
    }
    let first = reduced.letters()[0];
    let last = *reduced.letters().last().unwrap();
    let banned = [inverse_letter(last), inverse_letter(first)];
    let v = (0..2 * rank as u16)
        .map(Letter)
        .find(|x| !banned.contains(x))
        .expect("rank >= 2 leaves at least two candidates");
    let mut out = reduced;
    out.push(v);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting;
    use crate::geometry;
    use num_bigint::BigUint;
    use proptest::prelude::*;

    fn w(rank: usize, text: &str) -> Word {
        parse_word(rank, text).unwrap()
    }

    #[test]
    fn reduction_examples() {
        assert!(reduce(&w(2, "a a'")).is_empty());
        assert_eq!(reduce(&w(2, "a b b' a")), w(2, "a a"));
        assert_eq!(cyclically_reduce(&w(2, "a b a'")), (w(2, "a"), w(2, "b")));
        assert_eq!(
            cyclically_reduce(&Word::empty()),
            (Word::empty(), Word::empty())
        );
        let cyc = w(2, "a b");
        assert_eq!(cyclically_reduce(&cyc), (Word::empty(), cyc.clone()));
    }

    #[test]
    fn automaton_counts_and_structure() {
        let named = build_automaton(2).unwrap();
        let aut = &named.automaton;
        assert_eq!(aut.state_count(), 6);
        let acc = aut.accessible_subautomaton();
        assert_eq!(acc.len(), 4);
        for l in 1..=10 {
            let expected = BigUint::from(4u32) * BigUint::from(3u32).pow(l as u32 - 1);
            assert_eq!(counting::count_sphere(aut, l), expected);
        }
        assert!(build_automaton(1).is_err());
        let report = aut.check_anf_hypothesis();
        assert!(report.anf_holds());
        assert_eq!(report.witness.as_ref().unwrap().0.len(), 1);
    }

    #[test]
    fn rigid_iff_cyclically_reduced_exhaustive() {
        let aut = build_automaton(2).unwrap().automaton;
        for l in 1..=8 {
            for word in counting::enumerate_sphere(&aut, l) {
                assert_eq!(
                    aut.is_rigid_word(&word).unwrap(),
                    is_cyclically_reduced(&word),
                    "mismatch on {}",
                    word_to_string(2, &word)
                );
            }
        }
    }

    #[test]
    fn tree_distances_and_translation_lengths() {
        let b = tree_backend(2).unwrap();
        use crate::geometry::ActionBackend;
        assert_eq!(b.dist(&b.base_point(), &w(2, "a")), 1);
        assert_eq!(b.max_generator_displacement(), 1);
        assert_eq!(b.exact_translation_length(&w(2, "a b a'")), Some(1.0));
        assert_eq!(
            geometry::translation_length_estimate(&b, &w(2, "a"), 10).unwrap(),
            1.0
        );
        // every nonempty reduced word acts loxodromically
        let aut = build_automaton(2).unwrap().automaton;
        for l in 1..=8 {
            for word in counting::enumerate_sphere(&aut, l) {
                assert_eq!(b.exact_tag(&word), Some(ClassTag::Loxodromic));
            }
        }
    }

    #[test]
    fn reduced_words_are_geodesics() {
        let b = tree_backend(2).unwrap();
        let aut = build_automaton(2).unwrap().automaton;
        for l in 1..=6 {
            for word in counting::enumerate_sphere(&aut, l) {
                assert!(geometry::check_geodesic_words(&b, &word, 0).unwrap());
            }
        }
    }

    #[test]
    fn axis_condition_is_equality_for_cyclically_reduced_words() {
        let b = tree_backend(2).unwrap();
        let aut = build_automaton(2).unwrap().automaton;
        for l in 1..=6 {
            for word in counting::enumerate_sphere(&aut, l) {
                if !is_cyclically_reduced(&word) {
                    continue;
                }
                let report = geometry::check_rigid_geometry(&b, &aut, &word, 0, 4).unwrap();
                assert!(report.passed(), "axis fails for {}", word_to_string(2, &word));
            }
        }
    }

    #[test]
    fn loxodromize_examples() {
        assert_eq!(loxodromize(2, &w(2, "a b a'")).unwrap(), w(2, "a b a' b"));
        let cyc = w(2, "b a");
        assert_eq!(loxodromize(2, &cyc).unwrap(), cyc);
        assert_eq!(
            loxodromize(2, &Word::empty()),
            Err(FreeGroupError::EmptyWord)
        );
    }

    proptest! {
        #[test]
        fn reduce_is_idempotent(letters in proptest::collection::vec(0u16..4, 0..40)) {
            let word = Word::from_indices(&letters);
            let once = reduce(&word);
            prop_assert_eq!(reduce(&once), once.clone());
        }

        #[test]
        fn loxodromize_outputs_are_rigid_loxodromic_and_close(
            letters in proptest::collection::vec(0u16..4, 1..30)
        ) {
            let word = reduce(&Word::from_indices(&letters));
            prop_assume!(!word.is_empty());
            let b = tree_backend(2).unwrap();
            let aut = build_automaton(2).unwrap().automaton;
            let out = loxodromize(2, &word).unwrap();
            prop_assert!(is_cyclically_reduced(&out));
            prop_assert!(aut.is_rigid_word(&out).unwrap());
            prop_assert_eq!(b.exact_tag(&out), Some(ClassTag::Loxodromic));
            // group-element distance between input and output is at most one
            use crate::geometry::ActionBackend;
            let d = b.dist(&word, &out);
            prop_assert!(d <= 1);
        }
    }
}
