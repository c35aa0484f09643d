//! Word combinatorics over the letters {1,…,d}: coefficient extraction,
//! shuffle products, permutation actions on level blocks, and the
//! ordered-shuffle enumeration behind the H map.
//!
//! Letters are 1-based in the API and in display strings ("121"); serialized
//! forms are 0-based.

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use std::fmt;

use crate::error::{Error, Result};
use crate::tensor::TruncatedTensor;

/// A word over the alphabet {1,…,d}, indexing the dual basis of V^{⊗k}.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<usize>,
}

impl Word {
    pub fn new(letters: Vec<usize>, dim: usize) -> Result<Self> {
        for &l in &letters {
            if l == 0 || l > dim {
                return Err(Error::domain(format!("letter {l} out of range 1..={dim}")));
            }
        }
        Ok(Word { letters })
    }

    pub fn empty() -> Self {
        Word {
            letters: Vec::new(),
        }
    }

    /// Parses a digit string like "121" (1-based letters, d ≤ 9).
    pub fn parse(s: &str, dim: usize) -> Result<Self> {
        let mut letters = Vec::with_capacity(s.len());
        for c in s.chars() {
            let l = c
                .to_digit(10)
                .ok_or_else(|| Error::input(format!("invalid letter {c:?} in word {s:?}")))?;
            letters.push(l as usize);
        }
        Word::new(letters, dim)
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    /// Row-major offset of this word into the level-|w| block.
    pub fn offset(&self, dim: usize) -> usize {
        self.letters.iter().fold(0, |acc, &l| acc * dim + (l - 1))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.iter().all(|&l| l <= 9) {
            for &l in &self.letters {
                write!(f, "{l}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.letters.iter().map(|l| l.to_string()).collect();
            write!(f, "({})", parts.join(","))
        }
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.letters.len()))?;
        for &l in &self.letters {
            seq.serialize_element(&(l - 1))?;
        }
        seq.end()
    }
}

/// ⟨g, w⟩: the coefficient of e_{w_1}⊗…⊗e_{w_k} in block |w| of g.
pub fn coeff(g: &TruncatedTensor, w: &Word) -> Result<f64> {
    if w.len() > g.level() {
        return Err(Error::domain(format!(
            "word of length {} exceeds truncation level {}",
            w.len(),
            g.level()
        )));
    }
    for &l in w.letters() {
        if l > g.dim() {
            return Err(Error::domain(format!(
                "letter {l} out of range 1..={}",
                g.dim()
            )));
        }
    }
    Ok(g.block(w.len())?[w.offset(g.dim())])
}

/// All C(|u|+|v|, |u|) order-preserving interleavings of u and v, with
/// multiplicity.
pub fn shuffle(u: &Word, v: &Word) -> Vec<Word> {
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(u.len() + v.len());
    shuffle_rec(u.letters(), v.letters(), &mut prefix, &mut out);
    out
}

fn shuffle_rec(u: &[usize], v: &[usize], prefix: &mut Vec<usize>, out: &mut Vec<Word>) {
    if u.is_empty() {
        let mut letters = prefix.clone();
        letters.extend_from_slice(v);
        out.push(Word { letters });
        return;
    }
    if v.is_empty() {
        let mut letters = prefix.clone();
        letters.extend_from_slice(u);
        out.push(Word { letters });
        return;
    }
    prefix.push(u[0]);
    shuffle_rec(&u[1..], v, prefix, out);
    prefix.pop();
    prefix.push(v[0]);
    shuffle_rec(u, &v[1..], prefix, out);
    prefix.pop();
}

/// Σ_{w ∈ u ш v} ⟨g, w⟩ without materializing the words.
fn shuffle_coeff_sum(block: &[f64], dim: usize, u: &[usize], v: &[usize]) -> f64 {
    fn rec(block: &[f64], dim: usize, u: &[usize], v: &[usize], offset: usize) -> f64 {
        if u.is_empty() && v.is_empty() {
            return block[offset];
        }
        let mut sum = 0.0;
        if let Some((&l, rest)) = u.split_first() {
            sum += rec(block, dim, rest, v, offset * dim + (l - 1));
        }
        if let Some((&l, rest)) = v.split_first() {
            sum += rec(block, dim, u, rest, offset * dim + (l - 1));
        }
        sum
    }
    rec(block, dim, u, v, 0)
}

/// Worst normalized residual of a family of shuffle identities, with the
/// witnessing word pair.
#[derive(Debug, Clone)]
pub struct ShuffleReport {
    pub worst_residual: f64,
    pub witness: Option<(Word, Word)>,
}

fn scan_word_pairs<F>(g: &TruncatedTensor, mut pair_residual: F) -> ShuffleReport
where
    F: FnMut(&[usize], &[usize]) -> f64,
{
    let dim = g.dim();
    let level = g.level();
    let mut worst = 0.0f64;
    let mut witness = None;
    let mut u = Vec::new();
    let mut v = Vec::new();
    for a in 1..level {
        for b in 1..=(level - a) {
            u.resize(a, 1);
            v.resize(b, 1);
            u.fill(1);
            v.fill(1);
            loop {
                let r = pair_residual(&u, &v);
                if r > worst {
                    worst = r;
                    witness = Some((Word { letters: u.clone() }, Word { letters: v.clone() }));
                }
                if !next_word(&mut v, dim) {
                    if !next_word(&mut u, dim) {
                        break;
                    }
                    v.fill(1);
                }
            }
        }
    }
    ShuffleReport {
        worst_residual: worst,
        witness,
    }
}

/// Odometer over words of fixed length; returns false after wrapping.
fn next_word(w: &mut [usize], dim: usize) -> bool {
    for l in w.iter_mut().rev() {
        if *l < dim {
            *l += 1;
            return true;
        }
        *l = 1;
    }
    false
}

/// Measures the group-likeness of g: for every non-empty word pair with
/// |u|+|v| ≤ N, the normalized residual of
/// ⟨g,u⟩·⟨g,v⟩ = Σ_{w ∈ u ш v} ⟨g,w⟩.
pub fn group_like_report(g: &TruncatedTensor) -> ShuffleReport {
    let dim = g.dim();
    let offset = |w: &[usize]| w.iter().fold(0, |acc, &l| acc * dim + (l - 1));
    scan_word_pairs(g, |u, v| {
        let cu = g.block(u.len()).expect("level in range")[offset(u)];
        let cv = g.block(v.len()).expect("level in range")[offset(v)];
        let block = g.block(u.len() + v.len()).expect("level in range");
        let sum = shuffle_coeff_sum(block, dim, u, v);
        let residual = (cu * cv - sum).abs();
        let scale = 1.0 + (cu * cv).abs() + shuffle_abs_sum(block, dim, u, v);
        residual / scale
    })
}

fn shuffle_abs_sum(block: &[f64], dim: usize, u: &[usize], v: &[usize]) -> f64 {
    fn rec(block: &[f64], dim: usize, u: &[usize], v: &[usize], offset: usize) -> f64 {
        if u.is_empty() && v.is_empty() {
            return block[offset].abs();
        }
        let mut sum = 0.0;
        if let Some((&l, rest)) = u.split_first() {
            sum += rec(block, dim, rest, v, offset * dim + (l - 1));
        }
        if let Some((&l, rest)) = v.split_first() {
            sum += rec(block, dim, u, rest, offset * dim + (l - 1));
        }
        sum
    }
    rec(block, dim, u, v, 0)
}

/// True when the shuffle identity holds within `tol` for every word pair.
pub fn is_group_like(g: &TruncatedTensor, tol: f64) -> bool {
    group_like_report(g).worst_residual <= tol
}

/// Ree's criterion residual for Lie membership: ⟨l, u ш v⟩ = 0 for every
/// pair of non-empty words.
pub fn lie_shuffle_report(l: &TruncatedTensor) -> ShuffleReport {
    let dim = l.dim();
    scan_word_pairs(l, |u, v| {
        let block = l.block(u.len() + v.len()).expect("level in range");
        let sum = shuffle_coeff_sum(block, dim, u, v);
        sum.abs() / (1.0 + shuffle_abs_sum(block, dim, u, v))
    })
}

/// A permutation of {0,…,m−1}, stored as the image array `images[i] = π(i)`
/// (serialized as the bare one-line image array).
///
/// The action on level blocks is π(v_1⊗…⊗v_m) = v_{π(1)}⊗…⊗v_{π(m)},
/// extended linearly; applying σ then τ equals applying σ∘τ.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let m = images.len();
        let mut seen = vec![false; m];
        for &i in &images {
            if i >= m || seen[i] {
                return Err(Error::domain(format!(
                    "not a bijection on 0..{m}: {images:?}"
                )));
            }
            seen[i] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(m: usize) -> Self {
        Permutation {
            images: (0..m).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            images[j] = i;
        }
        Permutation { images }
    }

    /// (self ∘ other)(i) = self(other(i)).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.images.len() != other.images.len() {
            return Err(Error::shape("permutation sizes differ".to_string()));
        }
        Ok(Permutation {
            images: other.images.iter().map(|&i| self.images[i]).collect(),
        })
    }
}

/// Applies π to a dense level-m block: the output coefficient at multi-index
/// (b_1,…,b_m) with b_i = a_{π(i)} is the input coefficient at (a_1,…,a_m).
pub fn permute_block(block: &[f64], dim: usize, pi: &Permutation) -> Result<Vec<f64>> {
    let m = pi.len();
    let want = dim.pow(m as u32);
    if block.len() != want {
        return Err(Error::shape(format!(
            "block has {} entries, expected {want} for a permutation of {m} slots",
            block.len()
        )));
    }
    let mut out = vec![0.0; block.len()];
    let mut digits = vec![0usize; m];
    for (a_off, &val) in block.iter().enumerate() {
        // decode a_off into digits (most significant first)
        let mut rem = a_off;
        for j in (0..m).rev() {
            digits[j] = rem % dim;
            rem /= dim;
        }
        let mut b_off = 0;
        for i in 0..m {
            b_off = b_off * dim + digits[pi.images[i]];
        }
        out[b_off] = val;
    }
    Ok(out)
}

/// Accumulates Σ_{π ∈ set} π(block) in place.
pub(crate) fn add_permuted(acc: &mut [f64], block: &[f64], dim: usize, pi: &Permutation) {
    let m = pi.len();
    let mut digits = vec![0usize; m];
    for (a_off, &val) in block.iter().enumerate() {
        let mut rem = a_off;
        for j in (0..m).rev() {
            digits[j] = rem % dim;
            rem /= dim;
        }
        let mut b_off = 0;
        for i in 0..m {
            b_off = b_off * dim + digits[pi.images[i]];
        }
        acc[b_off] += val;
    }
}

/// A tuple (j_1,…,j_n) of positive block lengths with total m = Σ j_i.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockProfile {
    parts: Vec<usize>,
}

impl BlockProfile {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::domain("block profile must have at least one part"));
        }
        if parts.contains(&0) {
            return Err(Error::domain("block profile parts must be at least 1"));
        }
        Ok(BlockProfile { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn total(&self) -> usize {
        self.parts.iter().sum()
    }
}

/// Enumerates the ordered shuffles OS(j_1,…,j_n): permutations of the
/// m = Σ j_k slots (grouped consecutively into blocks of lengths j_k) whose
/// rank map is increasing within each block and assigns the block-final
/// slots increasing ranks, i.e. the blocks finish in order 1,…,n.
///
/// The identification of OS with exactly this set is pinned by the
/// iterated-integral quadrature oracle (see the `hmap` module tests); for a
/// single block OS((j)) = {identity}.
pub fn ordered_shuffles(profile: &BlockProfile) -> Vec<Permutation> {
    let parts = profile.parts();
    let n = parts.len();
    let m = profile.total();
    let starts: Vec<usize> = parts
        .iter()
        .scan(0, |acc, &j| {
            let s = *acc;
            *acc += j;
            Some(s)
        })
        .collect();

    let mut out = Vec::new();
    let mut consumed = vec![0usize; n];
    let mut seq = Vec::with_capacity(m);
    emit(parts, &starts, &mut consumed, &mut seq, m, &mut out);
    out.sort();
    out
}

fn emit(
    parts: &[usize],
    starts: &[usize],
    consumed: &mut [usize],
    seq: &mut Vec<usize>,
    m: usize,
    out: &mut Vec<Permutation>,
) {
    if seq.len() == m {
        let mut images = vec![0usize; m];
        for (rank, &slot) in seq.iter().enumerate() {
            images[slot] = rank;
        }
        out.push(Permutation { images });
        return;
    }
    for k in 0..parts.len() {
        if consumed[k] == parts[k] {
            continue;
        }
        // A block may emit its final slot only once all earlier blocks are
        // done, so that block ends appear in block order.
        if consumed[k] + 1 == parts[k] && consumed[..k].iter().zip(parts).any(|(&c, &p)| c < p) {
            continue;
        }
        let slot = starts[k] + consumed[k];
        consumed[k] += 1;
        seq.push(slot);
        emit(parts, starts, consumed, seq, m, out);
        seq.pop();
        consumed[k] -= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::TruncatedTensor;

    fn word(s: &str, dim: usize) -> Word {
        Word::parse(s, dim).unwrap()
    }

    #[test]
    fn coeff_of_unit_and_exp() {
        let unit = TruncatedTensor::unit(2, 2).unwrap();
        assert_eq!(coeff(&unit, &Word::empty()).unwrap(), 1.0);

        let g = TruncatedTensor::basis_letter(2, 2, 1)
            .unwrap()
            .exp()
            .unwrap();
        assert_eq!(coeff(&g, &word("11", 2)).unwrap(), 0.5);
        assert_eq!(coeff(&g, &word("12", 2)).unwrap(), 0.0);
        assert!(coeff(&g, &word("111", 2)).is_err());
    }

    #[test]
    fn shuffle_small_cases() {
        let d = 2;
        let s = shuffle(&word("1", d), &word("2", d));
        let mut got: Vec<String> = s.iter().map(|w| w.to_string()).collect();
        got.sort();
        assert_eq!(got, vec!["12", "21"]);

        let s = shuffle(&word("1", d), &word("1", d));
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|w| w.to_string() == "11"));

        let s = shuffle(&word("12", d), &word("121", d));
        assert_eq!(s.len(), 10); // C(5,2)
    }

    #[test]
    fn shuffle_commutative_as_multiset() {
        let d = 3;
        let u = word("13", d);
        let v = word("221", d);
        let mut a = shuffle(&u, &v);
        let mut b = shuffle(&v, &u);
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn unit_is_group_like() {
        let unit = TruncatedTensor::unit(2, 3).unwrap();
        assert!(is_group_like(&unit, 1e-12));
    }

    #[test]
    fn group_like_violation_witness() {
        // unit plus e1⊗e2 at level 2: shuffle identity demands
        // coeff("12") + coeff("21") = coeff("1")·coeff("2") = 0, but it is 1.
        let mut g = TruncatedTensor::unit(2, 2).unwrap();
        g.block_mut(2).unwrap()[1] = 1.0;
        let report = group_like_report(&g);
        assert!(report.worst_residual > 0.1);
        let (u, v) = report.witness.unwrap();
        let mut pair = [u.to_string(), v.to_string()];
        pair.sort();
        assert_eq!(pair, ["1", "2"]);
        assert!(!is_group_like(&g, 1e-9));
    }

    #[test]
    fn single_letter_is_lie() {
        let l = TruncatedTensor::basis_letter(2, 3, 1).unwrap();
        assert!(lie_shuffle_report(&l).worst_residual < 1e-15);
        // e1⊗e2 alone is not Lie: ⟨·, 1 ш 2⟩ = 1.
        let mut t = TruncatedTensor::zeros(2, 2).unwrap();
        t.block_mut(2).unwrap()[1] = 1.0;
        assert!(lie_shuffle_report(&t).worst_residual > 0.1);
        // but the bracket e1⊗e2 − e2⊗e1 is.
        t.block_mut(2).unwrap()[2] = -1.0;
        assert!(lie_shuffle_report(&t).worst_residual < 1e-15);
    }

    #[test]
    fn permutation_basics() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![0, 2]).is_err());
        let p = Permutation::new(vec![1, 2, 0]).unwrap();
        let q = p.inverse();
        assert_eq!(p.compose(&q).unwrap(), Permutation::identity(3));
    }

    #[test]
    fn permute_block_transposition() {
        // e1⊗e2 under the swap becomes e2⊗e1.
        let mut block = vec![0.0; 4];
        block[1] = 1.0;
        let swap = Permutation::new(vec![1, 0]).unwrap();
        let out = permute_block(&block, 2, &swap).unwrap();
        assert_eq!(out, vec![0.0, 0.0, 1.0, 0.0]);

        let id = Permutation::identity(2);
        assert_eq!(permute_block(&block, 2, &id).unwrap(), block);
    }

    #[test]
    fn permutation_action_convention() {
        // Applying σ then τ equals applying σ∘τ.
        let block: Vec<f64> = (0..27).map(|i| i as f64).collect();
        let sigma = Permutation::new(vec![2, 0, 1]).unwrap();
        let tau = Permutation::new(vec![1, 2, 0]).unwrap();
        let step = permute_block(&permute_block(&block, 3, &sigma).unwrap(), 3, &tau).unwrap();
        let once = permute_block(&block, 3, &sigma.compose(&tau).unwrap()).unwrap();
        assert_eq!(step, once);

        // Round trip through the inverse restores the block exactly.
        let back = permute_block(
            &permute_block(&block, 3, &sigma).unwrap(),
            3,
            &sigma.inverse(),
        )
        .unwrap();
        assert_eq!(back, block);
    }

    #[test]
    fn ordered_shuffles_single_block() {
        for j in 1..=4 {
            let os = ordered_shuffles(&BlockProfile::new(vec![j]).unwrap());
            assert_eq!(os, vec![Permutation::identity(j)]);
        }
    }

    #[test]
    fn ordered_shuffles_small_profiles() {
        let os = ordered_shuffles(&BlockProfile::new(vec![1, 1]).unwrap());
        assert_eq!(os, vec![Permutation::identity(2)]);

        let os = ordered_shuffles(&BlockProfile::new(vec![1, 2]).unwrap());
        assert_eq!(os.len(), 2);
        assert_eq!(os[0], Permutation::identity(3));
        assert_eq!(os[1], Permutation::new(vec![1, 0, 2]).unwrap());

        let os = ordered_shuffles(&BlockProfile::new(vec![2, 1]).unwrap());
        assert_eq!(os, vec![Permutation::identity(3)]);

        assert!(BlockProfile::new(vec![1, 0]).is_err());
        assert!(BlockProfile::new(vec![]).is_err());
    }

    #[test]
    fn ordered_shuffle_counts_match_end_constraint() {
        // Interleavings of (2,2) come in C(4,2) = 6; the end constraint
        // keeps those where block 1 finishes first.
        let os = ordered_shuffles(&BlockProfile::new(vec![2, 2]).unwrap());
        assert_eq!(os.len(), 3);
        for pi in &os {
            let img = pi.images();
            assert!(img[0] < img[1] && img[2] < img[3] && img[1] < img[3]);
        }
    }

    #[test]
    fn word_display_and_serde() {
        let w = word("121", 2);
        assert_eq!(w.to_string(), "121");
        assert_eq!(serde_json::to_string(&w).unwrap(), "[0,1,0]");
        assert!(Word::parse("13", 2).is_err());

        let p = Permutation::new(vec![1, 0, 2]).unwrap();
        assert_eq!(serde_json::to_string(&p).unwrap(), "[1,0,2]");
    }
}
