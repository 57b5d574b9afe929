//! Word-level machinery: pcq factorization, pumping rewrites of torsion
//! powers, conjugation normalization, and constructive word-length bounds.
//!
//! Nothing in this module is trusted on paper identities alone: every emitted
//! word is multiplied back out and compared, by canonical key, with the
//! element it claims to equal.

use crate::element::Element;
use crate::generators::{self, evaluate_word, format_word, GenKind, GenLetter, Word};
use crate::ntree::{all_right, Arity, NTree};
use crate::{Error, Result};
use std::fmt;

/// Letters of the run inserting one caret at spine leaf `k`: shifting the
/// caret from child position `k mod (n-1)` to the rightmost slot takes one
/// generator per step, with consecutive indices.
fn spine_insertion_run(k: usize, n: Arity) -> Word {
    let step = n.usize() - 1;
    let b = k % step;
    (k..=(k + step - 1 - b)).map(GenLetter::x).collect()
}

/// Sort a positive x-word into nondecreasing index order using the defining
/// rewriting `x_j x_i → x_i x_{j+n-1}` for `i < j`. Terminates because each
/// step lowers the index sequence lexicographically.
fn sort_positive(mut word: Word, n: Arity) -> Result<Word> {
    let step = n.usize() - 1;
    let mut fuel = 100_000usize;
    loop {
        let mut changed = false;
        for t in 0..word.len().saturating_sub(1) {
            let (a, b) = (word[t], word[t + 1]);
            if a.index > b.index {
                word[t] = b;
                word[t + 1] = GenLetter::x(a.index + step);
                changed = true;
            }
        }
        if !changed {
            return Ok(word);
        }
        fuel = fuel.checked_sub(1).ok_or_else(|| {
            Error::RewriteFailed("positive-word sorting exceeded its step budget".into())
        })?;
    }
}

/// A positive word `p = x_{i_1}^{r_1} ⋯ x_{i_y}^{r_y}` with nondecreasing
/// indices such that `evaluate(p) = (t, all_right(K), 0)` where `K` is the
/// caret count of `t`. Verified by round trip before returning.
pub fn positive_word_from_tree(t: &NTree, n: Arity) -> Result<Word> {
    let carets = t.caret_count();
    let spine = all_right(carets, n);
    let mut cur = t.clone();
    let mut runs_rev: Vec<Word> = Vec::new();
    while cur != all_right(cur.caret_count(), n) {
        let leaves = cur.leaf_count();
        let nn = n.usize();
        // all-leaf carets not containing the last leaf, largest position first
        let k = cur
            .leaf_caret_blocks()
            .into_iter()
            .filter(|&p| p + nn != leaves)
            .max()
            .expect("a non-spine tree has an off-spine all-leaf caret");
        runs_rev.push(spine_insertion_run(k, n));
        cur = cur.contract_at(k, n)?;
    }
    let mut word = Word::new();
    for run in runs_rev.into_iter().rev() {
        word.extend(run);
    }
    let word = sort_positive(word, n)?;
    let expect = Element::new(n, t.clone(), spine, 0)?;
    if evaluate_word(&word, n)?.canonical_key() != expect.canonical_key() {
        return Err(Error::RewriteFailed(format!(
            "positive word {} does not rebuild its tree",
            format_word(&word)
        )));
    }
    Ok(word)
}

/// Group a sorted sign-uniform x-word into `(index, exponent)` pairs.
pub fn group_exponents(word: &[GenLetter]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for letter in word {
        match out.last_mut() {
            Some((idx, exp)) if *idx == letter.index => *exp += 1,
            _ => out.push((letter.index, 1)),
        }
    }
    out
}

/// The structured decomposition of an element as `p · c_k^ℓ · q`: a positive
/// word, a torsion rotation power, and a negative word.
#[derive(Clone, Debug)]
pub struct PcqFactorization {
    pub n: Arity,
    /// Positive part, indices nondecreasing left to right.
    pub p: Word,
    /// Index of the torsion generator: the reduced pair has `k+1` carets.
    pub k: usize,
    /// Exponent of `c_k`; `0 ≤ ℓ < ord c_k = (k+1)(n-1)+1`, with
    /// `k = ℓ = 0` for the identity.
    pub ell: usize,
    /// Negative part, indices nonincreasing left to right.
    pub q: Word,
}

impl PcqFactorization {
    /// Multiply the three parts back together.
    pub fn element(&self) -> Result<Element> {
        let p = evaluate_word(&self.p, self.n)?;
        let c_pow = generators::c(self.k, self.n).power(self.ell as i64)?;
        let q = evaluate_word(&self.q, self.n)?;
        p.multiply(&c_pow)?.multiply(&q)
    }

    pub fn p_exponents(&self) -> Vec<(usize, usize)> {
        group_exponents(&self.p)
    }

    /// Exponents of `q` read in increasing index order `j_1 < … < j_z`.
    pub fn q_exponents(&self) -> Vec<(usize, usize)> {
        let mut rev: Vec<GenLetter> = self.q.iter().rev().cloned().collect();
        rev.iter_mut().for_each(|l| *l = l.inverse());
        group_exponents(&rev)
    }

    /// The structural invariants of the decomposition.
    pub fn shape_ok(&self) -> bool {
        let p_ok = self.p.iter().all(|l| l.kind == GenKind::X && l.sign > 0)
            && self.p.windows(2).all(|w| w[0].index <= w[1].index);
        let q_ok = self.q.iter().all(|l| l.kind == GenKind::X && l.sign < 0)
            && self.q.windows(2).all(|w| w[0].index >= w[1].index);
        let ell_ok = self.ell < (self.k + 1) * (self.n.usize() - 1) + 1;
        p_ok && q_ok && ell_ok
    }
}

impl fmt::Display for PcqFactorization {
    /// Three `|`-separated word fields (positive part, torsion part,
    /// negative part) followed by `k=…, l=…`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let torsion = vec![GenLetter::c(self.k); self.ell];
        write!(
            f,
            "{}|{}|{} k={}, l={}",
            format_word(&self.p),
            format_word(&torsion),
            format_word(&self.q),
            self.k,
            self.ell
        )
    }
}

/// Factor a `T_n` element as `p · c_k^ℓ · q`: the positive part is read off
/// the source tree of the reduced pair, the negative part off the target
/// tree, and the torsion exponent is found by alignment search over the
/// powers of `c_k`.
pub fn pcq_factorize(e: &Element) -> Result<PcqFactorization> {
    let n = e.arity();
    let r = e.reduce();
    let carets = r.caret_count();
    if carets == 0 {
        return Ok(PcqFactorization { n, p: Word::new(), k: 0, ell: 0, q: Word::new() });
    }
    let k = carets - 1;
    let p = positive_word_from_tree(r.source(), n)?;
    let q = generators::invert_word(&positive_word_from_tree(r.target(), n)?);
    let p_el = evaluate_word(&p, n)?;
    let q_el = evaluate_word(&q, n)?;
    let c_k = generators::c(k, n);
    let order = (k + 1) * (n.usize() - 1) + 1;
    let key = r.canonical_key();
    let mut c_pow = Element::identity(n);
    for ell in 0..order {
        let candidate = p_el.multiply(&c_pow)?.multiply(&q_el)?;
        if candidate.canonical_key() == key {
            return Ok(PcqFactorization { n, p, k, ell, q });
        }
        c_pow = c_pow.multiply(&c_k)?;
    }
    Err(Error::RewriteFailed(format!("no torsion exponent aligns the pcq parts for {key}")))
}

/// `x_α = x_0^{-γ} x_δ x_0^{γ}` with `α = γ(n-1) + δ`.
///
/// The division is taken with `1 ≤ δ ≤ n-1` once `α ≥ n`: conjugation by
/// `x_0` shifts indices by `n-1` and bottoms out at the base letters
/// `x_1, …, x_{n-1}`, never at `x_0` itself.
pub fn conjugate_decomp(alpha: usize, n: Arity) -> (usize, usize) {
    let nn = n.usize();
    if alpha < nn {
        (0, alpha)
    } else {
        let delta = ((alpha - 1) % (nn - 1)) + 1;
        ((alpha - delta) / (nn - 1), delta)
    }
}

/// The conjugation normalization as an explicit `2γ+1`-letter word over `Σ`,
/// validated by evaluation.
pub fn conjugate_normalize(alpha: usize, n: Arity) -> Result<(usize, usize, Word)> {
    let (gamma, delta) = conjugate_decomp(alpha, n);
    let mut word = Word::with_capacity(2 * gamma + 1);
    word.extend(std::iter::repeat(GenLetter::x_inv(0)).take(gamma));
    word.push(GenLetter::x(delta));
    word.extend(std::iter::repeat(GenLetter::x(0)).take(gamma));
    let got = evaluate_word(&word, n)?;
    if got.canonical_key() != generators::x(alpha, n).canonical_key() {
        return Err(Error::RewriteFailed(format!(
            "conjugate normalization of x_{alpha} failed to validate"
        )));
    }
    Ok((gamma, delta, word))
}

/// Both sides of the pumping identities
/// `c_k^ℓ = c_{k-1}^ℓ x_{k(n-1)-ℓ}` and
/// `(c_k^{-1})^ℓ = x_{k(n-1)-ℓ}^{-1} (c_{k-1}^{-1})^ℓ`,
/// validated by tree-pair computation at construction.
#[derive(Clone, Debug)]
pub struct PumpIdentity {
    pub k: usize,
    pub ell: usize,
    pub n: Arity,
    pub lhs: Word,
    pub rhs: Word,
    pub inv_lhs: Word,
    pub inv_rhs: Word,
}

/// Build and validate one pumping instance. The exponent must satisfy
/// `1 ≤ ℓ ≤ k(n-1)` (so that the emitted x-index is nonnegative); whether
/// the paper's two stated bounds agree with this range is reported by
/// [`pump_bound_report`].
pub fn pump_step(k: usize, ell: usize, n: Arity) -> Result<PumpIdentity> {
    let step = n.usize() - 1;
    if k == 0 || ell == 0 || ell > k * step {
        return Err(Error::EllOutOfRange { ell, k, n: n.get() });
    }
    let d = k * step - ell;
    let lhs: Word = vec![GenLetter::c(k); ell];
    let mut rhs: Word = vec![GenLetter::c(k - 1); ell];
    rhs.push(GenLetter::x(d));
    let inv_lhs: Word = vec![GenLetter::c_inv(k); ell];
    let mut inv_rhs: Word = vec![GenLetter::x_inv(d)];
    inv_rhs.extend(std::iter::repeat(GenLetter::c_inv(k - 1)).take(ell));
    let ok = evaluate_word(&lhs, n)?.canonical_key() == evaluate_word(&rhs, n)?.canonical_key()
        && evaluate_word(&inv_lhs, n)?.canonical_key()
            == evaluate_word(&inv_rhs, n)?.canonical_key();
    if !ok {
        return Err(Error::PumpMismatch { k, ell, n: n.get() });
    }
    Ok(PumpIdentity { k, ell, n, lhs, rhs, inv_lhs, inv_rhs })
}

/// Which exponents validate for one `k`, against the paper's two bounds.
#[derive(Clone, Debug, serde::Serialize)]
pub struct PumpBoundRow {
    pub k: usize,
    pub valid_ells: Vec<usize>,
    /// `1 ≤ ℓ ≤ (k-1)(n-1)` — the lemma's stated bound.
    pub matches_lemma_bound: bool,
    /// `1 ≤ ℓ ≤ k(n-1)` — the proposition's stated bound.
    pub matches_proposition_bound: bool,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct PumpBoundReport {
    pub n: u32,
    pub rows: Vec<PumpBoundRow>,
}

impl PumpBoundReport {
    /// True when every row matches the proposition's reading of the bound.
    pub fn proposition_reading_holds(&self) -> bool {
        self.rows.iter().all(|r| r.matches_proposition_bound)
    }
}

/// Probe every exponent for `k ≤ k_max` and report which of the paper's two
/// bound readings matches the computed validity range.
pub fn pump_bound_report(n: Arity, k_max: usize) -> Result<PumpBoundReport> {
    let step = n.usize() - 1;
    let mut rows = Vec::new();
    for k in 1..=k_max {
        let mut valid = Vec::new();
        for ell in 1..=k * step {
            let lhs = vec![GenLetter::c(k); ell];
            let mut rhs = vec![GenLetter::c(k - 1); ell];
            rhs.push(GenLetter::x(k * step - ell));
            if evaluate_word(&lhs, n)?.canonical_key()
                == evaluate_word(&rhs, n)?.canonical_key()
            {
                valid.push(ell);
            }
        }
        let lemma: Vec<usize> = (1..=(k - 1) * step).collect();
        let prop: Vec<usize> = (1..=k * step).collect();
        rows.push(PumpBoundRow {
            k,
            matches_lemma_bound: valid == lemma,
            matches_proposition_bound: valid == prop,
            valid_ells: valid,
        });
    }
    Ok(PumpBoundReport { n: n.get(), rows })
}

/// Cancel adjacent inverse pairs.
fn free_reduce(word: Word) -> Word {
    let mut out: Word = Vec::with_capacity(word.len());
    for letter in word {
        match out.last() {
            Some(top) if *top == letter.inverse() => {
                out.pop();
            }
            _ => out.push(letter),
        }
    }
    out
}

/// Telescoped Σ-expansion of an ascending positive block
/// `x_{α_1}^{r_1} ⋯ x_{α_m}^{r_m}`: conjugates through powers of `x_0` with
/// the intermediate `x_0^{γ_t - γ_{t+1}}` runs merged, total length at most
/// `Σ r_t + 2 γ_m`.
fn sigma_ascending(exponents: &[(usize, usize)], n: Arity) -> Word {
    let mut word = Word::new();
    let mut prev_gamma = 0usize;
    for &(alpha, r) in exponents {
        let (gamma, delta) = conjugate_decomp(alpha, n);
        word.extend(std::iter::repeat(GenLetter::x_inv(0)).take(gamma - prev_gamma));
        word.extend(std::iter::repeat(GenLetter::x(delta)).take(r));
        prev_gamma = gamma;
    }
    word.extend(std::iter::repeat(GenLetter::x(0)).take(prev_gamma));
    free_reduce(word)
}

/// Mirror image of [`sigma_ascending`] for a block of inverse letters with
/// indices descending left to right.
fn sigma_descending_inverse(exponents: &[(usize, usize)], n: Arity) -> Word {
    let mut asc = sigma_ascending(exponents, n);
    asc.reverse();
    asc.iter_mut().for_each(|l| *l = l.inverse());
    asc
}

/// Rewrite `c_k^ℓ` as a word over the finite set `Σ` of length `< 3k+n`:
/// the pumping cascade down to the turning point `q = ⌊(ℓ-1)/(n-1)⌋`, the
/// switch to inverse powers, the inverse cascade down to `c_0`, and
/// conjugation normalization with telescoping for out-of-range indices.
pub fn pump_reduce(k: usize, ell: usize, n: Arity) -> Result<Word> {
    let step = n.usize() - 1;
    if ell == 0 || ell > k * step {
        return Err(Error::EllOutOfRange { ell, k, n: n.get() });
    }
    let q = (ell - 1) / step;
    let right: Vec<(usize, usize)> = ((q + 1)..=k).map(|j| (j * step - ell, 1)).collect();
    let mut word = Word::new();
    if q == 0 {
        // c_0^ℓ with ℓ ≤ n-1 is already a Σ-word; pick the shorter power
        if ell <= n.usize() - ell {
            word.extend(std::iter::repeat(GenLetter::c(0)).take(ell));
        } else {
            word.extend(std::iter::repeat(GenLetter::c_inv(0)).take(n.usize() - ell));
        }
    } else {
        // turning point: c_q^ℓ = (c_q^{-1})^{ord c_q - ℓ}
        let m = (q + 1) * step + 1 - ell;
        let left: Vec<(usize, usize)> = (1..=q).map(|j| (j * step - m, 1)).collect();
        word.extend(sigma_descending_inverse(&left, n));
        word.extend(std::iter::repeat(GenLetter::c_inv(0)).take(m));
    }
    word.extend(sigma_ascending(&right, n));
    let word = free_reduce(word);
    let target = generators::c(k, n).power(ell as i64)?;
    if evaluate_word(&word, n)?.canonical_key() != target.canonical_key() {
        return Err(Error::PumpMismatch { k, ell, n: n.get() });
    }
    Ok(word)
}

/// A concrete word over `Σ` equal to `e`, with its length: the pcq parts
/// pushed through conjugation normalization plus the pumped torsion part.
/// The length is bounded by `3·D_n(e)` (checked by the metrics sweeps) and
/// bounds the exact word length from above.
pub fn word_length_upper(e: &Element) -> Result<(usize, Word)> {
    let n = e.arity();
    let f = pcq_factorize(e)?;
    let mut word = sigma_ascending(&f.p_exponents(), n);
    if f.ell > 0 {
        if f.k == 0 {
            let nn = n.usize();
            if f.ell <= nn - f.ell {
                word.extend(std::iter::repeat(GenLetter::c(0)).take(f.ell));
            } else {
                word.extend(std::iter::repeat(GenLetter::c_inv(0)).take(nn - f.ell));
            }
        } else {
            word.extend(pump_reduce(f.k, f.ell, n)?);
        }
    }
    word.extend(sigma_descending_inverse(&f.q_exponents(), n));
    let word = free_reduce(word);
    if evaluate_word(&word, n)?.canonical_key() != e.canonical_key() {
        return Err(Error::RewriteFailed("sigma word does not rebuild its element".into()));
    }
    Ok((word.len(), word))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::{random_element, Element};
    use crate::generators::{c, x};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ar(v: u32) -> Arity {
        Arity::new(v).unwrap()
    }

    #[test]
    fn positive_word_examples() {
        let n = ar(2);
        assert!(positive_word_from_tree(&all_right(3, n), n).unwrap().is_empty());
        // the source tree of x_0 yields the single letter x_0
        let x0 = x(0, n);
        let w = positive_word_from_tree(x0.source(), n).unwrap();
        assert_eq!(format_word(&w), "x0");
    }

    #[test]
    fn positive_word_random_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for arity in [2u32, 3, 4] {
            let n = ar(arity);
            for carets in 0..=5 {
                for _ in 0..10 {
                    let t = crate::ntree::random_tree(&mut rng, carets, n);
                    // round trip is asserted inside; shape checked here
                    let w = positive_word_from_tree(&t, n).unwrap();
                    assert!(w.windows(2).all(|p| p[0].index <= p[1].index));
                }
            }
        }
    }

    #[test]
    fn pcq_identity_and_torsion() {
        let n = ar(2);
        let id = pcq_factorize(&Element::identity(n)).unwrap();
        assert!(id.p.is_empty() && id.q.is_empty() && id.ell == 0 && id.k == 0);
        for m in 0..3i64 {
            let e = c(1, n).power(m).unwrap();
            let f = pcq_factorize(&e).unwrap();
            if m == 0 {
                assert_eq!(f.ell, 0);
            } else {
                assert!(f.p.is_empty() && f.q.is_empty());
                assert_eq!(f.ell as i64, m);
                assert_eq!(f.k, 1);
            }
        }
    }

    #[test]
    fn pcq_random_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for arity in [2u32, 3] {
            let n = ar(arity);
            for _ in 0..40 {
                let e = random_element(&mut rng, n, 5);
                let f = pcq_factorize(&e).unwrap();
                assert!(f.shape_ok(), "{f}");
                assert_eq!(f.element().unwrap().canonical_key(), e.canonical_key());
            }
        }
    }

    #[test]
    fn conjugate_normalize_examples() {
        let n2 = ar(2);
        let (gamma, delta, w) = conjugate_normalize(3, n2).unwrap();
        assert_eq!((gamma, delta), (2, 1));
        assert_eq!(w.len(), 2 * gamma + 1);
        let n4 = ar(4);
        let (gamma, delta, w) = conjugate_normalize(5, n4).unwrap();
        assert_eq!((gamma, delta), (1, 2));
        assert_eq!(format_word(&w), "X0 x2 x0");
        let (gamma, delta, _) = conjugate_normalize(2, n4).unwrap();
        assert_eq!((gamma, delta), (0, 2));
    }

    #[test]
    fn pump_step_examples() {
        let n2 = ar(2);
        let id1 = pump_step(1, 1, n2).unwrap();
        assert_eq!(format_word(&id1.rhs), "c0 x0");
        let id2 = pump_step(2, 1, n2).unwrap();
        assert_eq!(format_word(&id2.rhs), "c1 x1");
        let n3 = ar(3);
        let id3 = pump_step(2, 2, n3).unwrap();
        assert_eq!(format_word(&id3.rhs), "c1 c1 x2");
        assert!(pump_step(1, 2, n2).is_err());
        assert!(pump_step(0, 1, n2).is_err());
    }

    #[test]
    fn pump_bounds_match_proposition_reading() {
        for arity in [2u32, 3] {
            let report = pump_bound_report(ar(arity), 4).unwrap();
            assert!(report.proposition_reading_holds());
            // the lemma's bound is strictly smaller, so it cannot match
            assert!(report.rows.iter().any(|r| !r.matches_lemma_bound));
        }
    }

    #[test]
    fn pump_reduce_small_cases() {
        let n2 = ar(2);
        let w = pump_reduce(1, 1, n2).unwrap();
        assert!(w.len() <= 2, "{}", format_word(&w));
        for (k, ell) in [(4usize, 3usize), (3, 2), (2, 2)] {
            let w = pump_reduce(k, ell, n2).unwrap();
            assert!(w.len() < 3 * k + 2, "k={k} ell={ell}: {}", format_word(&w));
        }
        let n3 = ar(3);
        let w = pump_reduce(3, 5, n3).unwrap();
        assert!(w.len() < 3 * 3 + 3, "{}", format_word(&w));
    }

    #[test]
    fn word_length_upper_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for arity in [2u32, 3] {
            let n = ar(arity);
            let (len, w) = word_length_upper(&Element::identity(n)).unwrap();
            assert_eq!(len, 0);
            assert!(w.is_empty());
            for _ in 0..25 {
                let e = random_element(&mut rng, n, 5);
                let (len, w) = word_length_upper(&e).unwrap();
                assert_eq!(len, w.len());
                // Σ-letters only
                assert!(w.iter().all(|l| match l.kind {
                    GenKind::X => l.index < n.usize(),
                    GenKind::C => l.index == 0,
                }));
            }
        }
    }

    #[test]
    fn positive_block_telescoping_length() {
        // |x_{i_1}^{r_1} ⋯ x_{i_y}^{r_y}|_Σ ≤ r_1 + … + r_y + 2 i_y
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for arity in [2u32, 3, 4] {
            let n = ar(arity);
            for _ in 0..30 {
                let t = crate::ntree::random_tree(&mut rng, 5, n);
                let p = positive_word_from_tree(&t, n).unwrap();
                if p.is_empty() {
                    continue;
                }
                let exps = group_exponents(&p);
                let sigma = sigma_ascending(&exps, n);
                let total: usize = exps.iter().map(|(_, r)| r).sum();
                let top = exps.last().unwrap().0;
                assert!(sigma.len() <= total + 2 * top);
                let expect = evaluate_word(&p, n).unwrap();
                assert_eq!(
                    evaluate_word(&sigma, n).unwrap().canonical_key(),
                    expect.canonical_key()
                );
            }
        }
    }
}
