//! Group elements of `T_n` as labelled tree pairs.
//!
//! An [`Element`] is a source tree, a target tree with the same caret count,
//! and a rotation offset `ρ`: the underlying circle map sends the `i`-th
//! source leaf interval affinely onto the `((i+ρ) mod L)`-th target leaf
//! interval. Elements of `F_n` are exactly those whose reduced form has
//! `ρ = 0`.
//!
//! The composition convention is fixed once: `multiply(a, b)` means "apply
//! `a` first, then `b`", which equals `plmap(b) ∘ plmap(a)` on the circle.
//! Every operation here is validated against that oracle in the tests.

use crate::ntree::{self, all_right, Arity, NTree};
use crate::{Error, Result};
use rand::Rng;
use std::fmt;

/// A labelled n-ary tree pair with a cyclic rotation.
///
/// Structural equality is literal equality of the representation; equality
/// as group elements is equality of [`canonical_key`](Element::canonical_key).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Element {
    n: Arity,
    source: NTree,
    target: NTree,
    rotation: usize,
}

/// Result of a capped order search.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OrderResult {
    Finite(usize),
    ExceedsCap(usize),
}

impl OrderResult {
    pub fn finite(self) -> Option<usize> {
        match self {
            OrderResult::Finite(m) => Some(m),
            OrderResult::ExceedsCap(_) => None,
        }
    }
}

impl fmt::Display for OrderResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderResult::Finite(m) => write!(f, "{m}"),
            OrderResult::ExceedsCap(cap) => write!(f, "exceeds cap {cap}"),
        }
    }
}

impl Element {
    /// Validated constructor. The trees must be n-ary with equal caret
    /// counts and `0 ≤ rotation < leaf_count`.
    pub fn new(n: Arity, source: NTree, target: NTree, rotation: usize) -> Result<Element> {
        if !source.validate_arity(n) || !target.validate_arity(n) {
            return Err(Error::ArityMismatch(n.get(), 0));
        }
        let cs = source.caret_count();
        let ct = target.caret_count();
        if cs != ct {
            return Err(Error::CaretMismatch(cs, ct));
        }
        let leaves = source.leaf_count();
        if rotation >= leaves {
            return Err(Error::RotationOutOfRange { rotation, leaves });
        }
        Ok(Element { n, source, target, rotation })
    }

    /// The identity of `T_n`: the leaf/leaf pair with rotation 0.
    pub fn identity(n: Arity) -> Element {
        Element { n, source: NTree::Leaf, target: NTree::Leaf, rotation: 0 }
    }

    pub fn arity(&self) -> Arity {
        self.n
    }

    pub fn source(&self) -> &NTree {
        &self.source
    }

    pub fn target(&self) -> &NTree {
        &self.target
    }

    pub fn rotation(&self) -> usize {
        self.rotation
    }

    pub fn leaf_count(&self) -> usize {
        self.source.leaf_count()
    }

    /// Caret count of the (not necessarily reduced) representation.
    pub fn caret_count(&self) -> usize {
        self.source.caret_count()
    }

    pub fn is_identity(&self) -> bool {
        let r = self.reduce();
        r.source == NTree::Leaf && r.rotation == 0
    }

    /// Simple expansion of the pair at source leaf `p` (the paper's
    /// expansion at label `p`): both trees gain a caret at corresponding
    /// leaves and the rotation is adjusted when the target block wraps
    /// past the rotation point.
    pub fn expand_at_source(&self, p: usize) -> Result<Element> {
        let leaves = self.leaf_count();
        if p >= leaves {
            return Err(Error::LeafOutOfRange { index: p, leaves });
        }
        let q = (p + self.rotation) % leaves;
        let source = self.source.expand_at(p, self.n)?;
        let target = self.target.expand_at(q, self.n)?;
        let rotation = if q < self.rotation {
            self.rotation + self.n.usize() - 1
        } else {
            self.rotation
        };
        Ok(Element { n: self.n, source, target, rotation })
    }

    /// Simple expansion addressed by target leaf position `q`.
    pub fn expand_at_target(&self, q: usize) -> Result<Element> {
        let leaves = self.leaf_count();
        if q >= leaves {
            return Err(Error::LeafOutOfRange { index: q, leaves });
        }
        let p = (q + leaves - self.rotation) % leaves;
        self.expand_at_source(p)
    }

    /// Expand the pair until the source tree equals `goal` (which must be
    /// an expansion of the current source).
    pub fn expand_source_to(&self, goal: &NTree) -> Result<Element> {
        let mut cur = self.clone();
        loop {
            if cur.source == *goal {
                return Ok(cur);
            }
            let subtrees = goal
                .subtrees_at_leaves_of(&cur.source)
                .ok_or_else(|| Error::Parse { pos: 0, msg: "goal is not an expansion of the source".into() })?;
            let p = subtrees
                .iter()
                .position(|t| matches!(t, NTree::Caret(_)))
                .expect("source differs from goal, so some leaf must split");
            cur = cur.expand_at_source(p)?;
        }
    }

    /// Expand the pair until the target tree equals `goal`.
    pub fn expand_target_to(&self, goal: &NTree) -> Result<Element> {
        let mut cur = self.clone();
        loop {
            if cur.target == *goal {
                return Ok(cur);
            }
            let subtrees = goal
                .subtrees_at_leaves_of(&cur.target)
                .ok_or_else(|| Error::Parse { pos: 0, msg: "goal is not an expansion of the target".into() })?;
            let q = subtrees
                .iter()
                .position(|t| matches!(t, NTree::Caret(_)))
                .expect("target differs from goal, so some leaf must split");
            cur = cur.expand_at_target(q)?;
        }
    }

    /// Image tree of `expansion` (an expansion of the source) under this
    /// element, i.e. the target of the pair expanded to source `expansion`.
    pub fn apply_tree(&self, expansion: &NTree) -> Result<NTree> {
        Ok(self.expand_source_to(expansion)?.target)
    }

    /// The unique reduced representative.
    ///
    /// A pair contracts at source block `p..p+n` when the matching target
    /// block `q..q+n` is also the child row of a single caret and does not
    /// wrap past the end of the leaf row; blocks that wrap cyclically are
    /// never contracted, since they do not correspond to a caret interval.
    pub fn reduce(&self) -> Element {
        let n = self.n.usize();
        let mut source = self.source.clone();
        let mut target = self.target.clone();
        let mut rotation = self.rotation;
        'outer: loop {
            let leaves = source.leaf_count();
            if leaves == 1 {
                break;
            }
            let source_blocks = source.leaf_caret_blocks();
            let target_blocks = target.leaf_caret_blocks();
            for &p in &source_blocks {
                let q = (p + rotation) % leaves;
                if q + n > leaves {
                    continue; // wraps past the rotation point
                }
                if target_blocks.binary_search(&q).is_ok() {
                    source = source.contract_at(p, self.n).expect("block listed");
                    target = target.contract_at(q, self.n).expect("block listed");
                    rotation = if q < rotation { rotation - (n - 1) } else { rotation };
                    continue 'outer;
                }
            }
            break;
        }
        Element { n: self.n, source, target, rotation }
    }

    /// Composite "apply `self` first, then `rhs`" as a reduced element.
    pub fn multiply(&self, rhs: &Element) -> Result<Element> {
        if self.n != rhs.n {
            return Err(Error::ArityMismatch(self.n.get(), rhs.n.get()));
        }
        let mid = self.target.minimal_joint_expansion(&rhs.source);
        let a = self.expand_target_to(&mid)?;
        let b = rhs.expand_source_to(&mid)?;
        let leaves = mid.leaf_count();
        let rotation = (a.rotation + b.rotation) % leaves;
        Ok(Element { n: self.n, source: a.source, target: b.target, rotation }.reduce())
    }

    /// Group inverse: swap the trees and reverse the rotation.
    pub fn inverse(&self) -> Element {
        let leaves = self.leaf_count();
        let rotation = if self.rotation == 0 { 0 } else { leaves - self.rotation };
        Element {
            n: self.n,
            source: self.target.clone(),
            target: self.source.clone(),
            rotation,
        }
        .reduce()
    }

    /// `m`-th power (inverse powers for negative `m`), reduced.
    pub fn power(&self, m: i64) -> Result<Element> {
        let base = if m < 0 { self.inverse() } else { self.clone() };
        let mut acc = Element::identity(self.n);
        for _ in 0..m.unsigned_abs() {
            acc = acc.multiply(&base)?;
        }
        Ok(acc)
    }

    /// Least `m ≥ 1` with `e^m = identity`, searched up to `cap`.
    pub fn order(&self, cap: usize) -> OrderResult {
        let reduced = self.reduce();
        let mut cur = reduced.clone();
        for m in 1..=cap {
            if cur.source == NTree::Leaf && cur.rotation == 0 {
                return OrderResult::Finite(m);
            }
            cur = cur.multiply(&reduced).expect("same arity");
        }
        OrderResult::ExceedsCap(cap)
    }

    /// Balanced representative of a torsion element: a pair with identical
    /// source and target trees (generally unreduced) equal to `self`.
    ///
    /// Built by the inductive minimal-joint-expansion procedure: starting
    /// from `E = mje(target, source)`, replace `E` by `mje(f(E), source)`
    /// until `f(E) = E`. The per-step caret growth is monotone, so a cap on
    /// the tree size doubles as a torsion test.
    pub fn torsion_balanced_form(&self, caret_cap: usize) -> Result<Element> {
        let e = self.reduce();
        if e.source == NTree::Leaf && e.rotation == 0 {
            return Ok(Element::identity(self.n));
        }
        let mut expansion = e.target.minimal_joint_expansion(&e.source);
        loop {
            if expansion.caret_count() > caret_cap {
                return Err(Error::NotTorsion(caret_cap));
            }
            let image = e.apply_tree(&expansion)?;
            if image == expansion {
                return e.expand_source_to(&expansion);
            }
            expansion = image.minimal_joint_expansion(&e.source).minimal_joint_expansion(&expansion);
        }
    }

    /// True iff the reduced form has rotation 0, i.e. the element lies in
    /// the subgroup `F_n ⊂ T_n`.
    pub fn is_in_f(&self) -> bool {
        self.reduce().rotation == 0
    }

    /// Canonical key: the text form of the reduced pair. Two elements are
    /// equal in the group iff their keys are equal strings.
    pub fn canonical_key(&self) -> String {
        self.reduce().to_string()
    }

    /// The torsion generator `c_j`: both trees all-right with `j+1` carets,
    /// target labelling shifted by one (rotation `L-1`), so that `c_0` is
    /// the rotation `t ↦ t + 1/2` when `n = 2`.
    pub fn c_generator(j: usize, n: Arity) -> Element {
        let tree = all_right(j + 1, n);
        let leaves = tree.leaf_count();
        Element { n, source: tree.clone(), target: tree, rotation: leaves - 1 }
    }
}

impl fmt::Display for Element {
    /// Bit-exact text form: `<sourceTree> <targetTree> @<rotation>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} @{}", self.source, self.target, self.rotation)
    }
}

/// Parse the `<source> <target> @<rot>` form, validating against `n`.
pub fn parse_element(s: &str, n: Arity) -> Result<Element> {
    let bytes = s.as_bytes();
    let mut pos = 0;
    while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
        pos += 1;
    }
    let (source, next) = ntree::parse_tree_at(bytes, pos)?;
    let mut pos = next;
    while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
        pos += 1;
    }
    let (target, next) = ntree::parse_tree_at(bytes, pos)?;
    let rest = s[next..].trim();
    let rot_str = rest
        .strip_prefix('@')
        .ok_or_else(|| Error::Parse { pos: next, msg: "expected '@<rotation>'".into() })?;
    let rotation: usize = rot_str
        .trim()
        .parse()
        .map_err(|_| Error::Parse { pos: next, msg: format!("bad rotation {rot_str:?}") })?;
    if !source.validate_arity(n) || !target.validate_arity(n) {
        return Err(Error::Parse { pos: 0, msg: format!("trees are not {n}-ary") });
    }
    Element::new(n, source, target, rotation)
}

/// Seeded random element: two uniform trees with `carets` carets and a
/// uniform rotation, not reduced.
pub fn random_element<R: Rng>(rng: &mut R, n: Arity, carets: usize) -> Element {
    let source = ntree::random_tree(rng, carets, n);
    let target = ntree::random_tree(rng, carets, n);
    let leaves = source.leaf_count();
    let rotation = rng.gen_range(0..leaves);
    Element { n, source, target, rotation }
}

/// Seeded random element of `F_n` (rotation 0).
pub fn random_f_element<R: Rng>(rng: &mut R, n: Arity, carets: usize) -> Element {
    let source = ntree::random_tree(rng, carets, n);
    let target = ntree::random_tree(rng, carets, n);
    Element { n, source, target, rotation: 0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ntree::parse_tree;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn n2() -> Arity {
        Arity::new(2).unwrap()
    }

    fn el(s: &str, n: u32) -> Element {
        parse_element(s, Arity::new(n).unwrap()).unwrap()
    }

    #[test]
    fn identity_laws() {
        let id = Element::identity(n2());
        assert_eq!(id.canonical_key(), ". . @0");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let g = random_element(&mut rng, n2(), 4);
            let gr = g.reduce();
            assert_eq!(id.multiply(&g).unwrap(), gr);
            assert_eq!(g.multiply(&id).unwrap(), gr);
        }
    }

    #[test]
    fn full_pair_reduces_to_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for arity in [2u32, 3, 4] {
            let n = Arity::new(arity).unwrap();
            let t = ntree::random_tree(&mut rng, 5, n);
            let e = Element::new(n, t.clone(), t, 0).unwrap();
            assert!(e.is_identity());
        }
    }

    #[test]
    fn c0_is_irreducible() {
        let c0 = Element::c_generator(0, n2());
        assert_eq!(c0.to_string(), "(. .) (. .) @1");
        assert_eq!(c0.reduce(), c0);
    }

    #[test]
    fn inverse_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for arity in [2u32, 3] {
            let n = Arity::new(arity).unwrap();
            for _ in 0..25 {
                let g = random_element(&mut rng, n, 4);
                let gi = g.inverse();
                assert!(g.multiply(&gi).unwrap().is_identity());
                assert!(gi.multiply(&g).unwrap().is_identity());
                assert_eq!(gi.inverse(), g.reduce());
            }
        }
    }

    #[test]
    fn c_generator_orders() {
        // ord c_j = (j+1)(n-1)+1, the leaf count of the all-right tree
        for arity in [2u32, 3, 4, 5] {
            let n = Arity::new(arity).unwrap();
            for j in 0..=4 {
                let c = Element::c_generator(j, n);
                let expect = (j + 1) * (arity as usize - 1) + 1;
                assert_eq!(c.order(64), OrderResult::Finite(expect));
            }
        }
    }

    #[test]
    fn inverse_of_c1_is_its_square() {
        let c1 = Element::c_generator(1, n2());
        let sq = c1.power(2).unwrap();
        assert_eq!(c1.inverse().canonical_key(), sq.canonical_key());
        assert!(c1.power(3).unwrap().is_identity());
    }

    #[test]
    fn power_of_c_in_t3() {
        let n3 = Arity::new(3).unwrap();
        let c2 = Element::c_generator(2, n3);
        assert!(c2.power(7).unwrap().is_identity());
        assert!(!c2.power(6).unwrap().is_identity());
    }

    #[test]
    fn expansion_then_reduce_is_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for arity in [2u32, 3] {
            let n = Arity::new(arity).unwrap();
            for _ in 0..30 {
                let g = random_element(&mut rng, n, 4).reduce();
                let key = g.canonical_key();
                let mut h = g.clone();
                for _ in 0..4 {
                    let p = rng.gen_range(0..h.leaf_count());
                    h = h.expand_at_source(p).unwrap();
                }
                assert_eq!(h.canonical_key(), key);
            }
        }
    }

    #[test]
    fn reduction_is_confluent_empirically() {
        // contract in random order instead of first-fit and compare keys
        fn reduce_random(e: &Element, rng: &mut ChaCha8Rng) -> Element {
            let n = e.arity().usize();
            let mut source = e.source().clone();
            let mut target = e.target().clone();
            let mut rotation = e.rotation();
            loop {
                let leaves = source.leaf_count();
                if leaves == 1 {
                    break;
                }
                let tblocks = target.leaf_caret_blocks();
                let mut sites: Vec<(usize, usize)> = source
                    .leaf_caret_blocks()
                    .into_iter()
                    .filter_map(|p| {
                        let q = (p + rotation) % leaves;
                        (q + n <= leaves && tblocks.binary_search(&q).is_ok()).then_some((p, q))
                    })
                    .collect();
                if sites.is_empty() {
                    break;
                }
                let pick = rng.gen_range(0..sites.len());
                let (p, q) = sites.swap_remove(pick);
                source = source.contract_at(p, e.arity()).unwrap();
                target = target.contract_at(q, e.arity()).unwrap();
                rotation = if q < rotation { rotation - (n - 1) } else { rotation };
            }
            Element::new(e.arity(), source, target, rotation).unwrap()
        }

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for arity in [2u32, 3, 4] {
            let n = Arity::new(arity).unwrap();
            for _ in 0..40 {
                let g = random_element(&mut rng, n, 5);
                let canonical = g.reduce();
                for _ in 0..3 {
                    assert_eq!(reduce_random(&g, &mut rng), canonical);
                }
            }
        }
    }

    #[test]
    fn associativity_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for arity in [2u32, 3] {
            let n = Arity::new(arity).unwrap();
            for _ in 0..20 {
                let a = random_element(&mut rng, n, 3);
                let b = random_element(&mut rng, n, 3);
                let c = random_element(&mut rng, n, 3);
                let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
                let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
                assert_eq!(left.canonical_key(), right.canonical_key());
            }
        }
    }

    #[test]
    fn order_sentinel_for_infinite_order() {
        // x_0-shaped element: nontrivial in F_2, so no finite order
        let x0 = el("((. .) .) (. (. .)) @0", 2);
        assert_eq!(x0.order(50), OrderResult::ExceedsCap(50));
    }

    #[test]
    fn balanced_form_of_torsion() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for arity in [2u32, 3] {
            let n = Arity::new(arity).unwrap();
            let c1 = Element::c_generator(1, n);
            // already balanced
            let b = c1.torsion_balanced_form(256).unwrap();
            assert_eq!(b.source(), b.target());
            assert_eq!(b.canonical_key(), c1.canonical_key());
            // random conjugates of torsion stay torsion
            for _ in 0..10 {
                let w = random_f_element(&mut rng, n, 3);
                let g = w
                    .multiply(&c1)
                    .unwrap()
                    .multiply(&w.inverse())
                    .unwrap();
                let bal = g.torsion_balanced_form(512).unwrap();
                assert_eq!(bal.source(), bal.target());
                assert_eq!(bal.canonical_key(), g.canonical_key());
                let leaves = bal.leaf_count();
                let ord = g.order(64).finite().expect("conjugate of torsion");
                assert_eq!(leaves % ord, 0);
            }
        }
    }

    #[test]
    fn balanced_form_rejects_infinite_order() {
        let x0 = el("((. .) .) (. (. .)) @0", 2);
        assert!(x0.torsion_balanced_form(64).is_err());
    }

    #[test]
    fn parse_display_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for arity in [2u32, 3, 4] {
            let n = Arity::new(arity).unwrap();
            for _ in 0..20 {
                let g = random_element(&mut rng, n, 4);
                let s = g.to_string();
                assert_eq!(parse_element(&s, n).unwrap(), g);
            }
        }
        assert!(parse_element("(. .) (. .) @2", Arity::new(2).unwrap()).is_err());
        assert!(parse_element("(. .) . @0", Arity::new(2).unwrap()).is_err());
    }

    #[test]
    fn is_in_f_examples() {
        let c0 = Element::c_generator(0, n2());
        assert!(!c0.is_in_f());
        let x0 = el("((. .) .) (. (. .)) @0", 2);
        assert!(x0.is_in_f());
        let c1 = Element::c_generator(1, n2());
        let prod = c1.multiply(&c1.power(2).unwrap()).unwrap();
        assert!(prod.is_in_f());
    }

    #[test]
    fn expand_source_to_known_expansion() {
        let x0 = el("((. .) .) (. (. .)) @0", 2);
        let goal = parse_tree("((. .) (. .))", n2()).unwrap();
        let e = x0.expand_source_to(&goal).unwrap();
        assert_eq!(e.source(), &goal);
        assert_eq!(e.canonical_key(), x0.canonical_key());
        assert_eq!(e.target(), &parse_tree("(. (. (. .)))", n2()).unwrap());
    }
}
