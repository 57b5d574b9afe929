//! Rooted n-ary trees and their correspondence with n-adic subdivisions.
//!
//! A tree is either a leaf or a caret with exactly `n` ordered children.
//! Trees are immutable values with structural equality; every operation
//! returns a fresh tree. Leaves are addressed by their 0-based left-to-right
//! position.

use crate::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use std::fmt;
use std::str::FromStr;

/// Branching degree of a tree family; always at least 2.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Arity(u32);

impl Arity {
    pub fn new(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::BadArity(n));
        }
        Ok(Arity(n))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn usize(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Arity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A rooted tree where every internal node has the same number of children.
///
/// The arity is carried by context (an [`Arity`] argument or the surrounding
/// element); `validate_arity` checks that a parsed or constructed tree
/// actually is n-ary.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum NTree {
    Leaf,
    Caret(Vec<NTree>),
}

impl NTree {
    /// Caret with `n` leaf children.
    pub fn caret_of_leaves(n: Arity) -> NTree {
        NTree::Caret(vec![NTree::Leaf; n.usize()])
    }

    /// Number of internal nodes.
    pub fn caret_count(&self) -> usize {
        match self {
            NTree::Leaf => 0,
            NTree::Caret(children) => 1 + children.iter().map(NTree::caret_count).sum::<usize>(),
        }
    }

    /// Number of leaves.
    pub fn leaf_count(&self) -> usize {
        match self {
            NTree::Leaf => 1,
            NTree::Caret(children) => children.iter().map(NTree::leaf_count).sum(),
        }
    }

    /// True if every caret has exactly `n` children.
    pub fn validate_arity(&self, n: Arity) -> bool {
        match self {
            NTree::Leaf => true,
            NTree::Caret(children) => {
                children.len() == n.usize() && children.iter().all(|c| c.validate_arity(n))
            }
        }
    }

    /// Depth of the deepest leaf.
    pub fn depth(&self) -> usize {
        match self {
            NTree::Leaf => 0,
            NTree::Caret(children) => 1 + children.iter().map(NTree::depth).max().unwrap_or(0),
        }
    }

    /// Replace the leaf at `leaf` with a caret of `n` leaves.
    pub fn expand_at(&self, leaf: usize, n: Arity) -> Result<NTree> {
        let leaves = self.leaf_count();
        if leaf >= leaves {
            return Err(Error::LeafOutOfRange { index: leaf, leaves });
        }
        Ok(self.expand_inner(leaf, n).0)
    }

    fn expand_inner(&self, leaf: usize, n: Arity) -> (NTree, usize) {
        match self {
            NTree::Leaf => {
                if leaf == 0 {
                    (NTree::caret_of_leaves(n), 1)
                } else {
                    (NTree::Leaf, 1)
                }
            }
            NTree::Caret(children) => {
                let mut offset = 0usize;
                let mut out = Vec::with_capacity(children.len());
                for child in children {
                    let child_leaves = child.leaf_count();
                    if leaf >= offset && leaf < offset + child_leaves {
                        let (new_child, _) = child.expand_inner(leaf - offset, n);
                        out.push(new_child);
                    } else {
                        out.push(child.clone());
                    }
                    offset += child_leaves;
                }
                (NTree::Caret(out), offset)
            }
        }
    }

    /// Inverse of [`expand_at`]: the `n` consecutive leaves starting at
    /// `leaf` must be the children of one caret, which becomes a leaf.
    pub fn contract_at(&self, leaf: usize, n: Arity) -> Result<NTree> {
        let leaves = self.leaf_count();
        if leaf + n.usize() > leaves {
            return Err(Error::NotContractible { start: leaf, end: leaf + n.usize() });
        }
        self.contract_inner(leaf, n)
            .ok_or(Error::NotContractible { start: leaf, end: leaf + n.usize() })
    }

    fn contract_inner(&self, leaf: usize, n: Arity) -> Option<NTree> {
        match self {
            NTree::Leaf => None,
            NTree::Caret(children) => {
                if leaf == 0 && children.iter().all(|c| *c == NTree::Leaf) {
                    return Some(NTree::Leaf);
                }
                let mut offset = 0usize;
                let mut out = Vec::with_capacity(children.len());
                let mut hit = false;
                for child in children {
                    let child_leaves = child.leaf_count();
                    if !hit && leaf >= offset && leaf + n.usize() <= offset + child_leaves {
                        let new_child = child.contract_inner(leaf - offset, n)?;
                        out.push(new_child);
                        hit = true;
                    } else {
                        out.push(child.clone());
                    }
                    offset += child_leaves;
                }
                if hit {
                    Some(NTree::Caret(out))
                } else {
                    None
                }
            }
        }
    }

    /// Leaf positions `p` such that leaves `p..p+n` are the children of a
    /// single caret (the contractible blocks).
    pub fn leaf_caret_blocks(&self) -> Vec<usize> {
        let mut blocks = Vec::new();
        self.blocks_inner(0, &mut blocks);
        blocks
    }

    fn blocks_inner(&self, offset: usize, blocks: &mut Vec<usize>) -> usize {
        match self {
            NTree::Leaf => offset + 1,
            NTree::Caret(children) => {
                if children.iter().all(|c| *c == NTree::Leaf) {
                    blocks.push(offset);
                }
                let mut pos = offset;
                for child in children {
                    pos = child.blocks_inner(pos, blocks);
                }
                pos
            }
        }
    }

    /// True iff `self` can be obtained from `small` by expansions
    /// (equivalently, `small` is a rooted prefix of `self`).
    pub fn is_expansion_of(&self, small: &NTree) -> bool {
        match (self, small) {
            (_, NTree::Leaf) => true,
            (NTree::Leaf, NTree::Caret(_)) => false,
            (NTree::Caret(big), NTree::Caret(small)) => {
                big.len() == small.len()
                    && big.iter().zip(small.iter()).all(|(b, s)| b.is_expansion_of(s))
            }
        }
    }

    /// The smallest tree that is an expansion of both inputs: the node-wise
    /// union of the two rooted trees.
    pub fn minimal_joint_expansion(&self, other: &NTree) -> NTree {
        match (self, other) {
            (NTree::Leaf, t) => t.clone(),
            (t, NTree::Leaf) => t.clone(),
            (NTree::Caret(a), NTree::Caret(b)) => NTree::Caret(
                a.iter().zip(b.iter()).map(|(x, y)| x.minimal_joint_expansion(y)).collect(),
            ),
        }
    }

    /// Ordered n-adic subintervals of `[0,1]` corresponding to the leaves.
    pub fn leaf_intervals(&self, n: Arity) -> Vec<(BigRational, BigRational)> {
        let mut out = Vec::with_capacity(self.leaf_count());
        let zero = BigRational::from_integer(BigInt::from(0));
        let one = BigRational::from_integer(BigInt::from(1));
        self.intervals_inner(n, zero, one, &mut out);
        out
    }

    fn intervals_inner(
        &self,
        n: Arity,
        lo: BigRational,
        hi: BigRational,
        out: &mut Vec<(BigRational, BigRational)>,
    ) {
        match self {
            NTree::Leaf => out.push((lo, hi)),
            NTree::Caret(children) => {
                let width = (&hi - &lo) / BigRational::from_integer(BigInt::from(n.get()));
                let mut cur = lo;
                for child in children {
                    let next = &cur + &width;
                    child.intervals_inner(n, cur, next.clone(), out);
                    cur = next;
                }
            }
        }
    }

    /// For each leaf of `small` (a prefix of `self`), the subtree of `self`
    /// hanging there, in leaf order.
    pub fn subtrees_at_leaves_of(&self, small: &NTree) -> Option<Vec<NTree>> {
        let mut out = Vec::new();
        if self.subtrees_inner(small, &mut out) {
            Some(out)
        } else {
            None
        }
    }

    fn subtrees_inner(&self, small: &NTree, out: &mut Vec<NTree>) -> bool {
        match (self, small) {
            (t, NTree::Leaf) => {
                out.push(t.clone());
                true
            }
            (NTree::Leaf, NTree::Caret(_)) => false,
            (NTree::Caret(big), NTree::Caret(small)) => {
                big.len() == small.len()
                    && big.iter().zip(small.iter()).all(|(b, s)| b.subtrees_inner(s, out))
            }
        }
    }
}

/// All-right tree: `k` carets, each caret after the root attached to the
/// rightmost leaf of the previous one. `k = 0` is a leaf.
pub fn all_right(k: usize, n: Arity) -> NTree {
    let mut t = NTree::Leaf;
    for _ in 0..k {
        let mut children = vec![NTree::Leaf; n.usize() - 1];
        children.push(t);
        t = NTree::Caret(children);
    }
    t
}

/// Uniform random tree with `carets` carets: repeated expansion at a
/// uniformly chosen leaf.
pub fn random_tree<R: Rng>(rng: &mut R, carets: usize, n: Arity) -> NTree {
    let mut t = NTree::Leaf;
    for _ in 0..carets {
        let leaf = rng.gen_range(0..t.leaf_count());
        t = t.expand_at(leaf, n).expect("leaf in range");
    }
    t
}

impl fmt::Display for NTree {
    /// Text grammar: `Tree ::= "." | "(" Tree{n} ")"` with single spaces
    /// between children. Example (n=2): `(. (. .))`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NTree::Leaf => write!(f, "."),
            NTree::Caret(children) => {
                write!(f, "(")?;
                for (i, child) in children.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{child}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl FromStr for NTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<NTree> {
        let bytes = s.as_bytes();
        let (tree, end) = parse_tree_at(bytes, skip_ws(bytes, 0))?;
        let end = skip_ws(bytes, end);
        if end != bytes.len() {
            return Err(Error::Parse { pos: end, msg: "trailing input after tree".into() });
        }
        Ok(tree)
    }
}

fn skip_ws(bytes: &[u8], mut pos: usize) -> usize {
    while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
        pos += 1;
    }
    pos
}

/// Parse one tree starting at `pos`; returns the tree and the position just
/// past it. Used by the element parser to split a pair.
pub(crate) fn parse_tree_at(bytes: &[u8], pos: usize) -> Result<(NTree, usize)> {
    match bytes.get(pos) {
        Some(b'.') => Ok((NTree::Leaf, pos + 1)),
        Some(b'(') => {
            let mut children = Vec::new();
            let mut cur = skip_ws(bytes, pos + 1);
            loop {
                match bytes.get(cur) {
                    Some(b')') => break,
                    Some(_) => {
                        let (child, next) = parse_tree_at(bytes, cur)?;
                        children.push(child);
                        cur = skip_ws(bytes, next);
                    }
                    None => {
                        return Err(Error::Parse { pos: cur, msg: "unclosed caret".into() });
                    }
                }
            }
            if children.len() < 2 {
                return Err(Error::Parse {
                    pos,
                    msg: format!("caret needs at least 2 children, got {}", children.len()),
                });
            }
            Ok((NTree::Caret(children), cur + 1))
        }
        other => Err(Error::Parse {
            pos,
            msg: format!("expected '.' or '(', got {:?}", other.map(|b| *b as char)),
        }),
    }
}

/// Parse a tree and check it against a declared arity.
pub fn parse_tree(s: &str, n: Arity) -> Result<NTree> {
    let tree: NTree = s.parse()?;
    if !tree.validate_arity(n) {
        return Err(Error::Parse {
            pos: 0,
            msg: format!("tree is not {n}-ary: {s}"),
        });
    }
    Ok(tree)
}
