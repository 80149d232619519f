//! Atoms of the attractor and the interval unions `Lambda_n`.
//!
//! The atom with word `(i_1, ..., i_n)` is obtained from `X` by alternately
//! restricting to a piece and taking the closure of the image under its
//! branch. A point with itinerary `theta` satisfies
//! `f^{t+n}(x) in A(theta_t, ..., theta_{t+n-1})`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::map::MapSpec;
use crate::scalar::{max_of, min_of, pow, Scalar};
use crate::symbolic::{ItineraryWord, Symbol};
use crate::Rational;

/// Default cap on the number of atoms in one generation.
pub const DEFAULT_ATOM_CAP: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom<S: Scalar = Rational> {
    pub word: ItineraryWord,
    pub lo: S,
    pub hi: S,
    /// Descends from a single-point overlap with a piece at a boundary point.
    pub degenerate: bool,
}

impl<S: Scalar> Atom<S> {
    pub fn generation(&self) -> usize {
        self.word.len()
    }

    pub fn diam(&self) -> S {
        self.hi.clone() - &self.lo
    }

    pub fn contains(&self, x: &S) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, lo: &S, hi: &S) -> bool {
        &self.lo <= lo && hi <= &self.hi
    }
}

/// Closed interval `[lo, hi]`.
pub type Interval<S> = (S, S);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomTree<S: Scalar = Rational> {
    /// `generations[n-1]` holds the atoms of generation `n`, sorted by word.
    pub generations: Vec<Vec<Atom<S>>>,
    /// `covers[n-1]` is `Lambda_n` as sorted disjoint closed intervals.
    pub covers: Vec<Vec<Interval<S>>>,
    pub lambda: S,
    pub diam: S,
}

impl<S: Scalar> AtomTree<S> {
    pub fn depth(&self) -> usize {
        self.generations.len()
    }

    pub fn generation(&self, n: usize) -> &[Atom<S>] {
        &self.generations[n - 1]
    }

    /// `lambda^n * diam(X)`.
    pub fn error_bound(&self, n: usize) -> S {
        pow(&self.lambda, n) * &self.diam
    }

    /// Atom of generation `word.len()` with the given word.
    pub fn find(&self, word: &[Symbol]) -> Option<&Atom<S>> {
        let gen = self.generations.get(word.len().checked_sub(1)?)?;
        gen.binary_search_by(|a| a.word.symbols().cmp(word)).ok().map(|k| &gen[k])
    }

    pub fn max_diam(&self, n: usize) -> S {
        self.generation(n).iter().map(|a| a.diam()).max().unwrap_or_else(S::zero)
    }
}

fn children<S: Scalar>(spec: &MapSpec<S>, word: &[Symbol], lo: &S, hi: &S, degenerate: bool) -> Vec<Atom<S>> {
    let n = spec.pieces();
    let (open_lo, open_hi) = spec.open_ends();
    let mut out = Vec::new();
    let child = |i: usize, a: &S, b: &S, degenerate: bool| {
        let br = spec.branch(i);
        let (fa, fb) = (br.eval(a), br.eval(b));
        let (l, h) = if fa <= fb { (fa, fb) } else { (fb, fa) };
        let mut w = word.to_vec();
        w.push(i as Symbol);
        Atom { word: ItineraryWord(w), lo: l, hi: h, degenerate }
    };
    if lo == hi {
        // a point atom continues only from inside a piece
        if let Ok(crate::map::Location::Piece(i)) = spec.locate(lo) {
            out.push(child(i, lo, hi, degenerate));
        }
        return out;
    }
    for i in 1..=n {
        let (cl, cr) = (spec.c(i - 1), spec.c(i));
        let a = max_of(lo, cl);
        let b = min_of(hi, cr);
        if a < b {
            out.push(child(i, &a, &b, degenerate));
        } else if a == b {
            // the atom touches the closed piece at one endpoint only
            let at_open_end = (i == 1 && open_lo && &a == cl) || (i == n && open_hi && &a == cr);
            let interior_boundary = (&a == cl && i > 1) || (&a == cr && i < n);
            if interior_boundary && !at_open_end {
                out.push(child(i, &a, &b, true));
            }
        }
    }
    out
}

/// Merge closed intervals into sorted disjoint closed intervals.
pub fn merge_intervals<S: Scalar>(mut v: Vec<Interval<S>>) -> Vec<Interval<S>> {
    v.sort();
    let mut out: Vec<Interval<S>> = Vec::with_capacity(v.len());
    for (a, b) in v {
        match out.last_mut() {
            Some((_, h)) if a <= *h => {
                if b > *h {
                    *h = b;
                }
            }
            _ => out.push((a, b)),
        }
    }
    out
}

/// Expand generations `1..=depth` of atoms. Fails once a generation holds more
/// than `cap` atoms.
pub fn expand_atoms_capped<S: Scalar>(spec: &MapSpec<S>, depth: usize, cap: usize) -> Result<AtomTree<S>> {
    if depth == 0 {
        return Err(Error::Config("depth must be at least 1".into()));
    }
    let mut generations: Vec<Vec<Atom<S>>> = Vec::with_capacity(depth);
    let mut covers = Vec::with_capacity(depth);
    let root = Atom { word: ItineraryWord::default(), lo: spec.c(0).clone(), hi: spec.c(spec.pieces()).clone(), degenerate: false };
    for g in 1..=depth {
        let parents = generations.last().map(|v| v.as_slice()).unwrap_or(std::slice::from_ref(&root));
        let mut next: Vec<Atom<S>> = parents
            .par_iter()
            .flat_map_iter(|p| children(spec, p.word.symbols(), &p.lo, &p.hi, p.degenerate))
            .collect();
        if next.len() > cap {
            return Err(Error::DepthBudgetExceeded { generation: g, count: next.len(), cap });
        }
        next.par_sort_unstable_by(|a, b| a.word.cmp(&b.word));
        covers.push(merge_intervals(next.iter().map(|a| (a.lo.clone(), a.hi.clone())).collect()));
        generations.push(next);
    }
    Ok(AtomTree { generations, covers, lambda: spec.lambda().clone(), diam: spec.partition().diam() })
}

pub fn expand_atoms<S: Scalar>(spec: &MapSpec<S>, depth: usize) -> Result<AtomTree<S>> {
    expand_atoms_capped(spec, depth, DEFAULT_ATOM_CAP)
}

/// `Lambda_n` for the deepest generation, which lies within Hausdorff distance
/// [`AtomTree::error_bound`] of the attractor.
pub fn attractor_enclosure<S: Scalar>(tree: &AtomTree<S>) -> Vec<Interval<S>> {
    tree.covers.last().cloned().unwrap_or_default()
}

/// Words of the deepest atoms containing `x`.
pub fn locate_in_atoms<S: Scalar>(tree: &AtomTree<S>, x: &S) -> Vec<ItineraryWord> {
    tree.generations
        .last()
        .map(|g| g.iter().filter(|a| a.contains(x)).map(|a| a.word.clone()).collect())
        .unwrap_or_default()
}

/// Whether `x` lies in one of the given sorted disjoint intervals.
pub fn intervals_contain<S: Scalar>(v: &[Interval<S>], x: &S) -> bool {
    let k = v.partition_point(|(a, _)| a <= x);
    k > 0 && x <= &v[k - 1].1
}
