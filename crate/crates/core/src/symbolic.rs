//! Itinerary words and their factor complexity.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piece label, `1..=N`.
pub type Symbol = u16;

/// Default number of consecutive equal complexity values required before a
/// profile is called eventually constant.
pub const DEFAULT_WINDOW: usize = 8;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItineraryWord(pub Vec<Symbol>);

impl ItineraryWord {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Self(symbols)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn alphabet_size(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0) as usize
    }

    /// Cyclic rotation by `k` to the left.
    pub fn rotate_left(&self, k: usize) -> Self {
        let mut v = self.0.clone();
        let n = v.len();
        if n > 0 {
            v.rotate_left(k % n);
        }
        Self(v)
    }

    /// Length of the shortest `r` with `self = r^m`.
    pub fn primitive_period(&self) -> usize {
        primitive_period(&self.0)
    }
}

impl fmt::Display for ItineraryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, s) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl From<Vec<Symbol>> for ItineraryWord {
    fn from(v: Vec<Symbol>) -> Self {
        Self(v)
    }
}

pub(crate) fn primitive_period(w: &[Symbol]) -> usize {
    let n = w.len();
    (1..=n)
        .find(|&d| n.is_multiple_of(d) && (d..n).all(|k| w[k] == w[k - d]))
        .unwrap_or(n)
}

/// Offset `k` such that `w.rotate_left(k)` is the least rotation (Booth).
pub(crate) fn least_rotation(w: &[Symbol]) -> usize {
    let n = w.len();
    if n == 0 {
        return 0;
    }
    let s = |i: usize| w[i % n];
    let mut f = vec![usize::MAX; 2 * n];
    let mut k = 0usize;
    for j in 1..2 * n {
        let sj = s(j);
        let mut i = f[j - k - 1];
        while i != usize::MAX && sj != s(k + i + 1) {
            if sj < s(k + i + 1) {
                k = j - i - 1;
            }
            i = f[i];
        }
        if i == usize::MAX && sj != s(k + i.wrapping_add(1)) {
            if sj < s(k) {
                k = j;
            }
            f[j - k] = usize::MAX;
        } else {
            f[j - k] = i.wrapping_add(1);
        }
    }
    k % n
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComplexityClass {
    EventuallyConstant,
    SturmianConsistent,
    AffineConsistent,
    Inconclusive,
}

impl fmt::Display for ComplexityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::EventuallyConstant => "eventually-constant",
            Self::SturmianConsistent => "sturmian-consistent",
            Self::AffineConsistent => "affine-consistent",
            Self::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityProfile {
    /// `p(1), ..., p(n_max)`.
    pub values: Vec<usize>,
    /// `p(n_max + 1), ..., p(n_max + window)`, used only to confirm stability.
    pub confirmation: Vec<usize>,
    pub window: usize,
    pub alphabet: usize,
    pub classification: ComplexityClass,
}

impl ComplexityProfile {
    pub fn n_max(&self) -> usize {
        self.values.len()
    }

    /// `p(n)` for `n` in `1..=n_max + window`.
    pub fn p(&self, n: usize) -> usize {
        if n <= self.values.len() {
            self.values[n - 1]
        } else {
            self.confirmation[n - 1 - self.values.len()]
        }
    }

    fn all(&self) -> impl Iterator<Item = usize> + '_ {
        self.values.iter().chain(&self.confirmation).copied()
    }
}

/// Factor complexity of `word` for `n` in `1..=n_max`, with `window`
/// additional lengths computed for confirmation.
///
/// Factors of every length are sampled at the same end positions
/// `n_max + window ..= len`, so the counted factor sets are suffix closed and
/// `p` is monotone even on a finite word.
pub fn complexity(word: &ItineraryWord, n_max: usize, window: usize) -> Result<ComplexityProfile> {
    if n_max == 0 {
        return Err(Error::Config("n_max must be at least 1".into()));
    }
    let top = n_max + window;
    let w = word.symbols();
    if w.len() < top {
        return Err(Error::WordTooShort { len: w.len(), needed: top });
    }
    let mut all = Vec::with_capacity(top);
    let mut seen: HashSet<&[Symbol]> = HashSet::new();
    for n in 1..=top {
        seen.clear();
        for e in top..=w.len() {
            seen.insert(&w[e - n..e]);
        }
        all.push(seen.len());
    }
    let confirmation = all.split_off(n_max);
    let mut profile = ComplexityProfile {
        values: all,
        confirmation,
        window,
        alphabet: word.alphabet_size(),
        classification: ComplexityClass::Inconclusive,
    };
    profile.classification = classify(&profile);
    Ok(profile)
}

fn classify(p: &ComplexityProfile) -> ComplexityClass {
    let all: Vec<usize> = p.all().collect();
    let n_max = p.values.len();
    let w = p.window;
    if w > 0 && all[n_max - 1] == all[n_max - 1 + w] {
        return ComplexityClass::EventuallyConstant;
    }
    if p.values.iter().enumerate().all(|(k, &v)| v == k + 2) {
        return ComplexityClass::SturmianConsistent;
    }
    let tail = &all[all.len().saturating_sub(w + 1)..];
    if tail.len() >= 3 {
        let d0 = tail[1] as isize - tail[0] as isize;
        if d0 >= 1 && tail.windows(2).all(|x| x[1] as isize - x[0] as isize == d0) {
            return ComplexityClass::AffineConsistent;
        }
    }
    ComplexityClass::Inconclusive
}

/// Evidence from Morse–Hedlund: a stable complexity value `C` bounds the
/// eventual period by `C`. A certificate still needs a fixed-point check.
pub fn morse_hedlund_certify(profile: &ComplexityProfile) -> Option<usize> {
    (profile.classification == ComplexityClass::EventuallyConstant).then(|| profile.values[profile.n_max() - 1])
}
