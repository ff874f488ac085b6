//! Symbolic coding of the baker map as the full two-sided 2-shift.
//!
//! A point `(u, v)` is coded by its future itinerary (which side of `a` the
//! `u`-coordinates of its forward images fall on) and its past itinerary (the
//! same test on the `v`-coordinates of its backward images, most recent first).
//! The `v`-coordinate is recovered from the past through the contraction system
//! `c_0(x) = a x`, `c_1(x) = a + (1 - a) x`.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{check_partition, Error, Result};
use crate::fibre::{baker_map, BakerPoint, Direction};
use crate::forcing::Forcing;

/// A finite word over `{0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SymbolWord(Vec<u8>);

impl SymbolWord {
    pub fn new(symbols: Vec<u8>) -> Result<Self> {
        if let Some(bad) = symbols.iter().find(|&&s| s > 1) {
            return Err(Error::InvalidParameter(format!("symbol {bad} is not in {{0, 1}}")));
        }
        Ok(SymbolWord(symbols))
    }

    /// The word of length `len` whose `k`-th symbol is bit `len - 1 - k` of `bits`.
    pub fn from_bits(bits: u64, len: usize) -> Self {
        SymbolWord((0..len).map(|k| ((bits >> (len - 1 - k)) & 1) as u8).collect())
    }

    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|ch| match ch {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidParameter(format!("symbol {other:?} is not 0 or 1"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(SymbolWord)
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn rotated(&self, k: usize) -> Self {
        let mut w = self.0.clone();
        if !w.is_empty() {
            let k = k % w.len();
            w.rotate_left(k);
        }
        SymbolWord(w)
    }

    /// True when the word is not a proper power of a shorter word.
    pub fn is_primitive(&self) -> bool {
        let p = self.len();
        (1..p).filter(|&d| p.is_multiple_of(d)).all(|d| self.0[d..] != self.0[..p - d])
    }

    /// Lexicographically least rotation; canonical representative of the cycle.
    pub fn canonical_rotation(&self) -> Self {
        (0..self.len().max(1)).map(|k| self.rotated(k)).min().unwrap_or_default()
    }
}

impl fmt::Display for SymbolWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl Serialize for SymbolWord {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// The two affine branches `c_0(x) = a x` and `c_1(x) = a + (1 - a) x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionSystem {
    a: f64,
}

impl ContractionSystem {
    pub fn new(a: f64) -> Result<Self> {
        check_partition(a)?;
        Ok(ContractionSystem { a })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Affine coefficients `(slope, offset)` of branch `symbol`.
    #[inline]
    pub fn coefficients(&self, symbol: u8) -> (f64, f64) {
        if symbol == 0 {
            (self.a, 0.0)
        } else {
            (1.0 - self.a, self.a)
        }
    }

    #[inline]
    pub fn apply(&self, symbol: u8, x: f64) -> f64 {
        if symbol == 0 {
            self.a * x
        } else {
            self.a + (1.0 - self.a) * x
        }
    }

    pub fn max_ratio(&self) -> f64 {
        self.a.max(1.0 - self.a)
    }
}

/// Past and future itineraries of a point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Itinerary {
    /// `past[k]` codes the `v`-coordinate of the `k`-th backward image (`k = 0` is the point itself).
    pub past: SymbolWord,
    /// `future[k]` codes the `u`-coordinate of the `k`-th forward image.
    pub future: SymbolWord,
}

#[inline]
fn symbol_of(x: f64, a: f64) -> u8 {
    u8::from(x >= a)
}

pub fn encode_point(p: BakerPoint, a: f64, n_past: usize, n_future: usize) -> Result<Itinerary> {
    check_partition(a)?;
    let mut future = Vec::with_capacity(n_future);
    let mut q = p;
    for _ in 0..n_future {
        future.push(symbol_of(q.u, a));
        q = baker_map(q, a, Direction::Forward);
    }
    let mut past = Vec::with_capacity(n_past);
    let mut q = p;
    for _ in 0..n_past {
        past.push(symbol_of(q.v, a));
        q = baker_map(q, a, Direction::Inverse);
    }
    Ok(Itinerary { past: SymbolWord(past), future: SymbolWord(future) })
}

/// `c_{past[0]}(c_{past[1]}( ... c_{past[m-1]}(anchor)))`.
///
/// The exact `v` of any point with this past lies within `max(a, 1-a)^m` of the result.
pub fn reconstruct_v(past: &SymbolWord, a: f64, anchor: f64) -> Result<f64> {
    if past.is_empty() {
        return Err(Error::InvalidParameter("past itinerary must be nonempty".into()));
    }
    let sys = ContractionSystem::new(a)?;
    Ok(past.symbols().iter().rev().fold(anchor, |x, &s| sys.apply(s, x)))
}

/// Exact `v`-coordinates of the periodic orbit whose itinerary repeats `word`.
///
/// Entry `k` is the `v`-coordinate of the orbit point whose future itinerary
/// starts at `word[k]`; its past is `word[k-1], word[k-2], ...` (cyclically), so
/// it is the fixed point of the affine map `c_{word[k-1]} o ... o c_{word[k]}`.
pub fn periodic_orbit_v(word: &SymbolWord, sys: &ContractionSystem) -> Vec<f64> {
    let p = word.len();
    let w = word.symbols();
    (0..p)
        .map(|k| {
            // innermost branch is word[k], outermost word[k-1]
            let (mut slope, mut offset) = (1.0, 0.0);
            for j in 0..p {
                let (s, o) = sys.coefficients(w[(k + j) % p]);
                slope *= s;
                offset = s * offset + o;
            }
            offset / (1.0 - slope)
        })
        .collect()
}

/// Average of `log g` over the periodic orbit coded by `word`.
pub fn periodic_orbit_logg_average(word: &SymbolWord, a: f64, forcing: &Forcing) -> Result<f64> {
    forcing.validate()?;
    if word.is_empty() {
        return Err(Error::InvalidParameter("periodic word must be nonempty".into()));
    }
    let sys = ContractionSystem::new(a)?;
    let vs = periodic_orbit_v(word, &sys);
    Ok(vs.iter().map(|&v| forcing.log_eval(v)).sum::<f64>() / vs.len() as f64)
}
