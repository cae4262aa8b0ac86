//! Local rules as tables of amplitude vectors.
//!
//! A rule with `q` states and neighborhood size `k` assigns to every local
//! configuration `λ = i_1…i_k` an amplitude vector `|λ⟩⟩ ∈ C^q` whose `i`-th
//! component is the amplitude `f(i|λ)` for the cell to end up in state `i`.
//! Local configurations are numbered base `q` with the leftmost cell most
//! significant, so for `q = 2, k = 3` the string `101` is configuration 5.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A transition amplitude.
pub type Amplitude = Complex64;

/// Tolerance used when none is given.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// `a` equals `b` within `eps`, componentwise in C.
#[inline]
pub fn approx_eq(a: Amplitude, b: Amplitude, eps: f64) -> bool {
    (a.re - b.re).abs() <= eps && (a.im - b.im).abs() <= eps
}

#[inline]
pub fn approx_zero(a: Amplitude, eps: f64) -> bool {
    approx_eq(a, Amplitude::new(0.0, 0.0), eps)
}

#[inline]
pub fn approx_one(a: Amplitude, eps: f64) -> bool {
    approx_eq(a, Amplitude::new(1.0, 0.0), eps)
}

/// Encodes a digit string base `q`, leftmost digit most significant.
pub fn encode(digits: &[usize], q: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * q + d)
}

/// Inverse of [`encode`] for strings of length `len`.
pub fn decode(mut index: usize, q: usize, len: usize) -> Vec<usize> {
    let mut digits = vec![0; len];
    for slot in digits.iter_mut().rev() {
        *slot = index % q;
        index /= q;
    }
    digits
}

/// Renders digits as a string, one character per cell.
pub fn digits_to_string(digits: &[usize]) -> String {
    digits
        .iter()
        .map(|&d| core::char::from_digit(d as u32, 36).unwrap_or('?'))
        .collect()
}

/// Parses a string of cell states in `0..q`.
pub fn parse_digits(s: &str, q: usize) -> Result<Vec<usize>> {
    s.chars()
        .map(|ch| match ch.to_digit(36) {
            Some(d) if (d as usize) < q => Ok(d as usize),
            _ => Err(Error::InvalidConfig(s.into())),
        })
        .collect()
}

/// Integer power for small state spaces.
#[inline]
pub(crate) fn pow(q: usize, e: usize) -> usize {
    q.pow(e as u32)
}

/// A local configuration, identified by its base-`q` index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocalConfig(usize);

impl LocalConfig {
    pub const fn from_index(index: usize) -> Self {
        LocalConfig(index)
    }

    pub const fn index(self) -> usize {
        self.0
    }
}

/// Which side of the rule a state permutation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Permute every cell of the local configuration.
    Input,
    /// Permute the components of every amplitude vector.
    Output,
    Both,
}

/// A local rule `f : Q × Q^k → C` stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleTable {
    q: usize,
    k: usize,
    // row-major: configuration index, then output state
    amps: Vec<Amplitude>,
    tolerance: f64,
}

impl RuleTable {
    /// Builds a rule from a flat table of `q^k · q` amplitudes, ordered by
    /// configuration index and then by output state.
    pub fn new(q: usize, k: usize, amps: Vec<Amplitude>, tolerance: f64) -> Result<Self> {
        if q < 2 || k < 1 {
            return Err(Error::InvalidShape { q, k });
        }
        let configs = q
            .checked_pow(k as u32)
            .filter(|n| n.checked_mul(q).is_some())
            .ok_or(Error::InvalidShape { q, k })?;
        if !(tolerance.is_finite() && tolerance > 0.0) {
            return Err(Error::InvalidTolerance(tolerance));
        }
        if amps.len() != configs * q {
            return Err(Error::TableSize { expected: configs * q, found: amps.len() });
        }
        if let Some(pos) = amps.iter().position(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::NonFinite {
                config: digits_to_string(&decode(pos / q, q, k)),
                output: pos % q,
            });
        }
        Ok(RuleTable { q, k, amps, tolerance })
    }

    /// Builds a rule from a closure `(local configuration digits, output) -> amplitude`.
    pub fn from_fn<F>(q: usize, k: usize, tolerance: f64, mut f: F) -> Result<Self>
    where
        F: FnMut(&[usize], usize) -> Amplitude,
    {
        if q < 2 || k < 1 {
            return Err(Error::InvalidShape { q, k });
        }
        let configs = q.checked_pow(k as u32).ok_or(Error::InvalidShape { q, k })?;
        let mut amps = Vec::with_capacity(configs * q);
        for idx in 0..configs {
            let digits = decode(idx, q, k);
            for i in 0..q {
                amps.push(f(&digits, i));
            }
        }
        RuleTable::new(q, k, amps, tolerance)
    }

    /// Builds a rule from one amplitude vector per configuration.
    pub fn from_vectors(q: usize, k: usize, tolerance: f64, vectors: &[Vec<Amplitude>]) -> Result<Self> {
        if let Some(bad) = vectors.iter().find(|v| v.len() != q) {
            return Err(Error::DimensionMismatch(format!(
                "amplitude vector of length {} for q = {q}",
                bad.len()
            )));
        }
        RuleTable::new(q, k, vectors.iter().flatten().copied().collect(), tolerance)
    }

    /// The deterministic rule whose output for `λ` is `output(λ)`.
    pub fn deterministic<F>(q: usize, k: usize, tolerance: f64, mut output: F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> usize,
    {
        RuleTable::from_fn(q, k, tolerance, |digits, i| {
            if output(digits) == i {
                Amplitude::new(1.0, 0.0)
            } else {
                Amplitude::new(0.0, 0.0)
            }
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Result<Self> {
        if !(tolerance.is_finite() && tolerance > 0.0) {
            return Err(Error::InvalidTolerance(tolerance));
        }
        self.tolerance = tolerance;
        Ok(self)
    }

    /// Number of local configurations, `q^k`.
    pub fn config_count(&self) -> usize {
        self.amps.len() / self.q
    }

    pub fn configs(&self) -> impl Iterator<Item = LocalConfig> {
        (0..self.config_count()).map(LocalConfig)
    }

    /// Flat table, ordered by configuration then output state.
    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amps
    }

    pub fn check(&self, c: LocalConfig) -> Result<LocalConfig> {
        if c.0 < self.config_count() {
            Ok(c)
        } else {
            Err(Error::ConfigOutOfRange { index: c.0, count: self.config_count() })
        }
    }

    /// `|λ⟩⟩`. Panics if `c` is out of range.
    pub fn vector(&self, c: LocalConfig) -> &[Amplitude] {
        &self.amps[c.0 * self.q..(c.0 + 1) * self.q]
    }

    /// `f(output|c)`. Panics if either index is out of range.
    #[inline]
    pub fn amplitude(&self, output: usize, c: LocalConfig) -> Amplitude {
        assert!(output < self.q, "output state {output} out of range");
        self.amps[c.0 * self.q + output]
    }

    /// `f(output|digits)` for a digit slice of length `k`.
    #[inline]
    pub fn amplitude_at(&self, output: usize, digits: &[usize]) -> Amplitude {
        self.amps[encode(digits, self.q) * self.q + output]
    }

    pub fn config(&self, digits: &[usize]) -> Result<LocalConfig> {
        if digits.len() != self.k || digits.iter().any(|&d| d >= self.q) {
            return Err(Error::InvalidConfig(digits_to_string(digits)));
        }
        Ok(LocalConfig(encode(digits, self.q)))
    }

    pub fn parse_config(&self, s: &str) -> Result<LocalConfig> {
        let digits = parse_digits(s, self.q)?;
        self.config(&digits).map_err(|_| Error::InvalidConfig(s.into()))
    }

    pub fn digits(&self, c: LocalConfig) -> Vec<usize> {
        decode(c.0, self.q, self.k)
    }

    pub fn config_string(&self, c: LocalConfig) -> String {
        digits_to_string(&self.digits(c))
    }

    /// `⟨⟨a|b⟩⟩ = Σ_i conj(f(i|a)) f(i|b)`.
    pub fn inner(&self, a: LocalConfig, b: LocalConfig) -> Result<Amplitude> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.inner_unchecked(a, b))
    }

    pub(crate) fn inner_unchecked(&self, a: LocalConfig, b: LocalConfig) -> Amplitude {
        self.vector(a)
            .iter()
            .zip(self.vector(b))
            .map(|(x, y)| x.conj() * y)
            .sum()
    }

    /// `(Pf)(i|λ) = f(i|Pλ)`, where `P` reverses the local configuration.
    pub fn parity_transform(&self) -> RuleTable {
        let mut amps = Vec::with_capacity(self.amps.len());
        for c in self.configs() {
            let mut digits = self.digits(c);
            digits.reverse();
            let src = LocalConfig(encode(&digits, self.q));
            amps.extend_from_slice(self.vector(src));
        }
        RuleTable { amps, ..self.clone() }
    }

    /// Relabels states by `perm` on the input cells, the output
    /// components, or both.
    pub fn state_transpose(&self, side: Side, perm: &[usize]) -> Result<RuleTable> {
        if perm.len() != self.q {
            return Err(Error::InvalidPermutation);
        }
        let mut seen = vec![false; self.q];
        for &p in perm {
            if p >= self.q || core::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidPermutation);
            }
        }
        let permute_in = matches!(side, Side::Input | Side::Both);
        let permute_out = matches!(side, Side::Output | Side::Both);
        let mut amps = Vec::with_capacity(self.amps.len());
        for c in self.configs() {
            let src = if permute_in {
                let digits: Vec<usize> = self.digits(c).into_iter().map(|d| perm[d]).collect();
                LocalConfig(encode(&digits, self.q))
            } else {
                c
            };
            let v = self.vector(src);
            for i in 0..self.q {
                amps.push(if permute_out { v[perm[i]] } else { v[i] });
            }
        }
        Ok(RuleTable { amps, ..self.clone() })
    }

    /// `B_f`: configurations with some amplitude equal to 1.
    pub fn big_set(&self) -> BTreeSet<LocalConfig> {
        self.configs()
            .filter(|&c| self.vector(c).iter().any(|&a| approx_one(a, self.tolerance)))
            .collect()
    }

    /// The first output state whose amplitude equals 1, if any.
    pub fn deterministic_output(&self, c: LocalConfig) -> Option<usize> {
        self.vector(c).iter().position(|&a| approx_one(a, self.tolerance))
    }

    /// Every amplitude vector is a standard basis vector.
    pub fn is_deterministic(&self) -> bool {
        self.configs().all(|c| match self.deterministic_output(c) {
            Some(d) => self
                .vector(c)
                .iter()
                .enumerate()
                .all(|(i, &a)| i == d || approx_zero(a, self.tolerance)),
            None => false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Amplitude {
        Amplitude::new(re, im)
    }

    fn identity() -> RuleTable {
        RuleTable::deterministic(2, 2, DEFAULT_TOLERANCE, |d| d[1]).unwrap()
    }

    #[test]
    fn encoding_is_leftmost_significant() {
        assert_eq!(encode(&[1, 0, 1], 2), 5);
        assert_eq!(decode(5, 2, 3), vec![1, 0, 1]);
        let rule = RuleTable::deterministic(2, 3, DEFAULT_TOLERANCE, |d| d[1]).unwrap();
        assert_eq!(rule.parse_config("101").unwrap().index(), 5);
        assert_eq!(rule.config_string(LocalConfig::from_index(6)), "110");
    }

    #[test]
    fn identity_inner_products() {
        let rule = identity();
        let c00 = rule.parse_config("00").unwrap();
        let c01 = rule.parse_config("01").unwrap();
        assert_eq!(rule.inner(c00, c00).unwrap(), c(1.0, 0.0));
        assert_eq!(rule.inner(c00, c01).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn inner_conjugates_first_argument() {
        let rule = RuleTable::from_vectors(
            2,
            1,
            DEFAULT_TOLERANCE,
            &[vec![c(0.0, 1.0), c(0.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]],
        )
        .unwrap();
        let (a, b) = (LocalConfig::from_index(0), LocalConfig::from_index(1));
        // conj(i) * 1 = -i
        assert_eq!(rule.inner(a, b).unwrap(), c(0.0, -1.0));
        assert_eq!(rule.inner(b, a).unwrap(), c(0.0, 1.0));
    }

    #[test]
    fn out_of_range_config_is_rejected() {
        let rule = identity();
        let bad = LocalConfig::from_index(4);
        assert!(matches!(rule.inner(bad, bad), Err(Error::ConfigOutOfRange { .. })));
        assert!(rule.parse_config("012").is_err());
        assert!(rule.parse_config("02").is_err());
    }

    #[test]
    fn parity_of_identity_reads_first_cell() {
        let p = identity().parity_transform();
        let expected = RuleTable::deterministic(2, 2, DEFAULT_TOLERANCE, |d| d[0]).unwrap();
        assert_eq!(p, expected);
        assert_eq!(p.parity_transform(), identity());
    }

    #[test]
    fn output_transpose_rewrites_components() {
        let swapped = identity().state_transpose(Side::Output, &[1, 0]).unwrap();
        // (τ_out f)(i|i1 i2) = δ_{τ i, i2}
        for cfg in swapped.configs() {
            let d = swapped.digits(cfg);
            for i in 0..2 {
                let expected = if 1 - i == d[1] { 1.0 } else { 0.0 };
                assert_eq!(swapped.amplitude(i, cfg), c(expected, 0.0));
            }
        }
        assert_eq!(identity().state_transpose(Side::Both, &[0, 1]).unwrap(), identity());
        assert_eq!(
            identity().state_transpose(Side::Input, &[0, 0]),
            Err(Error::InvalidPermutation)
        );
    }

    #[test]
    fn big_set_uses_exact_one() {
        assert_eq!(identity().big_set().len(), 4);
        let rule = RuleTable::from_vectors(
            2,
            1,
            1e-9,
            &[vec![c(0.9, 0.0), c(0.1, 0.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]],
        )
        .unwrap();
        // modulus one with a phase is not "equal to 1"
        assert!(rule.big_set().is_empty());
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(RuleTable::new(1, 2, vec![], 1e-9), Err(Error::InvalidShape { .. })));
        assert!(matches!(RuleTable::new(2, 1, vec![c(0.0, 0.0); 3], 1e-9), Err(Error::TableSize { .. })));
        assert!(matches!(RuleTable::new(2, 1, vec![c(0.0, 0.0); 4], 0.0), Err(Error::InvalidTolerance(_))));
        let mut amps = vec![c(0.0, 0.0); 4];
        amps[3] = c(f64::NAN, 0.0);
        assert!(matches!(RuleTable::new(2, 1, amps, 1e-9), Err(Error::NonFinite { output: 1, .. })));
    }
}
