//! Ground truth on the periodic lattice `Z_N`. The dense global evolution
//! matrix gives the unitarity defect; states evolve matrix-free.
//!
//! Configurations are indexed base `q` with site 0 most significant. The
//! amplitude `F_{σ'σ}` is `Π_x f(σ'_x | σ_{x+e_1}…σ_{x+e_k})` with sites
//! taken mod `N`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, CMatrix};
use crate::rule::{approx_eq, pow, Amplitude, RuleTable};

/// Largest configuration space for a dense global matrix.
pub const DEFAULT_STATE_CAP: usize = 4096;

/// Largest working space `q^{N+k-1}` for matrix-free evolution.
pub const SIMULATION_CAP: usize = 1 << 22;

/// The neighborhood `E = {start, …, start + k − 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighborhoodOffsets {
    pub start: isize,
    pub k: usize,
}

impl NeighborhoodOffsets {
    pub fn new(start: isize, k: usize) -> Self {
        NeighborhoodOffsets { start, k }
    }

    /// `E = {0, …, k − 1}`.
    pub fn standard(k: usize) -> Self {
        NeighborhoodOffsets { start: 0, k }
    }

    pub fn offsets(&self) -> impl Iterator<Item = isize> + '_ {
        (0..self.k as isize).map(move |j| self.start + j)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalMatrix {
    pub sites: usize,
    pub q: usize,
    /// Row `σ'`, column `σ`.
    pub matrix: CMatrix,
}

fn check_offsets(rule: &RuleTable, e: &NeighborhoodOffsets) -> Result<()> {
    if e.k != rule.k() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "neighborhood of size {} for a rule with k = {}",
            e.k,
            rule.k()
        )));
    }
    Ok(())
}

fn state_count(q: usize, sites: usize, cap: usize) -> Result<usize> {
    if sites == 0 {
        return Err(Error::Precondition("the lattice needs at least one site".into()));
    }
    match q.checked_pow(sites as u32) {
        Some(n) if n <= cap => Ok(n),
        _ => Err(Error::StateCapExceeded { states: q.saturating_pow(sites as u32), cap }),
    }
}

pub fn global_matrix(rule: &RuleTable, sites: usize, e: &NeighborhoodOffsets) -> Result<GlobalMatrix> {
    global_matrix_with_cap(rule, sites, e, DEFAULT_STATE_CAP)
}

/// Dense `F`; column `σ` is the Kronecker product of the amplitude vectors
/// of the `N` windows of `σ`.
pub fn global_matrix_with_cap(
    rule: &RuleTable,
    sites: usize,
    e: &NeighborhoodOffsets,
    cap: usize,
) -> Result<GlobalMatrix> {
    check_offsets(rule, e)?;
    let q = rule.q();
    let dim = state_count(q, sites, cap)?;
    let mut matrix = CMatrix::zeros(dim, dim);
    let mut window = vec![0usize; rule.k()];
    let mut column = Vec::with_capacity(dim);
    let mut scratch = Vec::with_capacity(dim);
    for col in 0..dim {
        let sigma = crate::rule::decode(col, q, sites);
        column.clear();
        column.push(Amplitude::new(1.0, 0.0));
        for x in 0..sites {
            for (slot, off) in window.iter_mut().zip(e.offsets()) {
                *slot = sigma[(x as isize + off).rem_euclid(sites as isize) as usize];
            }
            let v = rule.vector(rule.config(&window)?);
            scratch.clear();
            scratch.extend(column.iter().flat_map(|&a| v.iter().map(move |&b| a * b)));
            core::mem::swap(&mut column, &mut scratch);
        }
        for (row, &a) in column.iter().enumerate() {
            matrix[(row, col)] = a;
        }
    }
    Ok(GlobalMatrix { sites, q, matrix })
}

/// `max |(F†F − I)_{ij}|`.
pub fn unitarity_defect(f: &GlobalMatrix) -> f64 {
    let gram = f.matrix.adjoint() * &f.matrix;
    max_abs_diff(&gram, &CMatrix::identity(gram.nrows(), gram.ncols()))
}

/// A vector in the configuration space of `Z_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    q: usize,
    sites: usize,
    amps: Vec<Amplitude>,
}

impl StateVector {
    pub fn new(q: usize, sites: usize, amps: Vec<Amplitude>) -> Result<Self> {
        let dim = state_count(q, sites, usize::MAX)?;
        if amps.len() != dim {
            return Err(Error::DimensionMismatch(alloc::format!(
                "state has {} amplitudes, expected {q}^{sites} = {dim}",
                amps.len()
            )));
        }
        if amps.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::Precondition("state has a non-finite amplitude".into()));
        }
        Ok(StateVector { q, sites, amps })
    }

    /// The basis state `|σ⟩` for the configuration with the given index.
    pub fn basis(q: usize, sites: usize, index: usize) -> Result<Self> {
        let dim = state_count(q, sites, usize::MAX)?;
        if index >= dim {
            return Err(Error::ConfigOutOfRange { index, count: dim });
        }
        let mut amps = vec![Amplitude::new(0.0, 0.0); dim];
        amps[index] = Amplitude::new(1.0, 0.0);
        Ok(StateVector { q, sites, amps })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sqr())
    }
}

/// `|φ_σ|²` for every configuration; the state must have unit norm within
/// `tolerance`.
pub fn probabilities(state: &StateVector, tolerance: f64) -> Result<Vec<f64>> {
    let total = state.norm_sqr();
    if (total - 1.0).abs() > tolerance {
        return Err(Error::Unnormalized(total));
    }
    Ok(state.amps.iter().map(|a| a.norm_sqr()).collect())
}

/// Digit weights for the working layout: `N` site slots (site 0 most
/// significant) followed by `k − 1` buffer slots.
struct Layout {
    q: usize,
    site_w: Vec<usize>,
    extra_w: Vec<usize>,
    len: usize,
}

impl Layout {
    fn new(q: usize, sites: usize, extra: usize) -> Result<Self> {
        let len = q
            .checked_pow((sites + extra) as u32)
            .filter(|&n| n <= SIMULATION_CAP)
            .ok_or(Error::StateCapExceeded { states: q.saturating_pow((sites + extra) as u32), cap: SIMULATION_CAP })?;
        let site_w = (0..sites).map(|x| pow(q, sites - 1 - x + extra)).collect();
        let extra_w = (0..extra).map(|j| pow(q, extra - 1 - j)).collect();
        Ok(Layout { q, site_w, extra_w, len })
    }

    #[inline]
    fn site(&self, idx: usize, x: usize) -> usize {
        (idx / self.site_w[x]) % self.q
    }

    #[inline]
    fn buf(&self, idx: usize, j: usize) -> usize {
        (idx / self.extra_w[j]) % self.q
    }
}

/// `F v` for `E = {0, …, k−1}`. Sites are updated left to right; a copy of
/// `σ_0…σ_{k-2}` in the buffer supplies the wrapped inputs of the last
/// windows and is summed out at the end.
fn apply_forward(rule: &RuleTable, sites: usize, v: &[Amplitude]) -> Result<Vec<Amplitude>> {
    let (q, k) = (rule.q(), rule.k());
    let lay = Layout::new(q, sites, k - 1)?;
    let zero = Amplitude::new(0.0, 0.0);
    let mut cur = vec![zero; lay.len];
    for (sigma, &a) in v.iter().enumerate() {
        let mut idx = sigma * pow(q, k - 1);
        for j in 0..k - 1 {
            let src = (sigma / pow(q, sites - 1 - (j % sites))) % q;
            idx += src * lay.extra_w[j];
        }
        cur[idx] += a;
    }
    let mut next = vec![zero; lay.len];
    let mut window = vec![0usize; k];
    for x in 0..sites {
        next.iter_mut().for_each(|a| *a = zero);
        for (idx, &a) in cur.iter().enumerate() {
            if a == zero {
                continue;
            }
            for (j, slot) in window.iter_mut().enumerate() {
                let s = x + j;
                *slot = if s < sites { lay.site(idx, s) } else { lay.buf(idx, s - sites) };
            }
            let base = idx - window[0] * lay.site_w[x];
            let amps = rule.vector(crate::rule::LocalConfig::from_index(crate::rule::encode(&window, q)));
            for (o, &f) in amps.iter().enumerate() {
                next[base + o * lay.site_w[x]] += a * f;
            }
        }
        core::mem::swap(&mut cur, &mut next);
    }
    let block = pow(q, k - 1);
    Ok(cur.chunks(block).map(|c| c.iter().sum()).collect())
}

/// `F† w` for `E = {0, …, k−1}`. Output sites are summed out left to
/// right; the buffer carries the inputs `σ_x…σ_{x+k-2}` still needed, and
/// each step introduces `σ_{x+k-1}` as a new index (or reads it from its
/// slot once the window wraps).
/// Needs `N ≥ k`.
fn apply_adjoint(rule: &RuleTable, sites: usize, w: &[Amplitude]) -> Result<Vec<Amplitude>> {
    let (q, k) = (rule.q(), rule.k());
    let lay = Layout::new(q, sites, k - 1)?;
    let zero = Amplitude::new(0.0, 0.0);
    let block = pow(q, k - 1);
    let mut cur = vec![zero; lay.len];
    for (sigma, &a) in w.iter().enumerate() {
        for b in 0..block {
            cur[sigma * block + b] = a;
        }
    }
    let mut next = vec![zero; lay.len];
    let mut window = vec![0usize; k];
    for x in 0..sites {
        next.iter_mut().for_each(|a| *a = zero);
        let wrap = x + k > sites;
        for (idx, &a) in cur.iter().enumerate() {
            if a == zero {
                continue;
            }
            let out = lay.site(idx, x);
            for (j, slot) in window[..k - 1].iter_mut().enumerate() {
                *slot = lay.buf(idx, j);
            }
            let choices = if wrap { 1 } else { q };
            for c in 0..choices {
                window[k - 1] = if wrap { lay.site(idx, x + k - 1 - sites) } else { c };
                let f = rule.amplitude_at(out, &window).conj();
                if f == zero {
                    continue;
                }
                // slot x takes σ_x, the buffer shifts left and takes the new input
                let mut target = idx - out * lay.site_w[x] + window[0] * lay.site_w[x];
                target -= idx % block;
                for j in 0..k - 1 {
                    target += window[j + 1] * lay.extra_w[j];
                }
                next[target] += a * f;
            }
        }
        core::mem::swap(&mut cur, &mut next);
    }
    Ok(cur.chunks(block).map(|c| c.iter().sum()).collect())
}

/// `(F_E v)(σ') = (F_0 v)(ρσ')` with `(ρσ')_y = σ'_{y−s}`.
fn shift_index(q: usize, sites: usize, index: usize, s: isize) -> usize {
    let digits = crate::rule::decode(index, q, sites);
    let moved: Vec<usize> = (0..sites)
        .map(|y| digits[(y as isize - s).rem_euclid(sites as isize) as usize])
        .collect();
    crate::rule::encode(&moved, q)
}

fn check_state(rule: &RuleTable, sites: usize, state: &StateVector) -> Result<()> {
    if state.q != rule.q() || state.sites != sites {
        return Err(Error::DimensionMismatch(alloc::format!(
            "state for q = {}, N = {} used with q = {}, N = {sites}",
            state.q,
            state.sites,
            rule.q()
        )));
    }
    Ok(())
}

/// One application of `F` without materializing it.
pub fn apply(rule: &RuleTable, e: &NeighborhoodOffsets, state: &StateVector) -> Result<StateVector> {
    check_offsets(rule, e)?;
    let (q, sites) = (state.q, state.sites);
    check_state(rule, sites, state)?;
    let out = apply_forward(rule, sites, &state.amps)?;
    let amps = if e.start == 0 {
        out
    } else {
        (0..out.len()).map(|i| out[shift_index(q, sites, i, e.start)]).collect()
    };
    Ok(StateVector { q, sites, amps })
}

/// One application of `F†` without materializing it.
pub fn apply_dagger(rule: &RuleTable, e: &NeighborhoodOffsets, state: &StateVector) -> Result<StateVector> {
    check_offsets(rule, e)?;
    let (q, sites) = (state.q, state.sites);
    check_state(rule, sites, state)?;
    let w: Vec<Amplitude> = if e.start == 0 {
        state.amps.clone()
    } else {
        (0..state.amps.len()).map(|i| state.amps[shift_index(q, sites, i, -e.start)]).collect()
    };
    let amps = if sites >= rule.k() {
        apply_adjoint(rule, sites, &w)?
    } else {
        // windows wrap more than once; tiny lattices go through the dense matrix
        let f = global_matrix(rule, sites, &NeighborhoodOffsets::standard(rule.k()))?;
        let v = CMatrix::from_column_slice(w.len(), 1, &w);
        (f.matrix.adjoint() * v).iter().copied().collect()
    };
    Ok(StateVector { q, sites, amps })
}

/// `F^steps` applied to `state`.
pub fn evolve(rule: &RuleTable, sites: usize, state: &StateVector, steps: usize) -> Result<StateVector> {
    evolve_with(rule, &NeighborhoodOffsets::standard(rule.k()), sites, state, steps)
}

pub fn evolve_with(
    rule: &RuleTable,
    e: &NeighborhoodOffsets,
    sites: usize,
    state: &StateVector,
    steps: usize,
) -> Result<StateVector> {
    check_state(rule, sites, state)?;
    let mut s = state.clone();
    for _ in 0..steps {
        s = apply(rule, e, &s)?;
    }
    Ok(s)
}

/// `max_v ‖F†F v − v‖ / ‖v‖` over the given vectors.
pub fn defect_on_vectors(rule: &RuleTable, e: &NeighborhoodOffsets, vectors: &[StateVector]) -> Result<f64> {
    let mut worst = 0.0f64;
    for v in vectors {
        let back = apply_dagger(rule, e, &apply(rule, e, v)?)?;
        let diff: f64 = back.amps.iter().zip(&v.amps).map(|(a, b)| (a - b).norm_sqr()).sum();
        let norm = v.norm();
        if norm > 0.0 {
            worst = worst.max(libm::sqrt(diff) / norm);
        }
    }
    Ok(worst)
}

/// Every column has exactly one entry equal to 1 and the rest 0.
pub fn is_permutation_matrix(f: &GlobalMatrix, tolerance: f64) -> bool {
    let one = Amplitude::new(1.0, 0.0);
    let zero = Amplitude::new(0.0, 0.0);
    let n = f.matrix.nrows();
    let mut hit = vec![false; n];
    for col in 0..f.matrix.ncols() {
        let mut ones = 0;
        for (row, seen) in hit.iter_mut().enumerate() {
            let a = f.matrix[(row, col)];
            if approx_eq(a, one, tolerance) {
                ones += 1;
                if core::mem::replace(seen, true) {
                    return false;
                }
            } else if !approx_eq(a, zero, tolerance) {
                return false;
            }
        }
        if ones != 1 {
            return false;
        }
    }
    true
}
