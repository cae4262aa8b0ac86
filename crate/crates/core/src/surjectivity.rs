//! Surjectivity on the infinite lattice. Restricted and reduced operators
//! between deterministic ends factor through small determinants, which
//! turns surjectivity into finitely many non-vanishing conditions.
//!
//! Neighborhoods are `E = {0,…,k-1}` throughout. For `λ, ρ, ρ' ∈ D_f` the
//! restricted operator `F_n` maps interiors `α ∈ Q^n` of
//! `λ_1…λ_{k-1} α ρ_0…ρ_{k-2}` to interiors `α'` of `α' ρ'_0…ρ'_{k-2}`.
//! The reduced operator `F̃_n` drops the right border.

use alloc::vec::Vec;

use crate::debruijn::{deterministic_sector, DeterministicSector};
use crate::error::{Error, Result};
use crate::linalg::{det, CMatrix};
use crate::oracle::DEFAULT_STATE_CAP;
use crate::rule::{approx_eq, approx_one, approx_zero, decode, pow, Amplitude, LocalConfig, RuleTable};
use crate::unitarity::{ConditionId, ConstraintReport, Witness};

/// `Φ^(γ)`: row `i` is the amplitude vector of `γ i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiMatrix {
    pub gamma: Vec<usize>,
    pub entries: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedOperator {
    pub lambda: LocalConfig,
    pub rho: LocalConfig,
    pub rho_prime: LocalConfig,
    pub n: usize,
    /// Rows `α'`, columns `α`, both base-`q` encoded.
    pub matrix: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedMatrix {
    pub lambda: LocalConfig,
    pub n: usize,
    pub matrix: CMatrix,
}

fn check_gamma(rule: &RuleTable, gamma: &[usize]) -> Result<()> {
    if gamma.len() + 1 != rule.k() || gamma.iter().any(|&g| g >= rule.q()) {
        return Err(Error::DimensionMismatch(alloc::format!(
            "gamma must be a word of length {} over {} states",
            rule.k() - 1,
            rule.q()
        )));
    }
    Ok(())
}

pub fn phi_matrix(rule: &RuleTable, gamma: &[usize]) -> Result<PhiMatrix> {
    check_gamma(rule, gamma)?;
    let q = rule.q();
    let mut word = gamma.to_vec();
    word.push(0);
    let entries = CMatrix::from_fn(q, q, |i, j| {
        let mut w = word.clone();
        w[gamma.len()] = i;
        rule.amplitude_at(j, &w)
    });
    Ok(PhiMatrix { gamma: gamma.to_vec(), entries })
}

/// Amplitude for `input` to produce `output` under the sliding window,
/// where `output.len() = input.len() − k + 1`.
fn window_product(rule: &RuleTable, input: &[usize], output: &[usize]) -> Amplitude {
    let k = rule.k();
    debug_assert_eq!(output.len() + k - 1, input.len());
    output
        .iter()
        .enumerate()
        .map(|(j, &o)| rule.amplitude_at(o, &input[j..j + k]))
        .product()
}

/// `⟨ρ'_0…ρ'_{k-2}|F|γ ρ_0…ρ_{k-2}⟩`.
pub fn bordered_scalar(rule: &RuleTable, gamma: &[usize], rho: LocalConfig, rho_prime: LocalConfig) -> Result<Amplitude> {
    check_gamma(rule, gamma)?;
    let k = rule.k();
    let mut input = gamma.to_vec();
    input.extend_from_slice(&rule.digits(rho)[..k - 1]);
    Ok(window_product(rule, &input, &rule.digits(rho_prime)[..k - 1]))
}

fn require_sector(sector: &DeterministicSector, c: LocalConfig, name: &str) -> Result<()> {
    if sector.contains(c) {
        Ok(())
    } else {
        Err(Error::Precondition(alloc::format!("{name} is not in the deterministic sector")))
    }
}

fn interior_dim(rule: &RuleTable, n: usize) -> Result<usize> {
    let q = rule.q();
    match q.checked_pow(n as u32) {
        Some(d) if d <= DEFAULT_STATE_CAP => Ok(d),
        _ => Err(Error::StateCapExceeded { states: q.saturating_pow(n as u32), cap: DEFAULT_STATE_CAP }),
    }
}

/// `F_n^{(λ,ρ')}`, built entry by entry from the window products.
pub fn restricted_f(
    rule: &RuleTable,
    lambda: LocalConfig,
    rho: LocalConfig,
    rho_prime: LocalConfig,
    n: usize,
) -> Result<RestrictedOperator> {
    for c in [lambda, rho, rho_prime] {
        rule.check(c)?;
    }
    let sector = deterministic_sector(rule);
    require_sector(&sector, lambda, "lambda")?;
    require_sector(&sector, rho, "rho")?;
    require_sector(&sector, rho_prime, "rho'")?;
    let (q, k) = (rule.q(), rule.k());
    let rp = rule.digits(rho_prime);
    if !approx_one(rule.amplitude(rp[k - 1], rho), rule.tolerance()) {
        return Err(Error::Precondition(alloc::format!(
            "f({}|{}) is not 1",
            rp[k - 1],
            rule.config_string(rho)
        )));
    }
    let dim = interior_dim(rule, n)?;
    let l = rule.digits(lambda);
    let r = rule.digits(rho);
    let matrix = CMatrix::from_fn(dim, dim, |row, col| {
        let mut input = l[1..].to_vec();
        input.extend(decode(col, q, n));
        input.extend_from_slice(&r[..k - 1]);
        let mut output = decode(row, q, n);
        output.extend_from_slice(&rp[..k - 1]);
        window_product(rule, &input, &output)
    });
    Ok(RestrictedOperator { lambda, rho, rho_prime, n, matrix })
}

/// `F̃_n` by the tensor recurrence from `F̃_0 = 1`.
pub fn reduced_f(rule: &RuleTable, lambda: LocalConfig, n: usize) -> Result<ReducedMatrix> {
    rule.check(lambda)?;
    require_sector(&deterministic_sector(rule), lambda, "lambda")?;
    interior_dim(rule, n)?;
    let (q, k) = (rule.q(), rule.k());
    let l = rule.digits(lambda);
    let mut m = CMatrix::from_element(1, 1, Amplitude::new(1.0, 0.0));
    for step in 0..n {
        let dim = m.nrows();
        let phis: Vec<CMatrix> = (0..dim)
            .map(|a| {
                let mut s = l[1..].to_vec();
                s.extend(decode(a, q, step));
                phi_matrix(rule, &s[s.len() - (k - 1)..]).map(|p| p.entries)
            })
            .collect::<Result<_>>()?;
        // (F̃_{n+1})_{α'j, αi} = (F̃_n)_{α'α} · Φ^{γ(α)}_{ij}
        m = CMatrix::from_fn(dim * q, dim * q, |row, col| {
            let (ap, j) = (row / q, row % q);
            let (a, i) = (col / q, col % q);
            m[(ap, a)] * phis[a][(i, j)]
        });
    }
    Ok(ReducedMatrix { lambda, n, matrix: m })
}

/// `F̃_n` straight from its definition, for cross-checking the recurrence.
pub fn reduced_f_direct(rule: &RuleTable, lambda: LocalConfig, n: usize) -> Result<CMatrix> {
    rule.check(lambda)?;
    let dim = interior_dim(rule, n)?;
    let q = rule.q();
    let l = rule.digits(lambda);
    Ok(CMatrix::from_fn(dim, dim, |row, col| {
        let mut input = l[1..].to_vec();
        input.extend(decode(col, q, n));
        window_product(rule, &input, &decode(row, q, n))
    }))
}

/// Pairs `(ρ, ρ')` of sector configurations with `f(ρ'_{k-1}|ρ) = 1`.
fn admissible_pairs(rule: &RuleTable, sector: &DeterministicSector) -> Vec<(LocalConfig, LocalConfig)> {
    let k = rule.k();
    let mut pairs = Vec::new();
    for &rho in sector.configs() {
        for &rho_prime in sector.configs() {
            let last = rule.digits(rho_prime)[k - 1];
            if approx_one(rule.amplitude(last, rho), rule.tolerance()) {
                pairs.push((rho, rho_prime));
            }
        }
    }
    pairs
}

/// Violations of the surjectivity conditions: a vanishing bordered scalar
/// for some admissible `(ρ, ρ')` and `γ`, or a singular `Φ^(γ)`.
///
/// The conditions fix the output window flush with the left end of the
/// input, so a rule whose light cone leans the other way fails them even
/// when it is surjective. Mirroring the lattice maps one case onto the
/// other, so the rule is accepted when either it or its parity transform
/// passes; reports always refer to `rule` itself.
pub fn check_surjectivity(rule: &RuleTable, sector: &DeterministicSector) -> Result<Vec<ConstraintReport>> {
    if sector.is_empty() {
        return Err(Error::NoDeterministicSector);
    }
    let direct = window_violations(rule, sector)?;
    if direct.is_empty() {
        return Ok(direct);
    }
    let mirrored = rule.parity_transform();
    let mirrored_sector = deterministic_sector(&mirrored);
    if !mirrored_sector.is_empty() && window_violations(&mirrored, &mirrored_sector)?.is_empty() {
        return Ok(Vec::new());
    }
    Ok(direct)
}

/// Neither quantity involves `λ`, so only the pairs `(ρ, ρ')` are walked.
/// A target end `ρ'` needs one preimage end, so the scalars only have to
/// be nonzero for some admissible `ρ`; when every candidate fails, all of
/// its zeros are reported.
fn window_violations(rule: &RuleTable, sector: &DeterministicSector) -> Result<Vec<ConstraintReport>> {
    let (q, k) = (rule.q(), rule.k());
    let eps = rule.tolerance();
    let cond = ConditionId::InfiniteSurjective;
    let pairs = admissible_pairs(rule, sector);
    let gammas: Vec<Vec<usize>> = (0..pow(q, k - 1)).map(|g| decode(g, q, k - 1)).collect();
    let mut reports = Vec::new();
    for &rho_prime in sector.configs() {
        let mut zeros = Vec::new();
        let mut covered = false;
        for &(rho, _) in pairs.iter().filter(|p| p.1 == rho_prime) {
            let before = zeros.len();
            for gamma in &gammas {
                let s = bordered_scalar(rule, gamma, rho, rho_prime)?;
                if approx_zero(s, eps) {
                    let witness = Witness::Scalar { gamma: gamma.clone(), rho, rho_prime };
                    zeros.push(ConstraintReport::new(cond, witness, s));
                }
            }
            if zeros.len() == before {
                covered = true;
                break;
            }
        }
        if !covered {
            reports.extend(zeros);
        }
    }
    if !pairs.is_empty() {
        for gamma in &gammas {
            let d = det(&phi_matrix(rule, gamma)?.entries);
            if d.norm() <= eps * q as f64 {
                reports.push(ConstraintReport::new(cond, Witness::PhiDeterminant { gamma: gamma.clone() }, d));
            }
        }
    }
    Ok(reports)
}

/// The column factor `c_n`: the product over interiors `α` of the bordered
/// scalar at the last `k-1` cells of `λ_1…λ_{k-1} α`.
pub fn column_factor(rule: &RuleTable, lambda: LocalConfig, rho: LocalConfig, rho_prime: LocalConfig, n: usize) -> Result<Amplitude> {
    let dim = interior_dim(rule, n)?;
    let (q, k) = (rule.q(), rule.k());
    let l = rule.digits(lambda);
    let mut c = Amplitude::new(1.0, 0.0);
    for a in 0..dim {
        let mut s = l[1..].to_vec();
        s.extend(decode(a, q, n));
        c *= bordered_scalar(rule, &s[s.len() - (k - 1)..], rho, rho_prime)?;
    }
    Ok(c)
}

/// The tensor factor `d_{n+1}`: the product over `α ∈ Q^n` of
/// `det Φ^(γ(α))`.
pub fn tensor_factor(rule: &RuleTable, lambda: LocalConfig, n: usize) -> Result<Amplitude> {
    let dim = interior_dim(rule, n)?;
    let (q, k) = (rule.q(), rule.k());
    let l = rule.digits(lambda);
    let mut d = Amplitude::new(1.0, 0.0);
    for a in 0..dim {
        let mut s = l[1..].to_vec();
        s.extend(decode(a, q, n));
        d *= det(&phi_matrix(rule, &s[s.len() - (k - 1)..])?.entries);
    }
    Ok(d)
}

/// Default bound on `n` for [`det_factorization_check`].
pub const DEFAULT_FACTORIZATION_BOUND: usize = 3;

/// Checks `det F_n = c_n · det F̃_n` and, for every `m < n`,
/// `det F̃_{m+1} = d_{m+1} · (det F̃_m)^q`. Determinants are compared with
/// tolerance `ε · dim · max(1, |rhs|)`.
pub fn det_factorization_check(
    rule: &RuleTable,
    lambda: LocalConfig,
    rho: LocalConfig,
    rho_prime: LocalConfig,
    n: usize,
) -> Result<bool> {
    if n > DEFAULT_FACTORIZATION_BOUND {
        return Err(Error::Precondition(alloc::format!(
            "n = {n} exceeds the factorization bound {DEFAULT_FACTORIZATION_BOUND}"
        )));
    }
    let eps = rule.tolerance();
    let close = |lhs: Amplitude, rhs: Amplitude, dim: usize| {
        approx_eq(lhs, rhs, eps * dim as f64 * rhs.norm().max(1.0))
    };
    let f = restricted_f(rule, lambda, rho, rho_prime, n)?;
    let reduced = reduced_f(rule, lambda, n)?;
    let c = column_factor(rule, lambda, rho, rho_prime, n)?;
    let dim = f.matrix.nrows();
    if !close(det(&f.matrix), c * det(&reduced.matrix), dim) {
        return Ok(false);
    }
    let q = rule.q() as i32;
    let mut prev = Amplitude::new(1.0, 0.0);
    for m in 0..n {
        let next = det(&reduced_f(rule, lambda, m + 1)?.matrix);
        let rhs = tensor_factor(rule, lambda, m)? * prev.powi(q);
        if !close(next, rhs, pow(rule.q(), m + 1)) {
            return Ok(false);
        }
        prev = next;
    }
    Ok(true)
}
