//! Transfer matrices with `Z(t) = det(I − tA)` and the trace series
//! `Tr A(t) = −t Z'(t)/Z(t)`.
//!
//! The label monomials of acyclic `M`-paths between diagonal vertices of
//! `G2` are enumerated here too.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::debruijn::{GraphKind, WeightedDiGraph};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::rule::{pow, Amplitude, LocalConfig, RuleTable, DEFAULT_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// Every edge carries its inner-product weight.
    Raw,
    /// On `G2`: edges of the `G1` copy get weight 1, except self-loops which
    /// get 0. `M`-edges keep their weights.
    Simplified,
}

/// `A[i][j]` is the summed weight of the edges `i → j`.
pub fn transfer_matrix(g: &WeightedDiGraph, convention: Convention) -> Result<CMatrix> {
    if convention == Convention::Simplified && g.kind() == GraphKind::G1 {
        return Err(Error::Precondition(
            "the simplified convention applies to G2 only".into(),
        ));
    }
    let n = g.vertex_count();
    let mut a = CMatrix::zeros(n, n);
    for e in g.edges() {
        let w = match convention {
            Convention::Raw => e.weight,
            Convention::Simplified if e.in_m => e.weight,
            Convention::Simplified if e.source == e.target => Amplitude::new(0.0, 0.0),
            Convention::Simplified => Amplitude::new(1.0, 0.0),
        };
        a[(e.source, e.target)] += w;
    }
    Ok(a)
}

/// A polynomial in `t` with complex coefficients, lowest power first.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightPolynomial {
    coefficients: Vec<Amplitude>,
}

impl WeightPolynomial {
    /// Drops trailing coefficients whose modulus is at most `tol`.
    pub fn new(mut coefficients: Vec<Amplitude>, tol: f64) -> Self {
        while coefficients.last().is_some_and(|c| c.norm() <= tol) {
            coefficients.pop();
        }
        WeightPolynomial { coefficients }
    }

    pub fn coefficients(&self) -> &[Amplitude] {
        &self.coefficients
    }

    /// Coefficient of `t^n`; zero past the degree.
    pub fn coefficient(&self, n: usize) -> Amplitude {
        self.coefficients.get(n).copied().unwrap_or_default()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coefficients.len().checked_sub(1)
    }

    pub fn eval(&self, t: Amplitude) -> Amplitude {
        self.coefficients
            .iter()
            .rev()
            .fold(Amplitude::new(0.0, 0.0), |acc, &c| acc * t + c)
    }
}

impl fmt::Display for WeightPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coefficients.is_empty() {
            return f.write_str("0");
        }
        for (n, c) in self.coefficients.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({}{:+}i)", c.re, c.im)?;
            match n {
                0 => {}
                1 => f.write_str("t")?,
                _ => write!(f, "t^{n}")?,
            }
        }
        Ok(())
    }
}

/// `det(I − tA)` by Faddeev–LeVerrier. With `det(λI − A) = Σ c_k λ^{n−k}`,
/// `det(I − tA) = Σ c_k t^k`.
pub fn z_polynomial(a: &CMatrix) -> WeightPolynomial {
    assert!(a.is_square(), "transfer matrix must be square");
    let n = a.nrows();
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(Amplitude::new(1.0, 0.0));
    let mut m = CMatrix::zeros(n, n);
    for k in 1..=n {
        m = a * &m;
        for i in 0..n {
            m[(i, i)] += coeffs[k - 1];
        }
        let am = a * &m;
        coeffs.push(-am.trace() / k as f64);
    }
    let scale = coeffs.iter().map(|c| c.norm()).fold(1.0, f64::max);
    WeightPolynomial::new(coeffs, DEFAULT_TOLERANCE * scale)
}

/// Coefficients `t^0 … t^order` of `Tr A(t) = Σ_{n≥1} Tr(Aⁿ) tⁿ`, obtained by
/// dividing `−t Z'(t)` by `Z(t)` as power series.
pub fn trace_series(a: &CMatrix, order: usize) -> Result<WeightPolynomial> {
    if order == 0 {
        return Err(Error::Precondition("trace series order must be at least 1".into()));
    }
    let z = z_polynomial(a);
    if (z.coefficient(0) - Amplitude::new(1.0, 0.0)).norm() > DEFAULT_TOLERANCE {
        return Err(Error::Precondition("Z(0) must equal 1".into()));
    }
    let mut t = vec![Amplitude::new(0.0, 0.0); order + 1];
    for n in 1..=order {
        let mut acc = -(n as f64) * z.coefficient(n);
        for j in 1..=n {
            acc -= z.coefficient(j) * t[n - j];
        }
        t[n] = acc;
    }
    Ok(WeightPolynomial { coefficients: t })
}

/// A product of edge-weight labels `w_{αβ}`, each label stored as an
/// ordered pair `α ≤ β` of local configuration indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WeightMonomial {
    factors: Vec<(usize, usize)>,
}

impl WeightMonomial {
    pub fn new<I: IntoIterator<Item = (usize, usize)>>(labels: I) -> Self {
        let mut factors: Vec<(usize, usize)> =
            labels.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        factors.sort_unstable();
        WeightMonomial { factors }
    }

    pub fn factors(&self) -> &[(usize, usize)] {
        &self.factors
    }

    /// `Π ⟨⟨α|β⟩⟩` over the factors.
    pub fn evaluate(&self, rule: &RuleTable) -> Result<Amplitude> {
        let mut p = Amplitude::new(1.0, 0.0);
        for &(a, b) in &self.factors {
            p *= rule.inner(LocalConfig::from_index(a), LocalConfig::from_index(b))?;
        }
        Ok(p)
    }
}

impl fmt::Display for WeightMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        let mut i = 0;
        while i < self.factors.len() {
            let (a, b) = self.factors[i];
            let run = self.factors[i..].iter().take_while(|&&x| x == (a, b)).count();
            if a >= 10 || b >= 10 {
                write!(f, "w{a},{b}")?;
            } else {
                write!(f, "w{a}{b}")?;
            }
            if run > 1 {
                write!(f, "^{run}")?;
            }
            i += run;
        }
        Ok(())
    }
}

/// Label monomials of the paths of exactly `n` `M`-edges in `G2(Q,k)` that
/// start and end at diagonal vertices and pass only through distinct
/// off-diagonal vertices. Depends on the rule only through `q` and `k`.
pub fn path_monomials(rule: &RuleTable, n: usize) -> Result<Vec<WeightMonomial>> {
    if n == 0 {
        return Err(Error::Precondition("path length must be at least 1".into()));
    }
    let (q, k) = (rule.q(), rule.k());
    let v = pow(q, k - 1);
    let configs = rule.config_count();
    let source = |a: usize, b: usize| (a / q) * v + b / q;
    let target = |a: usize, b: usize| (a % v) * v + b % v;
    let diagonal = |x: usize| x / v == x % v;

    // out[x] lists the mismatched pairs leaving vertex x
    let mut out: Vec<Vec<(usize, usize)>> = vec![Vec::new(); v * v];
    for a in 0..configs {
        for b in 0..configs {
            if a != b {
                out[source(a, b)].push((a, b));
            }
        }
    }

    let mut found = BTreeSet::new();
    let mut on_path = vec![false; v * v];
    let mut labels: Vec<(usize, usize)> = Vec::with_capacity(n);
    let mut stack: Vec<(usize, usize)> = Vec::with_capacity(n + 1);
    for s in (0..v).map(|u| u * v + u) {
        // stack holds (vertex, next out-edge slot)
        stack.push((s, 0));
        while let Some(&mut (x, ref mut slot)) = stack.last_mut() {
            let Some(&(a, b)) = out[x].get(*slot) else {
                stack.pop();
                if !stack.is_empty() {
                    on_path[x] = false;
                    labels.pop();
                }
                continue;
            };
            *slot += 1;
            let y = target(a, b);
            let depth = labels.len() + 1;
            if diagonal(y) {
                if depth == n {
                    labels.push((a, b));
                    found.insert(WeightMonomial::new(labels.iter().copied()));
                    labels.pop();
                }
            } else if depth < n && !on_path[y] {
                on_path[y] = true;
                labels.push((a, b));
                stack.push((y, 0));
            }
        }
    }
    Ok(found.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::debruijn::build_g1;

    #[test]
    fn zero_matrix_has_unit_z() {
        let z = z_polynomial(&CMatrix::zeros(3, 3));
        assert_eq!(z.coefficients(), &[Amplitude::new(1.0, 0.0)]);
    }

    #[test]
    fn empty_graph_gives_zero_matrix() {
        let rule = RuleTable::deterministic(2, 2, DEFAULT_TOLERANCE, |d| d[1]).unwrap();
        let g = build_g1(&rule).filtered(crate::debruijn::EdgeFilter::Sector);
        let a = transfer_matrix(&g, Convention::Raw).unwrap();
        assert!(a.iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn display_uses_commas_for_wide_indices() {
        assert_eq!(WeightMonomial::new([(2, 1), (0, 4), (1, 2)]).to_string(), "w04w12^2");
        assert_eq!(WeightMonomial::new([(3, 12)]).to_string(), "w3,12");
    }
}
