//! Parameterized unitary rule families for `q = 2`, `k ∈ {2, 3}`, plus
//! general frame rules over `Q^j` prefixes.
//!
//! Patt's reversible `k = 4` rule lives here as well, together with the
//! quantization of reversible deterministic rules by a unitary rotation.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, CMatrix};
use crate::rule::{decode, digits_to_string, Amplitude, LocalConfig, RuleTable, DEFAULT_TOLERANCE};

/// Named families. The `m1` variants are parity transforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    F21,
    F2m1,
    F21_00,
    F2m1_00,
    F31,
    F30,
    F3m1,
    F31_000,
    F3m1_000,
    F31_000_111,
    Patt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    /// Real, any value; read modulo 2π where it is a phase.
    Angle,
    /// Real and strictly positive.
    Positive,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: ParamKind,
}

impl ParamSpec {
    /// Value used when a parameter is not supplied.
    pub fn default_value(&self) -> Amplitude {
        match self.kind {
            ParamKind::Angle => Amplitude::new(0.0, 0.0),
            ParamKind::Positive | ParamKind::Complex => Amplitude::new(1.0, 0.0),
        }
    }
}

const fn angle(name: &'static str) -> ParamSpec {
    ParamSpec { name, kind: ParamKind::Angle }
}
const fn complex(name: &'static str) -> ParamSpec {
    ParamSpec { name, kind: ParamKind::Complex }
}
const fn positive(name: &'static str) -> ParamSpec {
    ParamSpec { name, kind: ParamKind::Positive }
}

const F21_PARAMS: &[ParamSpec] = &[
    angle("alpha"),
    angle("beta"),
    angle("theta"),
    angle("phi1"),
    angle("phi2"),
    positive("rho"),
];
const F21_00_PARAMS: &[ParamSpec] = &[
    angle("alpha"),
    angle("beta"),
    angle("theta"),
    angle("phi1"),
    angle("phi3"),
    positive("rho"),
];
const F31_PARAMS: &[ParamSpec] = &[
    angle("theta"),
    angle("beta"),
    angle("chi"),
    complex("z1"),
    complex("z2"),
    complex("z3"),
    complex("z4"),
    complex("z5"),
    complex("z6"),
];
const F31_000_PARAMS: &[ParamSpec] = &[
    complex("z1"),
    angle("theta01"),
    angle("beta01"),
    angle("theta10"),
    angle("beta10"),
    angle("theta11"),
    angle("beta11"),
    complex("z010"),
    complex("z011"),
    angle("phi100"),
    angle("phi101"),
    angle("phi110"),
    angle("phi111"),
];
const F31_000_111_PARAMS: &[ParamSpec] = &[
    complex("z1"),
    angle("phi3"),
    angle("theta01"),
    angle("beta01"),
    complex("z010"),
    angle("phi011"),
    angle("theta10"),
    angle("beta10"),
    angle("phi100"),
    angle("phi101"),
];

impl Family {
    pub const ALL: [Family; 11] = [
        Family::F21,
        Family::F2m1,
        Family::F21_00,
        Family::F2m1_00,
        Family::F31,
        Family::F30,
        Family::F3m1,
        Family::F31_000,
        Family::F3m1_000,
        Family::F31_000_111,
        Family::Patt,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::F21 => "f21",
            Family::F2m1 => "f2m1",
            Family::F21_00 => "f21_00",
            Family::F2m1_00 => "f2m1_00",
            Family::F31 => "f31",
            Family::F30 => "f30",
            Family::F3m1 => "f3m1",
            Family::F31_000 => "f31_000",
            Family::F3m1_000 => "f3m1_000",
            Family::F31_000_111 => "f31_000_111",
            Family::Patt => "patt",
        }
    }

    pub fn k(self) -> usize {
        match self {
            Family::F21 | Family::F2m1 | Family::F21_00 | Family::F2m1_00 => 2,
            Family::Patt => 4,
            _ => 3,
        }
    }

    pub fn params(self) -> &'static [ParamSpec] {
        match self {
            Family::F21 | Family::F2m1 => F21_PARAMS,
            Family::F21_00 | Family::F2m1_00 => F21_00_PARAMS,
            Family::F31 | Family::F30 | Family::F3m1 => F31_PARAMS,
            Family::F31_000 | Family::F3m1_000 => F31_000_PARAMS,
            Family::F31_000_111 => F31_000_111_PARAMS,
            Family::Patt => &[],
        }
    }

    /// Number of real degrees of freedom.
    pub fn real_dimension(self) -> usize {
        self.params()
            .iter()
            .map(|p| if p.kind == ParamKind::Complex { 2 } else { 1 })
            .sum()
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown family {s:?}")))
    }
}

/// Named parameter values; real parameters are stored with zero imaginary part.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params {
    values: BTreeMap<String, Amplitude>,
}

impl Params {
    pub fn new() -> Self {
        Params::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.set(name, Amplitude::new(value, 0.0));
        self
    }

    pub fn with_complex(mut self, name: &str, value: Amplitude) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: Amplitude) {
        self.values.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<Amplitude> {
        self.values.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Amplitude)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// Parameters checked against a schema, with defaults filled in.
struct Resolved<'a> {
    params: &'a Params,
    schema: &'static [ParamSpec],
}

impl Resolved<'_> {
    fn new(family: Family, params: &Params) -> Result<Resolved<'_>> {
        let schema = family.params();
        for (name, value) in params.iter() {
            let Some(spec) = schema.iter().find(|p| p.name == name) else {
                return Err(Error::Parameter(format!("{family} has no parameter {name:?}")));
            };
            if !(value.re.is_finite() && value.im.is_finite()) {
                return Err(Error::Parameter(format!("{name} must be finite")));
            }
            match spec.kind {
                ParamKind::Complex => {}
                ParamKind::Angle if value.im == 0.0 => {}
                ParamKind::Positive if value.im == 0.0 && value.re > 0.0 => {}
                ParamKind::Angle => return Err(Error::Parameter(format!("{name} must be real"))),
                ParamKind::Positive => {
                    return Err(Error::Parameter(format!("{name} must be real and positive")))
                }
            }
        }
        Ok(Resolved { params, schema })
    }

    fn complex(&self, name: &str) -> Amplitude {
        let spec = self.schema.iter().find(|p| p.name == name).expect("name in schema");
        self.params.get(name).unwrap_or_else(|| spec.default_value())
    }

    fn real(&self, name: &str) -> f64 {
        self.complex(name).re
    }

    fn nonzero(&self, name: &str) -> Result<Amplitude> {
        let z = self.complex(name);
        if z.norm() == 0.0 {
            return Err(Error::Parameter(format!("{name} must be nonzero")));
        }
        Ok(z)
    }
}

fn c(re: f64, im: f64) -> Amplitude {
    Amplitude::new(re, im)
}

fn phase(x: f64) -> Amplitude {
    Amplitude::from_polar(1.0, x)
}

fn scale(s: Amplitude, v: [Amplitude; 2]) -> Vec<Amplitude> {
    vec![s * v[0], s * v[1]]
}

/// `(cos θ, e^{iβ} sin θ)` and `(−e^{−iβ} sin θ, cos θ)`.
fn orthonormal_pair(theta: f64, beta: f64) -> ([Amplitude; 2], [Amplitude; 2]) {
    let (s, co) = libm::sincos(theta);
    (
        [c(co, 0.0), phase(beta) * s],
        [-phase(-beta) * s, c(co, 0.0)],
    )
}

/// Checks `|product| = 1` for a norm constraint named `label`.
fn unit_modulus(label: &str, product: f64) -> Result<()> {
    if (product - 1.0).abs() > DEFAULT_TOLERANCE * 1e3 {
        return Err(Error::Parameter(format!("constraint {label} = 1 violated (value {product})")));
    }
    Ok(())
}

/// A request for one rule of a family.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilySpec {
    Named { family: Family, params: Params },
    Frame {
        q: usize,
        k: usize,
        j: usize,
        orientation: FrameOrientation,
        vectors: Vec<Vec<Amplitude>>,
    },
    Quantized { base: RuleTable, unitary: CMatrix },
}

pub fn make_family(spec: &FamilySpec) -> Result<RuleTable> {
    match spec {
        FamilySpec::Named { family, params } => named_family(*family, params),
        FamilySpec::Frame { q, k, j, orientation, vectors } => {
            frame_rule(*q, *k, *j, *orientation, vectors)
        }
        FamilySpec::Quantized { base, unitary } => quantize(base, unitary),
    }
}

/// One rule of a named family. Missing parameters take their defaults
/// (angles 0, moduli and complex parameters 1).
pub fn named_family(family: Family, params: &Params) -> Result<RuleTable> {
    let p = Resolved::new(family, params)?;
    match family {
        Family::F21 => f21(&p),
        Family::F2m1 => f21(&p).map(|r| r.parity_transform()),
        Family::F21_00 => f21_00(&p),
        Family::F2m1_00 => f21_00(&p).map(|r| r.parity_transform()),
        Family::F31 => f3_frame(&p, |d| d[2]),
        Family::F30 => f3_frame(&p, |d| d[1]),
        Family::F3m1 => f3_frame(&p, |d| d[2]).map(|r| r.parity_transform()),
        Family::F31_000 => f31_000(&p),
        Family::F3m1_000 => f31_000(&p).map(|r| r.parity_transform()),
        Family::F31_000_111 => f31_000_111(&p),
        Family::Patt => Ok(patt()),
    }
}

/// Rows `00, 01, 10, 11`, with `|00⟩⟩ = (e^{iα}cos θ, i e^{iβ} sin θ)`,
/// `|11⟩⟩ = (i e^{−iβ} sin θ, e^{−iα} cos θ)`, `|01⟩⟩ = e^{iφ1}ρ|11⟩⟩` and
/// `|10⟩⟩ = e^{iφ2}ρ⁻¹|00⟩⟩`.
fn f21(p: &Resolved) -> Result<RuleTable> {
    let (alpha, beta, theta, rho) = (p.real("alpha"), p.real("beta"), p.real("theta"), p.real("rho"));
    let (s, co) = libm::sincos(theta);
    let v00 = [phase(alpha) * co, c(0.0, 1.0) * phase(beta) * s];
    let v11 = [c(0.0, 1.0) * phase(-beta) * s, phase(-alpha) * co];
    RuleTable::from_vectors(
        2,
        2,
        DEFAULT_TOLERANCE,
        &[
            scale(c(1.0, 0.0), v00),
            scale(phase(p.real("phi1")) * rho, v11),
            scale(phase(p.real("phi2")) / rho, v00),
            scale(c(1.0, 0.0), v11),
        ],
    )
}

fn f21_00(p: &Resolved) -> Result<RuleTable> {
    let (alpha, beta, theta, rho) = (p.real("alpha"), p.real("beta"), p.real("theta"), p.real("rho"));
    let (s, co) = libm::sincos(theta);
    RuleTable::from_vectors(
        2,
        2,
        DEFAULT_TOLERANCE,
        &[
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), phase(p.real("phi1")) * rho],
            vec![phase(alpha) * co / rho, c(0.0, 1.0) * phase(beta) * s / rho],
            scale(
                phase(p.real("phi3")),
                [c(0.0, 1.0) * phase(-beta) * s, phase(-alpha) * co],
            ),
        ],
    )
}

/// `|000⟩⟩` and `|111⟩⟩` orthonormal; every other vector is `z_n` times one
/// of them, chosen by the cell `class` picks.
fn f3_frame(p: &Resolved, class: fn(&[usize]) -> usize) -> Result<RuleTable> {
    let z: Vec<Amplitude> = (1..=6).map(|n| p.complex(&format!("z{n}"))).collect();
    let r = |n: usize| z[n - 1].norm();
    unit_modulus("|z2 z5|", r(2) * r(5))?;
    unit_modulus("|z1 z2 z4|", r(1) * r(2) * r(4))?;
    unit_modulus("|z3 z5 z6|", r(3) * r(5) * r(6))?;
    let (e0, e1) = orthonormal_pair(p.real("theta"), p.real("beta"));
    let e1 = [e1[0] * phase(p.real("chi")), e1[1] * phase(p.real("chi"))];
    let basis = [e0, e1];
    let vectors: Vec<Vec<Amplitude>> = (0..8)
        .map(|idx| {
            let d = decode(idx, 2, 3);
            let s = if idx == 0 || idx == 7 { c(1.0, 0.0) } else { z[idx - 1] };
            scale(s, basis[class(&d)])
        })
        .collect();
    RuleTable::from_vectors(2, 3, DEFAULT_TOLERANCE, &vectors)
}

/// `|000⟩⟩ = (1,0)`, `|001⟩⟩ = (0,z1)`, and for `α ∈ {01,10,11}` an
/// orthogonal pair `|α0⟩⟩ ⊥ |α1⟩⟩`. Moduli of `|100⟩⟩`, `|101⟩⟩`,
/// `|110⟩⟩`, `|111⟩⟩` are fixed by the `G1` cycle constraints.
fn f31_000(p: &Resolved) -> Result<RuleTable> {
    let z1 = p.nonzero("z1")?;
    let z010 = p.nonzero("z010")?;
    let z011 = p.nonzero("z011")?;
    let (r1, r010, r011) = (z1.norm(), z010.norm(), z011.norm());
    let pair = |a: &str| orthonormal_pair(p.real(&format!("theta{a}")), p.real(&format!("beta{a}")));
    let (u01, w01) = pair("01");
    let (u10, w10) = pair("10");
    let (u11, w11) = pair("11");
    let polar = |r: f64, name: &str| Amplitude::from_polar(r, p.real(name));
    RuleTable::from_vectors(
        2,
        3,
        DEFAULT_TOLERANCE,
        &[
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), z1],
            scale(z010, u01),
            scale(z011, w01),
            scale(polar(1.0 / (r1 * r010), "phi100"), u10),
            scale(polar(1.0 / r010, "phi101"), w10),
            scale(polar(r010 / r011, "phi110"), u11),
            scale(polar(1.0, "phi111"), w11),
        ],
    )
}

/// `|000⟩⟩ = (1,0)`, `|111⟩⟩ = (0,1)`, `|001⟩⟩ = (0,z1)`, `|110⟩⟩ = (z3,0)`,
/// with `|01i⟩⟩` and `|10i⟩⟩` orthogonal pairs. The moduli follow from the
/// cycle constraints and the unit weight of the path `00 → 01 → 11`.
fn f31_000_111(p: &Resolved) -> Result<RuleTable> {
    let z1 = p.nonzero("z1")?;
    let z010 = p.nonzero("z010")?;
    let (r1, r2) = (z1.norm(), z010.norm());
    let (u01, w01) = orthonormal_pair(p.real("theta01"), p.real("beta01"));
    let (u10, w10) = orthonormal_pair(p.real("theta10"), p.real("beta10"));
    let polar = |r: f64, name: &str| Amplitude::from_polar(r, p.real(name));
    RuleTable::from_vectors(
        2,
        3,
        DEFAULT_TOLERANCE,
        &[
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), z1],
            scale(z010, u01),
            scale(polar(1.0 / r1, "phi011"), w01),
            scale(polar(1.0 / (r1 * r2), "phi100"), u10),
            scale(polar(1.0 / r2, "phi101"), w10),
            vec![polar(r1 * r2, "phi3"), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0)],
        ],
    )
}

/// Patt's reversible `k = 4` rule: the output flips `i_2` exactly when
/// `i_1 = i_4 = 0` and `i_3 = 1`.
pub fn patt() -> RuleTable {
    RuleTable::deterministic(2, 4, DEFAULT_TOLERANCE, |d| {
        if d[0] == 0 && d[3] == 0 && d[2] == 1 {
            1 - d[1]
        } else {
            d[1]
        }
    })
    .expect("valid shape")
}

/// Which end of the configuration selects the frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameOrientation {
    /// Frame `γ = i_1…i_j`, class `i_{j+1}`.
    Leading,
    /// The parity image: frame `γ = i_{k−j+1}…i_k`, class `i_{k−j}`.
    Trailing,
}

/// Builds the rule with the given amplitude vectors (one per local
/// configuration, in index order) after checking that, within every frame,
/// vectors of different classes are orthogonal.
pub fn frame_rule(
    q: usize,
    k: usize,
    j: usize,
    orientation: FrameOrientation,
    vectors: &[Vec<Amplitude>],
) -> Result<RuleTable> {
    if !(0 < j && j < k) {
        return Err(Error::Precondition(format!("frame prefix length j = {j} needs 0 < j < k = {k}")));
    }
    let rule = RuleTable::from_vectors(q, k, DEFAULT_TOLERANCE, vectors)?;
    let key = |c: LocalConfig| -> (Vec<usize>, usize) {
        let d = rule.digits(c);
        match orientation {
            FrameOrientation::Leading => (d[..j].to_vec(), d[j]),
            FrameOrientation::Trailing => (d[k - j..].to_vec(), d[k - j - 1]),
        }
    };
    let mut frames: BTreeMap<Vec<usize>, Vec<(usize, LocalConfig)>> = BTreeMap::new();
    for cfg in rule.configs() {
        let (gamma, class) = key(cfg);
        frames.entry(gamma).or_default().push((class, cfg));
    }
    for (gamma, members) in &frames {
        for (x, &(ca, a)) in members.iter().enumerate() {
            for &(cb, b) in &members[x + 1..] {
                if ca == cb {
                    continue;
                }
                let ip = rule.inner(a, b)?;
                let bound = rule.tolerance() * rule.inner(a, a)?.re.max(rule.inner(b, b)?.re).max(1.0);
                if ip.norm() > bound {
                    return Err(Error::Parameter(format!(
                        "vectors of {} and {} in frame {} are not orthogonal (|<<a|b>>| = {:.3e})",
                        rule.config_string(a),
                        rule.config_string(b),
                        digits_to_string(gamma),
                        ip.norm()
                    )));
                }
            }
        }
    }
    Ok(rule)
}

/// `f'(i|λ) = U[i, d(λ)]`, where `d(λ)` is the output of the deterministic
/// rule `base`.
pub fn quantize(base: &RuleTable, unitary: &CMatrix) -> Result<RuleTable> {
    let q = base.q();
    if unitary.shape() != (q, q) {
        return Err(Error::DimensionMismatch(format!(
            "rotation is {}x{}, expected {q}x{q}",
            unitary.nrows(),
            unitary.ncols()
        )));
    }
    if !base.is_deterministic() {
        return Err(Error::Precondition("quantization needs a deterministic rule".into()));
    }
    let defect = max_abs_diff(&(unitary.adjoint() * unitary), &CMatrix::identity(q, q));
    if defect > base.tolerance() {
        return Err(Error::Parameter(format!("rotation is not unitary (defect {defect:.3e})")));
    }
    RuleTable::from_fn(q, base.k(), base.tolerance(), |digits, i| {
        let c = LocalConfig::from_index(crate::rule::encode(digits, q));
        unitary[(i, base.deterministic_output(c).expect("deterministic"))]
    })
}

