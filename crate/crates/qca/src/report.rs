//! JSON form of a [`Verdict`]. Configurations are written as strings, so
//! the report carries `q` and `k` to read them back.

use qca_core::rule::{decode, digits_to_string, encode, parse_digits};
use qca_core::unitarity::{ConditionId, ConstraintReport, Mode, Verdict, Witness};
use qca_core::{Amplitude, Error, LocalConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    Cycle,
    Path,
    Scalar,
    PhiDeterminant,
}

/// One violated constraint. `witness` lists `"a|b"` edge pairs for cycles
/// and paths, `[γ, ρ, ρ']` for a vanishing scalar and `[γ]` for a
/// singular `Φ^(γ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub condition: String,
    pub witness_kind: WitnessKind,
    pub witness: Vec<String>,
    pub value: [f64; 2],
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub q: usize,
    pub k: usize,
    pub unitary: bool,
    pub mode: String,
    pub reports: Vec<ReportEntry>,
}

struct Codec {
    q: usize,
    k: usize,
}

impl Codec {
    fn config(&self, c: LocalConfig) -> String {
        digits_to_string(&decode(c.index(), self.q, self.k))
    }

    fn parse_config(&self, s: &str) -> Result<LocalConfig, Error> {
        let d = parse_digits(s, self.q)?;
        if d.len() != self.k {
            return Err(Error::InvalidConfig(s.into()));
        }
        Ok(LocalConfig::from_index(encode(&d, self.q)))
    }

    fn gamma(&self, s: &str) -> Result<Vec<usize>, Error> {
        parse_digits(s, self.q)
    }

    fn edges(&self, items: &[String]) -> Result<Vec<(LocalConfig, LocalConfig)>, Error> {
        items
            .iter()
            .map(|s| {
                let (a, b) = s.split_once('|').ok_or_else(|| Error::InvalidConfig(s.clone()))?;
                Ok((self.parse_config(a)?, self.parse_config(b)?))
            })
            .collect()
    }
}

impl VerdictReport {
    pub fn from_verdict(q: usize, k: usize, v: &Verdict) -> Self {
        let codec = Codec { q, k };
        let pair = |&(a, b): &(LocalConfig, LocalConfig)| format!("{}|{}", codec.config(a), codec.config(b));
        let reports = v
            .reports
            .iter()
            .map(|r| {
                let (witness_kind, witness) = match &r.witness {
                    Witness::Cycle(e) => (WitnessKind::Cycle, e.iter().map(pair).collect()),
                    Witness::Path(e) => (WitnessKind::Path, e.iter().map(pair).collect()),
                    Witness::Scalar { gamma, rho, rho_prime } => (
                        WitnessKind::Scalar,
                        vec![digits_to_string(gamma), codec.config(*rho), codec.config(*rho_prime)],
                    ),
                    Witness::PhiDeterminant { gamma } => (WitnessKind::PhiDeterminant, vec![digits_to_string(gamma)]),
                };
                ReportEntry {
                    condition: r.condition.as_str().into(),
                    witness_kind,
                    witness,
                    value: [r.value.re, r.value.im],
                    margin: r.margin,
                }
            })
            .collect();
        VerdictReport { q, k, unitary: v.unitary, mode: v.mode.as_str().into(), reports }
    }

    pub fn to_verdict(&self) -> Result<Verdict, Error> {
        let codec = Codec { q: self.q, k: self.k };
        let mode: Mode = self.mode.parse()?;
        let reports = self
            .reports
            .iter()
            .map(|r| {
                let witness = match (r.witness_kind, r.witness.as_slice()) {
                    (WitnessKind::Cycle, e) => Witness::Cycle(codec.edges(e)?),
                    (WitnessKind::Path, e) => Witness::Path(codec.edges(e)?),
                    (WitnessKind::Scalar, [g, rho, rho_prime]) => Witness::Scalar {
                        gamma: codec.gamma(g)?,
                        rho: codec.parse_config(rho)?,
                        rho_prime: codec.parse_config(rho_prime)?,
                    },
                    (WitnessKind::PhiDeterminant, [g]) => Witness::PhiDeterminant { gamma: codec.gamma(g)? },
                    _ => return Err(Error::Precondition(format!("malformed {:?} witness", r.witness_kind))),
                };
                Ok(ConstraintReport {
                    condition: r.condition.parse::<ConditionId>()?,
                    witness,
                    value: Amplitude::new(r.value[0], r.value[1]),
                    margin: r.margin,
                })
            })
            .collect::<Result<_, Error>>()?;
        Ok(Verdict { unitary: self.unitary, mode, reports })
    }
}
