//! The rule file: `{"q", "k", "tolerance"?, "amplitudes": {"<config>": [[re, im], …]}}`.

use std::collections::BTreeMap;

use qca_core::rule::{decode, digits_to_string, encode, parse_digits};
use qca_core::{Amplitude, RuleTable, DEFAULT_TOLERANCE};
use serde::{Deserialize, Serialize};

use crate::{read_input, source_label, syntax_error, FormatError};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleFile {
    q: usize,
    k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tolerance: Option<f64>,
    amplitudes: BTreeMap<String, Vec<[f64; 2]>>,
}

/// Line of the first occurrence of `"key"` after the `"amplitudes"` key,
/// or 0 when it cannot be found.
fn key_line(text: &str, key: &str) -> usize {
    let start = text.find("\"amplitudes\"").unwrap_or(0);
    let needle = format!("\"{key}\"");
    text[start..]
        .find(&needle)
        .map(|off| text[..start + off].matches('\n').count() + 1)
        .unwrap_or(0)
}

fn top_line(text: &str, key: &str) -> usize {
    text.find(&format!("\"{key}\"")).map(|off| text[..off].matches('\n').count() + 1).unwrap_or(0)
}

pub fn parse_rule(text: &str, source_name: &str) -> Result<RuleTable, FormatError> {
    let file: RuleFile = serde_json::from_str(text).map_err(|e| syntax_error(source_name, e))?;
    let field = |line: usize, field: String, message: String| FormatError::Field {
        source_name: source_name.into(),
        line,
        field,
        message,
    };
    if file.q < 2 || file.k < 1 {
        return Err(field(top_line(text, "q"), "q, k".into(), format!("need q >= 2 and k >= 1, got q = {}, k = {}", file.q, file.k)));
    }
    let count = file
        .q
        .checked_pow(file.k as u32)
        .filter(|&n| n <= 1 << 24)
        .ok_or_else(|| field(top_line(text, "k"), "k".into(), format!("{}^{} configurations is too many", file.q, file.k)))?;
    let tolerance = file.tolerance.unwrap_or(DEFAULT_TOLERANCE);
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(field(top_line(text, "tolerance"), "tolerance".into(), "must be finite and positive".into()));
    }

    let mut amps: Vec<Option<&Vec<[f64; 2]>>> = vec![None; count];
    for (key, vector) in &file.amplitudes {
        let at = |message: String| field(key_line(text, key), format!("amplitudes.{key}"), message);
        let digits = parse_digits(key, file.q).map_err(|_| at(format!("not a configuration over {} states", file.q)))?;
        if digits.len() != file.k {
            return Err(at(format!("configuration has {} cells, expected {}", digits.len(), file.k)));
        }
        if vector.len() != file.q {
            return Err(at(format!("{} components, expected {}", vector.len(), file.q)));
        }
        amps[encode(&digits, file.q)] = Some(vector);
    }
    if let Some(missing) = amps.iter().position(Option::is_none) {
        let key = digits_to_string(&decode(missing, file.q, file.k));
        return Err(field(top_line(text, "amplitudes"), format!("amplitudes.{key}"), "missing configuration".into()));
    }
    let flat: Vec<Amplitude> =
        amps.into_iter().flatten().flat_map(|v| v.iter().map(|&[re, im]| Amplitude::new(re, im))).collect();
    Ok(RuleTable::new(file.q, file.k, flat, tolerance)?)
}

/// Reads a rule from a path, or standard input for `-`.
pub fn read_rule(path: &str) -> Result<RuleTable, FormatError> {
    parse_rule(&read_input(path)?, &source_label(path))
}

pub fn rule_to_json(rule: &RuleTable) -> String {
    let amplitudes = rule
        .configs()
        .map(|c| (rule.config_string(c), rule.vector(c).iter().map(|a| [a.re, a.im]).collect()))
        .collect();
    let tolerance = (rule.tolerance() != DEFAULT_TOLERANCE).then_some(rule.tolerance());
    let file = RuleFile { q: rule.q(), k: rule.k(), tolerance, amplitudes };
    serde_json::to_string_pretty(&file).expect("rule tables serialize")
}
