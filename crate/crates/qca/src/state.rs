//! State files: a JSON array of `q^N` pairs `[re, im]`.

use qca_core::oracle::StateVector;
use qca_core::Amplitude;

use crate::{read_input, source_label, syntax_error, FormatError};

pub fn parse_state(text: &str, source_name: &str, q: usize, sites: usize) -> Result<StateVector, FormatError> {
    let pairs: Vec<[f64; 2]> = serde_json::from_str(text).map_err(|e| syntax_error(source_name, e))?;
    let amps = pairs.into_iter().map(|[re, im]| Amplitude::new(re, im)).collect();
    Ok(StateVector::new(q, sites, amps)?)
}

pub fn read_state(path: &str, q: usize, sites: usize) -> Result<StateVector, FormatError> {
    parse_state(&read_input(path)?, &source_label(path), q, sites)
}

pub fn state_to_json(state: &StateVector) -> String {
    let pairs: Vec<[f64; 2]> = state.amplitudes().iter().map(|a| [a.re, a.im]).collect();
    serde_json::to_string(&pairs).expect("finite amplitudes serialize")
}
