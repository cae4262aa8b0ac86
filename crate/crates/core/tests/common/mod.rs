#![allow(dead_code)]

use std::f64::consts::TAU;

use qca_core::families::{named_family, Family, Params};
use qca_core::{Amplitude, RuleTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn angle(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(0.0..TAU)
}

/// Angle with |cos| at least `margin`.
fn angle_with_cos(rng: &mut ChaCha8Rng, margin: f64) -> f64 {
    loop {
        let t = angle(rng);
        if t.cos().abs() >= margin {
            return t;
        }
    }
}

/// Modulus in [0.5, 2] at least `margin` away from 1.
fn modulus(rng: &mut ChaCha8Rng, margin: f64) -> f64 {
    loop {
        let r = rng.random_range(0.5..2.0);
        if (r - 1.0f64).abs() >= margin {
            return r;
        }
    }
}

fn polar(rng: &mut ChaCha8Rng, r: f64) -> Amplitude {
    Amplitude::from_polar(r, angle(rng))
}

fn random_polar(rng: &mut ChaCha8Rng, margin: f64) -> Amplitude {
    let r = modulus(rng, margin);
    polar(rng, r)
}

/// Random parameters inside the family's admissible region, kept at least
/// 0.1 away from the surjectivity exclusions and from moduli equal to 1.
pub fn sample_params(family: Family, rng: &mut ChaCha8Rng) -> Params {
    let mut p = Params::new();
    match family {
        Family::F21 | Family::F2m1 => {
            for name in ["alpha", "beta", "theta", "phi1", "phi2"] {
                p.set(name, angle(rng).into());
            }
            p.set("rho", modulus(rng, 0.0).into());
        }
        Family::F21_00 | Family::F2m1_00 => {
            for name in ["alpha", "beta", "phi1", "phi3"] {
                p.set(name, angle(rng).into());
            }
            p.set("theta", angle_with_cos(rng, 0.1).into());
            p.set("rho", modulus(rng, 0.1).into());
        }
        Family::F31 | Family::F30 | Family::F3m1 => {
            for name in ["theta", "beta", "chi"] {
                p.set(name, angle(rng).into());
            }
            let (r1, r2, r3) = (modulus(rng, 0.0), modulus(rng, 0.0), modulus(rng, 0.0));
            let r5 = 1.0 / r2;
            let r4 = 1.0 / (r1 * r2);
            let r6 = 1.0 / (r3 * r5);
            for (n, r) in [(1, r1), (2, r2), (3, r3), (4, r4), (5, r5), (6, r6)] {
                let z = polar(rng, r);
                p.set(&format!("z{n}"), z);
            }
        }
        Family::F31_000 | Family::F3m1_000 => {
            let z1 = random_polar(rng, 0.1);
            p.set("z1", z1);
            for a in ["01", "10", "11"] {
                p.set(&format!("theta{a}"), angle_with_cos(rng, 0.1).into());
                p.set(&format!("beta{a}"), angle(rng).into());
            }
            for name in ["z010", "z011"] {
                let z = random_polar(rng, 0.1);
                p.set(name, z);
            }
            for name in ["phi100", "phi101", "phi110", "phi111"] {
                p.set(name, angle(rng).into());
            }
        }
        Family::F31_000_111 => {
            let z1 = random_polar(rng, 0.1);
            p.set("z1", z1);
            let z010 = random_polar(rng, 0.1);
            p.set("z010", z010);
            for a in ["01", "10"] {
                p.set(&format!("theta{a}"), angle_with_cos(rng, 0.1).into());
                p.set(&format!("beta{a}"), angle(rng).into());
            }
            for name in ["phi3", "phi011", "phi100", "phi101"] {
                p.set(name, angle(rng).into());
            }
        }
        Family::Patt => {}
    }
    p
}

pub fn sample(family: Family, rng: &mut ChaCha8Rng) -> RuleTable {
    named_family(family, &sample_params(family, rng)).expect("sampled parameters are admissible")
}

/// Random complex vector with entries in the unit square.
pub fn random_vector(rng: &mut ChaCha8Rng, len: usize) -> Vec<Amplitude> {
    (0..len)
        .map(|_| Amplitude::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

/// Random q×q unitary from QR of a random complex matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, q: usize) -> qca_core::linalg::CMatrix {
    let m = qca_core::linalg::CMatrix::from_vec(q, q, random_vector(rng, q * q));
    m.qr().q()
}

/// Rule with every amplitude drawn at random.
pub fn random_rule(rng: &mut ChaCha8Rng, q: usize, k: usize) -> RuleTable {
    let n = q.pow(k as u32) * q;
    RuleTable::new(q, k, random_vector(rng, n), qca_core::DEFAULT_TOLERANCE).unwrap()
}
