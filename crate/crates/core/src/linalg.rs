//! Thin helpers over nalgebra's dense complex matrices.

use nalgebra::DMatrix;

use crate::rule::Amplitude;

pub type CMatrix = DMatrix<Amplitude>;

/// Determinant by LU with partial pivoting.
pub fn det(m: &CMatrix) -> Amplitude {
    assert!(m.is_square(), "determinant of a non-square matrix");
    if m.nrows() == 0 {
        return Amplitude::new(1.0, 0.0);
    }
    m.clone().lu().determinant()
}

/// Largest entry modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Largest entry modulus.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_of_small_matrices() {
        let i = Amplitude::new(0.0, 1.0);
        let m = CMatrix::from_row_slice(2, 2, &[i, 2.0 * i, 3.0 * i, 4.0 * i]);
        // i·4i − 2i·3i = −4 + 6
        let d = det(&m);
        assert!((d - Amplitude::new(2.0, 0.0)).norm() < 1e-12);
        assert_eq!(det(&CMatrix::zeros(0, 0)), Amplitude::new(1.0, 0.0));
    }
}
