use alloc::format;
use alloc::vec::Vec;
use rand::Rng;

use super::Matrix;
use crate::rng::SeededRng;
use crate::{Error, Result};

/// Half-width `√(6 / (fan_in + fan_out))` of the Glorot-uniform interval.
pub fn glorot_limit(fan_in: usize, fan_out: usize) -> f64 {
    libm::sqrt(6.0 / (fan_in + fan_out) as f64)
}

/// Glorot/Xavier uniform weights, shaped `fan_out × fan_in`.
pub fn glorot_init(fan_in: usize, fan_out: usize, rng: &mut SeededRng) -> Result<Matrix> {
    if fan_in == 0 || fan_out == 0 {
        return Err(Error::invalid(format!(
            "glorot init needs non-zero fans, got {fan_in}x{fan_out}"
        )));
    }
    let limit = glorot_limit(fan_in, fan_out);
    uniform_matrix(fan_out, fan_in, -limit, limit, rng)
}

/// Entries drawn independently from `U(low, high)`.
pub fn uniform_matrix(rows: usize, cols: usize, low: f64, high: f64, rng: &mut SeededRng) -> Result<Matrix> {
    if !(low < high) {
        return Err(Error::invalid(format!("empty uniform range [{low}, {high}]")));
    }
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(low..=high)).collect();
    Matrix::from_vec(rows, cols, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn unit_bound_when_fans_sum_to_six() {
        let m = glorot_init(1, 5, &mut rng::seeded(0)).unwrap();
        assert_eq!(glorot_limit(1, 5), 1.0);
        assert!(m.as_slice().iter().all(|v| (-1.0..=1.0).contains(v)));
        assert_eq!((m.rows(), m.cols()), (5, 1));
    }

    #[test]
    fn same_seed_same_matrix() {
        let a = glorot_init(3, 3, &mut rng::seeded(42)).unwrap();
        let b = glorot_init(3, 3, &mut rng::seeded(42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_fan_rejected() {
        assert!(glorot_init(0, 3, &mut rng::seeded(0)).is_err());
        assert!(glorot_init(3, 0, &mut rng::seeded(0)).is_err());
    }

    #[test]
    fn empirical_variance_matches_uniform_variance() {
        // Var U(-a, a) = a²/3 = 2 / (fan_in + fan_out) = 0.01
        let m = glorot_init(100, 100, &mut rng::seeded(7)).unwrap();
        let v = m.as_slice();
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        assert!((var - 0.01).abs() < 0.002, "variance {var}");
    }
}
