use alloc::format;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    Difference,
    Ratio,
    MeanPerUnit,
}

/// Recorded and audited amount of one sampled record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmountPair {
    pub recorded: f64,
    pub audited: f64,
}

/// Point estimate of the population's audited total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub method: EstimateMethod,
    pub estimate: f64,
    pub sample_size: usize,
    pub population_size: Option<usize>,
    pub population_recorded_total: Option<f64>,
    pub sample_recorded_total: Option<f64>,
    pub sample_audited_total: f64,
}

fn check_pairs(pairs: &[AmountPair]) -> Result<()> {
    if pairs.is_empty() {
        return Err(Error::invalid("estimation needs at least one sampled record"));
    }
    if pairs.iter().any(|p| !p.recorded.is_finite() || !p.audited.is_finite()) {
        return Err(Error::invalid("sample amounts must be finite"));
    }
    Ok(())
}

fn check_population(n: usize, population: usize) -> Result<()> {
    if n > population {
        return Err(Error::invalid(format!(
            "sample size {n} exceeds population size {population}"
        )));
    }
    Ok(())
}

fn finite(estimate: f64) -> Result<f64> {
    if estimate.is_finite() {
        Ok(estimate)
    } else {
        Err(Error::invalid("estimate is not finite"))
    }
}

/// `total + N · mean(audited − recorded)`.
pub fn difference_estimate(
    pairs: &[AmountPair],
    population_size: usize,
    population_recorded_total: f64,
) -> Result<EstimateReport> {
    check_pairs(pairs)?;
    check_population(pairs.len(), population_size)?;
    let n = pairs.len() as f64;
    let mean_diff = pairs.iter().map(|p| p.audited - p.recorded).sum::<f64>() / n;
    Ok(EstimateReport {
        method: EstimateMethod::Difference,
        estimate: finite(population_recorded_total + population_size as f64 * mean_diff)?,
        sample_size: pairs.len(),
        population_size: Some(population_size),
        population_recorded_total: Some(population_recorded_total),
        sample_recorded_total: Some(pairs.iter().map(|p| p.recorded).sum()),
        sample_audited_total: pairs.iter().map(|p| p.audited).sum(),
    })
}

/// `(Σ audited / Σ recorded) · total`.
pub fn ratio_estimate(pairs: &[AmountPair], population_recorded_total: f64) -> Result<EstimateReport> {
    check_pairs(pairs)?;
    let recorded: f64 = pairs.iter().map(|p| p.recorded).sum();
    let audited: f64 = pairs.iter().map(|p| p.audited).sum();
    if recorded == 0.0 {
        return Err(Error::invalid("recorded sample total is zero"));
    }
    Ok(EstimateReport {
        method: EstimateMethod::Ratio,
        estimate: finite(audited / recorded * population_recorded_total)?,
        sample_size: pairs.len(),
        population_size: None,
        population_recorded_total: Some(population_recorded_total),
        sample_recorded_total: Some(recorded),
        sample_audited_total: audited,
    })
}

/// `N · mean(audited)`.
pub fn mpu_estimate(audited: &[f64], population_size: usize) -> Result<EstimateReport> {
    if audited.is_empty() {
        return Err(Error::invalid("estimation needs at least one sampled record"));
    }
    if audited.iter().any(|a| !a.is_finite()) {
        return Err(Error::invalid("sample amounts must be finite"));
    }
    check_population(audited.len(), population_size)?;
    let total: f64 = audited.iter().sum();
    Ok(EstimateReport {
        method: EstimateMethod::MeanPerUnit,
        estimate: finite(population_size as f64 * (total / audited.len() as f64))?,
        sample_size: audited.len(),
        population_size: Some(population_size),
        population_recorded_total: None,
        sample_recorded_total: None,
        sample_audited_total: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn pairs(v: &[(f64, f64)]) -> Vec<AmountPair> {
        v.iter().map(|&(recorded, audited)| AmountPair { recorded, audited }).collect()
    }

    #[test]
    fn difference_hand_cases() {
        let p = pairs(&[(10.0, 9.0), (20.0, 19.0)]);
        assert_eq!(difference_estimate(&p, 100, 1000.0).unwrap().estimate, 900.0);
        let same = pairs(&[(10.0, 10.0), (3.5, 3.5)]);
        assert_eq!(difference_estimate(&same, 100, 1000.0).unwrap().estimate, 1000.0);
        let doubled = pairs(&[(10.0, 8.0), (20.0, 18.0)]);
        assert_eq!(difference_estimate(&doubled, 100, 1000.0).unwrap().estimate, 800.0);
        assert!(difference_estimate(&[], 100, 1000.0).is_err());
        assert!(difference_estimate(&p, 1, 1000.0).is_err());
    }

    #[test]
    fn ratio_hand_cases() {
        let p = pairs(&[(60.0, 50.0), (40.0, 40.0)]);
        assert_eq!(ratio_estimate(&p, 1000.0).unwrap().estimate, 900.0);
        let same = pairs(&[(7.0, 7.0)]);
        assert_eq!(ratio_estimate(&same, 1234.5).unwrap().estimate, 1234.5);
        let scaled = pairs(&[(60.0, 100.0), (40.0, 80.0)]);
        assert_eq!(ratio_estimate(&scaled, 1000.0).unwrap().estimate, 1800.0);
        assert!(ratio_estimate(&pairs(&[(5.0, 1.0), (-5.0, 1.0)]), 10.0).is_err());
    }

    #[test]
    fn mpu_hand_cases() {
        assert_eq!(mpu_estimate(&[10.0, 20.0], 100).unwrap().estimate, 1500.0);
        assert_eq!(mpu_estimate(&[20.0, 10.0], 100).unwrap().estimate, 1500.0);
        assert_eq!(mpu_estimate(&[4.0, 4.0, 4.0], 9).unwrap().estimate, 36.0);
        assert!(mpu_estimate(&[], 9).is_err());
    }
}
