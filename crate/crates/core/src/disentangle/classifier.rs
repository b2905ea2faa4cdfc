use alloc::vec;
use alloc::vec::Vec;

use crate::nn::Matrix;
use crate::{Error, Result};

/// Multinomial logistic regression on standardized features, trained by
/// full-batch gradient descent from zero weights.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassifier {
    /// `classes × features`.
    weights: Matrix,
    bias: Vec<f64>,
    mean: Vec<f64>,
    /// Reciprocal standard deviation; 0 for constant features.
    inv_std: Vec<f64>,
}

impl LinearClassifier {
    pub fn fit(x: &Matrix, labels: &[usize], classes: usize, iterations: usize, learning_rate: f64) -> Result<Self> {
        let (n, p) = (x.rows(), x.cols());
        if n == 0 || labels.len() != n {
            return Err(Error::shape("classifier labels", n, labels.len()));
        }
        if classes < 2 || labels.iter().any(|&l| l >= classes) {
            return Err(Error::invalid("labels must lie in 0..classes with classes >= 2"));
        }
        let mut mean = vec![0.0; p];
        for row in x.iter_rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = vec![0.0; p];
        for row in x.iter_rows() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let inv_std: Vec<f64> = var
            .iter()
            .map(|s| {
                let sd = libm::sqrt(s / n as f64);
                if sd > 1e-12 {
                    1.0 / sd
                } else {
                    0.0
                }
            })
            .collect();
        let mut model = Self {
            weights: Matrix::zeros(classes, p),
            bias: vec![0.0; classes],
            mean,
            inv_std,
        };
        let xs: Vec<Vec<f64>> = x.iter_rows().map(|r| model.standardize(r)).collect();
        let mut probs = vec![0.0; classes];
        for _ in 0..iterations {
            let mut gw = Matrix::zeros(classes, p);
            let mut gb = vec![0.0; classes];
            for (row, &label) in xs.iter().zip(labels) {
                model.softmax(row, &mut probs);
                for c in 0..classes {
                    let err = probs[c] - if c == label { 1.0 } else { 0.0 };
                    gb[c] += err;
                    for (g, v) in gw.row_mut(c).iter_mut().zip(row) {
                        *g += err * v;
                    }
                }
            }
            let step = learning_rate / n as f64;
            model.weights.add_scaled(&gw, -step)?;
            for (b, g) in model.bias.iter_mut().zip(&gb) {
                *b -= step * g;
            }
        }
        Ok(model)
    }

    /// No feature varies, so predictions ignore the input.
    pub fn is_degenerate(&self) -> bool {
        self.inv_std.iter().all(|&s| s == 0.0)
    }

    fn standardize(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.inv_std)
            .map(|((v, m), s)| (v - m) * s)
            .collect()
    }

    fn softmax(&self, standardized: &[f64], out: &mut [f64]) {
        for (c, o) in out.iter_mut().enumerate() {
            *o = self.bias[c] + self.weights.row(c).iter().zip(standardized).map(|(w, v)| w * v).sum::<f64>();
        }
        let max = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for o in out.iter_mut() {
            *o = libm::exp(*o - max);
            total += *o;
        }
        out.iter_mut().for_each(|o| *o /= total);
    }

    /// Most probable class; ties go to the lowest class.
    pub fn predict(&self, row: &[f64]) -> usize {
        let mut probs = vec![0.0; self.bias.len()];
        self.softmax(&self.standardize(row), &mut probs);
        let mut best = 0;
        for (c, &p) in probs.iter().enumerate() {
            if p > probs[best] {
                best = c;
            }
        }
        best
    }

    pub fn accuracy(&self, x: &Matrix, labels: &[usize]) -> f64 {
        if labels.is_empty() {
            return 0.0;
        }
        let hits = x.iter_rows().zip(labels).filter(|(r, &l)| self.predict(r) == l).count();
        hits as f64 / labels.len() as f64
    }
}

/// Maps each observed input symbol to the label it co-occurred with most
/// often (ties to the lowest label).
#[derive(Debug, Clone, PartialEq)]
pub struct MajorityVote {
    table: Vec<Option<usize>>,
}

impl MajorityVote {
    pub fn fit(pairs: &[(usize, usize)], symbols: usize, classes: usize) -> Result<Self> {
        let mut votes = vec![vec![0usize; classes]; symbols];
        for &(s, l) in pairs {
            if s >= symbols || l >= classes {
                return Err(Error::invalid("vote outside the table"));
            }
            votes[s][l] += 1;
        }
        let table = votes
            .iter()
            .map(|v| {
                let best = v.iter().enumerate().fold(0, |b, (i, &c)| if c > v[b] { i } else { b });
                (v[best] > 0).then_some(best)
            })
            .collect();
        Ok(Self { table })
    }

    pub fn predict(&self, symbol: usize) -> Option<usize> {
        self.table.get(symbol).copied().flatten()
    }

    /// Number of symbols with an assigned label.
    pub fn entries(&self) -> usize {
        self.table.iter().filter(|e| e.is_some()).count()
    }

    pub fn accuracy(&self, pairs: &[(usize, usize)]) -> f64 {
        if pairs.is_empty() {
            return 0.0;
        }
        let hits = pairs.iter().filter(|&&(s, l)| self.predict(s) == Some(l)).count();
        hits as f64 / pairs.len() as f64
    }
}
