use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::stats::entropy_bits;

/// Equal-width bins over the observed range; a constant input maps to bin 0.
pub fn discretize_equal_width(values: &[f64], bins: usize) -> Vec<usize> {
    let bins = bins.max(1);
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    if !(span > 0.0) || !span.is_finite() {
        return alloc::vec![0; values.len()];
    }
    values
        .iter()
        .map(|&v| {
            let b = libm::floor((v - lo) / span * bins as f64) as usize;
            b.min(bins - 1)
        })
        .collect()
}

fn histogram<K: Ord + Copy>(keys: impl Iterator<Item = K>) -> BTreeMap<K, usize> {
    let mut h = BTreeMap::new();
    for k in keys {
        *h.entry(k).or_default() += 1;
    }
    h
}

/// Plug-in entropy in bits.
pub fn entropy(x: &[usize]) -> f64 {
    entropy_bits(histogram(x.iter().copied()).into_values())
}

/// Plug-in mutual information in bits, `H(X) + H(Y) − H(X, Y)`.
///
/// Histograms are accumulated in key order, so for `y == x` the joint
/// entropy is summed over exactly the same terms as `H(X)` and the result is
/// exactly `H(X)`.
pub fn mutual_information(x: &[usize], y: &[usize]) -> f64 {
    assert_eq!(x.len(), y.len(), "mutual information needs paired samples");
    let joint = entropy_bits(histogram(x.iter().copied().zip(y.iter().copied())).into_values());
    (entropy(x) + entropy(y) - joint).max(0.0)
}
