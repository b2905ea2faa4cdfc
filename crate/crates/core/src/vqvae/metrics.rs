use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Rows assigned to each of `k` embeddings.
pub fn assignment_counts(assignments: &[usize], k: usize) -> Result<Vec<usize>> {
    let mut counts = vec![0usize; k];
    for &a in assignments {
        *counts
            .get_mut(a)
            .ok_or_else(|| Error::invalid(format!("assignment {a} outside codebook of size {k}")))? += 1;
    }
    Ok(counts)
}

/// Codebook perplexity `2^H(p)` with `p_j = π_j / N`, in `[1, K]`.
pub fn perplexity(counts: &[usize]) -> Result<f64> {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return Err(Error::invalid("perplexity of zero assignments"));
    }
    let h = crate::stats::entropy_bits(counts.iter().copied());
    Ok(libm::exp2(h).clamp(1.0, counts.len() as f64))
}

/// Mean over non-empty clusters of the majority-label share.
pub fn purity<L: Ord>(assignments: &[usize], labels: &[L]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::invalid("purity needs labels"));
    }
    if assignments.len() != labels.len() {
        return Err(Error::shape("purity labels", assignments.len(), labels.len()));
    }
    let mut clusters: BTreeMap<usize, BTreeMap<&L, usize>> = BTreeMap::new();
    for (&a, l) in assignments.iter().zip(labels) {
        *clusters.entry(a).or_default().entry(l).or_insert(0) += 1;
    }
    let shares: Vec<(u128, u128)> = clusters
        .values()
        .map(|hist| {
            let size: usize = hist.values().sum();
            let majority = hist.values().copied().max().unwrap_or(0);
            (majority as u128, size as u128)
        })
        .collect();
    // Summed as a reduced fraction so hand-checkable cases come out correctly
    // rounded; falls back to floating point if the denominators blow up.
    let exact = shares.iter().try_fold((0u128, 1u128), |(n, d), &(m, s)| {
        let num = n.checked_mul(s)?.checked_add(m.checked_mul(d)?)?;
        let den = d.checked_mul(s)?;
        let g = gcd(num, den);
        Some((num / g, den / g))
    });
    let k = clusters.len() as u128;
    if let Some((n, d)) = exact {
        if let Some(d) = d.checked_mul(k) {
            let g = gcd(n, d);
            let (n, d) = (n / g, d / g);
            if n < 1 << 53 && d < 1 << 53 {
                return Ok(n as f64 / d as f64);
            }
        }
    }
    let total: f64 = shares.iter().map(|&(m, s)| m as f64 / s as f64).sum();
    Ok(total / clusters.len() as f64)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}
