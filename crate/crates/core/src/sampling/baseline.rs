use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMethod {
    Random,
    Systematic,
    Stratified,
    Mus,
}

/// Parameters a baseline selection was drawn with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum BaselineParams {
    Random {
        n: usize,
    },
    Systematic {
        n: usize,
        interval: usize,
        start: usize,
    },
    Stratified {
        /// `(stratum, allocated, stratum size)` in stratum order.
        allocation: Vec<(String, usize, usize)>,
    },
    Mus(MusPlan),
}

/// The monetary-unit walk that produced a MUS selection. Money is handled
/// in integer cents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MusPlan {
    pub n: usize,
    pub total_cents: u64,
    /// `total / n`, in currency units.
    pub interval: f64,
    /// Random start in currency units, within `[0, interval)`.
    pub start: f64,
    /// Records with a non-positive, missing or sub-cent amount.
    pub excluded: Vec<String>,
    /// Selection points that fell on an already selected record.
    pub duplicate_hits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSample {
    pub seed: Option<u64>,
    pub params: BaselineParams,
    /// Selected population positions, ascending.
    pub positions: Vec<usize>,
    pub row_ids: Vec<String>,
}

impl BaselineSample {
    pub fn method(&self) -> BaselineMethod {
        match self.params {
            BaselineParams::Random { .. } => BaselineMethod::Random,
            BaselineParams::Systematic { .. } => BaselineMethod::Systematic,
            BaselineParams::Stratified { .. } => BaselineMethod::Stratified,
            BaselineParams::Mus(_) => BaselineMethod::Mus,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    fn build(ids: &[String], seed: Option<u64>, params: BaselineParams, mut positions: Vec<usize>) -> Self {
        positions.sort_unstable();
        let row_ids = positions.iter().map(|&p| ids[p].clone()).collect();
        Self {
            seed,
            params,
            positions,
            row_ids,
        }
    }
}

fn check_size(n: usize, population: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("sample size must be at least 1"));
    }
    if n > population {
        return Err(Error::invalid(format!(
            "sample size {n} exceeds population size {population}"
        )));
    }
    Ok(())
}

/// Simple random sampling without replacement.
pub fn random_sample(ids: &[String], n: usize, seed: u64) -> Result<BaselineSample> {
    check_size(n, ids.len())?;
    let mut r = rng::seeded(seed);
    let positions = index::sample(&mut r, ids.len(), n).into_vec();
    Ok(BaselineSample::build(ids, Some(seed), BaselineParams::Random { n }, positions))
}

/// Every `floor(N / n)`-th record of the ordered frame from a random start.
pub fn systematic_sample(ids: &[String], n: usize, seed: u64) -> Result<BaselineSample> {
    check_size(n, ids.len())?;
    let interval = ids.len() / n;
    let start = rng::seeded(seed).random_range(0..interval);
    let mut s = systematic_sample_with_start(ids, n, start)?;
    s.seed = Some(seed);
    Ok(s)
}

pub fn systematic_sample_with_start(ids: &[String], n: usize, start: usize) -> Result<BaselineSample> {
    check_size(n, ids.len())?;
    let interval = ids.len() / n;
    if start >= interval {
        return Err(Error::invalid(format!("start {start} outside [0, {interval})")));
    }
    let positions = (0..n).map(|t| start + t * interval).collect();
    Ok(BaselineSample::build(
        ids,
        None,
        BaselineParams::Systematic { n, interval, start },
        positions,
    ))
}

/// Split `n` over strata proportionally to their sizes, rounding by largest
/// remainder. Equal remainders favour the earlier stratum.
pub fn proportional_allocation(sizes: &[usize], n: usize) -> Result<Vec<usize>> {
    let total: usize = sizes.iter().sum();
    if n > total {
        return Err(Error::invalid(format!(
            "sample size {n} exceeds population size {total}"
        )));
    }
    if total == 0 {
        return Ok(vec![0; sizes.len()]);
    }
    let (n, total) = (n as u128, total as u128);
    let mut alloc: Vec<usize> = sizes.iter().map(|&s| (n * s as u128 / total) as usize).collect();
    let assigned: usize = alloc.iter().sum();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    // Remainders compared as exact numerators over the common denominator.
    order.sort_by_key(|&i| core::cmp::Reverse(n * sizes[i] as u128 % total));
    for &i in order.iter().take(n as usize - assigned) {
        alloc[i] += 1;
    }
    Ok(alloc)
}

/// Independent simple random samples within each stratum. Strata absent
/// from `allocation` get no draws; allocations naming unknown strata fail.
pub fn stratified_sample(
    ids: &[String],
    strata: &[String],
    allocation: &BTreeMap<String, usize>,
    seed: u64,
) -> Result<BaselineSample> {
    if ids.len() != strata.len() {
        return Err(Error::shape("strata labels", ids.len(), strata.len()));
    }
    let mut members: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, s) in strata.iter().enumerate() {
        members.entry(s.as_str()).or_default().push(i);
    }
    for (name, &want) in allocation {
        let size = members.get(name.as_str()).map_or(0, Vec::len);
        if want > size {
            return Err(Error::invalid(format!(
                "allocation {want} exceeds size {size} of stratum '{name}'"
            )));
        }
    }
    let mut positions = Vec::new();
    let mut record = Vec::new();
    for (stratum_index, (name, rows)) in members.iter().enumerate() {
        let want = allocation.get(*name).copied().unwrap_or(0);
        record.push((String::from(*name), want, rows.len()));
        if want == 0 {
            continue;
        }
        let mut r = rng::stream(seed, stratum_index as u64);
        positions.extend(index::sample(&mut r, rows.len(), want).into_iter().map(|i| rows[i]));
    }
    if positions.is_empty() {
        return Err(Error::invalid("stratified allocation selects nothing"));
    }
    Ok(BaselineSample::build(
        ids,
        Some(seed),
        BaselineParams::Stratified { allocation: record },
        positions,
    ))
}

fn to_cents(amount: f64) -> Option<u64> {
    if !amount.is_finite() || amount <= 0.0 {
        return None;
    }
    let cents = libm::round(amount * 100.0);
    if cents < 1.0 || cents >= u64::MAX as f64 {
        None
    } else {
        Some(cents as u64)
    }
}

/// Fixed-interval monetary-unit sampling with a random start.
pub fn mus_sample(ids: &[String], amounts: &[Option<f64>], n: usize, seed: u64) -> Result<BaselineSample> {
    let total = mus_total(ids, amounts, n)?;
    let start = rng::seeded(seed).random_range(0..total as u128);
    let mut s = mus_sample_with_start(ids, amounts, n, start)?;
    s.seed = Some(seed);
    Ok(s)
}

fn mus_total(ids: &[String], amounts: &[Option<f64>], n: usize) -> Result<u64> {
    if ids.len() != amounts.len() {
        return Err(Error::shape("amounts", ids.len(), amounts.len()));
    }
    if n == 0 {
        return Err(Error::invalid("sample size must be at least 1"));
    }
    let total = amounts
        .iter()
        .filter_map(|a| a.and_then(to_cents))
        .try_fold(0u64, u64::checked_add)
        .ok_or_else(|| Error::invalid("amount total overflows"))?;
    if total == 0 {
        return Err(Error::invalid("monetary-unit sampling needs a positive amount total"));
    }
    Ok(total)
}

/// Monetary-unit walk for an explicit start.
///
/// Positions are measured in units of `1/n` cent so every quantity is an
/// exact integer: record `i` spans `[n·C_{i-1}, n·C_i)` with `C` the
/// cumulative cents, the interval is the total `T` cents, and the selection
/// points are `start + t·T` for `t < n`. `start` must lie in `[0, T)`.
pub fn mus_sample_with_start(
    ids: &[String],
    amounts: &[Option<f64>],
    n: usize,
    start: u128,
) -> Result<BaselineSample> {
    let total = mus_total(ids, amounts, n)?;
    let t_cents = total as u128;
    if start >= t_cents {
        return Err(Error::invalid(format!("start {start} outside [0, {t_cents})")));
    }
    let scale = n as u128;
    let mut excluded = Vec::new();
    let mut positions = Vec::new();
    let mut duplicate_hits = 0usize;
    let mut cum = 0u128;
    let mut next_point = start;
    let mut points_left = n;
    for (i, a) in amounts.iter().enumerate() {
        let Some(cents) = a.and_then(to_cents) else {
            excluded.push(ids[i].clone());
            continue;
        };
        cum += cents as u128 * scale;
        let mut hits = 0usize;
        while points_left > 0 && next_point < cum {
            hits += 1;
            points_left -= 1;
            next_point += t_cents;
        }
        if hits > 0 {
            positions.push(i);
            duplicate_hits += hits - 1;
        }
    }
    debug_assert_eq!(points_left, 0);
    let plan = MusPlan {
        n,
        total_cents: total,
        interval: total as f64 / n as f64 / 100.0,
        start: start as f64 / scale as f64 / 100.0,
        excluded,
        duplicate_hits,
    };
    Ok(BaselineSample::build(ids, None, BaselineParams::Mus(plan), positions))
}
