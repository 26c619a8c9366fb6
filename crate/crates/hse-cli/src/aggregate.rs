//! Checkpoint grids and instance aggregation.

use crate::{CliError, CliResult};

/// Strictly increasing integer checkpoints from 1 to `horizon`,
/// geometrically spaced with roughly `per_decade` points per decade.
///
/// The walk takes the ceiling of the geometric ladder but never advances by
/// less than 1, so small decades are covered densely (for `horizon = 10`,
/// `per_decade = 10` every integer appears); 1 and `horizon` are always
/// included.
pub fn checkpoint_grid(horizon: usize, per_decade: usize) -> Vec<usize> {
    assert!(horizon >= 1 && per_decade >= 1);
    let mut points = vec![1usize];
    if horizon == 1 {
        return points;
    }
    let ratio = 10f64.powf(1.0 / per_decade as f64);
    let mut ladder = 1.0f64;
    loop {
        ladder *= ratio;
        let last = *points.last().unwrap();
        let next = (ladder.ceil() as usize).max(last + 1);
        if next >= horizon {
            break;
        }
        points.push(next);
    }
    points.push(horizon);
    points
}

/// Linear-interpolation percentile of already-sorted data, `p` in [0, 1].
pub fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Mean plus 10th/90th percentiles of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub mean: f64,
    pub p10: f64,
    pub p90: f64,
}

pub fn band(values: &[f64]) -> Band {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    Band {
        mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
        p10: percentile_sorted(&sorted, 0.10),
        p90: percentile_sorted(&sorted, 0.90),
    }
}

/// Aggregate aligned per-instance series: `tables[i][j]` is instance `i`'s
/// value at row `j`. Every instance must have the same row count.
pub fn aggregate_instances(tables: &[Vec<f64>]) -> CliResult<Vec<Band>> {
    let first = tables
        .first()
        .ok_or_else(|| CliError::config("no instances to aggregate"))?;
    let rows = first.len();
    if tables.iter().any(|t| t.len() != rows) {
        return Err(CliError::Numerical(
            "instance tables have misaligned checkpoint grids".into(),
        ));
    }
    let mut out = Vec::with_capacity(rows);
    let mut column = Vec::with_capacity(tables.len());
    for j in 0..rows {
        column.clear();
        column.extend(tables.iter().map(|t| t[j]));
        out.push(band(&column));
    }
    Ok(out)
}
