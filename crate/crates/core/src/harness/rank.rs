use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::{enumerate_canonical, DesignVector};
use crate::error::Result;
use crate::objective::FilterObjective;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    /// 1-based; rank 1 is the lowest S21.
    pub rank: usize,
    pub bits: DesignVector,
    pub s21_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_left_db: f64,
    pub bin_right_db: f64,
    pub count: usize,
}

/// Every canonical design sorted by S21, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub rows: Vec<RankRow>,
}

impl RankTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn best(&self) -> Option<&RankRow> {
        self.rows.first()
    }

    pub fn rank(&self, x: &DesignVector) -> Option<usize> {
        self.rows.iter().find(|r| r.bits == *x).map(|r| r.rank)
    }

    /// Rank a design with value `y` would take: one plus the number of
    /// canonical designs strictly better.
    pub fn rank_of_value(&self, y: f64) -> usize {
        1 + self.rows.partition_point(|r| r.s21_db < y)
    }

    /// Percentage of canonical designs with `s21_db <= y`.
    pub fn percentile(&self, y: f64) -> f64 {
        let at_or_below = self.rows.partition_point(|r| r.s21_db <= y);
        100.0 * at_or_below as f64 / self.rows.len() as f64
    }

    /// Fixed-width bins aligned to multiples of `width`, covering every row.
    pub fn histogram(&self, width: f64) -> Vec<HistogramBin> {
        let (Some(first), Some(last)) = (self.rows.first(), self.rows.last()) else {
            return Vec::new();
        };
        let lo = (first.s21_db / width).floor();
        let hi = (last.s21_db / width).floor();
        let nbins = (hi - lo) as usize + 1;
        let mut counts = vec![0usize; nbins];
        for r in &self.rows {
            let k = ((r.s21_db / width).floor() - lo) as usize;
            counts[k.min(nbins - 1)] += 1;
        }
        counts
            .into_iter()
            .enumerate()
            .map(|(k, count)| HistogramBin {
                bin_left_db: (lo + k as f64) * width,
                bin_right_db: (lo + k as f64 + 1.0) * width,
                count,
            })
            .collect()
    }
}

/// Evaluates all canonical designs in parallel and ranks them. Ties keep
/// enumeration order.
pub fn enumerate_and_rank(f: &FilterObjective) -> Result<RankTable> {
    let designs: Vec<DesignVector> = enumerate_canonical().collect();
    let values: Vec<f64> = designs
        .par_iter()
        .map(|x| Ok(f.s21_db(x)?.expect("canonical designs are one-hot")))
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..designs.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let rows = order
        .into_iter()
        .enumerate()
        .map(|(i, k)| RankRow {
            rank: i + 1,
            bits: designs[k],
            s21_db: values[k],
        })
        .collect();
    Ok(RankTable { rows })
}
