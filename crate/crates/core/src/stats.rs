//! Disparity tests and agreement metrics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProportionTest {
    pub z: f64,
    pub p_two_sided: f64,
}

/// Pooled two-proportion z-test, no continuity correction.
///
/// When both samples are all-success or all-failure the proportions are
/// identical and the test reports z = 0, p = 1.
pub fn two_proportion_test(x1: u64, n1: u64, x2: u64, n2: u64) -> Result<ProportionTest> {
    if n1 == 0 || n2 == 0 || x1 > n1 || x2 > n2 {
        return Err(Error::Domain(format!(
            "invalid counts for proportion test: {x1}/{n1} vs {x2}/{n2}"
        )));
    }
    let (x1, n1, x2, n2) = (x1 as f64, n1 as f64, x2 as f64, n2 as f64);
    let pooled = (x1 + x2) / (n1 + n2);
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)).sqrt();
    if se == 0.0 {
        return Ok(ProportionTest {
            z: 0.0,
            p_two_sided: 1.0,
        });
    }
    let z = (x1 / n1 - x2 / n2) / se;
    Ok(ProportionTest {
        z,
        p_two_sided: libm::erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ContingencyTable {
    pub fn new(rows: Vec<String>, cols: Vec<String>, counts: Vec<Vec<u64>>) -> Result<Self> {
        if counts.len() != rows.len() || counts.iter().any(|r| r.len() != cols.len()) {
            return Err(Error::Domain(format!(
                "contingency table is not {}x{}",
                rows.len(),
                cols.len()
            )));
        }
        Ok(ContingencyTable { rows, cols, counts })
    }

    /// Unlabelled table; rows and columns are numbered.
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let r = counts.len();
        let c = counts.first().map_or(0, Vec::len);
        Self::new(
            (0..r).map(|i| i.to_string()).collect(),
            (0..c).map(|i| i.to_string()).collect(),
            counts,
        )
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.cols.len())
            .map(|j| self.counts.iter().map(|r| r[j]).sum())
            .collect()
    }

    /// Drops all-zero rows and columns.
    pub fn trimmed(&self) -> ContingencyTable {
        let rows_keep: Vec<usize> = (0..self.rows.len())
            .filter(|&i| self.counts[i].iter().any(|&c| c > 0))
            .collect();
        let col_sums = self.col_sums();
        let cols_keep: Vec<usize> = (0..self.cols.len()).filter(|&j| col_sums[j] > 0).collect();
        ContingencyTable {
            rows: rows_keep.iter().map(|&i| self.rows[i].clone()).collect(),
            cols: cols_keep.iter().map(|&j| self.cols[j].clone()).collect(),
            counts: rows_keep
                .iter()
                .map(|&i| cols_keep.iter().map(|&j| self.counts[i][j]).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub stat: f64,
    pub dof: usize,
    pub p: f64,
}

/// Pearson chi-square test of independence, no continuity correction.
pub fn chi_square_test(table: &ContingencyTable) -> Result<ChiSquareTest> {
    let (r, c) = (table.rows.len(), table.cols.len());
    if r < 2 || c < 2 {
        return Err(Error::DegenerateTable(format!(
            "{r}x{c} table has no degrees of freedom"
        )));
    }
    let row_sums = table.row_sums();
    let col_sums = table.col_sums();
    if let Some(i) = row_sums.iter().position(|&s| s == 0) {
        return Err(Error::DegenerateTable(format!(
            "row {:?} has zero total",
            table.rows[i]
        )));
    }
    if let Some(j) = col_sums.iter().position(|&s| s == 0) {
        return Err(Error::DegenerateTable(format!(
            "column {:?} has zero total",
            table.cols[j]
        )));
    }
    let total: u64 = row_sums.iter().sum();
    let total = total as f64;
    let mut stat = 0.0;
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &observed) in row.iter().enumerate() {
            let expected = row_sums[i] as f64 * col_sums[j] as f64 / total;
            let diff = observed as f64 - expected;
            stat += diff * diff / expected;
        }
    }
    let dof = (r - 1) * (c - 1);
    let p = if stat <= 0.0 {
        1.0
    } else {
        gamma_ur(dof as f64 / 2.0, stat / 2.0)
    };
    Ok(ChiSquareTest { stat, dof, p })
}

/// Ranks starting at 1; tied values share the mean of their ranks.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rank correlation with mean ranks for ties.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Domain(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Domain("need at least two observations".into()));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::Domain("NaN in input".into()));
    }
    pearson(&average_ranks(x), &average_ranks(y))
        .ok_or_else(|| Error::Domain("constant input has no rank correlation".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrfReport<L: Ord> {
    pub accuracy: f64,
    pub per_class: BTreeMap<L, ClassScores>,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
}

/// Accuracy plus per-class and support-weighted precision/recall/F1, with
/// `truth` as ground truth. Undefined ratios (no predictions, no support)
/// count as 0.
pub fn weighted_prf<L: Ord + Clone>(truth: &[L], pred: &[L]) -> Result<PrfReport<L>> {
    if truth.len() != pred.len() {
        return Err(Error::Domain(format!(
            "length mismatch: {} vs {}",
            truth.len(),
            pred.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Domain("no samples".into()));
    }
    #[derive(Default)]
    struct Counts {
        tp: usize,
        predicted: usize,
        support: usize,
    }
    let mut counts: BTreeMap<L, Counts> = BTreeMap::new();
    let mut correct = 0;
    for (t, p) in truth.iter().zip(pred) {
        counts.entry(t.clone()).or_default().support += 1;
        counts.entry(p.clone()).or_default().predicted += 1;
        if t == p {
            correct += 1;
            counts.get_mut(t).expect("inserted above").tp += 1;
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let n = truth.len() as f64;
    let mut report = PrfReport {
        accuracy: correct as f64 / n,
        per_class: BTreeMap::new(),
        weighted_precision: 0.0,
        weighted_recall: 0.0,
        weighted_f1: 0.0,
    };
    for (label, c) in counts {
        let precision = ratio(c.tp, c.predicted);
        let recall = ratio(c.tp, c.support);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        let w = c.support as f64 / n;
        report.weighted_precision += w * precision;
        report.weighted_recall += w * recall;
        report.weighted_f1 += w * f1;
        report.per_class.insert(
            label,
            ClassScores {
                precision,
                recall,
                f1,
                support: c.support,
            },
        );
    }
    Ok(report)
}
