use std::cmp::Ordering;
use std::fmt::Write as _;

use super::corpus::PatchCorpus;
use super::variance::{LearnOptions, OutcomeTable, TestStats};
use crate::descriptor::TestSet;
use crate::error::{Error, Result};

/// `|(2/P) * sum |a_p - b_p| - 1|` over two equally long 0/1 columns.
/// Complementary columns count as perfectly correlated.
pub fn correlation(a: &[bool], b: &[bool]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::invalid("correlation needs at least one patch"));
    }
    let differing = a.iter().zip(b).filter(|(x, y)| x != y).count();
    Ok(correlation_from_count(differing, a.len()))
}

#[inline]
fn correlation_from_count(differing: usize, n: usize) -> f64 {
    (2.0 * differing as f64 / n as f64 - 1.0).abs()
}

fn packed_correlation(a: &[u64], b: &[u64], n: usize) -> f64 {
    let differing: u32 = a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum();
    correlation_from_count(differing as usize, n)
}

/// One full scan over the remaining candidates at a fixed threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionPass {
    pub pass: usize,
    pub threshold: f64,
    /// Total admitted after this pass.
    pub admitted: usize,
    /// Candidate indices (into the stats list) in scan order, with whether
    /// each was admitted.
    pub scanned: Vec<(usize, bool)>,
}

#[derive(Clone, Debug)]
pub struct Selection {
    pub tests: TestSet,
    /// Indices into the stats list, in admission order.
    pub admitted: Vec<usize>,
    pub passes: Vec<SelectionPass>,
    pub final_threshold: f64,
}

impl Selection {
    /// CSV learning log: `pass,t_c,admitted`.
    pub fn log_csv(&self) -> String {
        let mut out = String::from("pass,t_c,admitted\n");
        for p in &self.passes {
            writeln!(out, "{},{:.1},{}", p.pass, p.threshold, p.admitted).unwrap();
        }
        out
    }
}

/// Order in which greedy selection scans candidates: variance descending,
/// ties by candidate index.
pub fn variance_order(stats: &[TestStats]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..stats.len()).collect();
    order.sort_by(|&a, &b| {
        stats[b]
            .variance
            .partial_cmp(&stats[a].variance)
            .unwrap_or(Ordering::Equal)
            .then(stats[a].index.cmp(&stats[b].index))
    });
    order
}

fn threshold_for_pass(pass: usize) -> f64 {
    (2 + pass) as f64 / 10.0
}

/// Greedy decorrelated selection. The highest-variance test seeds the set;
/// each scan admits a candidate iff its correlation with every admitted test
/// stays below `t_c`. The threshold starts at 0.2 and grows by 0.1 per full
/// scan until `d_target` tests are admitted.
pub fn greedy_select(
    stats: &[TestStats],
    corpus: &PatchCorpus,
    d_target: usize,
    opts: &LearnOptions,
) -> Result<Selection> {
    if d_target == 0 {
        return Err(Error::invalid("target dimension must be at least 1"));
    }
    if stats.len() < d_target {
        return Err(Error::invalid(format!(
            "target dimension {d_target} exceeds the {} candidate tests",
            stats.len()
        )));
    }
    let pairs: Vec<_> = stats.iter().map(|s| s.test).collect();
    let table = OutcomeTable::build(corpus, &pairs, opts)?;
    let n = table.n_patches();

    let order = variance_order(stats);
    let mut admitted = vec![order[0]];
    let mut columns = vec![table.column(order[0])];
    let mut remaining: Vec<usize> = order[1..].to_vec();
    let mut passes = Vec::new();
    let mut pass = 0;
    let mut threshold = threshold_for_pass(0);

    while admitted.len() < d_target {
        threshold = threshold_for_pass(pass);
        if threshold > 1.0 + 1e-12 {
            return Err(Error::TargetUnreachable {
                achieved: admitted.len(),
                target: d_target,
            });
        }
        let mut scanned = Vec::new();
        let mut kept = Vec::with_capacity(remaining.len());
        let mut iter = remaining.iter().copied();
        for c in iter.by_ref() {
            let col = table.column(c);
            let ok = columns
                .iter()
                .all(|a| packed_correlation(a, &col, n) < threshold);
            scanned.push((c, ok));
            if ok {
                admitted.push(c);
                columns.push(col);
                if admitted.len() == d_target {
                    break;
                }
            } else {
                kept.push(c);
            }
        }
        kept.extend(iter);
        passes.push(SelectionPass {
            pass,
            threshold,
            admitted: admitted.len(),
            scanned,
        });
        remaining = kept;
        pass += 1;
    }
    if passes.is_empty() {
        passes.push(SelectionPass {
            pass: 0,
            threshold,
            admitted: 1,
            scanned: Vec::new(),
        });
    }

    let tests = TestSet::new(
        admitted.iter().map(|&i| stats[i].test).collect(),
        corpus.patch_size(),
    )?;
    Ok(Selection {
        tests,
        admitted,
        passes,
        final_threshold: threshold,
    })
}
