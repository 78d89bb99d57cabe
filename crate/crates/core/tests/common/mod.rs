#![allow(dead_code)]

use std::collections::BTreeMap;

use qlink::protocols::{Agent, JointTable, TableEntry, TrialRecord};

/// Table key of a sampled record, in the order of `agents`.
pub fn record_key(r: &TrialRecord, agents: &[Agent]) -> Vec<TableEntry> {
    agents
        .iter()
        .map(|&a| {
            let res = r.result(a).expect("agent measured");
            (a, res.setting.clone(), res.outcome.label())
        })
        .collect()
}

/// Largest |observed − expected| / σ over the table's cells, with binomial σ.
pub fn max_cell_z(table: &JointTable, records: &[TrialRecord], agents: &[Agent]) -> f64 {
    let mut counts: BTreeMap<Vec<TableEntry>, u64> = BTreeMap::new();
    for r in records {
        *counts.entry(record_key(r, agents)).or_default() += 1;
    }
    let n = records.len() as f64;
    let mut worst: f64 = 0.0;
    for k in counts.keys() {
        assert!(table.get(k) > 0.0, "sampled an impossible cell {k:?}");
    }
    for (k, &p) in table.iter() {
        let observed = counts.get(k).copied().unwrap_or(0) as f64 / n;
        let sigma = (p * (1.0 - p) / n).sqrt();
        if sigma > 0.0 {
            worst = worst.max((observed - p).abs() / sigma);
        }
    }
    worst
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}
