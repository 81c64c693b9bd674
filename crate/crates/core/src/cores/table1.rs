use std::fmt::Write as _;

use crate::trace::kernels::TABLE1_OPS_PER_ITER;
use crate::trace::Kernel;

use super::{run, CoreConfig, CoreKind, SimError};

/// In-order issue cycles of I1..I9, first iteration.
pub const TABLE1_INORDER_ITER1: [u64; 9] = [2, 6, 7, 8, 9, 13, 14, 15, 16];
/// Proposed-core issue cycles of I1..I9, second iteration.
pub const TABLE1_PROPOSED_ITER2: [u64; 9] = [20, 24, 25, 21, 22, 26, 29, 30, 31];
/// Second-iteration issue cycle, proposed minus in-order.
pub const TABLE1_DELTA: [i64; 9] = [0, 0, 0, -5, -5, -5, -3, -3, -3];

const LABELS: [&str; TABLE1_OPS_PER_ITER] = ["I1", "I2", "I3", "I4", "I5", "I6", "I7", "I8", "I9", "F1", "F2", "F3"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table1Report {
    /// Issue cycle per op over both iterations.
    pub inorder: Vec<u64>,
    pub proposed: Vec<u64>,
    pub proposed_predicted: Vec<u64>,
    pub mismatches: Vec<String>,
}

impl Table1Report {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn delta(&self) -> Vec<i64> {
        let n = TABLE1_OPS_PER_ITER;
        (0..9)
            .map(|i| self.proposed[n + i] as i64 - self.inorder[n + i] as i64)
            .collect()
    }

    /// Both schedules side by side with the per-op difference.
    pub fn render(&self) -> String {
        let n = TABLE1_OPS_PER_ITER;
        let mut s = String::new();
        let _ = writeln!(s, "{:<4} {:>8} {:>8} {:>8} {:>8} {:>9} {:>6}", "op", "io-it1", "pq-it1", "io-it2", "pq-it2", "pred-it2", "delta");
        for (i, label) in LABELS.iter().enumerate() {
            let delta = self.proposed[n + i] as i64 - self.inorder[n + i] as i64;
            let _ = writeln!(
                s,
                "{:<4} {:>8} {:>8} {:>8} {:>8} {:>9} {:>6}",
                label,
                self.inorder[i],
                self.proposed[i],
                self.inorder[n + i],
                self.proposed[n + i],
                self.proposed_predicted[n + i],
                delta
            );
        }
        s
    }
}

/// Runs the two-iteration worked example on the in-order and proposed
/// cores and checks the reference issue cycles. `inorder` and `proposed`
/// are the machine configurations to use; [`CoreConfig::table1`] gives the
/// reference ones.
pub fn table1_check(inorder: &CoreConfig, proposed: &CoreConfig) -> Result<Table1Report, SimError> {
    let trace = Kernel::Table1.generate(2, 0)?;
    let io = run(&trace, &CoreConfig { core: CoreKind::InOrder, ..inorder.clone() })?;
    let pq = run(&trace, &CoreConfig { core: CoreKind::Proposed, ..proposed.clone() })?;
    let issues = |recs: &[crate::stats::OpRecord]| recs.iter().map(|r| r.issue).collect::<Vec<_>>();
    let report_io = issues(&io.log.records);
    let report_pq = issues(&pq.log.records);
    let n = TABLE1_OPS_PER_ITER;
    let mut mismatches = Vec::new();
    for i in 0..9 {
        if report_io[i] != TABLE1_INORDER_ITER1[i] {
            mismatches.push(format!(
                "{} iteration 1 in-order: expected {}, got {}",
                LABELS[i], TABLE1_INORDER_ITER1[i], report_io[i]
            ));
        }
    }
    for i in 0..9 {
        if report_pq[n + i] != TABLE1_PROPOSED_ITER2[i] {
            mismatches.push(format!(
                "{} iteration 2 proposed: expected {}, got {}",
                LABELS[i], TABLE1_PROPOSED_ITER2[i], report_pq[n + i]
            ));
        }
    }
    let report = Table1Report {
        inorder: report_io,
        proposed: report_pq,
        proposed_predicted: pq.log.records.iter().map(|r| r.predicted.unwrap_or(0)).collect(),
        mismatches,
    };
    let delta = report.delta();
    let mut mismatches = report.mismatches.clone();
    for i in 0..9 {
        if delta[i] != TABLE1_DELTA[i] {
            mismatches.push(format!(
                "{} delta: expected {}, got {}",
                LABELS[i], TABLE1_DELTA[i], delta[i]
            ));
        }
    }
    Ok(Table1Report { mismatches, ..report })
}
