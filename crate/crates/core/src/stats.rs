//! Event-log reduction, run comparison tables and sweep series.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::memhier::{latency_histogram, Level};
use crate::predictor::repeat_accuracy;
use crate::trace::OpKind;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("op {seq}: cycle order violated (dispatch {dispatch}, issue {issue}, complete {complete}, commit {commit})")]
    CycleOrder {
        seq: usize,
        dispatch: u64,
        issue: u64,
        complete: u64,
        commit: u64,
    },
    #[error("op {seq} appears out of program order in the log")]
    SeqOrder { seq: usize },
    #[error("baseline label `{0}` not among the runs")]
    UnknownBaseline(String),
    #[error("nothing to compare")]
    NoRuns,
    #[error("unknown series metric `{0}` (expected ipc-vs-pq-size, ipc-vs-delaycache, ipc-vs-units or ipc-vs-training-interval)")]
    UnknownMetric(String),
}

/// Lifetime of one committed op.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpRecord {
    pub seq: usize,
    pub pc: u64,
    pub kind: OpKind,
    pub dispatch: u64,
    pub issue: u64,
    pub complete: u64,
    pub commit: u64,
    pub queue: Option<usize>,
    /// Queue ordering value; the predicted issue cycle except under FIFO
    /// (dependence-only) ordering, where it is the dispatch order.
    pub priority: Option<u64>,
    pub predicted: Option<u64>,
    pub level: Option<Level>,
    pub debut: bool,
}

#[derive(Serialize)]
struct RecordLine<'a> {
    seq: usize,
    pc: String,
    kind: &'a str,
    dispatch: u64,
    issue: u64,
    complete: u64,
    commit: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    queue: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    priority: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    predicted: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    level: Option<&'a str>,
    debut: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EventLog {
    pub core: String,
    pub trace: String,
    pub records: Vec<OpRecord>,
    /// Cycles each queue's head was blocked on an unresolved dependency. The
    /// in-order and out-of-order cores report a single entry: cycles in which
    /// the oldest unissued op waited on a dependency.
    pub head_stalls: Vec<u64>,
    /// Cycles in which any head was blocked; each cycle counts once however
    /// many queues stalled in it.
    pub stall_cycles: u64,
    pub dc_lookups: u64,
    pub dc_hits: u64,
}

impl EventLog {
    /// One JSON object per op, in commit order.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let line = RecordLine {
                seq: r.seq,
                pc: format!("{:#x}", r.pc),
                kind: r.kind.name(),
                dispatch: r.dispatch,
                issue: r.issue,
                complete: r.complete,
                commit: r.commit,
                queue: r.queue,
                priority: r.priority,
                predicted: r.predicted,
                level: r.level.map(Level::name),
                debut: r.debut,
            };
            out.push_str(&serde_json::to_string(&line).expect("plain data serializes"));
            out.push('\n');
        }
        out
    }

    pub fn cycles(&self) -> u64 {
        self.records.last().map_or(0, |r| r.commit)
    }
}

fn na<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_f64(*x),
        None => s.serialize_str("n/a"),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunStats {
    pub core: String,
    pub trace: String,
    pub cycles: u64,
    pub committed: u64,
    pub ipc: f64,
    pub head_stall_cycles: u64,
    pub head_stall_per_queue: Vec<u64>,
    pub debut_cycles: u64,
    pub repeated_cycles: u64,
    pub debut_committed: u64,
    pub repeated_committed: u64,
    #[serde(serialize_with = "na")]
    pub delaycache_hit_rate: Option<f64>,
    #[serde(serialize_with = "na")]
    pub repeat_accuracy: Option<f64>,
    #[serde(serialize_with = "na")]
    pub mae_issue_prediction: Option<f64>,
    pub l1_hits: u64,
    pub l2_hits: u64,
    pub dram_accesses: u64,
}

impl RunStats {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }
}

fn check_record(r: &OpRecord) -> Result<(), StatsError> {
    if r.dispatch <= r.issue && r.issue < r.complete && r.complete <= r.commit {
        Ok(())
    } else {
        Err(StatsError::CycleOrder {
            seq: r.seq,
            dispatch: r.dispatch,
            issue: r.issue,
            complete: r.complete,
            commit: r.commit,
        })
    }
}

/// Issue-time prediction errors `(seq, |predicted − issue|)` for every op
/// that carried a prediction.
pub fn prediction_errors(log: &EventLog) -> Vec<(usize, u64)> {
    log.records
        .iter()
        .filter_map(|r| r.predicted.map(|p| (r.seq, p.abs_diff(r.issue))))
        .collect()
}

pub fn reduce(log: &EventLog) -> Result<RunStats, StatsError> {
    let mut prev_commit = 0;
    let (mut debut_cycles, mut repeated_cycles) = (0, 0);
    let (mut debut_n, mut repeated_n) = (0, 0);
    for (i, r) in log.records.iter().enumerate() {
        check_record(r)?;
        if r.seq != i {
            return Err(StatsError::SeqOrder { seq: r.seq });
        }
        let span = r.commit - prev_commit;
        prev_commit = r.commit;
        if r.debut {
            debut_cycles += span;
            debut_n += 1;
        } else {
            repeated_cycles += span;
            repeated_n += 1;
        }
    }
    let cycles = log.cycles();
    let committed = log.records.len() as u64;
    let levels = latency_histogram(log.records.iter().filter_map(|r| r.level.as_ref()));
    let count = |l: Level| levels.get(&l).copied().unwrap_or(0);
    let missing = log
        .records
        .iter()
        .filter(|r| r.kind == OpKind::Load && r.level.is_some_and(|l| l != Level::L1))
        .map(|r| (r.pc, r.complete - r.issue));
    let errors = prediction_errors(log);
    let mae = (!errors.is_empty()).then(|| errors.iter().map(|e| e.1 as f64).sum::<f64>() / errors.len() as f64);
    Ok(RunStats {
        core: log.core.clone(),
        trace: log.trace.clone(),
        cycles,
        committed,
        ipc: if cycles == 0 { 0.0 } else { committed as f64 / cycles as f64 },
        head_stall_cycles: log.stall_cycles,
        head_stall_per_queue: log.head_stalls.clone(),
        debut_cycles,
        repeated_cycles,
        debut_committed: debut_n,
        repeated_committed: repeated_n,
        delaycache_hit_rate: (log.dc_lookups > 0).then(|| log.dc_hits as f64 / log.dc_lookups as f64),
        repeat_accuracy: repeat_accuracy(missing),
        mae_issue_prediction: mae,
        l1_hits: count(Level::L1),
        l2_hits: count(Level::L2),
        dram_accesses: count(Level::Dram),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub label: String,
    pub stats: RunStats,
    /// IPC relative to the baseline run on the same trace.
    pub normalized_ipc: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonTable {
    pub baseline: String,
    pub rows: Vec<ComparisonRow>,
    pub warnings: Vec<String>,
}

const COMPARE_HEADER: [&str; 16] = [
    "trace",
    "label",
    "core",
    "cycles",
    "committed",
    "ipc",
    "normalized_ipc",
    "head_stall_cycles",
    "debut_cycles",
    "repeated_cycles",
    "delaycache_hit_rate",
    "repeat_accuracy",
    "mae_issue_prediction",
    "l1_hits",
    "l2_hits",
    "dram_accesses",
];

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| x.to_string())
}

impl ComparisonTable {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(COMPARE_HEADER).expect("in-memory write");
        for r in &self.rows {
            let s = &r.stats;
            w.write_record([
                s.trace.clone(),
                r.label.clone(),
                s.core.clone(),
                s.cycles.to_string(),
                s.committed.to_string(),
                s.ipc.to_string(),
                opt(r.normalized_ipc),
                s.head_stall_cycles.to_string(),
                s.debut_cycles.to_string(),
                s.repeated_cycles.to_string(),
                opt(s.delaycache_hit_rate),
                opt(s.repeat_accuracy),
                opt(s.mae_issue_prediction),
                s.l1_hits.to_string(),
                s.l2_hits.to_string(),
                s.dram_accesses.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

/// Normalizes each run's IPC to the `baseline`-labelled run on the same
/// trace. Traces lacking a baseline run get no normalized value and a
/// warning.
pub fn compare(runs: &[(String, RunStats)], baseline: &str) -> Result<ComparisonTable, StatsError> {
    if runs.is_empty() {
        return Err(StatsError::NoRuns);
    }
    if !runs.iter().any(|(l, _)| l == baseline) {
        return Err(StatsError::UnknownBaseline(baseline.to_string()));
    }
    let base: BTreeMap<&str, f64> = runs
        .iter()
        .filter(|(l, _)| l == baseline)
        .map(|(_, s)| (s.trace.as_str(), s.ipc))
        .collect();
    let mut warnings = Vec::new();
    let traces: BTreeSet<&str> = runs.iter().map(|(_, s)| s.trace.as_str()).collect();
    for t in &traces {
        if !base.contains_key(t) {
            warnings.push(format!("trace `{t}` has no `{baseline}` run; its rows are not normalized"));
        }
    }
    let rows = runs
        .iter()
        .map(|(label, s)| ComparisonRow {
            label: label.clone(),
            stats: s.clone(),
            normalized_ipc: base
                .get(s.trace.as_str())
                .filter(|&&b| b > 0.0)
                .map(|b| s.ipc / b),
        })
        .collect();
    Ok(ComparisonTable {
        baseline: baseline.to_string(),
        rows,
        warnings,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesMetric {
    IpcVsPqSize,
    IpcVsDelayCache,
    IpcVsUnits,
    IpcVsTrainingInterval,
}

impl SeriesMetric {
    pub const ALL: [SeriesMetric; 4] = [
        SeriesMetric::IpcVsPqSize,
        SeriesMetric::IpcVsDelayCache,
        SeriesMetric::IpcVsUnits,
        SeriesMetric::IpcVsTrainingInterval,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SeriesMetric::IpcVsPqSize => "ipc-vs-pq-size",
            SeriesMetric::IpcVsDelayCache => "ipc-vs-delaycache",
            SeriesMetric::IpcVsUnits => "ipc-vs-units",
            SeriesMetric::IpcVsTrainingInterval => "ipc-vs-training-interval",
        }
    }

    /// Column name of the swept parameter.
    pub fn x_label(self) -> &'static str {
        match self {
            SeriesMetric::IpcVsPqSize => "pq_size",
            SeriesMetric::IpcVsDelayCache => "delaycache_entries",
            SeriesMetric::IpcVsUnits => "int_units",
            SeriesMetric::IpcVsTrainingInterval => "training_interval",
        }
    }
}

impl fmt::Display for SeriesMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SeriesMetric {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SeriesMetric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| StatsError::UnknownMetric(s.to_string()))
    }
}

/// CSV rows `x,trace,ipc` for a parameter sweep, in input order.
pub fn series(points: &[(u64, RunStats)], metric: SeriesMetric) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([metric.x_label(), "trace", "ipc"]).expect("in-memory write");
    for (x, s) in points {
        w.write_record([x.to_string(), s.trace.clone(), s.ipc.to_string()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}
