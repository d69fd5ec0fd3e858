//! CSV files written by the runner. Floats use the shortest representation
//! that parses back to the same value, so every file round-trips exactly.

use std::io::{Read, Write};

use bts_core::sim::BoundarySnapshot;
use bts_core::verify::CheckRow;
use bts_core::{AggregateResult, PolicyConfig, RunTrace, TracePoint};
use serde::{Deserialize, Serialize};

pub fn policy_name(policy: &PolicyConfig) -> &'static str {
    if policy.is_batched() {
        "batched_ts"
    } else {
        "classical_ts"
    }
}

/// File-name-safe label, e.g. `batched_ts_a1.5_full` or `classical_ts`.
pub fn policy_label(policy: &PolicyConfig) -> String {
    match policy.alpha() {
        Some(alpha) => format!("batched_ts_a{alpha}_{}", policy.variant.as_str()),
        None => "classical_ts".to_owned(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: u64,
    pub action: usize,
    pub pseudo_regret: f64,
    pub batch_index: u64,
}

impl From<&TracePoint> for TraceRow {
    fn from(p: &TracePoint) -> Self {
        TraceRow {
            t: p.t,
            action: p.action,
            pseudo_regret: p.pseudo_regret,
            batch_index: p.batch_index,
        }
    }
}

/// `t,action,pseudo_regret,batch_index`, one row per recorded step.
pub fn write_trace_csv<W: Write>(trace: &RunTrace, out: W) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for point in &trace.points {
        writer.serialize(TraceRow::from(point))?;
    }
    if trace.points.is_empty() {
        writer.write_record(["t", "action", "pseudo_regret", "batch_index"])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_trace_csv<R: Read>(input: R) -> csv::Result<Vec<TraceRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

/// `batch,end,m_0,...,m_{K-1}`: cycle counts at every batch end.
pub fn write_batches_csv<W: Write>(
    batches: &[BoundarySnapshot],
    arms: usize,
    out: W,
) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let mut header = vec!["batch".to_owned(), "end".to_owned()];
    header.extend((0..arms).map(|i| format!("m_{i}")));
    writer.write_record(&header)?;
    for (j, batch) in batches.iter().enumerate() {
        let mut record = vec![(j + 1).to_string(), batch.end.to_string()];
        record.extend(batch.cycle_counts.iter().map(u64::to_string));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub policy: String,
    /// Empty for classical sampling.
    pub alpha: Option<f64>,
    pub variant: String,
    #[serde(rename = "T")]
    pub horizon: u64,
    pub mean_final_regret: f64,
    pub stderr_final_regret: f64,
    /// Started batches per episode; per-step feedback counts `T`.
    pub mean_batches: f64,
    pub max_batches: u64,
    pub mean_cycles: f64,
    pub mean_batches_ceil: u64,
}

impl From<&AggregateResult> for AggregateRow {
    fn from(r: &AggregateResult) -> Self {
        AggregateRow {
            policy: policy_name(&r.policy).to_owned(),
            alpha: r.policy.alpha(),
            variant: r.policy.variant.as_str().to_owned(),
            horizon: r.horizon,
            mean_final_regret: r.mean_final_regret,
            stderr_final_regret: r.stderr_final_regret,
            mean_batches: r.mean_batches,
            max_batches: r.max_batches,
            mean_cycles: r.mean_cycles,
            mean_batches_ceil: r.mean_batches.ceil() as u64,
        }
    }
}

pub fn write_aggregate_csv<W: Write>(results: &[AggregateResult], out: W) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for result in results {
        writer.serialize(AggregateRow::from(result))?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_aggregate_csv<R: Read>(input: R) -> csv::Result<Vec<AggregateRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub policy: String,
    pub alpha: Option<f64>,
    pub t: u64,
    pub mean_regret: f64,
    pub stderr: f64,
}

/// Long-format mean regret curves, `policy,alpha,t,mean_regret,stderr`.
pub fn write_curves_csv<W: Write>(results: &[AggregateResult], out: W) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for result in results {
        for ((&t, &mean), &stderr) in result
            .times
            .iter()
            .zip(&result.mean_regret)
            .zip(&result.stderr_regret)
        {
            writer.serialize(CurveRow {
                policy: policy_name(&result.policy).to_owned(),
                alpha: result.policy.alpha(),
                t,
                mean_regret: mean,
                stderr,
            })?;
        }
    }
    writer.flush()?;
    Ok(())
}

pub fn read_curves_csv<R: Read>(input: R) -> csv::Result<Vec<CurveRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationRow {
    pub check: String,
    pub parameters: String,
    pub estimate: f64,
    pub stderr: f64,
    pub bound: f64,
    pub verdict: String,
    pub vacuous: bool,
}

impl From<&CheckRow> for VerificationRow {
    fn from(row: &CheckRow) -> Self {
        VerificationRow {
            check: row.check.clone(),
            parameters: row.parameters.clone(),
            estimate: row.estimate,
            stderr: row.stderr,
            bound: row.bound,
            verdict: row.verdict.as_str().to_owned(),
            vacuous: row.vacuous,
        }
    }
}

/// `check,parameters,estimate,stderr,bound,verdict,vacuous`.
pub fn write_verification_csv<W: Write>(rows: &[CheckRow], out: W) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(VerificationRow::from(row))?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_verification_csv<R: Read>(input: R) -> csv::Result<Vec<VerificationRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}
