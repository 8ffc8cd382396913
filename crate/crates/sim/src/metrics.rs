//! Per-step metric records, run summaries and comparison tables, with
//! their CSV representations.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::config::Algorithm;
use crate::csv_format::{format_sig, quantize};
use crate::{Error, Result};

pub const SERIES_HEADER: [&str; 8] = [
    "step",
    "detect",
    "awake",
    "cost",
    "j_hat",
    "theta_norm",
    "w_norm",
    "p_err",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: u64,
    /// The intruder's sensor was awake at this step.
    pub detect: bool,
    pub awake: usize,
    pub cost: f64,
    pub j_hat: Option<f64>,
    pub theta_norm: Option<f64>,
    pub w_norm: Option<f64>,
    pub p_err: Option<f64>,
}

impl StepRecord {
    /// Rounds the real fields to the precision written to CSV.
    pub fn quantized(self) -> Self {
        Self {
            cost: quantize(self.cost),
            j_hat: self.j_hat.map(quantize),
            theta_norm: self.theta_norm.map(quantize),
            w_norm: self.w_norm.map(quantize),
            p_err: self.p_err.map(quantize),
            ..self
        }
    }
}

/// One record per simulated step. Real fields are stored at CSV precision.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsSeries {
    records: Vec<StepRecord>,
}

impl MetricsSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            records: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, record: StepRecord) {
        self.records.push(record.quantized());
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(SERIES_HEADER)?;
        let opt = |v: Option<f64>| v.map(format_sig).unwrap_or_default();
        for r in &self.records {
            w.write_record([
                r.step.to_string(),
                u8::from(r.detect).to_string(),
                r.awake.to_string(),
                format_sig(r.cost),
                opt(r.j_hat),
                opt(r.theta_norm),
                opt(r.w_norm),
                opt(r.p_err),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(input);
        let header = reader.headers()?.clone();
        if header.iter().ne(SERIES_HEADER) {
            return Err(Error::Config(format!(
                "unexpected series header `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut series = MetricsSeries::new();
        for (i, row) in reader.records().enumerate() {
            let row = row?;
            let bad =
                |field: &str| Error::Config(format!("series row {}: invalid `{field}`", i + 1));
            let real = |k: usize| row[k].parse::<f64>().map_err(|_| bad(SERIES_HEADER[k]));
            let opt = |k: usize| {
                if row[k].is_empty() {
                    Ok(None)
                } else {
                    real(k).map(Some)
                }
            };
            let detect = match &row[1] {
                "0" => false,
                "1" => true,
                _ => return Err(bad("detect")),
            };
            series.records.push(StepRecord {
                step: row[0].parse().map_err(|_| bad("step"))?,
                detect,
                awake: row[2].parse().map_err(|_| bad("awake"))?,
                cost: real(3)?,
                j_hat: opt(4)?,
                theta_norm: opt(5)?,
                w_norm: opt(6)?,
                p_err: opt(7)?,
            });
        }
        Ok(series)
    }
}

pub fn emit_csv(series: &MetricsSeries, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    series.write_csv(BufWriter::new(file))
}

pub fn read_series(path: &Path) -> Result<MetricsSeries> {
    MetricsSeries::read_csv(File::open(path).map_err(|e| Error::io(path, e))?)
}

/// Sums that every summary aggregate is derived from.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SeriesTotals {
    pub steps: u64,
    pub detects: u64,
    pub awake: u64,
    pub cost: f64,
}

impl SeriesTotals {
    pub fn of(series: &MetricsSeries) -> Self {
        series.records.iter().fold(Self::default(), |t, r| Self {
            steps: t.steps + 1,
            detects: t.detects + u64::from(r.detect),
            awake: t.awake + r.awake as u64,
            cost: t.cost + r.cost,
        })
    }

    fn per_step(total: f64, steps: u64) -> f64 {
        if steps == 0 {
            0.0
        } else {
            total / steps as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub algorithm: Algorithm,
    pub estimate_p: bool,
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
    pub steps: u64,
    pub detects_per_step: f64,
    pub awake_per_step: f64,
    pub mean_cost: f64,
    pub final_j_hat: Option<f64>,
    /// Largest `|theta_{n+1} - theta_n|_inf` over the trailing window.
    pub tail_drift: Option<f64>,
    pub theta_min: Option<f64>,
    pub theta_max: Option<f64>,
    pub final_p_err: Option<f64>,
    pub wall_clock_s: f64,
}

const SUMMARY_HEADER: [&str; 15] = [
    "algo",
    "estimate_p",
    "rows",
    "cols",
    "seed",
    "steps",
    "detects_per_step",
    "awake_per_step",
    "mean_cost",
    "final_j_hat",
    "tail_drift",
    "theta_min",
    "theta_max",
    "final_p_err",
    "wall_clock_s",
];

impl RunSummary {
    /// Aggregates over `series`; the remaining fields are left empty.
    pub fn from_series(
        algorithm: Algorithm,
        estimate_p: bool,
        rows: usize,
        cols: usize,
        seed: u64,
        series: &MetricsSeries,
    ) -> Self {
        let t = SeriesTotals::of(series);
        let last = series.records.last();
        Self {
            algorithm,
            estimate_p,
            rows,
            cols,
            seed,
            steps: t.steps,
            detects_per_step: SeriesTotals::per_step(t.detects as f64, t.steps),
            awake_per_step: SeriesTotals::per_step(t.awake as f64, t.steps),
            mean_cost: SeriesTotals::per_step(t.cost, t.steps),
            final_j_hat: last.and_then(|r| r.j_hat),
            tail_drift: None,
            theta_min: None,
            theta_max: None,
            final_p_err: last.and_then(|r| r.p_err),
            wall_clock_s: 0.0,
        }
    }

    /// Runs sharing a label are compared as one group.
    pub fn group_label(&self) -> String {
        let p = if self.estimate_p { "+estimated-p" } else { "" };
        format!("{}{p}@{}x{}", self.algorithm, self.rows, self.cols)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(SUMMARY_HEADER)?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        w.write_record([
            self.algorithm.to_string(),
            self.estimate_p.to_string(),
            self.rows.to_string(),
            self.cols.to_string(),
            self.seed.to_string(),
            self.steps.to_string(),
            self.detects_per_step.to_string(),
            self.awake_per_step.to_string(),
            self.mean_cost.to_string(),
            opt(self.final_j_hat),
            opt(self.tail_drift),
            opt(self.theta_min),
            opt(self.theta_max),
            opt(self.final_p_err),
            self.wall_clock_s.to_string(),
        ])?;
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(input);
        if reader.headers()?.iter().ne(SUMMARY_HEADER) {
            return Err(Error::Config("unexpected summary header".into()));
        }
        let row = reader
            .records()
            .next()
            .ok_or_else(|| Error::Config("summary file has no data row".into()))??;
        let bad = |k: usize| Error::Config(format!("summary: invalid `{}`", SUMMARY_HEADER[k]));
        let real = |k: usize| row[k].parse::<f64>().map_err(|_| bad(k));
        let opt = |k: usize| {
            if row[k].is_empty() {
                Ok(None)
            } else {
                real(k).map(Some)
            }
        };
        Ok(Self {
            algorithm: row[0].parse()?,
            estimate_p: row[1].parse().map_err(|_| bad(1))?,
            rows: row[2].parse().map_err(|_| bad(2))?,
            cols: row[3].parse().map_err(|_| bad(3))?,
            seed: row[4].parse().map_err(|_| bad(4))?,
            steps: row[5].parse().map_err(|_| bad(5))?,
            detects_per_step: real(6)?,
            awake_per_step: real(7)?,
            mean_cost: real(8)?,
            final_j_hat: opt(9)?,
            tail_drift: opt(10)?,
            theta_min: opt(11)?,
            theta_max: opt(12)?,
            final_p_err: opt(13)?,
            wall_clock_s: real(14)?,
        })
    }
}

pub fn write_summary(summary: &RunSummary, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    summary.write_csv(BufWriter::new(file))
}

pub fn read_summary(path: &Path) -> Result<RunSummary> {
    RunSummary::read_csv(File::open(path).map_err(|e| Error::io(path, e))?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSd {
    pub mean: f64,
    /// Sample standard deviation; zero for a single run.
    pub sd: f64,
}

impl MeanSd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Self { mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupStats {
    pub group: String,
    pub runs: usize,
    pub detects: MeanSd,
    pub awake: MeanSd,
}

/// Per-group mean and standard deviation of the tracking and energy
/// metrics. Every name in `required` must match at least one summary, and
/// at least one summary must be given.
pub fn compare_runs(summaries: &[RunSummary], required: &[String]) -> Result<Vec<GroupStats>> {
    let mut groups: BTreeMap<String, Vec<&RunSummary>> =
        required.iter().map(|g| (g.clone(), Vec::new())).collect();
    if summaries.is_empty() && required.is_empty() {
        return Err(Error::EmptyGroup("*".into()));
    }
    for s in summaries {
        groups.entry(s.group_label()).or_default().push(s);
    }
    groups
        .into_iter()
        .map(|(group, runs)| {
            if runs.is_empty() {
                return Err(Error::EmptyGroup(group));
            }
            let detects: Vec<f64> = runs.iter().map(|r| r.detects_per_step).collect();
            let awake: Vec<f64> = runs.iter().map(|r| r.awake_per_step).collect();
            Ok(GroupStats {
                group,
                runs: runs.len(),
                detects: MeanSd::of(&detects),
                awake: MeanSd::of(&awake),
            })
        })
        .collect()
}

pub fn write_comparison<W: Write>(stats: &[GroupStats], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "group",
        "runs",
        "detects_mean",
        "detects_sd",
        "awake_mean",
        "awake_sd",
    ])?;
    for s in stats {
        w.write_record([
            s.group.clone(),
            s.runs.to_string(),
            format_sig(s.detects.mean),
            format_sig(s.detects.sd),
            format_sig(s.awake.mean),
            format_sig(s.awake.sd),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
