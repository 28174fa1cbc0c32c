//! Versioned on-disk formats: the Pareto front CSV and the JSON reports.
//!
//! `pareto.csv` schema v1, one row per front member:
//! `id,<gene columns...>,o_mw,e_lbh,vde_pu2,feasible,violation`.
//! Gene column names come from the case's gene layout, so fronts from
//! different cases differ only in that block. Floats are written with the
//! shortest round-trip representation; reading a file back reproduces the
//! values bit for bit.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use acdcopf_core::decision::{CompromiseReport, ObjectiveKind};
use acdcopf_core::eval::EvaluatedSolution;
use acdcopf_core::metrics::{Aggregate, RunRecord, SpNorm};

pub const PARETO_SCHEMA_VERSION: u32 = 1;
pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const STATS_SCHEMA_VERSION: u32 = 1;

const FIXED_TAIL: [&str; 5] = ["o_mw", "e_lbh", "vde_pu2", "feasible", "violation"];

/// An in-memory Pareto front with named gene columns.
#[derive(Debug, Clone)]
pub struct ParetoTable {
    pub gene_names: Vec<String>,
    pub rows: Vec<EvaluatedSolution>,
}

impl ParetoTable {
    pub fn from_members(gene_names: Vec<String>, rows: Vec<EvaluatedSolution>) -> Self {
        ParetoTable { gene_names, rows }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)
            .with_context(|| format!("cannot write {}", path.display()))?;
        let mut header = vec!["id".to_string()];
        header.extend(self.gene_names.iter().cloned());
        header.extend(FIXED_TAIL.iter().map(|s| s.to_string()));
        w.write_record(&header)?;
        for (id, row) in self.rows.iter().enumerate() {
            let mut rec = vec![id.to_string()];
            rec.extend(row.genes.iter().map(|g| g.to_string()));
            rec.push(row.objectives[0].to_string());
            rec.push(row.objectives[1].to_string());
            rec.push(row.objectives[2].to_string());
            rec.push(if row.feasible { "1" } else { "0" }.to_string());
            rec.push(row.violation.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<ParetoTable> {
        let mut r = csv::Reader::from_path(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        let mut header: Vec<String> = r.headers()?.iter().map(|s| s.to_string()).collect();
        // the annotated variant appends a cluster column
        if header.last().map(String::as_str) == Some("cluster") {
            header.pop();
        }
        if header.first().map(String::as_str) != Some("id") || header.len() < 1 + FIXED_TAIL.len() {
            bail!("not a pareto front file: unexpected header in {}", path.display());
        }
        let tail_at = header.len() - FIXED_TAIL.len();
        if header[tail_at..] != FIXED_TAIL {
            bail!(
                "not a pareto front file: expected trailing columns {FIXED_TAIL:?} in {}",
                path.display()
            );
        }
        let gene_names: Vec<String> = header[1..tail_at].to_vec();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let field = |i: usize| -> Result<f64> {
                rec.get(i)
                    .with_context(|| format!("row too short in {}", path.display()))?
                    .parse::<f64>()
                    .with_context(|| format!("bad number in {}", path.display()))
            };
            let genes = (1..tail_at).map(field).collect::<Result<Vec<f64>>>()?;
            let objectives = (tail_at..tail_at + 3).map(field).collect::<Result<Vec<f64>>>()?;
            let feasible = rec.get(tail_at + 3) == Some("1");
            let violation = field(tail_at + 4)?;
            rows.push(EvaluatedSolution {
                genes,
                objectives,
                violation,
                feasible,
                converged: true,
                outer_iterations: 0,
            });
        }
        Ok(ParetoTable { gene_names, rows })
    }

    /// Write the front with a trailing cluster-label column appended.
    pub fn write_annotated(&self, path: &Path, clusters: &[Option<ObjectiveKind>]) -> Result<()> {
        assert_eq!(clusters.len(), self.rows.len());
        let mut w = csv::Writer::from_path(path)
            .with_context(|| format!("cannot write {}", path.display()))?;
        let mut header = vec!["id".to_string()];
        header.extend(self.gene_names.iter().cloned());
        header.extend(FIXED_TAIL.iter().map(|s| s.to_string()));
        header.push("cluster".to_string());
        w.write_record(&header)?;
        for (id, (row, cluster)) in self.rows.iter().zip(clusters).enumerate() {
            let mut rec = vec![id.to_string()];
            rec.extend(row.genes.iter().map(|g| g.to_string()));
            rec.push(row.objectives[0].to_string());
            rec.push(row.objectives[1].to_string());
            rec.push(row.objectives[2].to_string());
            rec.push(if row.feasible { "1" } else { "0" }.to_string());
            rec.push(row.violation.to_string());
            rec.push(cluster.map(|c| c.short().to_string()).unwrap_or_default());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One solution row of the decision report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportSolution {
    pub id: usize,
    pub o_mw: f64,
    pub e_lbh: f64,
    pub vde_pu2: f64,
    pub priority: f64,
    pub genes: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportCluster {
    pub objective: String,
    pub member_ids: Vec<usize>,
    pub compromise: ReportSolution,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecisionReport {
    pub schema_version: u32,
    pub weights: Vec<f64>,
    pub front_size: usize,
    pub clusters: Vec<ReportCluster>,
}

pub fn build_report(table: &ParetoTable, report: &CompromiseReport) -> DecisionReport {
    let solution = |idx: usize, priority: f64| -> ReportSolution {
        let row = &table.rows[idx];
        ReportSolution {
            id: idx,
            o_mw: row.objectives[0],
            e_lbh: row.objectives[1],
            vde_pu2: row.objectives[2],
            priority,
            genes: table
                .gene_names
                .iter()
                .cloned()
                .zip(row.genes.iter().copied())
                .collect(),
        }
    };
    let clusters = report
        .clusters
        .iter()
        .map(|c| {
            let pos = c
                .member_indices
                .iter()
                .position(|&i| i == c.compromise)
                .expect("compromise is a member");
            ReportCluster {
                objective: c.objective.short().to_string(),
                member_ids: c.member_indices.clone(),
                compromise: solution(c.compromise, c.d[pos]),
            }
        })
        .collect();
    DecisionReport {
        schema_version: REPORT_SCHEMA_VERSION,
        weights: report.weights.clone(),
        front_size: table.rows.len(),
        clusters,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatsFile {
    pub schema_version: u32,
    pub case: String,
    pub algorithm: String,
    pub population: usize,
    pub iterations: usize,
    pub master_seed: u64,
    pub stabilization_threshold: f64,
    pub sp_norm: SpNorm,
    pub reference_front_size: usize,
    pub runs: Vec<RunRecord>,
    pub iterations_to_stabilize: Option<Aggregate>,
    pub gd: Option<Aggregate>,
    pub sp: Option<Aggregate>,
    pub elapsed_seconds: Option<Aggregate>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ParetoTable {
        ParetoTable {
            gene_names: vec!["pg2".into(), "ug1".into()],
            rows: vec![
                EvaluatedSolution {
                    genes: vec![0.4217893213, 1.0600000000000001],
                    objectives: vec![9.13, 1105.4, 0.0123],
                    violation: 0.0,
                    feasible: true,
                    converged: true,
                    outer_iterations: 3,
                },
                EvaluatedSolution {
                    genes: vec![1.4, 0.95],
                    objectives: vec![10.0, 1000.0, 0.02],
                    violation: 0.0,
                    feasible: true,
                    converged: true,
                    outer_iterations: 2,
                },
            ],
        }
    }

    #[test]
    fn schema_version_is_pinned() {
        assert_eq!(PARETO_SCHEMA_VERSION, 1);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("front.csv");
        let table = sample();
        table.write(&path).unwrap();
        let back = ParetoTable::read(&path).unwrap();
        assert_eq!(back.gene_names, table.gene_names);
        for (a, b) in back.rows.iter().zip(&table.rows) {
            assert_eq!(a.genes, b.genes);
            assert_eq!(a.objectives, b.objectives);
            assert_eq!(a.violation, b.violation);
            assert_eq!(a.feasible, b.feasible);
        }
    }

    #[test]
    fn header_violations_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "a,b,c\n1,2,3\n").unwrap();
        assert!(ParetoTable::read(&path).is_err());
    }
}
