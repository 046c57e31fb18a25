use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use superosc::experiments::{ExperimentReport, SweepResult, Table};

use crate::config::{Outputs, RunConfig};

/// Top-level JSON written for every run.
#[derive(Serialize)]
pub struct Document {
    pub experiment: String,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ExperimentReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepResult>,
}

impl Document {
    pub fn report(name: &str, config: &RunConfig, report: ExperimentReport) -> Self {
        Document {
            experiment: name.into(),
            config: config.clone(),
            report: Some(report),
            sweep: None,
        }
    }

    pub fn sweep(name: &str, config: &RunConfig, sweep: SweepResult) -> Self {
        Document {
            experiment: name.into(),
            config: config.clone(),
            report: None,
            sweep: Some(sweep),
        }
    }

    /// Write the JSON report plus any CSV grids; returns the paths written.
    pub fn write(&self, dir: &Path, outputs: &Outputs) -> anyhow::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut written = Vec::new();
        let report_path = dir.join(&outputs.report);
        let json = serde_json::to_string_pretty(self)?;
        fs::write(&report_path, json).with_context(|| format!("writing {}", report_path.display()))?;
        written.push(report_path);

        if let Some(r) = &self.report {
            for (key, table) in &r.tables {
                let name = match key.as_str() {
                    "position" => outputs.position_grid.clone(),
                    "momentum" => outputs.momentum_grid.clone(),
                    other => format!("{other}.csv"),
                };
                let path = dir.join(name);
                write_table(&path, table)?;
                written.push(path);
            }
        }
        if let Some(s) = &self.sweep {
            let path = dir.join("sweep.csv");
            write_sweep(&path, s)?;
            written.push(path);
        }
        Ok(written)
    }
}

fn write_table(path: &Path, table: &Table) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn write_sweep(path: &Path, s: &SweepResult) -> anyhow::Result<()> {
    let keys: BTreeSet<&String> = s.points.iter().flat_map(|p| p.outputs.keys()).collect();
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    let mut header = vec![s.variable.clone()];
    header.extend(keys.iter().map(|k| k.to_string()));
    header.push("error".into());
    w.write_record(&header)?;
    for p in &s.points {
        let mut row = vec![p.value.to_string()];
        row.extend(
            keys.iter()
                .map(|k| p.outputs.get(*k).map(|v| v.to_string()).unwrap_or_default()),
        );
        row.push(p.error.as_ref().map(|e| e.0.clone()).unwrap_or_default());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
