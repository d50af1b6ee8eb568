//! Report assembly and emission in csv, json, and text-table form. All
//! formats are deterministic byte-for-byte for a fixed report.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Sport;
use crate::pipeline::MetricTriple;
use crate::ranker::Standings;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRow {
    pub model: String,
    pub metrics: MetricTriple,
    /// populated only for the randomized baseline (std over its trials)
    pub std: Option<MetricTriple>,
    /// correctly predicted playoff teams (absent for randomized)
    pub playoff_correct: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub sport: Sport,
    pub test_season: i32,
    pub rows: Vec<ReportRow>,
    pub standings: Vec<Standings>,
    pub actual_standings: Option<Standings>,
    pub randomized_trials: usize,
    pub tally_totals: Vec<f64>,
}

impl Report {
    pub fn new(sport: Sport, test_season: i32) -> Self {
        Report {
            sport,
            test_season,
            rows: Vec::new(),
            standings: Vec::new(),
            actual_standings: None,
            randomized_trials: 0,
            tally_totals: Vec::new(),
        }
    }

    fn ap_header(&self) -> &'static str {
        match self.sport {
            Sport::Rugby => "AP",
            Sport::Basketball => "mAP",
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::validation(format!("report serialization failed: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::validation(format!("bad report json: {e}")))
    }

    /// One row per model: the std columns are empty except for the
    /// randomized baseline.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "model,{},spearman,ndcg,{}_std,spearman_std,ndcg_std,playoff_correct\n",
            self.ap_header().to_lowercase(),
            self.ap_header().to_lowercase()
        );
        for row in &self.rows {
            let std = match &row.std {
                Some(s) => format!("{},{},{}", s.ap_or_map, s.spearman, s.ndcg),
                None => ",,".to_string(),
            };
            let playoff = row
                .playoff_correct
                .map(|p| p.to_string())
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.model, row.metrics.ap_or_map, row.metrics.spearman, row.metrics.ndcg,
                std, playoff
            ));
        }
        out
    }

    pub fn to_text_table(&self) -> String {
        let header = format!("Model | {} | r_s | NDCG", self.ap_header());
        let mut lines = vec![
            format!("season {} ({:?})", self.test_season, self.sport),
            header,
        ];
        let cell = |v: f64, s: Option<f64>| -> String {
            match s {
                Some(s) => format!("{v:.3} ±{s:.3}"),
                None => format!("{v:.3}"),
            }
        };
        for row in &self.rows {
            lines.push(format!(
                "{} | {} | {} | {}",
                row.model,
                cell(row.metrics.ap_or_map, row.std.map(|s| s.ap_or_map)),
                cell(row.metrics.spearman, row.std.map(|s| s.spearman)),
                cell(row.metrics.ndcg, row.std.map(|s| s.ndcg)),
            ));
        }
        let width = lines.iter().map(|l| l.len()).max().unwrap_or(0);
        let rule = "-".repeat(width);
        let mut out = String::new();
        for (i, line) in lines.iter().enumerate() {
            out.push_str(line);
            out.push('\n');
            if i == 1 {
                out.push_str(&rule);
                out.push('\n');
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Csv,
    Json,
    TextTable,
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::TextTable => "text-table",
        })
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "text-table" => Ok(ReportFormat::TextTable),
            other => Err(Error::validation(format!("unknown report format: {other}"))),
        }
    }
}

fn standings_file_name(label: &str) -> String {
    let slug: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    format!("standings_{slug}.csv")
}

/// Write the report in the requested format plus one standings CSV per
/// model/baseline (and the actual table). Returns the report file path.
pub fn emit_report(report: &Report, format: ReportFormat, out_dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let (name, body) = match format {
        ReportFormat::Csv => ("report.csv".to_string(), report.to_csv()),
        ReportFormat::Json => ("report.json".to_string(), report.to_json()?),
        ReportFormat::TextTable => ("report.txt".to_string(), report.to_text_table()),
    };
    let path = out_dir.join(name);
    std::fs::write(&path, body)?;
    for standings in &report.standings {
        std::fs::write(
            out_dir.join(standings_file_name(&standings.label)),
            standings.to_csv(),
        )?;
    }
    if let Some(actual) = &report.actual_standings {
        std::fs::write(out_dir.join(standings_file_name("actual")), actual.to_csv())?;
    }
    Ok(path)
}
