use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, Read, Write};
use std::path::{Path, PathBuf};

use super::{io_err, HarnessError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowScope {
    Sequence,
    /// Aggregate over the sequences of one category.
    Average,
}

impl RowScope {
    fn as_str(self) -> &'static str {
        match self {
            RowScope::Sequence => "sequence",
            RowScope::Average => "average",
        }
    }
}

/// One scored cell. `relative` is the signed percentage change against the
/// baseline row of the same sequence, evaluator and metric; baseline rows
/// carry `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub scope: RowScope,
    /// Sequence name, or category name for averages.
    pub sequence: String,
    pub derainer: String,
    pub evaluator: String,
    pub metric: String,
    pub baseline: bool,
    pub value: Option<f64>,
    pub relative: Option<f64>,
    /// Empty, or why a value is missing.
    pub flag: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub kind: String,
    /// Free-form provenance lines: tool version, seed, resolved settings.
    pub header: Vec<String>,
    pub rows: Vec<ReportRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

const COLUMNS: [&str; 9] = [
    "scope", "sequence", "derainer", "evaluator", "metric", "baseline", "value", "relative", "flag",
];

fn opt_str(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn parse_opt(s: &str) -> Result<Option<f64>, HarnessError> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| HarnessError::Data(format!("bad number {s:?} in report")))
}

/// Percentages: two decimals below 10 in magnitude, one decimal above.
pub fn format_percent(p: f64) -> String {
    if !p.is_finite() {
        return p.to_string();
    }
    if p.abs() < 10.0 {
        format!("{p:.2}")
    } else {
        format!("{p:.1}")
    }
}

fn format_value(metric: &str, v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if metric.starts_with("within_") {
        format!("{v:.0}")
    } else if metric == "ssim" {
        format!("{v:.3}")
    } else {
        format!("{v:.2}")
    }
}

impl EvalReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), HarnessError> {
        let mut head = format!("# kind: {}\n", self.kind);
        for h in &self.header {
            if h.is_empty() {
                head.push_str("#\n");
            } else {
                let _ = writeln!(head, "# {h}");
            }
        }
        out.write_all(head.as_bytes()).map_err(io_err("report"))?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(COLUMNS)?;
        for r in &self.rows {
            w.write_record([
                r.scope.as_str(),
                &r.sequence,
                &r.derainer,
                &r.evaluator,
                &r.metric,
                if r.baseline { "true" } else { "false" },
                &opt_str(r.value),
                &opt_str(r.relative),
                &r.flag,
            ])?;
        }
        w.flush().map_err(io_err("report"))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, HarnessError> {
        let mut reader = std::io::BufReader::new(input);
        let mut kind = None;
        let mut header = Vec::new();
        let mut line = String::new();
        let mut body = String::new();
        loop {
            line.clear();
            if reader.read_line(&mut line).map_err(io_err("report"))? == 0 {
                break;
            }
            let trimmed = line.trim_end_matches(['\n', '\r']);
            let comment = if trimmed == "#" { Some("") } else { trimmed.strip_prefix("# ") };
            match comment {
                Some(c) if kind.is_none() => match c.strip_prefix("kind: ") {
                    Some(k) => kind = Some(k.to_string()),
                    None => return Err(HarnessError::Data("report does not start with a kind line".into())),
                },
                Some(c) => header.push(c.to_string()),
                None => {
                    body.push_str(&line);
                    reader.read_to_string(&mut body).map_err(io_err("report"))?;
                    break;
                }
            }
        }
        let kind = kind.ok_or_else(|| HarnessError::Data("empty report".into()))?;
        let mut r = csv::Reader::from_reader(body.as_bytes());
        if r.headers()?.iter().ne(COLUMNS) {
            return Err(HarnessError::Data("unexpected report columns".into()));
        }
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let scope = match &rec[0] {
                "sequence" => RowScope::Sequence,
                "average" => RowScope::Average,
                other => return Err(HarnessError::Data(format!("bad scope {other:?}"))),
            };
            let baseline = match &rec[5] {
                "true" => true,
                "false" => false,
                other => return Err(HarnessError::Data(format!("bad baseline flag {other:?}"))),
            };
            rows.push(ReportRow {
                scope,
                sequence: rec[1].to_string(),
                derainer: rec[2].to_string(),
                evaluator: rec[3].to_string(),
                metric: rec[4].to_string(),
                baseline,
                value: parse_opt(&rec[6])?,
                relative: parse_opt(&rec[7])?,
                flag: rec[8].to_string(),
            });
        }
        Ok(Self { kind, header, rows })
    }

    /// One table per evaluator and metric: derainers down, sequences and
    /// averages across. Baselines show absolute values, other rows the
    /// percentage change; the best entry of each column is bold.
    pub fn to_markdown(&self) -> String {
        let mut md = format!("# {} report\n\n", self.kind);
        if !self.header.is_empty() {
            md.push_str("```text\n");
            for h in &self.header {
                md.push_str(h);
                md.push('\n');
            }
            md.push_str("```\n\n");
        }
        let mut tables: Vec<(&str, &str)> = Vec::new();
        for r in &self.rows {
            let key = (r.evaluator.as_str(), r.metric.as_str());
            if !tables.contains(&key) {
                tables.push(key);
            }
        }
        for (evaluator, metric) in tables {
            let rows: Vec<&ReportRow> = self
                .rows
                .iter()
                .filter(|r| r.evaluator == evaluator && r.metric == metric)
                .collect();
            let mut columns: Vec<(RowScope, &str)> = Vec::new();
            let mut derainers: Vec<&str> = Vec::new();
            for r in &rows {
                let c = (r.scope, r.sequence.as_str());
                if !columns.contains(&c) {
                    columns.push(c);
                }
                if !derainers.contains(&r.derainer.as_str()) {
                    derainers.push(&r.derainer);
                }
            }
            columns.sort_by_key(|c| c.0 == RowScope::Average);
            let cell: HashMap<(RowScope, &str, &str), &ReportRow> = rows
                .iter()
                .map(|r| ((r.scope, r.sequence.as_str(), r.derainer.as_str()), *r))
                .collect();

            let _ = writeln!(md, "## {evaluator}: {metric}\n");
            md.push_str("| derainer |");
            for (scope, name) in &columns {
                match scope {
                    RowScope::Sequence => { let _ = write!(md, " {name} |"); }
                    RowScope::Average => { let _ = write!(md, " avg {name} |"); }
                }
            }
            md.push_str("\n|---|");
            md.push_str(&"---:|".repeat(columns.len()));
            md.push('\n');

            // score used to pick the best entry of each column
            let score = |r: &ReportRow| if r.baseline { Some(0.0) } else { r.relative.filter(|v| v.is_finite()) };
            let best: Vec<Option<f64>> = columns
                .iter()
                .map(|(s, n)| {
                    derainers
                        .iter()
                        .filter_map(|d| cell.get(&(*s, *n, *d)).and_then(|r| score(r)))
                        .fold(None, |b: Option<f64>, v| Some(b.map_or(v, |b| b.max(v))))
                })
                .collect();
            for d in &derainers {
                let _ = write!(md, "| {d} |");
                for (ci, (s, n)) in columns.iter().enumerate() {
                    let Some(r) = cell.get(&(*s, *n, *d)) else {
                        md.push_str(" |");
                        continue;
                    };
                    let text = if r.baseline {
                        r.value.map(|v| format_value(metric, v))
                    } else {
                        r.relative.map(format_percent)
                    }
                    .unwrap_or_else(|| "n/a".to_string());
                    if score(r).is_some() && score(r) == best[ci] {
                        let _ = write!(md, " **{text}** |");
                    } else {
                        let _ = write!(md, " {text} |");
                    }
                }
                md.push('\n');
            }
            md.push('\n');
        }
        md
    }
}

/// Writes `<dir>/<kind>.csv` and `<dir>/<kind>.md`, returning both paths.
pub fn emit_report(report: &EvalReport, dir: &Path) -> Result<(PathBuf, PathBuf), HarnessError> {
    if report.rows.is_empty() {
        return Err(HarnessError::Data("nothing was evaluated".into()));
    }
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let csv_path = dir.join(format!("{}.csv", report.kind));
    let md_path = dir.join(format!("{}.md", report.kind));
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    std::fs::write(&csv_path, buf).map_err(io_err(&csv_path))?;
    std::fs::write(&md_path, report.to_markdown()).map_err(io_err(&md_path))?;
    Ok((csv_path, md_path))
}
