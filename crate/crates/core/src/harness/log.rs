use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocols::TrialRecord;

use super::EstimateWithError;

pub const LOG_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("line {line}: {message} (field `{field}`)")]
    Malformed { line: usize, field: String, message: String },
    #[error("line {line}: expected a header first")]
    MissingHeader { line: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogHeader {
    pub format_version: u32,
    pub tool_version: String,
    pub seed: u64,
    pub first_trial: u64,
    pub trials: u64,
    pub config: serde_json::Value,
}

/// Named estimates and plain values describing a finished run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSummary {
    pub trials: u64,
    pub accepted: u64,
    pub estimates: BTreeMap<String, EstimateWithError>,
    pub values: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogLine {
    Header(LogHeader),
    Trial(TrialRecord),
    Summary(RunSummary),
}

/// Contents of one log file.
#[derive(Clone, Debug, PartialEq)]
pub struct RunLog {
    pub header: LogHeader,
    pub records: Vec<TrialRecord>,
    pub summary: Option<RunSummary>,
}

/// Serializing appender: the only thing that writes a log.
pub struct LogWriter<W: Write> {
    out: W,
}

impl<W: Write> LogWriter<W> {
    pub fn new(out: W) -> Self {
        Self { out }
    }

    pub fn line(&mut self, line: &LogLine) -> Result<(), LogError> {
        serde_json::to_writer(&mut self.out, line).map_err(std::io::Error::from)?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W, LogError> {
        self.out.flush()?;
        Ok(self.out)
    }
}

pub fn write_log_to<W: Write>(out: W, log: &RunLog) -> Result<(), LogError> {
    let mut w = LogWriter::new(out);
    w.line(&LogLine::Header(log.header.clone()))?;
    for r in &log.records {
        w.line(&LogLine::Trial(r.clone()))?;
    }
    if let Some(s) = &log.summary {
        w.line(&LogLine::Summary(s.clone()))?;
    }
    w.finish()?;
    Ok(())
}

pub fn write_log(path: &Path, log: &RunLog) -> Result<(), LogError> {
    write_log_to(BufWriter::new(File::create(path)?), log)
}

fn parse_line(text: &str, line: usize) -> Result<LogLine, LogError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| LogError::Malformed {
        line,
        field: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

pub fn read_log_from<R: BufRead>(input: R) -> Result<RunLog, LogError> {
    let mut header = None;
    let mut records = Vec::new();
    let mut summary = None;
    for (i, text) in input.lines().enumerate() {
        let text = text?;
        if text.trim().is_empty() {
            continue;
        }
        match parse_line(&text, i + 1)? {
            LogLine::Header(h) if header.is_none() => header = Some(h),
            LogLine::Header(_) => {
                return Err(LogError::Malformed {
                    line: i + 1,
                    field: ".".into(),
                    message: "second header".into(),
                })
            }
            _ if header.is_none() => return Err(LogError::MissingHeader { line: i + 1 }),
            LogLine::Trial(r) => records.push(r),
            LogLine::Summary(s) => summary = Some(s),
        }
    }
    let header = header.ok_or(LogError::MissingHeader { line: 1 })?;
    Ok(RunLog {
        header,
        records,
        summary,
    })
}

pub fn read_log(path: &Path) -> Result<RunLog, LogError> {
    read_log_from(BufReader::new(File::open(path)?))
}

/// Every record of several shard logs, in shard order.
pub fn read_shards(paths: &[&Path]) -> Result<Vec<TrialRecord>, LogError> {
    let mut out = Vec::new();
    for p in paths {
        out.extend(read_log(p)?.records);
    }
    Ok(out)
}

/// Summary export: one row per estimate or value.
pub fn write_summary_csv<W: Write>(out: W, summary: &RunSummary) -> Result<(), LogError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["quantity", "value", "stderr", "n"])?;
    w.write_record(["trials", &summary.trials.to_string(), "", ""])?;
    w.write_record(["accepted", &summary.accepted.to_string(), "", ""])?;
    for (k, e) in &summary.estimates {
        w.write_record([k.as_str(), &e.value.to_string(), &e.stderr.to_string(), &e.n.to_string()])?;
    }
    for (k, v) in &summary.values {
        w.write_record([k.as_str(), &v.to_string(), "", ""])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{AgentResult, Outcome, ProtocolKind};

    fn sample_log(n: u64) -> RunLog {
        let records = (0..n)
            .map(|i| {
                let mut r = TrialRecord::new(i, ProtocolKind::Bell);
                r.alice = Some(AgentResult::new("Q", Outcome::Sign(1)));
                r.fidelity = Some(0.1 + i as f64 / 3.0);
                r.accepted = i % 2 == 0;
                r
            })
            .collect();
        RunLog {
            header: LogHeader {
                format_version: LOG_FORMAT_VERSION,
                tool_version: "test".into(),
                seed: 1,
                first_trial: 0,
                trials: n,
                config: serde_json::json!({"protocol": "bell"}),
            },
            records,
            summary: Some(RunSummary {
                trials: n,
                ..Default::default()
            }),
        }
    }

    #[test]
    fn round_trip() {
        let log = sample_log(50);
        let mut buf = Vec::new();
        write_log_to(&mut buf, &log).unwrap();
        assert_eq!(read_log_from(buf.as_slice()).unwrap(), log);
    }

    #[test]
    fn truncated_line_names_line() {
        let mut buf = Vec::new();
        write_log_to(&mut buf, &sample_log(3)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        let cut = &lines[2][..lines[2].len() / 2];
        lines[2] = cut;
        match read_log_from(lines.join("\n").as_bytes()) {
            Err(LogError::Malformed { line: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_field_is_named() {
        let text = "{\"header\":{\"format_version\":1,\"tool_version\":\"t\",\"seed\":\"x\",\"first_trial\":0,\"trials\":1,\"config\":{}}}";
        match read_log_from(text.as_bytes()) {
            Err(LogError::Malformed { line: 1, field, .. }) => assert!(field.contains("seed")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_has_header_row() {
        let mut s = RunSummary::default();
        s.values.insert("chsh_exact".into(), 2.5);
        let mut buf = Vec::new();
        write_summary_csv(&mut buf, &s).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("quantity,value,stderr,n\n"));
        assert!(text.contains("chsh_exact,2.5,,"));
    }
}
