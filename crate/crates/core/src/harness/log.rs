use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const LOG_HEADER: &str =
    "generation,best_train_perf,test_perf,train_solved,test_solved,wall_ms";

/// One row of the run log. Test columns are filled only on the test
/// schedule; `wall_ms` only when wall-time recording is enabled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub generation: u32,
    pub best_train_perf: f64,
    pub test_perf: Option<f64>,
    pub train_solved: usize,
    pub test_solved: Option<usize>,
    pub wall_ms: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RunLog {
    pub rows: Vec<LogRow>,
}

fn csv_error(e: csv::Error) -> Error {
    Error::Format {
        what: "run log",
        reason: e.to_string(),
    }
}

impl RunLog {
    pub fn push(&mut self, row: LogRow) {
        self.rows.push(row);
    }

    pub fn last(&self) -> Option<&LogRow> {
        self.rows.last()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).expect("log rows always serialize");
        }
        let body =
            String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8");
        format!("{LOG_HEADER}\n{body}")
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header: Vec<String> = r
            .headers()
            .map_err(csv_error)?
            .iter()
            .map(str::to_owned)
            .collect();
        if header.join(",") != LOG_HEADER {
            return Err(Error::Format {
                what: "run log",
                reason: format!("unexpected header {:?}", header.join(",")),
            });
        }
        let rows = r
            .deserialize()
            .collect::<std::result::Result<Vec<LogRow>, _>>()
            .map_err(csv_error)?;
        Ok(Self { rows })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }

    /// Rows that carry test-set results.
    pub fn test_rows(&self) -> impl Iterator<Item = &LogRow> {
        self.rows.iter().filter(|r| r.test_perf.is_some())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let log = RunLog {
            rows: vec![
                LogRow {
                    generation: 0,
                    best_train_perf: 0.25,
                    test_perf: Some(0.125),
                    train_solved: 0,
                    test_solved: Some(3),
                    wall_ms: None,
                },
                LogRow {
                    generation: 1,
                    best_train_perf: 0.1 + 0.2,
                    test_perf: None,
                    train_solved: 1,
                    test_solved: None,
                    wall_ms: Some(17),
                },
            ],
        };
        let text = log.to_csv();
        assert!(text.starts_with(LOG_HEADER));
        assert_eq!(text.lines().nth(1).unwrap(), "0,0.25,0.125,0,3,");
        assert_eq!(text.lines().nth(2).unwrap(), "1,0.30000000000000004,,1,,17");
        assert_eq!(RunLog::from_csv(&text).unwrap(), log);
        assert!(RunLog::from_csv("a,b\n1,2\n").is_err());
        assert!(RunLog::from_csv(&format!("{LOG_HEADER}\nx,1,,0,,\n")).is_err());
    }
}
