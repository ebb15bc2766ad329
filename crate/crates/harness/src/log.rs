//! Append-only session log.
//!
//! One JSON object per line, tagged by `event`:
//!
//! | event          | fields                                                         |
//! |----------------|----------------------------------------------------------------|
//! | `plan_created` | `session_id`, `alpha`, `plan` (`session_id`, `seed`, `n`, `design`, `trials[{trial_index, stimulus_id}]`), `stimuli[{id, kind, image_path, provenance}]` |
//! | `response`     | `session_id`, `trial_index`, `choice` (`real`/`synthetic`), `timestamp_ms` |
//! | `evaluation`   | `session_id`, `result` (`n`, `k_correct`, `p_value`, `alpha`, `verdict`) |
//!
//! Every record is written, flushed and synced before the state change it
//! describes is acknowledged, so replaying the file reproduces every
//! acknowledged state. A torn final line (a write interrupted by a crash) was
//! never acknowledged; readers skip it and [`SessionLog::open`] cuts it off.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use gts_core::protocol::{evaluate, Kind, SessionRecord, Stimulus, TestResult, TrialPlan};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

/// File name of the log inside a log directory.
pub const LOG_FILE_NAME: &str = "sessions.jsonl";
/// Environment variable overriding the log directory.
pub const LOG_DIR_ENV: &str = "GTT_LOG_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LogRecord {
    PlanCreated { session_id: String, alpha: f64, plan: TrialPlan, stimuli: Vec<Stimulus> },
    Response { session_id: String, trial_index: usize, choice: Kind, timestamp_ms: u64 },
    Evaluation { session_id: String, result: TestResult },
}

impl LogRecord {
    pub fn session_id(&self) -> &str {
        match self {
            LogRecord::PlanCreated { session_id, .. }
            | LogRecord::Response { session_id, .. }
            | LogRecord::Evaluation { session_id, .. } => session_id,
        }
    }
}

/// `path` itself if it is a file, else `path/sessions.jsonl`.
pub fn log_file_in(path: &Path) -> PathBuf {
    if path.is_dir() || path.extension().is_none() {
        path.join(LOG_FILE_NAME)
    } else {
        path.to_path_buf()
    }
}

/// Single ordered sink for log records.
#[derive(Debug)]
pub struct SessionLog {
    path: PathBuf,
    file: File,
}

impl SessionLog {
    /// Opens `path` for appending, creating parent directories, and drops any
    /// torn final line.
    pub fn open(path: &Path) -> Result<Self, HarnessError> {
        let io = |e: std::io::Error| HarnessError::User(format!("session log {}: {e}", path.display()));
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
        let mut file = OpenOptions::new().read(true).append(true).create(true).open(path).map_err(io)?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes).map_err(io)?;
        if !bytes.is_empty() && !bytes.ends_with(b"\n") {
            let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
            file.set_len(keep as u64).map_err(io)?;
            file.sync_data().map_err(io)?;
        }
        file.seek(SeekFrom::End(0)).map_err(io)?;
        Ok(Self { path: path.to_path_buf(), file })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Writes one line and syncs it to disk.
    pub fn append(&mut self, record: &LogRecord) -> Result<(), HarnessError> {
        let mut line = serde_json::to_vec(record).map_err(|e| HarnessError::Internal(e.to_string()))?;
        line.push(b'\n');
        let io = |e: std::io::Error| HarnessError::Internal(format!("session log {}: {e}", self.path.display()));
        self.file.write_all(&line).map_err(io)?;
        self.file.flush().map_err(io)?;
        self.file.sync_data().map_err(io)
    }
}

/// All complete records in a log file; a missing file reads as empty.
pub fn read_log(path: &Path) -> Result<Vec<LogRecord>, HarnessError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(HarnessError::User(format!("session log {}: {e}", path.display()))),
    };
    let complete = match text.rfind('\n') {
        Some(i) => &text[..=i],
        None => "",
    };
    complete
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| HarnessError::User(format!("{}:{}: bad log record: {e}", path.display(), i + 1)))
        })
        .collect()
}

/// A session rebuilt from its log records.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplayedSession {
    pub session: SessionRecord,
    pub stimuli: Vec<Stimulus>,
    pub alpha: f64,
    /// The last `evaluation` record, if one was written.
    pub logged_result: Option<TestResult>,
}

impl ReplayedSession {
    pub fn id(&self) -> &str {
        &self.session.plan.session_id
    }

    /// Recomputes the result from the responses; errors while incomplete.
    pub fn result(&self) -> Result<TestResult, HarnessError> {
        Ok(evaluate(&self.session, &self.stimuli, self.alpha)?)
    }
}

/// Rebuilds sessions in creation order.
pub fn replay(records: &[LogRecord]) -> Result<Vec<ReplayedSession>, HarnessError> {
    let mut sessions: Vec<ReplayedSession> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (line, record) in records.iter().enumerate() {
        let corrupt = |msg: String| HarnessError::User(format!("log record {}: {msg}", line + 1));
        match record {
            LogRecord::PlanCreated { session_id, alpha, plan, stimuli } => {
                if index.contains_key(session_id) {
                    return Err(corrupt(format!("session {session_id} created twice")));
                }
                if plan.session_id != *session_id {
                    return Err(corrupt(format!("plan id {} does not match {session_id}", plan.session_id)));
                }
                index.insert(session_id.clone(), sessions.len());
                sessions.push(ReplayedSession {
                    session: SessionRecord::new(plan.clone()),
                    stimuli: stimuli.clone(),
                    alpha: *alpha,
                    logged_result: None,
                });
            }
            LogRecord::Response { session_id, trial_index, choice, timestamp_ms } => {
                let i = *index.get(session_id).ok_or_else(|| corrupt(format!("unknown session {session_id}")))?;
                sessions[i]
                    .session
                    .record_response(*trial_index, *choice, *timestamp_ms)
                    .map_err(|e| corrupt(e.to_string()))?;
            }
            LogRecord::Evaluation { session_id, result } => {
                let i = *index.get(session_id).ok_or_else(|| corrupt(format!("unknown session {session_id}")))?;
                sessions[i].logged_result = Some(result.clone());
            }
        }
    }
    Ok(sessions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use gts_core::protocol::plan_trials;

    fn stimuli() -> Vec<Stimulus> {
        vec![
            Stimulus { id: "a".into(), kind: Kind::Real, image_path: "a.ppm".into(), provenance: String::new() },
            Stimulus { id: "b".into(), kind: Kind::Synthetic, image_path: "b.ppm".into(), provenance: String::new() },
        ]
    }

    fn created(id: &str, n: usize) -> LogRecord {
        let mut plan = plan_trials(&stimuli(), n, 3).unwrap();
        plan.session_id = id.into();
        LogRecord::PlanCreated { session_id: id.into(), alpha: 0.05, plan, stimuli: stimuli() }
    }

    fn response(id: &str, trial_index: usize) -> LogRecord {
        LogRecord::Response { session_id: id.into(), trial_index, choice: Kind::Real, timestamp_ms: 9 }
    }

    #[test]
    fn record_tags_are_stable() {
        let v = serde_json::to_value(response("s", 0)).unwrap();
        assert_eq!(v["event"], "response");
        assert_eq!(v["choice"], "real");
        let v = serde_json::to_value(created("s", 1)).unwrap();
        assert_eq!(v["event"], "plan_created");
        assert_eq!(v["plan"]["trials"][0]["trial_index"], 0);
    }

    #[test]
    fn replay_rejects_inconsistent_logs() {
        assert!(replay(&[response("s", 0)]).is_err());
        assert!(replay(&[created("s", 2), created("s", 2)]).is_err());
        assert!(replay(&[created("s", 2), response("s", 0), response("s", 0)]).is_err());
        let ok = replay(&[created("s", 2), response("s", 1)]).unwrap();
        assert_eq!(ok[0].session.responses.len(), 1);
        assert!(ok[0].result().is_err());
    }

    #[test]
    fn torn_tail_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(LOG_FILE_NAME);
        let mut log = SessionLog::open(&path).unwrap();
        log.append(&created("s", 2)).unwrap();
        log.append(&response("s", 0)).unwrap();
        drop(log);
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(br#"{"event":"response","session_id":"s","tri"#).unwrap();
        drop(f);
        assert_eq!(read_log(&path).unwrap().len(), 2);
        let mut log = SessionLog::open(&path).unwrap();
        log.append(&response("s", 1)).unwrap();
        let records = read_log(&path).unwrap();
        assert_eq!(records.len(), 3);
        assert!(replay(&records).unwrap()[0].session.is_complete());
    }
}
