//! Line-delimited JSON event trace. Node `0` denotes the source on ingest
//! and the data collector on reads.

use serde::{Deserialize, Serialize};

use super::ClusterError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Ingest,
    Fail,
    Repair,
    DcRead,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Ingest => "ingest",
            EventKind::Fail => "fail",
            EventKind::Repair => "repair",
            EventKind::DcRead => "dc_read",
        }
    }
}

/// Subsymbols sent over one edge for each stripe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transfer {
    pub from: usize,
    pub to: usize,
    pub subsymbols: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub epoch: u64,
    pub event: EventKind,
    pub nodes: Vec<usize>,
    pub transfers: Vec<Transfer>,
    pub stripes: usize,
    /// Repair bandwidth in units, as an exact rational.
    pub gamma: Option<String>,
    pub scheme: Option<String>,
}

impl TraceRecord {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("trace records serialize")
    }

    pub fn subsymbols_per_stripe(&self) -> usize {
        self.transfers.iter().map(|t| t.subsymbols).sum()
    }
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceRecord>, ClusterError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| ClusterError::Trace(format!("line {}: {e}", i + 1))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_field_names() {
        let r = TraceRecord {
            epoch: 3,
            event: EventKind::DcRead,
            nodes: vec![4, 5, 6],
            transfers: vec![Transfer {
                from: 4,
                to: 0,
                subsymbols: 2,
            }],
            stripes: 1,
            gamma: None,
            scheme: None,
        };
        let line = r.to_line();
        assert_eq!(
            line,
            r#"{"epoch":3,"event":"dc_read","nodes":[4,5,6],"transfers":[{"from":4,"to":0,"subsymbols":2}],"stripes":1,"gamma":null,"scheme":null}"#
        );
        assert_eq!(parse_trace(&format!("{line}\n\n{line}\n")).unwrap(), vec![r.clone(), r]);
        assert!(matches!(parse_trace("{"), Err(ClusterError::Trace(_))));
    }
}
