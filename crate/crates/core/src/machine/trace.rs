//! CSV transition traces: `step#, rule-name, resource, stack-depth`.

use std::io::Write;

use crate::machine::MachineState;
use crate::rational::fmt_rat;

pub const TRACE_HEADER: &str = "step#,rule-name,resource,stack-depth";

/// Buffers trace rows; `resource` is the net cost after the step.
#[derive(Debug, Default)]
pub struct TraceWriter {
    rows: Vec<String>,
}

impl TraceWriter {
    pub fn new() -> TraceWriter {
        TraceWriter::default()
    }

    pub fn record(&mut self, step: u64, rule: &str, s: &MachineState) {
        self.rows
            .push(format!("{step},{rule},{},{}", fmt_rat(&s.counters.net), s.stack.len()));
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "{TRACE_HEADER}")?;
        for r in &self.rows {
            writeln!(out, "{r}")?;
        }
        Ok(())
    }
}
