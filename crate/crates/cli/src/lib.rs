//! Library surface of the tpiet command line tool: workspace config loading
//! and saving, op-spec parsing, result rendering and the interactive loop.
//! The `tpiet` binary is a thin wrapper over these.

pub mod config;
pub mod opspec;
pub mod repl;

use clap::ValueEnum;

use tpiet_core::workspace::QueryError;
use tpiet_core::ResultRelation;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Geojson,
}

pub fn render(rel: &ResultRelation, format: Format) -> String {
    match format {
        Format::Table => rel.to_table(),
        Format::Csv => rel.to_csv(),
        Format::Geojson => {
            let mut s = rel.to_geojson();
            s.push('\n');
            s
        }
    }
}

/// Point at the failing position with a caret when the error carries one.
pub fn diagnostic(query: &str, err: &QueryError) -> String {
    let (line, col) = match err {
        QueryError::Parse(e) => (e.line as usize, e.col as usize),
        QueryError::Validate(e) => (e.span.line as usize, e.span.col as usize),
        QueryError::Eval(_) => (0, 0),
    };
    let mut out = format!("error: {err}\n");
    if line > 0 {
        if let Some(src) = query.lines().nth(line - 1) {
            out.push_str(&format!("  {src}\n"));
            out.push_str(&format!("  {}^\n", " ".repeat(col.saturating_sub(1))));
        }
    }
    out
}
