//! Interactive loop: queries end with `;`, meta commands start with `\`.
//! Prompts go to stderr so piped output stays byte-identical with batch mode.

use std::io::{self, BufRead, Write};

use tpiet_core::Workspace;

use crate::{diagnostic, render, Format};

const HELP: &str = "\
meta commands:
  \\layers            list layers with stage counts and lifespans
  \\dims              list dimensions and their members
  \\mapping           list alpha mapping rows
  \\explain <query>   show the evaluation plan
  \\now <tick>        move the engine's current tick
  \\format <f>        output format: table, csv or geojson
  \\help              this help
  \\q                 quit
queries end with ';'";

pub fn run(ws: &mut Workspace) -> i32 {
    let stdin = io::stdin();
    let mut format = Format::Table;
    let mut buffer = String::new();
    prompt(buffer.is_empty());
    for line in stdin.lock().lines() {
        let Ok(line) = line else { break };
        let trimmed = line.trim();
        if buffer.is_empty() && trimmed.starts_with('\\') {
            if !meta(trimmed, ws, &mut format) {
                return 0;
            }
            prompt(true);
            continue;
        }
        if !trimmed.is_empty() {
            if !buffer.is_empty() {
                buffer.push(' ');
            }
            buffer.push_str(trimmed);
        }
        if buffer.trim_end().ends_with(';') {
            let text = std::mem::take(&mut buffer);
            match ws.run_query(&text) {
                Ok(rel) => print!("{}", render(&rel, format)),
                Err(e) => eprint!("{}", diagnostic(&text, &e)),
            }
            io::stdout().flush().ok();
        }
        prompt(buffer.is_empty());
    }
    0
}

fn prompt(fresh: bool) {
    eprint!("{}", if fresh { "tpiet> " } else { "   ... " });
    io::stderr().flush().ok();
}

/// Returns false when the loop should exit.
fn meta(line: &str, ws: &mut Workspace, format: &mut Format) -> bool {
    let (cmd, rest) = match line.split_once(char::is_whitespace) {
        Some((c, r)) => (c, r.trim()),
        None => (line, ""),
    };
    match cmd {
        "\\q" | "\\quit" => return false,
        "\\help" => println!("{HELP}"),
        "\\layers" => {
            for layer in &ws.layers {
                let spans: Vec<String> = layer.lifespan().iter().map(|iv| iv.to_string()).collect();
                println!(
                    "{} ({}): {} objects, {} stages, lifespan {}",
                    layer.name,
                    layer.kind,
                    layer.object_ids().len(),
                    layer.stages().len(),
                    spans.join(" ")
                );
            }
        }
        "\\dims" => {
            for dim in &ws.warehouse.dimensions {
                println!("{}: {}", dim.name, dim.levels.join(" -> "));
                for row in &dim.rows {
                    let validity = row.interval.map(|iv| format!(" {iv}")).unwrap_or_default();
                    println!(
                        "  {} [{}] -> {}{}",
                        row.member,
                        dim.levels[row.level],
                        row.parent.as_deref().unwrap_or("-"),
                        validity
                    );
                }
            }
        }
        "\\mapping" => {
            for m in &ws.mappings {
                println!("{} ({}) -> layer {}:", m.dimension, m.level, m.layer);
                for row in &m.rows {
                    println!("  {} <-> {} {}", row.member, row.object_id, row.interval);
                }
            }
        }
        "\\explain" => match ws.explain_query(rest) {
            Ok(plan) => print!("{plan}"),
            Err(e) => eprint!("{}", diagnostic(rest, &e)),
        },
        "\\now" => match rest.parse() {
            Ok(t) => {
                ws.set_current(t);
                println!("current tick is now {t}");
            }
            Err(_) => eprintln!("\\now needs an integer tick"),
        },
        "\\format" => match rest {
            "table" => *format = Format::Table,
            "csv" => *format = Format::Csv,
            "geojson" => *format = Format::Geojson,
            other => eprintln!("unknown format '{other}' (table, csv, geojson)"),
        },
        other => eprintln!("unknown meta command '{other}' (\\help lists them)"),
    }
    true
}
