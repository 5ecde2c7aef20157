//! Small RFC-4180-ish CSV reader/writer used by the layer and warehouse file
//! formats. Quoted fields may contain commas (WKT needs this) and doubled
//! quotes.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("row {row}: {msg}")]
pub struct CsvError {
    pub row: usize,
    pub msg: String,
}

/// Parse into records; rows are 1-based including the header.
pub fn parse(text: &str) -> Result<Vec<(usize, Vec<String>)>, CsvError> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let row = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        out.push((row, split_record(line, row)?));
    }
    Ok(out)
}

fn split_record(line: &str, row: usize) -> Result<Vec<String>, CsvError> {
    let mut fields = Vec::new();
    let mut field = String::new();
    let mut chars = line.chars().peekable();
    let mut in_quotes = false;
    while let Some(c) = chars.next() {
        if in_quotes {
            match c {
                '"' if chars.peek() == Some(&'"') => {
                    chars.next();
                    field.push('"');
                }
                '"' => in_quotes = false,
                other => field.push(other),
            }
        } else {
            match c {
                '"' => in_quotes = true,
                ',' => fields.push(std::mem::take(&mut field)),
                other => field.push(other),
            }
        }
    }
    if in_quotes {
        return Err(CsvError {
            row,
            msg: "unterminated quoted field".into(),
        });
    }
    fields.push(field);
    Ok(fields)
}

pub fn write_record(fields: &[String]) -> String {
    fields
        .iter()
        .map(|f| {
            if f.contains(',') || f.contains('"') || f.contains('\n') {
                format!("\"{}\"", f.replace('"', "\"\""))
            } else {
                f.clone()
            }
        })
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quoted_wkt_survives() {
        let line = r#"p1,"POLYGON((0 0,4 0,4 4,0 4,0 0))",10,Now"#;
        let rec = split_record(line, 1).unwrap();
        assert_eq!(rec.len(), 4);
        assert_eq!(rec[1], "POLYGON((0 0,4 0,4 4,0 4,0 0))");
        assert_eq!(write_record(&rec), line);
    }

    #[test]
    fn blank_lines_skipped_and_rows_numbered() {
        let rows = parse("a,b\n\nc,d\n").unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].0, 3);
    }
}
