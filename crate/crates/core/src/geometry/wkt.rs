//! Well-known-text reader and writer for the supported subset:
//! POINT, LINESTRING and single-ring POLYGON, no SRID prefixes.

use std::fmt;

use thiserror::Error;

use super::{validate_ring, Geometry, Point};
use crate::value::fmt_num;

#[derive(Debug, Error, PartialEq)]
#[error("WKT error at position {pos}: {msg}")]
pub struct WktError {
    pub pos: usize,
    pub msg: String,
}

struct Scanner<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn new(text: &'a str) -> Scanner<'a> {
        Scanner { text, pos: 0 }
    }

    fn err<T>(&self, msg: impl fmt::Display) -> Result<T, WktError> {
        Err(WktError {
            pos: self.pos,
            msg: msg.to_string(),
        })
    }

    fn skip_ws(&mut self) {
        while self.text[self.pos..].starts_with(|c: char| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.text[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char) -> Result<(), WktError> {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn word(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.text[self.pos..].starts_with(|c: char| c.is_ascii_alphabetic()) {
            self.pos += 1;
        }
        self.text[start..self.pos].to_string()
    }

    fn number(&mut self) -> Result<f64, WktError> {
        self.skip_ws();
        let start = self.pos;
        while self.text[self.pos..]
            .starts_with(|c: char| c.is_ascii_digit() || matches!(c, '-' | '+' | '.' | 'e' | 'E'))
        {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a number");
        }
        self.text[start..self.pos]
            .parse::<f64>()
            .or_else(|e| self.err(e))
    }

    fn coord(&mut self) -> Result<Point, WktError> {
        let x = self.number()?;
        let y = self.number()?;
        Ok(Point::new(x, y))
    }

    fn coord_list(&mut self) -> Result<Vec<Point>, WktError> {
        self.expect('(')?;
        let mut pts = vec![self.coord()?];
        while self.peek() == Some(',') {
            self.pos += 1;
            pts.push(self.coord()?);
        }
        self.expect(')')?;
        Ok(pts)
    }

    fn end(&mut self) -> Result<(), WktError> {
        self.skip_ws();
        if self.pos != self.text.len() {
            return self.err("trailing input after geometry");
        }
        Ok(())
    }
}

/// Parse a WKT geometry; errors carry the offending character position.
pub fn parse_wkt(text: &str) -> Result<Geometry, WktError> {
    let mut s = Scanner::new(text);
    let tag = s.word().to_ascii_uppercase();
    match tag.as_str() {
        "POINT" => {
            s.expect('(')?;
            let p = s.coord()?;
            s.expect(')')?;
            s.end()?;
            Ok(Geometry::Point(p))
        }
        "LINESTRING" => {
            let pts = s.coord_list()?;
            if pts.len() < 2 {
                return s.err("linestring needs at least 2 vertices");
            }
            s.end()?;
            Ok(Geometry::LineString(pts))
        }
        "POLYGON" => {
            s.expect('(')?;
            let ring = s.coord_list()?;
            if s.peek() == Some(',') {
                return s.err("polygons with holes are not supported");
            }
            s.expect(')')?;
            s.end()?;
            if let Err(msg) = validate_ring(&ring) {
                return s.err(msg);
            }
            Ok(Geometry::Polygon(ring))
        }
        "" => s.err("expected a geometry tag"),
        other => s.err(format!("unsupported geometry type '{other}'")),
    }
}

pub(super) fn serialize(g: &Geometry) -> String {
    fn coords(pts: &[Point]) -> String {
        pts.iter()
            .map(|p| format!("{} {}", fmt_num(p.x), fmt_num(p.y)))
            .collect::<Vec<_>>()
            .join(",")
    }
    match g {
        Geometry::Point(p) => format!("POINT({} {})", fmt_num(p.x), fmt_num(p.y)),
        Geometry::LineString(pts) => format!("LINESTRING({})", coords(pts)),
        Geometry::Polygon(ring) => format!("POLYGON(({}))", coords(ring)),
    }
}
