//! Tabular query results and their renderings: aligned text table, CSV, and
//! a GeoJSON FeatureCollection.

use serde_json::{json, Map, Value as Json};

use crate::csvio;
use crate::geometry::Geometry;
use crate::temporal::{Instant, Interval};
use crate::value::{fmt_num, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Str(String),
    Num(f64),
    Geom(Geometry),
    Instant(Instant),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Str(s) => s.clone(),
            Cell::Num(n) => fmt_num(*n),
            Cell::Geom(g) => g.to_wkt(),
            Cell::Instant(i) => i.to_string(),
        }
    }
}

impl From<&Value> for Cell {
    fn from(v: &Value) -> Cell {
        match v {
            Value::Str(s) => Cell::Str(s.clone()),
            Value::Num(n) => Cell::Num(*n),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub cells: Vec<Cell>,
    pub interval: Option<Interval>,
}

/// A query result: named columns, rows, and an optional interval stamp per
/// row when the result is temporal.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRelation {
    pub columns: Vec<String>,
    pub rows: Vec<ResultRow>,
    pub temporal: bool,
}

impl ResultRelation {
    pub fn new(columns: Vec<String>, temporal: bool) -> ResultRelation {
        ResultRelation {
            columns,
            rows: Vec::new(),
            temporal,
        }
    }

    fn header(&self) -> Vec<String> {
        let mut cols = self.columns.clone();
        if self.temporal {
            cols.push("from".into());
            cols.push("to".into());
        }
        cols
    }

    fn rendered_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                let mut cells: Vec<String> = r.cells.iter().map(Cell::render).collect();
                if self.temporal {
                    match &r.interval {
                        Some(iv) => {
                            cells.push(iv.from().to_string());
                            cells.push(iv.to().to_string());
                        }
                        None => {
                            cells.push(String::new());
                            cells.push(String::new());
                        }
                    }
                }
                cells
            })
            .collect()
    }

    /// Aligned text table with a header rule.
    pub fn to_table(&self) -> String {
        let header = self.header();
        let rows = self.rendered_rows();
        let mut widths: Vec<usize> = header.iter().map(String::len).collect();
        for row in &rows {
            for (i, cell) in row.iter().enumerate() {
                widths[i] = widths[i].max(cell.chars().count());
            }
        }
        let fmt_line = |cells: &[String]| {
            cells
                .iter()
                .enumerate()
                .map(|(i, c)| format!("{:<width$}", c, width = widths[i]))
                .collect::<Vec<_>>()
                .join(" | ")
                .trim_end()
                .to_string()
        };
        let mut out = fmt_line(&header);
        out.push('\n');
        out.push_str(
            &widths
                .iter()
                .map(|w| "-".repeat(*w))
                .collect::<Vec<_>>()
                .join("-+-"),
        );
        out.push('\n');
        for row in &rows {
            out.push_str(&fmt_line(row));
            out.push('\n');
        }
        out.push_str(&format!("({} rows)\n", self.rows.len()));
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = csvio::write_record(&self.header());
        out.push('\n');
        for row in self.rendered_rows() {
            out.push_str(&csvio::write_record(&row));
            out.push('\n');
        }
        out
    }

    /// GeoJSON FeatureCollection: one feature per row. A single geometry
    /// column becomes the feature geometry (several become a
    /// GeometryCollection); every other column lands in `properties`, plus
    /// `from`/`to` when the result is temporal.
    pub fn to_geojson(&self) -> String {
        let geom_cols: Vec<usize> = self
            .rows
            .first()
            .map(|r| {
                r.cells
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| matches!(c, Cell::Geom(_)))
                    .map(|(i, _)| i)
                    .collect()
            })
            .unwrap_or_default();
        let features: Vec<Json> = self
            .rows
            .iter()
            .map(|row| {
                let mut props = Map::new();
                for (i, cell) in row.cells.iter().enumerate() {
                    if geom_cols.contains(&i) {
                        continue;
                    }
                    let key = self.columns[i].clone();
                    let value = match cell {
                        Cell::Str(s) => json!(s),
                        Cell::Num(n) => json!(n),
                        Cell::Instant(i) => instant_json(*i),
                        Cell::Geom(g) => json!(g.to_wkt()),
                    };
                    props.insert(key, value);
                }
                if self.temporal {
                    if let Some(iv) = &row.interval {
                        props.insert("from".into(), json!(iv.from()));
                        props.insert("to".into(), instant_json(iv.to()));
                    }
                }
                let geometry = match geom_cols.len() {
                    0 => Json::Null,
                    1 => match &row.cells[geom_cols[0]] {
                        Cell::Geom(g) => geometry_json(g),
                        _ => Json::Null,
                    },
                    _ => json!({
                        "type": "GeometryCollection",
                        "geometries": geom_cols
                            .iter()
                            .filter_map(|i| match &row.cells[*i] {
                                Cell::Geom(g) => Some(geometry_json(g)),
                                _ => None,
                            })
                            .collect::<Vec<_>>(),
                    }),
                };
                json!({
                    "type": "Feature",
                    "geometry": geometry,
                    "properties": props,
                })
            })
            .collect();
        serde_json::to_string_pretty(&json!({
            "type": "FeatureCollection",
            "features": features,
        }))
        .expect("geojson serialization")
    }
}

fn instant_json(i: Instant) -> Json {
    match i {
        Instant::At(t) => json!(t),
        Instant::Now => json!("Now"),
    }
}

fn geometry_json(g: &Geometry) -> Json {
    match g {
        Geometry::Point(p) => json!({ "type": "Point", "coordinates": [p.x, p.y] }),
        Geometry::LineString(pts) => json!({
            "type": "LineString",
            "coordinates": pts.iter().map(|p| json!([p.x, p.y])).collect::<Vec<_>>(),
        }),
        Geometry::Polygon(ring) => json!({
            "type": "Polygon",
            "coordinates": [ring.iter().map(|p| json!([p.x, p.y])).collect::<Vec<_>>()],
        }),
    }
}
