//! The engine handle: layers, warehouse, alpha mappings and the time
//! configuration, with atomic update operations (layer mutation plus
//! warehouse propagation succeed or fail together) and the parse/validate/
//! execute pipeline.
//!
//! Mutations take `&mut self`, queries take `&self`: the borrow rules give
//! the single-writer/multi-reader contract directly, and a query always sees
//! a store that cannot change mid-evaluation.

use thiserror::Error;

use crate::ast::Query;
use crate::exec::{self, EvalError};
use crate::geometry::Geometry;
use crate::layer::{ChangeEvent, Layer, NewObject, StoreError};
use crate::olap::{propagate_change, AlphaMapping, OlapError, Warehouse};
use crate::parser::{parse_query, ParseError};
use crate::result::ResultRelation;
use crate::temporal::Tick;
use crate::time::TimeConfig;
use crate::validate::{validate, Catalog, CheckedQuery, ValidateError};
use crate::value::Value;

#[derive(Debug, Error, PartialEq)]
pub enum QueryError {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("validation error: {0}")]
    Validate(#[from] ValidateError),
    #[error("evaluation error: {0}")]
    Eval(#[from] EvalError),
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("unknown layer '{0}'")]
    UnknownLayer(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Olap(#[from] OlapError),
}

/// An update operation against one layer, with the warehouse payload needed
/// by split/merge propagation.
#[derive(Debug, Clone)]
pub enum UpdateOp {
    Create {
        layer: String,
        id: String,
        geometry: Geometry,
        attrs: Vec<(String, Value)>,
        at: Tick,
    },
    Split {
        layer: String,
        parent: String,
        at: Tick,
        parts: Vec<NewObject>,
        rollup: Option<String>,
    },
    Merge {
        layer: String,
        parents: Vec<String>,
        at: Tick,
        new: NewObject,
        rollup: Option<String>,
    },
    Update {
        layer: String,
        id: String,
        geometry: Geometry,
        attrs: Vec<(String, Value)>,
        at: Tick,
    },
    Delete {
        layer: String,
        id: String,
        at: Tick,
    },
    Reincarnate {
        layer: String,
        id: String,
        geometry: Geometry,
        attrs: Vec<(String, Value)>,
        at: Tick,
    },
}

impl UpdateOp {
    pub fn layer(&self) -> &str {
        match self {
            UpdateOp::Create { layer, .. }
            | UpdateOp::Split { layer, .. }
            | UpdateOp::Merge { layer, .. }
            | UpdateOp::Update { layer, .. }
            | UpdateOp::Delete { layer, .. }
            | UpdateOp::Reincarnate { layer, .. } => layer,
        }
    }
}

#[derive(Debug)]
pub struct ApplyOutcome {
    pub event: ChangeEvent,
    pub warnings: Vec<String>,
    pub propagation_notes: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Workspace {
    pub layers: Vec<Layer>,
    pub warehouse: Warehouse,
    pub mappings: Vec<AlphaMapping>,
    pub time: TimeConfig,
}

impl Workspace {
    pub fn new(warehouse: Warehouse, time: TimeConfig) -> Workspace {
        Workspace {
            layers: Vec::new(),
            warehouse,
            mappings: Vec::new(),
            time,
        }
    }

    /// Exact layer lookup first, case-insensitive fallback second.
    pub fn layer(&self, name: &str) -> Option<&Layer> {
        self.layers.iter().find(|l| l.name == name).or_else(|| {
            self.layers
                .iter()
                .find(|l| l.name.eq_ignore_ascii_case(name))
        })
    }

    pub fn mapping_for(&self, dimension: &str, layer: &str) -> Option<&AlphaMapping> {
        self.mappings.iter().find(|m| {
            m.dimension.eq_ignore_ascii_case(dimension) && m.layer.eq_ignore_ascii_case(layer)
        })
    }

    pub fn catalog(&self) -> Catalog<'_> {
        Catalog {
            layers: &self.layers,
            warehouse: &self.warehouse,
            mappings: &self.mappings,
            time: &self.time,
        }
    }

    /// Move the engine's current tick (what `Now` materializes to).
    pub fn set_current(&mut self, t: Tick) {
        self.time.current = t;
    }

    // -- queries -------------------------------------------------------------

    pub fn prepare(&self, text: &str) -> Result<CheckedQuery, QueryError> {
        let ast: Query = parse_query(text)?;
        Ok(validate(&ast, &self.catalog())?)
    }

    pub fn run_query(&self, text: &str) -> Result<ResultRelation, QueryError> {
        let checked = self.prepare(text)?;
        Ok(exec::eval(&checked, self)?)
    }

    pub fn explain_query(&self, text: &str) -> Result<String, QueryError> {
        let checked = self.prepare(text)?;
        Ok(exec::explain(&checked, self))
    }

    // -- updates -------------------------------------------------------------

    /// Apply a layer mutation and its warehouse propagation atomically: the
    /// op runs against a scratch copy and replaces the live stores only when
    /// every step succeeded.
    pub fn apply(&mut self, op: UpdateOp) -> Result<ApplyOutcome, EngineError> {
        let mut layers = self.layers.clone();
        let mut warehouse = self.warehouse.clone();
        let mut mappings = self.mappings.clone();

        let layer_name = op.layer().to_string();
        let layer = layers
            .iter_mut()
            .find(|l| l.name == layer_name || l.name.eq_ignore_ascii_case(&layer_name))
            .ok_or_else(|| EngineError::UnknownLayer(layer_name.clone()))?;

        let mut warnings = Vec::new();
        let (outcome, rollup) = match op {
            UpdateOp::Create {
                id,
                geometry,
                attrs,
                at,
                ..
            } => (layer.create(&id, geometry, &attrs, at)?, None),
            UpdateOp::Split {
                parent,
                at,
                parts,
                rollup,
                ..
            } => (layer.split(&parent, at, parts)?, rollup),
            UpdateOp::Merge {
                parents,
                at,
                new,
                rollup,
                ..
            } => (layer.merge(&parents, at, new)?, rollup),
            UpdateOp::Update {
                id,
                geometry,
                attrs,
                at,
                ..
            } => (layer.update(&id, at, geometry, &attrs)?, None),
            UpdateOp::Delete { id, at, .. } => (layer.delete(&id, at)?, None),
            UpdateOp::Reincarnate {
                id,
                geometry,
                attrs,
                at,
                ..
            } => (layer.reincarnate(&id, at, geometry, &attrs)?, None),
        };
        if let Some(w) = outcome.warning {
            warnings.push(w);
        }
        let propagation_notes = propagate_change(
            &mut warehouse,
            &mut mappings,
            &outcome.event,
            rollup.as_deref(),
        )?;

        self.layers = layers;
        self.warehouse = warehouse;
        self.mappings = mappings;
        Ok(ApplyOutcome {
            event: outcome.event,
            warnings,
            propagation_notes,
        })
    }

    // -- consistency ---------------------------------------------------------

    /// Cross-store consistency report: layer invariants, dimension structure,
    /// fact foreign keys, and the alpha mapping (live rows point at live
    /// objects, mapping intervals stay inside object lifespans).
    pub fn check_consistency(&self) -> Vec<String> {
        let mut problems = Vec::new();
        for layer in &self.layers {
            for p in layer.check_invariants() {
                problems.push(format!("layer '{}': {p}", layer.name));
            }
        }
        for dim in &self.warehouse.dimensions {
            for p in dim.check() {
                problems.push(format!("dimension '{}': {p}", dim.name));
            }
        }
        for cube in &self.warehouse.cubes {
            problems.extend(self.warehouse.check_facts(cube));
        }
        for mapping in &self.mappings {
            let Some(layer) = self.layer(&mapping.layer) else {
                problems.push(format!(
                    "mapping {} -> {}: unknown layer",
                    mapping.dimension, mapping.layer
                ));
                continue;
            };
            let Ok(dim) = self.warehouse.dimension(&mapping.dimension) else {
                problems.push(format!(
                    "mapping {} -> {}: unknown dimension",
                    mapping.dimension, mapping.layer
                ));
                continue;
            };
            for row in &mapping.rows {
                if !dim.is_member(&row.member) {
                    problems.push(format!(
                        "mapping {} -> {}: member '{}' not in dimension",
                        mapping.dimension, mapping.layer, row.member
                    ));
                }
                if row.interval.is_live() && layer.live_stage(&row.object_id).is_none() {
                    problems.push(format!(
                        "mapping {} -> {}: live row for object '{}' which has no live stage",
                        mapping.dimension, mapping.layer, row.object_id
                    ));
                }
                if !layer.knows(&row.object_id) {
                    problems.push(format!(
                        "mapping {} -> {}: object '{}' unknown in layer",
                        mapping.dimension, mapping.layer, row.object_id
                    ));
                    continue;
                }
                // The mapping interval must sit inside the object's lifespan.
                // Lifespan pieces are maximal and disjoint, so a contiguous
                // interval is covered exactly when one piece contains it.
                let contained = layer.object_lifespan(&row.object_id).iter().any(|span| {
                    span.from() <= row.interval.from() && span.to() >= row.interval.to()
                });
                if !contained {
                    problems.push(format!(
                        "mapping {} -> {}: interval {} of member '{}' is not covered by the lifespan of object '{}'",
                        mapping.dimension, mapping.layer, row.interval, row.member, row.object_id
                    ));
                }
            }
        }
        problems
    }
}

#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;
    use crate::geometry::parse_wkt;
    use crate::olap::{Cube, Dimension, DimensionMode, FactRow, MappingRow, MemberRow};
    use crate::temporal::Interval;
    use crate::GeometryKind;

    pub(crate) fn square(x0: i64, y0: i64, x1: i64, y1: i64) -> Geometry {
        parse_wkt(&format!(
            "POLYGON(({x0} {y0},{x1} {y0},{x1} {y1},{x0} {y1},{x0} {y0}))"
        ))
        .unwrap()
    }

    /// Land parcels in a 2x2 grid, two rivers, a city and an airport, a Sales
    /// cube and the Land dimension mapped onto the land layer. Ticks are
    /// calendar years.
    pub(crate) fn land_workspace_for_validation() -> Workspace {
        let mut ws = Workspace::new(
            Warehouse::new(DimensionMode::Temporal),
            TimeConfig::years(0, 2012),
        );
        let mut land = Layer::new("land", GeometryKind::Polygon, vec![]);
        land.create("p1", square(0, 0, 10, 10), &[], 1990).unwrap();
        land.create("p2", square(10, 0, 20, 10), &[], 1990).unwrap();
        land.update("p2", 2001, square(10, 0, 18, 10), &[]).unwrap();
        land.create("p3", square(0, 10, 10, 20), &[], 1990).unwrap();
        land.create("p4", square(10, 10, 20, 20), &[], 1990)
            .unwrap();

        let mut rivers = Layer::new("rivers", GeometryKind::LineString, vec!["name".into()]);
        rivers
            .create(
                "uru",
                parse_wkt("LINESTRING(-5 5,25 5)").unwrap(),
                &[("name".into(), Value::Str("Uruguay".into()))],
                1990,
            )
            .unwrap();
        rivers
            .create(
                "neg",
                parse_wkt("LINESTRING(-5 15,8 15)").unwrap(),
                &[("name".into(), Value::Str("Negro".into()))],
                1990,
            )
            .unwrap();
        ws.layers = vec![land, rivers];

        let mut land_dim = Dimension::new(
            "Land",
            vec![
                "parcelId".into(),
                "region".into(),
                "country".into(),
                "All Land".into(),
            ],
        );
        for (m, parent) in [("p1", "r1"), ("p2", "r1"), ("p3", "r2"), ("p4", "r2")] {
            land_dim.rows.push(MemberRow {
                member: m.into(),
                level: 0,
                parent: Some(parent.into()),
                interval: Some(Interval::until_now(1990)),
            });
        }
        for r in ["r1", "r2"] {
            land_dim.rows.push(MemberRow {
                member: r.into(),
                level: 1,
                parent: Some("uruguay".into()),
                interval: None,
            });
        }
        land_dim.rows.push(MemberRow {
            member: "uruguay".into(),
            level: 2,
            parent: Some("all".into()),
            interval: None,
        });
        land_dim.rows.push(MemberRow {
            member: "all".into(),
            level: 3,
            parent: None,
            interval: None,
        });
        let mut time_dim = Dimension::new("Time", vec!["year".into()]);
        for y in ["2009", "2010"] {
            time_dim.rows.push(MemberRow {
                member: y.into(),
                level: 0,
                parent: None,
                interval: None,
            });
        }
        let mut product_dim =
            Dimension::new("Product", vec!["product".into(), "All_Products".into()]);
        for p in ["wheat", "soy"] {
            product_dim.rows.push(MemberRow {
                member: p.into(),
                level: 0,
                parent: Some("all products".into()),
                interval: None,
            });
        }
        product_dim.rows.push(MemberRow {
            member: "all products".into(),
            level: 1,
            parent: None,
            interval: None,
        });
        ws.warehouse.dimensions = vec![land_dim, time_dim, product_dim];
        ws.warehouse.cubes = vec![Cube {
            name: "Sales".into(),
            dim_names: vec!["Land".into(), "Time".into(), "Product".into()],
            measure_names: vec!["Parcel Sales".into(), "Production Cost".into()],
            facts: vec![
                FactRow {
                    keys: vec!["p1".into(), "2009".into(), "wheat".into()],
                    measures: vec![4000.0, 500.0],
                },
                FactRow {
                    keys: vec!["p1".into(), "2010".into(), "wheat".into()],
                    measures: vec![3000.0, 300.0],
                },
                FactRow {
                    keys: vec!["p2".into(), "2009".into(), "soy".into()],
                    measures: vec![4000.0, 400.0],
                },
                FactRow {
                    keys: vec!["p3".into(), "2009".into(), "wheat".into()],
                    measures: vec![6000.0, 700.0],
                },
                FactRow {
                    keys: vec!["p4".into(), "2009".into(), "soy".into()],
                    measures: vec![9000.0, 900.0],
                },
            ],
        }];
        ws.mappings = vec![AlphaMapping {
            dimension: "Land".into(),
            level: "parcelId".into(),
            layer: "land".into(),
            rows: ["p1", "p2", "p3", "p4"]
                .into_iter()
                .map(|m| MappingRow {
                    member: m.into(),
                    object_id: m.into(),
                    interval: Interval::until_now(1990),
                })
                .collect(),
        }];
        let mut cities = Layer::new("cities", GeometryKind::Polygon, vec![]);
        cities
            .create("c1", square(100, 100, 140, 140), &[], 1990)
            .unwrap();
        let mut airports = Layer::new("airports", GeometryKind::Point, vec![]);
        airports
            .create("a1", parse_wkt("POINT(120 120)").unwrap(), &[], 1990)
            .unwrap();
        ws.layers.push(cities);
        ws.layers.push(airports);
        ws
    }
}
