//! Temporal relations of spatial object stages: create/split/merge/update/
//! delete/reincarnate semantics, snapshots and lifespans, plus the flat CSV
//! persistence format.
//!
//! One stage is one row of an object's history: a fixed geometry and fixed
//! attribute values over one validity interval. Stages sharing an object id
//! never overlap in time and at most one of them is live (`to = Now`).

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::csvio;
use crate::geometry::{self, parse_wkt, Geometry, GeometryKind};
use crate::temporal::{coalesce_by, Instant, Interval, Tick};
use crate::value::Value;

#[derive(Debug, Error, PartialEq)]
pub enum StoreError {
    #[error("object '{0}' already exists in layer '{1}'")]
    DuplicateObject(String, String),
    #[error("object '{0}' has no live stage in layer '{1}'")]
    NotLive(String, String),
    #[error("object '{0}' is unknown in layer '{1}'")]
    UnknownObject(String, String),
    #[error("object '{0}' is still live in layer '{1}'")]
    StillLive(String, String),
    #[error("layer '{layer}' holds {expected} geometries, got {got}")]
    KindMismatch {
        layer: String,
        expected: GeometryKind,
        got: GeometryKind,
    },
    #[error("instant {t} is not after the current stage start {from} of object '{id}'")]
    NonMonotone { id: String, t: Tick, from: Tick },
    #[error("a split needs at least 2 parts, got {0}")]
    TooFewParts(usize),
    #[error("a merge needs at least 2 parents, got {0}")]
    TooFewParents(usize),
    #[error("duplicate id '{0}' among new objects")]
    IdCollision(String),
    #[error("reincarnation of '{id}' at {t} is not beyond the gap (last stage ended at {ended}); consecutive instants are an update")]
    NoGap { id: String, t: Tick, ended: Tick },
    #[error("attribute '{0}' is not in the layer schema {1:?}")]
    UnknownAttr(String, Vec<String>),
    #[error("missing value for attribute '{0}'")]
    MissingAttr(String),
}

/// One stage of a spatio-temporal object.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub object_id: String,
    pub geometry: Geometry,
    pub attrs: Vec<Value>,
    pub interval: Interval,
}

/// Payload for a stage to be created by an update operation.
#[derive(Debug, Clone)]
pub struct NewObject {
    pub id: String,
    pub geometry: Geometry,
    pub attrs: Vec<(String, Value)>,
}

/// Emitted by mutating operations; split and merge are consumed by the
/// warehouse propagation, the others are informational.
#[derive(Debug, Clone, PartialEq)]
pub enum ChangeEvent {
    Created {
        layer: String,
        id: String,
        at: Tick,
    },
    Split {
        layer: String,
        parent: String,
        parts: Vec<String>,
        at: Tick,
    },
    Merged {
        layer: String,
        parents: Vec<String>,
        new_id: String,
        at: Tick,
    },
    Updated {
        layer: String,
        id: String,
        at: Tick,
    },
    Deleted {
        layer: String,
        id: String,
        at: Tick,
    },
    Reincarnated {
        layer: String,
        id: String,
        at: Tick,
    },
}

impl fmt::Display for ChangeEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChangeEvent::Created { layer, id, at } => write!(f, "created {id} in {layer} at {at}"),
            ChangeEvent::Split {
                layer,
                parent,
                parts,
                at,
            } => {
                write!(
                    f,
                    "split {parent} in {layer} at {at} into {}",
                    parts.join(", ")
                )
            }
            ChangeEvent::Merged {
                layer,
                parents,
                new_id,
                at,
            } => {
                write!(
                    f,
                    "merged {} in {layer} at {at} into {new_id}",
                    parents.join(", ")
                )
            }
            ChangeEvent::Updated { layer, id, at } => write!(f, "updated {id} in {layer} at {at}"),
            ChangeEvent::Deleted { layer, id, at } => write!(f, "deleted {id} in {layer} at {at}"),
            ChangeEvent::Reincarnated { layer, id, at } => {
                write!(f, "reincarnated {id} in {layer} at {at}")
            }
        }
    }
}

/// Result of a mutating operation: the event plus an optional lint warning
/// (area conservation of splits and merges).
#[derive(Debug)]
pub struct OpOutcome {
    pub event: ChangeEvent,
    pub warning: Option<String>,
}

/// A named, geometry-homogeneous temporal relation of stages.
#[derive(Debug, Clone)]
pub struct Layer {
    pub name: String,
    pub kind: GeometryKind,
    pub attr_names: Vec<String>,
    stages: Vec<Stage>,
}

impl Layer {
    pub fn new(name: impl Into<String>, kind: GeometryKind, attr_names: Vec<String>) -> Layer {
        Layer {
            name: name.into(),
            kind,
            attr_names,
            stages: Vec::new(),
        }
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn live_stage(&self, id: &str) -> Option<&Stage> {
        self.stages
            .iter()
            .find(|s| s.object_id == id && s.interval.is_live())
    }

    fn live_stage_idx(&self, id: &str) -> Option<usize> {
        self.stages
            .iter()
            .position(|s| s.object_id == id && s.interval.is_live())
    }

    pub fn knows(&self, id: &str) -> bool {
        self.stages.iter().any(|s| s.object_id == id)
    }

    /// Stages valid at a finite instant.
    pub fn snapshot(&self, t: Tick) -> Vec<&Stage> {
        self.stages.iter().filter(|s| s.interval.at(t)).collect()
    }

    /// Union of all stage intervals, as maximal intervals.
    pub fn lifespan(&self) -> Vec<Interval> {
        coalesce_by(
            &self.stages.iter().map(|s| s.interval).collect::<Vec<_>>(),
            |_| (),
            |iv| *iv,
            |_, iv| iv,
        )
    }

    /// Union of one object's stage intervals, as maximal intervals.
    pub fn object_lifespan(&self, id: &str) -> Vec<Interval> {
        let ivs: Vec<Interval> = self
            .stages
            .iter()
            .filter(|s| s.object_id == id)
            .map(|s| s.interval)
            .collect();
        coalesce_by(&ivs, |_| (), |iv| *iv, |_, iv| iv)
    }

    pub fn object_ids(&self) -> Vec<&str> {
        let set: BTreeSet<&str> = self.stages.iter().map(|s| s.object_id.as_str()).collect();
        set.into_iter().collect()
    }

    fn check_kind(&self, g: &Geometry) -> Result<(), StoreError> {
        if g.kind() != self.kind {
            return Err(StoreError::KindMismatch {
                layer: self.name.clone(),
                expected: self.kind,
                got: g.kind(),
            });
        }
        Ok(())
    }

    /// Align named attribute values with the layer schema.
    fn align_attrs(&self, attrs: &[(String, Value)]) -> Result<Vec<Value>, StoreError> {
        for (name, _) in attrs {
            if !self.attr_names.contains(name) {
                return Err(StoreError::UnknownAttr(
                    name.clone(),
                    self.attr_names.clone(),
                ));
            }
        }
        self.attr_names
            .iter()
            .map(|n| {
                attrs
                    .iter()
                    .find(|(an, _)| an == n)
                    .map(|(_, v)| v.clone())
                    .ok_or_else(|| StoreError::MissingAttr(n.clone()))
            })
            .collect()
    }

    pub fn create(
        &mut self,
        id: &str,
        geometry: Geometry,
        attrs: &[(String, Value)],
        t: Tick,
    ) -> Result<OpOutcome, StoreError> {
        if self.knows(id) {
            return Err(StoreError::DuplicateObject(id.into(), self.name.clone()));
        }
        self.check_kind(&geometry)?;
        let attrs = self.align_attrs(attrs)?;
        self.stages.push(Stage {
            object_id: id.into(),
            geometry,
            attrs,
            interval: Interval::until_now(t),
        });
        Ok(OpOutcome {
            event: ChangeEvent::Created {
                layer: self.name.clone(),
                id: id.into(),
                at: t,
            },
            warning: None,
        })
    }

    /// Close the live stage of `id` at `t - 1`; `t` must be strictly after
    /// that stage's start (closing at the creation instant would leave an
    /// empty stage).
    fn close_live(&mut self, id: &str, t: Tick) -> Result<(), StoreError> {
        let idx = self
            .live_stage_idx(id)
            .ok_or_else(|| StoreError::NotLive(id.into(), self.name.clone()))?;
        let from = self.stages[idx].interval.from();
        if t <= from {
            return Err(StoreError::NonMonotone {
                id: id.into(),
                t,
                from,
            });
        }
        self.stages[idx].interval = self.stages[idx]
            .interval
            .with_to(Instant::At(t - 1))
            .expect("t-1 >= from");
        Ok(())
    }

    pub fn split(
        &mut self,
        parent_id: &str,
        t: Tick,
        parts: Vec<NewObject>,
    ) -> Result<OpOutcome, StoreError> {
        if parts.len() < 2 {
            return Err(StoreError::TooFewParts(parts.len()));
        }
        let parent = self
            .live_stage(parent_id)
            .ok_or_else(|| StoreError::NotLive(parent_id.into(), self.name.clone()))?;
        let parent_area = geometry::area(&parent.geometry).ok();
        if t <= parent.interval.from() {
            return Err(StoreError::NonMonotone {
                id: parent_id.into(),
                t,
                from: parent.interval.from(),
            });
        }
        let mut seen = BTreeSet::new();
        let mut aligned = Vec::new();
        for part in &parts {
            if part.id == parent_id || self.knows(&part.id) || !seen.insert(part.id.clone()) {
                return Err(StoreError::IdCollision(part.id.clone()));
            }
            self.check_kind(&part.geometry)?;
            aligned.push(self.align_attrs(&part.attrs)?);
        }
        let warning = conservation_warning(parent_area, &parts, "split");
        self.close_live(parent_id, t)?;
        for (part, attrs) in parts.iter().zip(aligned) {
            self.stages.push(Stage {
                object_id: part.id.clone(),
                geometry: part.geometry.clone(),
                attrs,
                interval: Interval::until_now(t),
            });
        }
        Ok(OpOutcome {
            event: ChangeEvent::Split {
                layer: self.name.clone(),
                parent: parent_id.into(),
                parts: parts.into_iter().map(|p| p.id).collect(),
                at: t,
            },
            warning,
        })
    }

    pub fn merge(
        &mut self,
        parent_ids: &[String],
        t: Tick,
        new: NewObject,
    ) -> Result<OpOutcome, StoreError> {
        if parent_ids.len() < 2 {
            return Err(StoreError::TooFewParents(parent_ids.len()));
        }
        let mut seen = BTreeSet::new();
        let mut parent_area = Some(0.0);
        for id in parent_ids {
            if !seen.insert(id.clone()) {
                return Err(StoreError::IdCollision(id.clone()));
            }
            let stage = self
                .live_stage(id)
                .ok_or_else(|| StoreError::NotLive(id.clone(), self.name.clone()))?;
            if t <= stage.interval.from() {
                return Err(StoreError::NonMonotone {
                    id: id.clone(),
                    t,
                    from: stage.interval.from(),
                });
            }
            parent_area = match (parent_area, geometry::area(&stage.geometry).ok()) {
                (Some(acc), Some(a)) => Some(acc + a),
                _ => None,
            };
        }
        if self.knows(&new.id) {
            return Err(StoreError::IdCollision(new.id.clone()));
        }
        self.check_kind(&new.geometry)?;
        let attrs = self.align_attrs(&new.attrs)?;
        let warning = conservation_warning(parent_area, std::slice::from_ref(&new), "merge");
        for id in parent_ids {
            self.close_live(id, t)?;
        }
        self.stages.push(Stage {
            object_id: new.id.clone(),
            geometry: new.geometry,
            attrs,
            interval: Interval::until_now(t),
        });
        Ok(OpOutcome {
            event: ChangeEvent::Merged {
                layer: self.name.clone(),
                parents: parent_ids.to_vec(),
                new_id: new.id,
                at: t,
            },
            warning,
        })
    }

    /// Change geometry/attributes at `t`, keeping the identifier: the current
    /// stage ends at `t - 1`, a new stage starts at `t`.
    pub fn update(
        &mut self,
        id: &str,
        t: Tick,
        geometry: Geometry,
        attrs: &[(String, Value)],
    ) -> Result<OpOutcome, StoreError> {
        if self.live_stage(id).is_none() {
            return Err(StoreError::NotLive(id.into(), self.name.clone()));
        }
        self.check_kind(&geometry)?;
        let attrs = self.align_attrs(attrs)?;
        self.close_live(id, t)?;
        self.stages.push(Stage {
            object_id: id.into(),
            geometry,
            attrs,
            interval: Interval::until_now(t),
        });
        Ok(OpOutcome {
            event: ChangeEvent::Updated {
                layer: self.name.clone(),
                id: id.into(),
                at: t,
            },
            warning: None,
        })
    }

    /// Bring a dead object back with a gap in its history: `t` must lie at
    /// least two ticks past the last stage end.
    pub fn reincarnate(
        &mut self,
        id: &str,
        t: Tick,
        geometry: Geometry,
        attrs: &[(String, Value)],
    ) -> Result<OpOutcome, StoreError> {
        if !self.knows(id) {
            return Err(StoreError::UnknownObject(id.into(), self.name.clone()));
        }
        if self.live_stage(id).is_some() {
            return Err(StoreError::StillLive(id.into(), self.name.clone()));
        }
        let ended = self
            .stages
            .iter()
            .filter(|s| s.object_id == id)
            .filter_map(|s| s.interval.to().tick())
            .max()
            .expect("dead object has finite ends");
        if t <= ended + 1 {
            return Err(StoreError::NoGap {
                id: id.into(),
                t,
                ended,
            });
        }
        self.check_kind(&geometry)?;
        let attrs = self.align_attrs(attrs)?;
        self.stages.push(Stage {
            object_id: id.into(),
            geometry,
            attrs,
            interval: Interval::until_now(t),
        });
        Ok(OpOutcome {
            event: ChangeEvent::Reincarnated {
                layer: self.name.clone(),
                id: id.into(),
                at: t,
            },
            warning: None,
        })
    }

    pub fn delete(&mut self, id: &str, t: Tick) -> Result<OpOutcome, StoreError> {
        self.close_live(id, t)?;
        Ok(OpOutcome {
            event: ChangeEvent::Deleted {
                layer: self.name.clone(),
                id: id.into(),
                at: t,
            },
            warning: None,
        })
    }

    /// History consistency check used by loaders and the validator: per
    /// object, intervals are pairwise disjoint and at most one stage is live.
    pub fn check_invariants(&self) -> Vec<String> {
        let mut problems = Vec::new();
        for id in self.object_ids() {
            let mut ivs: Vec<Interval> = self
                .stages
                .iter()
                .filter(|s| s.object_id == id)
                .map(|s| s.interval)
                .collect();
            ivs.sort_by_key(|iv| iv.from());
            for w in ivs.windows(2) {
                if w[0].intersection(&w[1]).is_some() {
                    problems.push(format!(
                        "object '{id}': stages {} and {} overlap",
                        w[0], w[1]
                    ));
                }
            }
            if ivs.iter().filter(|iv| iv.is_live()).count() > 1 {
                problems.push(format!("object '{id}': more than one live stage"));
            }
        }
        for s in &self.stages {
            if s.geometry.kind() != self.kind {
                problems.push(format!(
                    "object '{}': geometry kind {} does not match layer kind {}",
                    s.object_id,
                    s.geometry.kind(),
                    self.kind
                ));
            }
        }
        problems
    }
}

fn conservation_warning(
    parent_area: Option<f64>,
    children: &[NewObject],
    op: &str,
) -> Option<String> {
    let parent = parent_area?;
    let mut child_sum = 0.0;
    for c in children {
        child_sum += geometry::area(&c.geometry).ok()?;
    }
    if parent <= 0.0 {
        return None;
    }
    let ratio = (child_sum - parent).abs() / parent;
    if ratio > 0.01 {
        Some(format!(
            "{op}: children area {child_sum:.3} differs from parent area {parent:.3} by {:.1}%",
            ratio * 100.0
        ))
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// CSV persistence: object_id,wkt,<attr...>,from,to
// ---------------------------------------------------------------------------

#[derive(Debug, Error, PartialEq)]
#[error("{file}: row {row}: {msg}")]
pub struct LoadError {
    pub file: String,
    pub row: usize,
    pub msg: String,
}

pub fn parse_instant_cell(cell: &str) -> Result<Instant, String> {
    let cell = cell.trim();
    if cell.eq_ignore_ascii_case("now") {
        return Ok(Instant::Now);
    }
    cell.parse::<Tick>()
        .map(Instant::At)
        .map_err(|_| format!("'{cell}' is not an integer tick or Now"))
}

/// Load a layer from CSV text, validating every invariant. All row errors are
/// reported, not just the first.
pub fn load_layer_csv(
    name: &str,
    kind: GeometryKind,
    file: &str,
    text: &str,
) -> Result<Layer, Vec<LoadError>> {
    let mut errors = Vec::new();
    let err = |row: usize, msg: String| LoadError {
        file: file.to_string(),
        row,
        msg,
    };
    let records = match csvio::parse(text) {
        Ok(r) => r,
        Err(e) => return Err(vec![err(e.row, e.msg)]),
    };
    let Some(((header_row, header), body)) = records.split_first() else {
        return Err(vec![err(1, "empty layer file".into())]);
    };
    if header.len() < 4 || header[0] != "object_id" || header[1] != "wkt" {
        return Err(vec![err(
            *header_row,
            "header must be object_id,wkt,<attr...>,from,to".into(),
        )]);
    }
    let n = header.len();
    if header[n - 2] != "from" || header[n - 1] != "to" {
        return Err(vec![err(
            *header_row,
            "last two columns must be from,to".into(),
        )]);
    }
    let attr_names: Vec<String> = header[2..n - 2].to_vec();
    let mut layer = Layer::new(name, kind, attr_names);
    for (row, rec) in body {
        if rec.len() != n {
            errors.push(err(*row, format!("expected {n} fields, got {}", rec.len())));
            continue;
        }
        let geometry = match parse_wkt(&rec[1]) {
            Ok(g) => g,
            Err(e) => {
                errors.push(err(*row, e.to_string()));
                continue;
            }
        };
        if geometry.kind() != kind {
            errors.push(err(
                *row,
                format!(
                    "geometry kind {} does not match layer kind {kind}",
                    geometry.kind()
                ),
            ));
            continue;
        }
        let from = match parse_instant_cell(&rec[n - 2]) {
            Ok(Instant::At(t)) => t,
            Ok(Instant::Now) => {
                errors.push(err(*row, "from cannot be Now".into()));
                continue;
            }
            Err(msg) => {
                errors.push(err(*row, format!("from: {msg}")));
                continue;
            }
        };
        let to = match parse_instant_cell(&rec[n - 1]) {
            Ok(i) => i,
            Err(msg) => {
                errors.push(err(*row, format!("to: {msg}")));
                continue;
            }
        };
        let interval = match Interval::new(Instant::At(from), to) {
            Ok(iv) => iv,
            Err(e) => {
                errors.push(err(*row, e.to_string()));
                continue;
            }
        };
        layer.stages.push(Stage {
            object_id: rec[0].clone(),
            geometry,
            attrs: rec[2..n - 2].iter().map(|c| Value::parse(c)).collect(),
            interval,
        });
    }
    for problem in layer.check_invariants() {
        errors.push(err(0, problem));
    }
    if errors.is_empty() {
        Ok(layer)
    } else {
        Err(errors)
    }
}

pub fn layer_to_csv(layer: &Layer) -> String {
    let mut header = vec!["object_id".to_string(), "wkt".to_string()];
    header.extend(layer.attr_names.iter().cloned());
    header.push("from".into());
    header.push("to".into());
    let mut out = csvio::write_record(&header);
    out.push('\n');
    for s in &layer.stages {
        let mut rec = vec![s.object_id.clone(), s.geometry.to_wkt()];
        rec.extend(s.attrs.iter().map(|v| v.to_string()));
        rec.push(s.interval.from().to_string());
        rec.push(s.interval.to().to_string());
        out.push_str(&csvio::write_record(&rec));
        out.push('\n');
    }
    out
}
