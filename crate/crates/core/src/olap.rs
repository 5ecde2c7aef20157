//! The warehouse side: dimension hierarchies with optional member validity
//! intervals (slowly changing dimensions), fact tables, the cube-query subset
//! the query language embeds, the member-to-object alpha mapping, and
//! propagation of discrete layer changes.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::csvio;
use crate::layer::{parse_instant_cell, ChangeEvent, LoadError};
use crate::temporal::{Instant, Interval, Tick};
use crate::value::CmpOp;

#[derive(Debug, Error, PartialEq)]
pub enum OlapError {
    #[error("unknown dimension '{0}'")]
    UnknownDimension(String),
    #[error("dimension '{dim}' has no level '{level}'")]
    UnknownLevel { dim: String, level: String },
    #[error("member '{member}' is unknown in dimension '{dim}'")]
    UnknownMember { dim: String, member: String },
    #[error("member '{member}' is not valid at instant {t}")]
    NotValidAt { member: String, t: Tick },
    #[error("no rollup from member '{member}' to level '{level}'")]
    NoRollup { member: String, level: String },
    #[error("unknown cube '{0}'")]
    UnknownCube(String),
    #[error("cube '{cube}' has no measure '{measure}'")]
    UnknownMeasure { cube: String, measure: String },
    #[error("cube '{cube}' has no dimension '{dim}'")]
    CubeDimension { cube: String, dim: String },
    #[error("{event}: no rollup parent supplied for the new member(s); pass one explicitly")]
    MissingRollupParent { event: String },
    #[error("rollup parent '{parent}' does not exist at level '{level}' of dimension '{dim}'")]
    BadParent {
        parent: String,
        level: String,
        dim: String,
    },
}

/// How the warehouse reacts to discrete changes: keep member history with
/// validity intervals, or keep only the current state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimensionMode {
    Static,
    Temporal,
}

/// One member row. In temporal mode a member's life is bounded by `interval`;
/// `None` means valid over all time.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberRow {
    pub member: String,
    pub level: usize,
    pub parent: Option<String>,
    pub interval: Option<Interval>,
}

impl MemberRow {
    fn valid_at(&self, t: Option<Tick>) -> bool {
        match (t, &self.interval) {
            (Some(t), Some(iv)) => iv.at(t),
            _ => true,
        }
    }

    fn is_live(&self) -> bool {
        self.interval.map(|iv| iv.is_live()).unwrap_or(true)
    }
}

/// A dimension hierarchy: ordered levels bottom to top and member rows with
/// their per-step rollup parent.
#[derive(Debug, Clone)]
pub struct Dimension {
    pub name: String,
    pub levels: Vec<String>,
    pub rows: Vec<MemberRow>,
}

impl Dimension {
    pub fn new(name: impl Into<String>, levels: Vec<String>) -> Dimension {
        Dimension {
            name: name.into(),
            levels,
            rows: Vec::new(),
        }
    }

    /// Resolve a level name. Bracketed paths often prefix the level with the
    /// dimension name ("Land parcelId"); strip that prefix as a fallback.
    pub fn level_index(&self, level: &str) -> Option<usize> {
        let norm = |s: &str| s.trim().to_ascii_lowercase();
        let target = norm(level);
        if let Some(i) = self.levels.iter().position(|l| norm(l) == target) {
            return Some(i);
        }
        let prefix = format!("{} ", norm(&self.name));
        target
            .strip_prefix(&prefix)
            .and_then(|stripped| self.levels.iter().position(|l| norm(l) == stripped))
    }

    pub fn rows_of<'a>(&'a self, member: &'a str) -> impl Iterator<Item = &'a MemberRow> + 'a {
        self.rows.iter().filter(move |r| r.member == member)
    }

    /// First row of `member` valid at `t`; the borrow is tied to `self` only.
    fn find_row(&self, member: &str, t: Option<Tick>) -> Option<&MemberRow> {
        self.rows
            .iter()
            .find(|r| r.member == member && r.valid_at(t))
    }

    pub fn is_member(&self, member: &str) -> bool {
        self.rows_of(member).next().is_some()
    }

    /// Distinct members of a level, optionally restricted to an instant.
    pub fn members_of_level(&self, level: usize, t: Option<Tick>) -> Vec<String> {
        let set: BTreeSet<&str> = self
            .rows
            .iter()
            .filter(|r| r.level == level && r.valid_at(t))
            .map(|r| r.member.as_str())
            .collect();
        set.into_iter().map(String::from).collect()
    }

    /// The unique ancestor of `member` at `target_level`; identity when the
    /// member already sits there. With `t` given, only member rows valid at
    /// `t` participate.
    pub fn rollup(
        &self,
        member: &str,
        target_level: &str,
        t: Option<Tick>,
    ) -> Result<String, OlapError> {
        let target = self
            .level_index(target_level)
            .ok_or_else(|| OlapError::UnknownLevel {
                dim: self.name.clone(),
                level: target_level.into(),
            })?;
        let mut current = member.to_string();
        loop {
            let (row_level, row_parent) = match self.find_row(&current, t) {
                Some(r) => (r.level, r.parent.clone()),
                None if self.is_member(&current) => {
                    return Err(OlapError::NotValidAt {
                        member: current,
                        t: t.unwrap_or_default(),
                    })
                }
                None => {
                    return Err(OlapError::UnknownMember {
                        dim: self.name.clone(),
                        member: current,
                    })
                }
            };
            if row_level == target {
                return Ok(current);
            }
            if row_level > target {
                return Err(OlapError::NoRollup {
                    member: member.into(),
                    level: target_level.into(),
                });
            }
            match row_parent {
                Some(p) => current = p,
                None => {
                    return Err(OlapError::NoRollup {
                        member: member.into(),
                        level: target_level.into(),
                    })
                }
            }
        }
    }

    /// Does `member` equal `ancestor` or roll up to it at any level?
    fn rolls_to(&self, member: &str, ancestor: &str, t: Option<Tick>) -> bool {
        let mut current = member.to_string();
        loop {
            if current == ancestor {
                return true;
            }
            match self.find_row(&current, t).and_then(|r| r.parent.clone()) {
                Some(p) => current = p,
                None => return false,
            }
        }
    }

    /// Structural checks: known parent one level up, single parent per member
    /// per instant, disjoint validity rows per (member, level).
    pub fn check(&self) -> Vec<String> {
        let mut problems = Vec::new();
        for row in &self.rows {
            if row.level >= self.levels.len() {
                problems.push(format!("member '{}': level index out of range", row.member));
                continue;
            }
            match &row.parent {
                Some(p) => {
                    if row.level + 1 >= self.levels.len() {
                        problems.push(format!(
                            "member '{}' at top level '{}' has parent '{p}'",
                            row.member, self.levels[row.level]
                        ));
                    } else if !self
                        .rows
                        .iter()
                        .any(|r| r.member == *p && r.level == row.level + 1)
                    {
                        problems.push(format!(
                            "member '{}': parent '{p}' not found at level '{}'",
                            row.member,
                            self.levels[row.level + 1]
                        ));
                    }
                }
                None => {
                    if row.level + 1 < self.levels.len() {
                        problems.push(format!(
                            "member '{}' at level '{}' has no rollup parent",
                            row.member, self.levels[row.level]
                        ));
                    }
                }
            }
        }
        // Per member: rows may not overlap in time (two parents at once).
        let members: BTreeSet<&str> = self.rows.iter().map(|r| r.member.as_str()).collect();
        for m in members {
            let rows: Vec<&MemberRow> = self.rows_of(m).collect();
            for i in 0..rows.len() {
                for j in i + 1..rows.len() {
                    let overlap = match (&rows[i].interval, &rows[j].interval) {
                        (Some(a), Some(b)) => a.intersection(b).is_some(),
                        _ => true,
                    };
                    if overlap {
                        problems.push(format!("member '{m}': overlapping validity rows"));
                    }
                }
            }
        }
        problems
    }
}

/// Fact rows: one bottom-level member key per cube dimension plus numeric
/// measures.
#[derive(Debug, Clone, PartialEq)]
pub struct FactRow {
    pub keys: Vec<String>,
    pub measures: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Cube {
    pub name: String,
    pub dim_names: Vec<String>,
    pub measure_names: Vec<String>,
    pub facts: Vec<FactRow>,
}

impl Cube {
    pub fn measure_index(&self, name: &str) -> Result<usize, OlapError> {
        self.measure_names
            .iter()
            .position(|m| m.eq_ignore_ascii_case(name))
            .ok_or_else(|| OlapError::UnknownMeasure {
                cube: self.name.clone(),
                measure: name.into(),
            })
    }

    pub fn dim_index(&self, name: &str) -> Result<usize, OlapError> {
        self.dim_names
            .iter()
            .position(|d| d.eq_ignore_ascii_case(name))
            .ok_or_else(|| OlapError::CubeDimension {
                cube: self.name.clone(),
                dim: name.into(),
            })
    }
}

/// A member slicer: restrict facts to those whose key in `dimension` equals
/// or rolls up to `member`.
#[derive(Debug, Clone, PartialEq)]
pub struct Slicer {
    pub dimension: String,
    pub member: String,
}

/// Member-set cube query: aggregate a measure per member of a level and keep
/// the members passing the comparison.
#[derive(Debug, Clone)]
pub struct MemberSetQuery {
    pub cube: String,
    pub dimension: String,
    pub level: String,
    pub measure: String,
    pub op: CmpOp,
    pub threshold: f64,
    pub slicers: Vec<Slicer>,
}

/// Tabular cube query: measures per member of a row level.
#[derive(Debug, Clone)]
pub struct TableQuery {
    pub cube: String,
    pub measures: Vec<String>,
    /// (dimension, level) whose members form the rows; a single total row
    /// when absent.
    pub row_level: Option<(String, String)>,
    pub slicers: Vec<Slicer>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CubeResult {
    Members(Vec<String>),
    Table {
        row_label: String,
        measure_names: Vec<String>,
        rows: Vec<(String, Vec<f64>)>,
    },
}

/// The warehouse: dimensions plus cubes, under one history mode.
#[derive(Debug, Clone)]
pub struct Warehouse {
    pub mode: DimensionMode,
    pub dimensions: Vec<Dimension>,
    pub cubes: Vec<Cube>,
}

impl Warehouse {
    pub fn new(mode: DimensionMode) -> Warehouse {
        Warehouse {
            mode,
            dimensions: Vec::new(),
            cubes: Vec::new(),
        }
    }

    pub fn dimension(&self, name: &str) -> Result<&Dimension, OlapError> {
        self.dimensions
            .iter()
            .find(|d| d.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| OlapError::UnknownDimension(name.into()))
    }

    fn dimension_mut(&mut self, name: &str) -> Result<&mut Dimension, OlapError> {
        self.dimensions
            .iter_mut()
            .find(|d| d.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| OlapError::UnknownDimension(name.into()))
    }

    pub fn cube(&self, name: &str) -> Result<&Cube, OlapError> {
        self.cubes
            .iter()
            .find(|c| c.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| OlapError::UnknownCube(name.into()))
    }

    /// Facts of `cube` passing every slicer and the optional bottom-member
    /// filter on one dimension.
    fn matching_facts<'a>(
        &'a self,
        cube: &'a Cube,
        slicers: &'a [Slicer],
        member_filter: Option<(&'a str, &'a BTreeSet<String>)>,
    ) -> Result<Vec<&'a FactRow>, OlapError> {
        let mut slicer_cols = Vec::new();
        for s in slicers {
            slicer_cols.push((
                cube.dim_index(&s.dimension)?,
                self.dimension(&s.dimension)?,
                s,
            ));
        }
        let filter_col = match member_filter {
            Some((dim, set)) => Some((cube.dim_index(dim)?, set)),
            None => None,
        };
        Ok(cube
            .facts
            .iter()
            .filter(|f| {
                slicer_cols
                    .iter()
                    .all(|(idx, dim, s)| dim.rolls_to(&f.keys[*idx], &s.member, None))
                    && filter_col
                        .as_ref()
                        .map(|(idx, set)| set.contains(&f.keys[*idx]))
                        .unwrap_or(true)
            })
            .collect())
    }

    /// The member-set form: sum the measure per member of the stated level,
    /// return members passing the comparison.
    pub fn eval_member_set(
        &self,
        q: &MemberSetQuery,
        member_filter: Option<(&str, &BTreeSet<String>)>,
    ) -> Result<Vec<String>, OlapError> {
        let cube = self.cube(&q.cube)?;
        let dim = self.dimension(&q.dimension)?;
        let level = dim
            .level_index(&q.level)
            .ok_or_else(|| OlapError::UnknownLevel {
                dim: dim.name.clone(),
                level: q.level.clone(),
            })?;
        let level_name = dim.levels[level].clone();
        let midx = cube.measure_index(&q.measure)?;
        let didx = cube.dim_index(&q.dimension)?;
        let mut totals: Vec<(String, f64)> = Vec::new();
        for fact in self.matching_facts(cube, &q.slicers, member_filter)? {
            let Ok(group) = dim.rollup(&fact.keys[didx], &level_name, None) else {
                continue;
            };
            match totals.iter_mut().find(|(m, _)| *m == group) {
                Some((_, sum)) => *sum += fact.measures[midx],
                None => totals.push((group, fact.measures[midx])),
            }
        }
        let mut members: Vec<String> = totals
            .into_iter()
            .filter(|(_, sum)| q.op.eval_f64(*sum, q.threshold))
            .map(|(m, _)| m)
            .collect();
        members.sort();
        Ok(members)
    }

    /// The tabular form: one row per member of the row level, one column per
    /// measure, sums over matching facts.
    pub fn eval_table(
        &self,
        q: &TableQuery,
        member_filter: Option<(&str, &BTreeSet<String>)>,
    ) -> Result<CubeResult, OlapError> {
        let cube = self.cube(&q.cube)?;
        let midxs: Vec<usize> = q
            .measures
            .iter()
            .map(|m| cube.measure_index(m))
            .collect::<Result<_, _>>()?;
        let facts = self.matching_facts(cube, &q.slicers, member_filter)?;
        let (row_label, rows) = match &q.row_level {
            Some((dim_name, level)) => {
                let dim = self.dimension(dim_name)?;
                let lidx = dim
                    .level_index(level)
                    .ok_or_else(|| OlapError::UnknownLevel {
                        dim: dim.name.clone(),
                        level: level.clone(),
                    })?;
                let level_name = dim.levels[lidx].clone();
                let didx = cube.dim_index(dim_name)?;
                let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
                for member in dim.members_of_level(lidx, None) {
                    let mut sums = vec![0.0; midxs.len()];
                    let mut any = false;
                    for f in &facts {
                        if dim.rollup(&f.keys[didx], &level_name, None).as_deref()
                            == Ok(member.as_str())
                        {
                            any = true;
                            for (out, midx) in sums.iter_mut().zip(&midxs) {
                                *out += f.measures[*midx];
                            }
                        }
                    }
                    if any {
                        rows.push((member, sums));
                    }
                }
                (level_name, rows)
            }
            None => {
                let mut sums = vec![0.0; midxs.len()];
                for f in &facts {
                    for (out, midx) in sums.iter_mut().zip(&midxs) {
                        *out += f.measures[*midx];
                    }
                }
                ("total".to_string(), vec![("*".to_string(), sums)])
            }
        };
        Ok(CubeResult::Table {
            row_label,
            measure_names: q.measures.clone(),
            rows,
        })
    }

    /// Fact foreign keys must resolve to bottom-level members.
    pub fn check_facts(&self, cube: &Cube) -> Vec<String> {
        let mut problems = Vec::new();
        for (i, dim_name) in cube.dim_names.iter().enumerate() {
            let Ok(dim) = self.dimension(dim_name) else {
                problems.push(format!(
                    "cube '{}': unknown dimension '{dim_name}'",
                    cube.name
                ));
                continue;
            };
            for f in &cube.facts {
                if !dim.rows_of(&f.keys[i]).any(|r| r.level == 0) {
                    problems.push(format!(
                        "cube '{}': fact key '{}' is not a bottom-level member of '{dim_name}'",
                        cube.name, f.keys[i]
                    ));
                }
            }
        }
        problems
    }
}

// ---------------------------------------------------------------------------
// alpha mapping
// ---------------------------------------------------------------------------

/// One temporally qualified member-to-object correspondence.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingRow {
    pub member: String,
    pub object_id: String,
    pub interval: Interval,
}

/// The alpha mapping of one (dimension level, layer) pair.
#[derive(Debug, Clone)]
pub struct AlphaMapping {
    pub dimension: String,
    pub level: String,
    pub layer: String,
    pub rows: Vec<MappingRow>,
}

impl AlphaMapping {
    /// Members mapped to any of `ids`, optionally requiring the mapping row
    /// to intersect a temporal context.
    pub fn members_for_ids(
        &self,
        ids: &BTreeSet<String>,
        context: Option<Interval>,
    ) -> BTreeSet<String> {
        self.rows
            .iter()
            .filter(|r| ids.contains(&r.object_id) && in_context(r, context))
            .map(|r| r.member.clone())
            .collect()
    }

    /// Object ids mapped from any of `members`, optionally within a context.
    pub fn ids_for_members(
        &self,
        members: &BTreeSet<String>,
        context: Option<Interval>,
    ) -> BTreeSet<String> {
        self.rows
            .iter()
            .filter(|r| members.contains(&r.member) && in_context(r, context))
            .map(|r| r.object_id.clone())
            .collect()
    }
}

fn in_context(row: &MappingRow, context: Option<Interval>) -> bool {
    match context {
        Some(ctx) => row.interval.intersection(&ctx).is_some(),
        None => true,
    }
}

// ---------------------------------------------------------------------------
// propagation of discrete changes
// ---------------------------------------------------------------------------

/// Apply a layer change event to the warehouse and the mappings. Split and
/// merge events create/retire members and mapping rows; updates and creations
/// need no warehouse action; deleting a mapped object closes its live mapping
/// rows so the mapping stays inside the object's lifespan.
///
/// `rollup_parent` names the parent for members created by a split or merge;
/// it is required whenever the event's layer is mapped.
pub fn propagate_change(
    warehouse: &mut Warehouse,
    mappings: &mut [AlphaMapping],
    event: &ChangeEvent,
    rollup_parent: Option<&str>,
) -> Result<Vec<String>, OlapError> {
    let mut notes = Vec::new();
    let (layer, old_ids, new_ids, t): (&str, Vec<String>, Vec<String>, Tick) = match event {
        ChangeEvent::Split {
            layer,
            parent,
            parts,
            at,
        } => (layer, vec![parent.clone()], parts.clone(), *at),
        ChangeEvent::Merged {
            layer,
            parents,
            new_id,
            at,
        } => (layer, parents.clone(), vec![new_id.clone()], *at),
        ChangeEvent::Deleted { layer, id, at } => {
            for mapping in mappings.iter_mut().filter(|m| m.layer == *layer) {
                for row in mapping
                    .rows
                    .iter_mut()
                    .filter(|r| r.object_id == *id && r.interval.is_live())
                {
                    if let Ok(iv) = row.interval.with_to(Instant::At(at - 1)) {
                        row.interval = iv;
                        notes.push(format!(
                            "closed mapping {} -> {id} at {}",
                            row.member,
                            at - 1
                        ));
                    }
                }
            }
            return Ok(notes);
        }
        // Creations, updates and reincarnations keep identifiers; the
        // warehouse needs no action.
        _ => return Ok(notes),
    };

    let mode = warehouse.mode;
    let mapping_idxs: Vec<usize> = mappings
        .iter()
        .enumerate()
        .filter(|(_, m)| m.layer == layer)
        .map(|(i, _)| i)
        .collect();
    for mi in mapping_idxs {
        let (dim_name, level_name) = {
            let m = &mappings[mi];
            (m.dimension.clone(), m.level.clone())
        };
        // Old members behind the retired objects, via their live mapping rows.
        let old_members: Vec<String> = {
            let m = &mappings[mi];
            old_ids
                .iter()
                .filter_map(|id| {
                    m.rows
                        .iter()
                        .find(|r| r.object_id == *id && r.interval.is_live())
                        .map(|r| r.member.clone())
                })
                .collect()
        };
        if old_members.is_empty() {
            notes.push(format!(
                "layer '{layer}' objects {:?} are unmapped in dimension '{dim_name}'; warehouse untouched",
                old_ids
            ));
            continue;
        }
        let parent = rollup_parent.ok_or_else(|| OlapError::MissingRollupParent {
            event: event.to_string(),
        })?;
        {
            let dim = warehouse.dimension(&dim_name)?;
            let bottom = dim
                .level_index(&level_name)
                .ok_or_else(|| OlapError::UnknownLevel {
                    dim: dim_name.clone(),
                    level: level_name.clone(),
                })?;
            let parent_level = bottom + 1;
            if parent_level >= dim.levels.len()
                || !dim
                    .rows
                    .iter()
                    .any(|r| r.member == parent && r.level == parent_level)
            {
                return Err(OlapError::BadParent {
                    parent: parent.into(),
                    level: dim
                        .levels
                        .get(parent_level)
                        .cloned()
                        .unwrap_or_else(|| "<none>".into()),
                    dim: dim_name.clone(),
                });
            }
        }
        let dim = warehouse.dimension_mut(&dim_name)?;
        let bottom = dim.level_index(&level_name).unwrap();
        match mode {
            DimensionMode::Temporal => {
                for m in &old_members {
                    for row in dim
                        .rows
                        .iter_mut()
                        .filter(|r| r.member == *m && r.level == bottom && r.is_live())
                    {
                        let open = row.interval.unwrap_or(Interval::until_now(0));
                        row.interval = Some(open.with_to(Instant::At(t - 1)).unwrap_or(open));
                    }
                    notes.push(format!("member '{m}' closed at {}", t - 1));
                }
                for id in &new_ids {
                    dim.rows.push(MemberRow {
                        member: id.clone(),
                        level: bottom,
                        parent: Some(parent.to_string()),
                        interval: Some(Interval::until_now(t)),
                    });
                    notes.push(format!("member '{id}' added under '{parent}'"));
                }
            }
            DimensionMode::Static => {
                dim.rows
                    .retain(|r| !(r.level == bottom && old_members.contains(&r.member)));
                for id in &new_ids {
                    dim.rows.push(MemberRow {
                        member: id.clone(),
                        level: bottom,
                        parent: Some(parent.to_string()),
                        interval: None,
                    });
                }
                notes.push(format!(
                    "members {:?} replaced by {:?} (history lost)",
                    old_members, new_ids
                ));
            }
        }
        let mapping = &mut mappings[mi];
        match mode {
            DimensionMode::Temporal => {
                for row in mapping
                    .rows
                    .iter_mut()
                    .filter(|r| old_ids.contains(&r.object_id) && r.interval.is_live())
                {
                    if let Ok(iv) = row.interval.with_to(Instant::At(t - 1)) {
                        row.interval = iv;
                    }
                }
            }
            DimensionMode::Static => {
                mapping.rows.retain(|r| !old_ids.contains(&r.object_id));
            }
        }
        for id in &new_ids {
            mapping.rows.push(MappingRow {
                member: id.clone(),
                object_id: id.clone(),
                interval: Interval::until_now(t),
            });
        }
    }
    Ok(notes)
}

// ---------------------------------------------------------------------------
// CSV formats
// ---------------------------------------------------------------------------

/// Dimension file: `member,level,parent[,from,to]`.
pub fn load_dimension_csv(
    name: &str,
    levels: Vec<String>,
    file: &str,
    text: &str,
) -> Result<Dimension, Vec<LoadError>> {
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
    let Some(((hrow, header), body)) = records.split_first() else {
        return Err(vec![err(1, "empty dimension file".into())]);
    };
    let temporal = match header.len() {
        3 if header[..3] == ["member", "level", "parent"] => false,
        5 if *header == ["member", "level", "parent", "from", "to"] => true,
        _ => {
            return Err(vec![err(
                *hrow,
                "header must be member,level,parent[,from,to]".into(),
            )])
        }
    };
    let mut dim = Dimension::new(name, levels);
    for (row, rec) in body {
        if rec.len() != header.len() {
            errors.push(err(*row, format!("expected {} fields", header.len())));
            continue;
        }
        let Some(level) = dim.level_index(&rec[1]) else {
            errors.push(err(*row, format!("unknown level '{}'", rec[1])));
            continue;
        };
        let parent = if rec[2].trim().is_empty() {
            None
        } else {
            Some(rec[2].clone())
        };
        let interval = if temporal && !rec[3].trim().is_empty() {
            let from = match parse_instant_cell(&rec[3]) {
                Ok(Instant::At(t)) => t,
                Ok(Instant::Now) => {
                    errors.push(err(*row, "from cannot be Now".into()));
                    continue;
                }
                Err(m) => {
                    errors.push(err(*row, m));
                    continue;
                }
            };
            let to = match parse_instant_cell(&rec[4]) {
                Ok(i) => i,
                Err(m) => {
                    errors.push(err(*row, m));
                    continue;
                }
            };
            match Interval::new(Instant::At(from), to) {
                Ok(iv) => Some(iv),
                Err(e) => {
                    errors.push(err(*row, e.to_string()));
                    continue;
                }
            }
        } else {
            None
        };
        dim.rows.push(MemberRow {
            member: rec[0].clone(),
            level,
            parent,
            interval,
        });
    }
    for problem in dim.check() {
        errors.push(err(0, problem));
    }
    if errors.is_empty() {
        Ok(dim)
    } else {
        Err(errors)
    }
}

pub fn dimension_to_csv(dim: &Dimension) -> String {
    let temporal = dim.rows.iter().any(|r| r.interval.is_some());
    let mut out = if temporal {
        "member,level,parent,from,to\n".to_string()
    } else {
        "member,level,parent\n".to_string()
    };
    for r in &dim.rows {
        let mut rec = vec![
            r.member.clone(),
            dim.levels[r.level].clone(),
            r.parent.clone().unwrap_or_default(),
        ];
        if temporal {
            match &r.interval {
                Some(iv) => {
                    rec.push(iv.from().to_string());
                    rec.push(iv.to().to_string());
                }
                None => {
                    rec.push(String::new());
                    rec.push(String::new());
                }
            }
        }
        out.push_str(&csvio::write_record(&rec));
        out.push('\n');
    }
    out
}

/// Fact file: one key column per cube dimension then the measures; the header
/// must match the cube declaration.
pub fn load_facts_csv(
    cube_name: &str,
    dim_names: &[String],
    measure_names: &[String],
    file: &str,
    text: &str,
) -> Result<Cube, Vec<LoadError>> {
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
    let Some(((hrow, header), body)) = records.split_first() else {
        return Err(vec![err(1, "empty fact file".into())]);
    };
    let expected: Vec<&String> = dim_names.iter().chain(measure_names).collect();
    if header.len() != expected.len()
        || !header
            .iter()
            .zip(&expected)
            .all(|(h, e)| h.eq_ignore_ascii_case(e))
    {
        return Err(vec![err(
            *hrow,
            format!(
                "header must be {}",
                expected
                    .iter()
                    .map(|s| s.as_str())
                    .collect::<Vec<_>>()
                    .join(",")
            ),
        )]);
    }
    let ndims = dim_names.len();
    let mut facts = Vec::new();
    for (row, rec) in body {
        if rec.len() != header.len() {
            errors.push(err(*row, format!("expected {} fields", header.len())));
            continue;
        }
        let mut measures = Vec::new();
        let mut ok = true;
        for cell in &rec[ndims..] {
            match cell.trim().parse::<f64>() {
                Ok(v) => measures.push(v),
                Err(_) => {
                    errors.push(err(*row, format!("measure '{cell}' is not numeric")));
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            facts.push(FactRow {
                keys: rec[..ndims].to_vec(),
                measures,
            });
        }
    }
    if errors.is_empty() {
        Ok(Cube {
            name: cube_name.into(),
            dim_names: dim_names.to_vec(),
            measure_names: measure_names.to_vec(),
            facts,
        })
    } else {
        Err(errors)
    }
}

pub fn facts_to_csv(cube: &Cube) -> String {
    let header: Vec<String> = cube
        .dim_names
        .iter()
        .chain(&cube.measure_names)
        .cloned()
        .collect();
    let mut out = csvio::write_record(&header);
    out.push('\n');
    for f in &cube.facts {
        let mut rec = f.keys.clone();
        rec.extend(f.measures.iter().map(|m| crate::value::fmt_num(*m)));
        out.push_str(&csvio::write_record(&rec));
        out.push('\n');
    }
    out
}

/// Mapping file: `member,layer,object_id,from,to`.
pub fn load_mapping_csv(
    dimension: &str,
    level: &str,
    layer: &str,
    file: &str,
    text: &str,
) -> Result<AlphaMapping, Vec<LoadError>> {
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
    let Some(((hrow, header), body)) = records.split_first() else {
        return Err(vec![err(1, "empty mapping file".into())]);
    };
    if *header != ["member", "layer", "object_id", "from", "to"] {
        return Err(vec![err(
            *hrow,
            "header must be member,layer,object_id,from,to".into(),
        )]);
    }
    let mut rows = Vec::new();
    for (row, rec) in body {
        if rec.len() != 5 {
            errors.push(err(*row, "expected 5 fields".into()));
            continue;
        }
        if rec[1] != layer {
            errors.push(err(
                *row,
                format!(
                    "mapping row layer '{}' does not match declared layer '{layer}'",
                    rec[1]
                ),
            ));
            continue;
        }
        let from = match parse_instant_cell(&rec[3]) {
            Ok(Instant::At(t)) => t,
            Ok(Instant::Now) => {
                errors.push(err(*row, "from cannot be Now".into()));
                continue;
            }
            Err(m) => {
                errors.push(err(*row, m));
                continue;
            }
        };
        let to = match parse_instant_cell(&rec[4]) {
            Ok(i) => i,
            Err(m) => {
                errors.push(err(*row, m));
                continue;
            }
        };
        match Interval::new(Instant::At(from), to) {
            Ok(interval) => rows.push(MappingRow {
                member: rec[0].clone(),
                object_id: rec[2].clone(),
                interval,
            }),
            Err(e) => errors.push(err(*row, e.to_string())),
        }
    }
    // Rows for one (member, object) pair must not overlap.
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            if rows[i].member == rows[j].member
                && rows[i].object_id == rows[j].object_id
                && rows[i].interval.intersection(&rows[j].interval).is_some()
            {
                errors.push(err(
                    0,
                    format!(
                        "overlapping mapping rows for member '{}' and object '{}'",
                        rows[i].member, rows[i].object_id
                    ),
                ));
            }
        }
    }
    if errors.is_empty() {
        Ok(AlphaMapping {
            dimension: dimension.into(),
            level: level.into(),
            layer: layer.into(),
            rows,
        })
    } else {
        Err(errors)
    }
}

pub fn mapping_to_csv(mapping: &AlphaMapping) -> String {
    let mut out = "member,layer,object_id,from,to\n".to_string();
    for r in &mapping.rows {
        out.push_str(&csvio::write_record(&[
            r.member.clone(),
            mapping.layer.clone(),
            r.object_id.clone(),
            r.interval.from().to_string(),
            r.interval.to().to_string(),
        ]));
        out.push('\n');
    }
    out
}
