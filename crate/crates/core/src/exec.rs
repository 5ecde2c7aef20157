//! Query evaluation: cartesian-product semantics over layer stages, overlap
//! and disjoint temporal joins, per-candidate predicate evaluation, IN links
//! in both directions, default coalescing and the SNAPSHOT/CURRENT modifiers.
//!
//! The discrete-change model keeps this simple: within one candidate every
//! alias's geometry is fixed, so each spatial predicate is evaluated once per
//! candidate rather than once per tick.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::ast::{Modifier, Span, SpatialPred, TemporalPred};
use crate::geometry;
use crate::layer::Stage;
use crate::olap::{CubeResult, OlapError};
use crate::result::{Cell, ResultRelation, ResultRow};
use crate::temporal::{Instant, Interval};
use crate::validate::{
    CheckedAtom, CheckedCond, CheckedCube, CheckedCubeKind, CheckedExpr, CheckedGis, CheckedQuery,
    ColumnRef, ResolvedArg,
};
use crate::value::Value;
use crate::workspace::Workspace;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error(transparent)]
    Olap(#[from] OlapError),
    #[error("{span}: {msg}")]
    Type { span: Span, msg: String },
    #[error("unknown layer '{0}'")]
    UnknownLayer(String),
}

pub fn eval(query: &CheckedQuery, ws: &Workspace) -> Result<ResultRelation, EvalError> {
    match query {
        CheckedQuery::Gis(q) => eval_gis(q, ws),
        CheckedQuery::Cube(q) => Ok(cube_relation(eval_cube(q, ws)?)),
    }
}

// ---------------------------------------------------------------------------
// GIS evaluation
// ---------------------------------------------------------------------------

pub fn eval_gis(q: &CheckedGis, ws: &Workspace) -> Result<ResultRelation, EvalError> {
    let layers: Vec<&crate::layer::Layer> = q
        .sources
        .iter()
        .map(|(name, _)| {
            ws.layer(name)
                .ok_or_else(|| EvalError::UnknownLayer(name.clone()))
        })
        .collect::<Result<_, _>>()?;

    // Subquery member sets are evaluated once and memoized per slot.
    let mut slots: Vec<BTreeSet<String>> = vec![BTreeSet::new(); q.in_count];
    fill_in_slots(&q.condition, ws, &mut slots)?;

    let single = layers.len() == 1;
    let temporal_result = q.modifier.is_none() && (q.overlap || single);
    let geom_cols: Vec<bool> = q
        .projection
        .iter()
        .map(|(_, c)| matches!(c, ColumnRef::Geom(_)))
        .collect();
    let columns: Vec<String> = q.projection.iter().map(|(name, _)| name.clone()).collect();
    let mut rel = ResultRelation::new(columns, temporal_result);

    let counts: Vec<usize> = layers.iter().map(|l| l.stages().len()).collect();
    if counts.contains(&0) {
        return Ok(rel);
    }
    let total: usize = counts.iter().product();
    let mut raw: Vec<ResultRow> = Vec::new();
    let mut stages: Vec<&Stage> = Vec::with_capacity(layers.len());
    for flat in 0..total {
        stages.clear();
        let mut rem = flat;
        for (layer, count) in layers.iter().zip(&counts) {
            stages.push(&layer.stages()[rem % count]);
            rem /= count;
        }
        // Overlap join: all stage intervals must share at least one tick; the
        // intersection becomes the candidate's interval.
        let interval = if q.overlap {
            let mut iv = stages[0].interval;
            let mut empty = false;
            for s in &stages[1..] {
                match iv.intersection(&s.interval) {
                    Some(next) => iv = next,
                    None => {
                        empty = true;
                        break;
                    }
                }
            }
            if empty {
                continue;
            }
            Some(iv)
        } else if single {
            Some(stages[0].interval)
        } else {
            None
        };
        // CURRENT: the candidate's combined interval must reach Now, i.e.
        // every participating stage is live.
        if q.modifier == Some(Modifier::Current) && !stages.iter().all(|s| s.interval.is_live()) {
            continue;
        }
        if !eval_cond(&q.condition, &stages, &slots)? {
            continue;
        }
        let cells: Vec<Cell> = q
            .projection
            .iter()
            .map(|(_, c)| project(c, &stages))
            .collect();
        raw.push(ResultRow {
            cells,
            interval: if temporal_result { interval } else { None },
        });
    }

    if temporal_result {
        rel.rows = coalesce_rows(raw, &geom_cols);
    } else {
        for row in raw {
            if !rel.rows.iter().any(|r| r.cells == row.cells) {
                rel.rows.push(row);
            }
        }
    }
    Ok(rel)
}

fn project(col: &ColumnRef, stages: &[&Stage]) -> Cell {
    match col {
        ColumnRef::Id(i) => Cell::Str(stages[*i].object_id.clone()),
        ColumnRef::Geom(i) => Cell::Geom(stages[*i].geometry.clone()),
        ColumnRef::Attr(i, a) => Cell::from(&stages[*i].attrs[*a]),
        ColumnRef::From(i) => Cell::Instant(Instant::At(stages[*i].interval.from())),
        ColumnRef::To(i) => Cell::Instant(stages[*i].interval.to()),
    }
}

type Piece = (Interval, Vec<Cell>);

/// Coalesce temporal rows: the key is every projected cell except geometry
/// columns (per the data model, geometry is not an attribute). When adjacent
/// pieces merge, the cells of the latest piece survive.
fn coalesce_rows(rows: Vec<ResultRow>, geom_cols: &[bool]) -> Vec<ResultRow> {
    let key_of = |cells: &[Cell]| -> Vec<Cell> {
        cells
            .iter()
            .enumerate()
            .filter(|(i, _)| !geom_cols[*i])
            .map(|(_, c)| c.clone())
            .collect()
    };
    let mut groups: Vec<(Vec<Cell>, Vec<Piece>)> = Vec::new();
    for row in rows {
        let iv = row.interval.expect("temporal rows carry intervals");
        let key = key_of(&row.cells);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, pieces)) => pieces.push((iv, row.cells)),
            None => groups.push((key, vec![(iv, row.cells)])),
        }
    }
    let mut out = Vec::new();
    for (_, mut pieces) in groups {
        pieces.sort_by_key(|(iv, _)| (iv.from(), iv.to()));
        let mut run: Option<Piece> = None;
        for (iv, cells) in pieces {
            run = Some(match run {
                Some((cur, _)) if cur.mergeable(&iv) => (cur.merge(&iv).unwrap(), cells),
                Some(done) => {
                    out.push(ResultRow {
                        cells: done.1,
                        interval: Some(done.0),
                    });
                    (iv, cells)
                }
                None => (iv, cells),
            });
        }
        if let Some((iv, cells)) = run {
            out.push(ResultRow {
                cells,
                interval: Some(iv),
            });
        }
    }
    out
}

fn fill_in_slots(
    cond: &CheckedCond,
    ws: &Workspace,
    slots: &mut [BTreeSet<String>],
) -> Result<(), EvalError> {
    match cond {
        CheckedCond::Or(a, b) | CheckedCond::And(a, b) => {
            fill_in_slots(a, ws, slots)?;
            fill_in_slots(b, ws, slots)
        }
        CheckedCond::Not(c) => fill_in_slots(c, ws, slots),
        CheckedCond::Atom(CheckedAtom::In {
            slot,
            subquery,
            dimension,
            layer,
            ..
        }) => {
            let members = match eval_cube(subquery, ws)? {
                CubeResult::Members(m) => m.into_iter().collect::<BTreeSet<String>>(),
                CubeResult::Table { .. } => BTreeSet::new(),
            };
            // An unmapped link yields an empty id set, not an error.
            slots[*slot] = match ws.mapping_for(dimension, layer) {
                Some(mapping) => mapping.ids_for_members(&members, subquery.time_range),
                None => BTreeSet::new(),
            };
            Ok(())
        }
        CheckedCond::Atom(_) => Ok(()),
    }
}

fn eval_cond(
    cond: &CheckedCond,
    stages: &[&Stage],
    slots: &[BTreeSet<String>],
) -> Result<bool, EvalError> {
    Ok(match cond {
        CheckedCond::Or(a, b) => eval_cond(a, stages, slots)? || eval_cond(b, stages, slots)?,
        CheckedCond::And(a, b) => eval_cond(a, stages, slots)? && eval_cond(b, stages, slots)?,
        CheckedCond::Not(c) => !eval_cond(c, stages, slots)?,
        CheckedCond::Atom(atom) => eval_atom(atom, stages, slots)?,
    })
}

fn eval_atom(
    atom: &CheckedAtom,
    stages: &[&Stage],
    slots: &[BTreeSet<String>],
) -> Result<bool, EvalError> {
    match atom {
        CheckedAtom::Spatial {
            pred, left, right, ..
        } => {
            let (a, b) = (&stages[*left].geometry, &stages[*right].geometry);
            Ok(match pred {
                SpatialPred::Intersects => geometry::intersects(a, b),
                SpatialPred::Crosses => geometry::crosses(a, b),
                SpatialPred::Contains => geometry::contains(a, b),
                SpatialPred::Touches => geometry::touches(a, b),
            })
        }
        CheckedAtom::Temporal { pred, source, arg } => {
            let iv = stages[*source].interval;
            Ok(match (pred, arg) {
                (TemporalPred::At, ResolvedArg::Instant(t)) => iv.at(*t),
                (TemporalPred::StartsBefore, ResolvedArg::Instant(t)) => iv.starts_before(*t),
                (TemporalPred::FinishesAfter, ResolvedArg::Instant(t)) => iv.finishes_after(*t),
                (TemporalPred::BeginsAfter, ResolvedArg::Instant(t)) => iv.begins_after(*t),
                (TemporalPred::Before, ResolvedArg::Window(w)) => iv.before(w),
                (TemporalPred::After, ResolvedArg::Window(w)) => iv.after(w),
                (TemporalPred::During, ResolvedArg::Window(w)) => iv.during(w),
                (TemporalPred::Overlaps, ResolvedArg::Window(w)) => iv.overlaps(w),
                (TemporalPred::Covers, ResolvedArg::Window(w)) => iv.covers(w),
                (TemporalPred::Meets, ResolvedArg::Window(w)) => iv.meets(w),
                // The parser pairs argument kinds with predicates.
                _ => false,
            })
        }
        CheckedAtom::Cmp {
            left,
            op,
            right,
            span,
        } => {
            let l = eval_expr(left, stages, span)?;
            let r = eval_expr(right, stages, span)?;
            match (&l, &r) {
                (EvalValue::Num(a), EvalValue::Num(b)) => Ok(op.eval_f64(*a, *b)),
                (EvalValue::Str(a), EvalValue::Str(b)) => Ok(op.eval(a.cmp(b))),
                _ => Err(EvalError::Type {
                    span: *span,
                    msg: "cannot compare a number with a string".into(),
                }),
            }
        }
        CheckedAtom::In { source, slot, .. } => {
            Ok(slots[*slot].contains(stages[*source].object_id.as_str()))
        }
    }
}

enum EvalValue {
    Num(f64),
    Str(String),
}

fn eval_expr(expr: &CheckedExpr, stages: &[&Stage], span: &Span) -> Result<EvalValue, EvalError> {
    Ok(match expr {
        CheckedExpr::Id(i) => EvalValue::Str(stages[*i].object_id.clone()),
        CheckedExpr::Attr(i, a) => match &stages[*i].attrs[*a] {
            Value::Num(n) => EvalValue::Num(*n),
            Value::Str(s) => EvalValue::Str(s.clone()),
        },
        CheckedExpr::From(i) => EvalValue::Num(stages[*i].interval.from() as f64),
        // Now compares as the maximum, so it reads as infinity here.
        CheckedExpr::To(i) => EvalValue::Num(match stages[*i].interval.to() {
            Instant::At(t) => t as f64,
            Instant::Now => f64::INFINITY,
        }),
        CheckedExpr::Distance(a, b) => EvalValue::Num(geometry::distance(
            &stages[*a].geometry,
            &stages[*b].geometry,
        )),
        CheckedExpr::Area(i) => EvalValue::Num(geometry::area(&stages[*i].geometry).map_err(
            |e| EvalError::Type {
                span: *span,
                msg: e.to_string(),
            },
        )?),
        CheckedExpr::Str(s) => EvalValue::Str(s.clone()),
        CheckedExpr::Num(n) => EvalValue::Num(*n),
    })
}

// ---------------------------------------------------------------------------
// cube evaluation
// ---------------------------------------------------------------------------

pub fn eval_cube(q: &CheckedCube, ws: &Workspace) -> Result<CubeResult, EvalError> {
    let member_filter: Option<(String, BTreeSet<String>)> = match &q.gis_in {
        Some(link) => {
            let sub = eval_gis(&link.query, ws)?;
            let mut ids = BTreeSet::new();
            for row in &sub.rows {
                // When both a time slicer and a temporal subresult exist, the
                // row's interval must intersect the slicer range.
                if let (Some(range), true, Some(iv)) = (q.time_range, sub.temporal, row.interval) {
                    if iv.intersection(&range).is_none() {
                        continue;
                    }
                }
                if let Some(Cell::Str(id)) = row.cells.first() {
                    ids.insert(id.clone());
                }
            }
            let members = ws
                .mapping_for(&link.dimension, &link.layer)
                .map(|m| m.members_for_ids(&ids, q.time_range))
                .unwrap_or_default();
            Some((link.dimension.clone(), members))
        }
        None => None,
    };
    let filter_ref = member_filter.as_ref().map(|(d, s)| (d.as_str(), s));
    match &q.kind {
        CheckedCubeKind::MemberSet(ms) => Ok(CubeResult::Members(
            ws.warehouse.eval_member_set(ms, filter_ref)?,
        )),
        CheckedCubeKind::Table(tq) => Ok(ws.warehouse.eval_table(tq, filter_ref)?),
    }
}

fn cube_relation(result: CubeResult) -> ResultRelation {
    match result {
        CubeResult::Members(members) => {
            let mut rel = ResultRelation::new(vec!["member".into()], false);
            rel.rows = members
                .into_iter()
                .map(|m| ResultRow {
                    cells: vec![Cell::Str(m)],
                    interval: None,
                })
                .collect();
            rel
        }
        CubeResult::Table {
            row_label,
            measure_names,
            rows,
        } => {
            let mut columns = vec![row_label];
            columns.extend(measure_names);
            let mut rel = ResultRelation::new(columns, false);
            rel.rows = rows
                .into_iter()
                .map(|(member, sums)| ResultRow {
                    cells: std::iter::once(Cell::Str(member))
                        .chain(sums.into_iter().map(Cell::Num))
                        .collect(),
                    interval: None,
                })
                .collect();
            rel
        }
    }
}

// ---------------------------------------------------------------------------
// temporal join algebra
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TJoinKind {
    /// Disjoint join: `X.TO <= Y.FROM`.
    Before,
    /// Disjoint join: `X.TO = Y.FROM`.
    Meet,
    /// Overlap join: the intervals share at least one tick.
    Overlap,
}

/// Pair up interval-stamped rows by a temporal join condition. Overlap joins
/// attach the intersection; the disjoint kinds keep both source intervals.
pub fn t_join<'a>(
    left: &'a [Stage],
    right: &'a [Stage],
    kind: TJoinKind,
) -> Vec<(&'a Stage, &'a Stage, Option<Interval>)> {
    let mut out = Vec::new();
    for x in left {
        for y in right {
            match kind {
                TJoinKind::Before => {
                    if x.interval.to() <= Instant::At(y.interval.from()) {
                        out.push((x, y, None));
                    }
                }
                TJoinKind::Meet => {
                    if x.interval.to() == Instant::At(y.interval.from()) {
                        out.push((x, y, None));
                    }
                }
                TJoinKind::Overlap => {
                    if let Some(shared) = x.interval.intersection(&y.interval) {
                        out.push((x, y, Some(shared)));
                    }
                }
            }
        }
    }
    out
}

/// The generic temporal join: an overlap join plus a non-temporal predicate.
/// The result is raw (uncoalesced); query-level evaluation coalesces at the
/// result boundary instead.
pub fn gt_join<'a, P>(
    left: &'a [Stage],
    right: &'a [Stage],
    predicate: P,
) -> Vec<(&'a Stage, &'a Stage, Interval)>
where
    P: Fn(&Stage, &Stage) -> bool,
{
    t_join(left, right, TJoinKind::Overlap)
        .into_iter()
        .filter(|(x, y, _)| predicate(x, y))
        .map(|(x, y, shared)| {
            (
                x,
                y,
                shared.expect("overlap join attaches the intersection"),
            )
        })
        .collect()
}

// ---------------------------------------------------------------------------
// explain
// ---------------------------------------------------------------------------

pub fn explain(query: &CheckedQuery, ws: &Workspace) -> String {
    let mut out = String::new();
    match query {
        CheckedQuery::Gis(q) => explain_gis(q, ws, "", &mut out),
        CheckedQuery::Cube(q) => explain_cube(q, ws, "", &mut out),
    }
    out
}

fn explain_gis(q: &CheckedGis, ws: &Workspace, indent: &str, out: &mut String) {
    let join = if q.overlap {
        "overlap join"
    } else if q.sources.len() > 1 {
        "disjoint join"
    } else {
        "scan"
    };
    out.push_str(&format!(
        "{indent}gis query: {join}, {} source{}\n",
        q.sources.len(),
        if q.sources.len() == 1 { "" } else { "s" }
    ));
    let mut zero = false;
    for (layer, alias) in &q.sources {
        let stages = ws.layer(layer).map(|l| l.stages().len()).unwrap_or(0);
        zero |= stages == 0;
        out.push_str(&format!(
            "{indent}  source {layer} {alias}: {stages} stages\n"
        ));
    }
    if zero {
        out.push_str(&format!(
            "{indent}  zero cardinality source: short-circuits to an empty result\n"
        ));
    }
    let mut counts = AtomCounts::default();
    count_atoms(&q.condition, &mut counts);
    out.push_str(&format!(
        "{indent}  predicates: {} spatial, {} temporal, {} comparison\n",
        counts.spatial, counts.temporal, counts.cmp
    ));
    if counts.subqueries > 0 {
        out.push_str(&format!(
            "{indent}  {} IN subquery(ies): each evaluated once, memoized\n",
            counts.subqueries
        ));
    }
    match q.modifier {
        Some(Modifier::Snapshot) => out.push_str(&format!(
            "{indent}  post: SNAPSHOT drops intervals, deduplicates\n"
        )),
        Some(Modifier::Current) => out.push_str(&format!(
            "{indent}  post: CURRENT keeps live candidates, drops intervals, deduplicates\n"
        )),
        None if q.overlap || q.sources.len() == 1 => out.push_str(&format!(
            "{indent}  post: coalesce on projected attributes\n"
        )),
        None => out.push_str(&format!("{indent}  post: deduplicate rows\n")),
    }
    explain_subqueries(&q.condition, ws, indent, out);
}

fn explain_subqueries(cond: &CheckedCond, ws: &Workspace, indent: &str, out: &mut String) {
    match cond {
        CheckedCond::Or(a, b) | CheckedCond::And(a, b) => {
            explain_subqueries(a, ws, indent, out);
            explain_subqueries(b, ws, indent, out);
        }
        CheckedCond::Not(c) => explain_subqueries(c, ws, indent, out),
        CheckedCond::Atom(CheckedAtom::In { subquery, .. }) => {
            explain_cube(subquery, ws, &format!("{indent}  "), out);
        }
        CheckedCond::Atom(_) => {}
    }
}

fn explain_cube(q: &CheckedCube, ws: &Workspace, indent: &str, out: &mut String) {
    match &q.kind {
        CheckedCubeKind::MemberSet(ms) => {
            out.push_str(&format!(
                "{indent}cube query: member set of {}.{} from [{}], {} {} {}\n",
                ms.dimension,
                ms.level,
                ms.cube,
                ms.measure,
                ms.op,
                crate::value::fmt_num(ms.threshold)
            ));
            if !ms.slicers.is_empty() {
                out.push_str(&format!(
                    "{indent}  slicers: {}\n",
                    slicer_list(&ms.slicers)
                ));
            }
        }
        CheckedCubeKind::Table(tq) => {
            out.push_str(&format!(
                "{indent}cube query: table of [{}] measures {}\n",
                tq.cube,
                tq.measures.join(", ")
            ));
            if !tq.slicers.is_empty() {
                out.push_str(&format!(
                    "{indent}  slicers: {}\n",
                    slicer_list(&tq.slicers)
                ));
            }
        }
    }
    if let Some(link) = &q.gis_in {
        out.push_str(&format!(
            "{indent}  gis filter on dimension {} via layer {} (evaluated once, memoized)\n",
            link.dimension, link.layer
        ));
        explain_gis(&link.query, ws, &format!("{indent}  "), out);
    }
}

fn slicer_list(slicers: &[crate::olap::Slicer]) -> String {
    slicers
        .iter()
        .map(|s| format!("{}.{}", s.dimension, s.member))
        .collect::<Vec<_>>()
        .join(" AND ")
}

#[derive(Default)]
struct AtomCounts {
    spatial: usize,
    temporal: usize,
    cmp: usize,
    subqueries: usize,
}

fn count_atoms(cond: &CheckedCond, counts: &mut AtomCounts) {
    match cond {
        CheckedCond::Or(a, b) | CheckedCond::And(a, b) => {
            count_atoms(a, counts);
            count_atoms(b, counts);
        }
        CheckedCond::Not(c) => count_atoms(c, counts),
        CheckedCond::Atom(a) => match a {
            CheckedAtom::Spatial { .. } => counts.spatial += 1,
            CheckedAtom::Temporal { .. } => counts.temporal += 1,
            CheckedAtom::Cmp { .. } => counts.cmp += 1,
            CheckedAtom::In { .. } => counts.subqueries += 1,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::parse_wkt;
    use crate::layer::Layer;
    use crate::olap::{DimensionMode, Warehouse};
    use crate::result::Cell;
    use crate::temporal::Interval;
    use crate::time::TimeConfig;
    use crate::GeometryKind;

    fn square(x0: i64, y0: i64, x1: i64, y1: i64) -> crate::Geometry {
        parse_wkt(&format!(
            "POLYGON(({x0} {y0},{x1} {y0},{x1} {y1},{x0} {y1},{x0} {y0}))"
        ))
        .unwrap()
    }

    /// The city/airport/parcel setup: a city that moved at tick 51, an
    /// airport relocated at 101, and three parcels at known distances.
    pub(super) fn fixture() -> Workspace {
        let mut ws = Workspace::new(
            Warehouse::new(DimensionMode::Temporal),
            TimeConfig::years(0, 300),
        );
        let mut cities = Layer::new("cities", GeometryKind::Polygon, vec![]);
        cities.create("c1", square(0, 0, 40, 40), &[], 0).unwrap();
        cities
            .update("c1", 51, square(8, 94, 48, 134), &[])
            .unwrap();
        cities
            .create("c2", square(1000, 0, 1040, 40), &[], 0)
            .unwrap();
        cities.delete("c2", 31).unwrap();

        let mut airports = Layer::new("airports", GeometryKind::Point, vec![]);
        airports
            .create("a1", parse_wkt("POINT(20 100)").unwrap(), &[], 0)
            .unwrap();
        airports
            .update("a1", 101, parse_wkt("POINT(30 120)").unwrap(), &[])
            .unwrap();
        airports.delete("a1", 201).unwrap();

        let mut parcels = Layer::new("parcels", GeometryKind::Polygon, vec![]);
        parcels
            .create("p1", square(120, 0, 140, 40), &[], 10)
            .unwrap();
        parcels
            .update("p1", 21, square(160, 0, 180, 40), &[])
            .unwrap();
        parcels.delete("p1", 41).unwrap();
        parcels
            .create("p2", square(110, 0, 130, 40), &[], 30)
            .unwrap();
        parcels.delete("p2", 51).unwrap();
        parcels
            .create("p3", square(120, 0, 160, 40), &[], 40)
            .unwrap();
        parcels.delete("p3", 101).unwrap();

        ws.layers = vec![cities, airports, parcels];
        ws
    }

    fn id_rows(rel: &ResultRelation) -> Vec<(String, String, String, String)> {
        rel.rows
            .iter()
            .map(|r| {
                let ids: Vec<String> = r
                    .cells
                    .iter()
                    .filter_map(|c| match c {
                        Cell::Str(s) => Some(s.clone()),
                        _ => None,
                    })
                    .collect();
                let iv = r.interval.expect("temporal row");
                (
                    ids[0].clone(),
                    ids[1].clone(),
                    iv.from().to_string(),
                    iv.to().to_string(),
                )
            })
            .collect()
    }

    #[test]
    fn gt_join_city_airport() {
        let ws = fixture();
        let airports = ws.layer("airports").unwrap();
        let cities = ws.layer("cities").unwrap();
        let joined = gt_join(airports.stages(), cities.stages(), |a, c| {
            geometry::contains(&c.geometry, &a.geometry)
        });
        let got: Vec<(String, String, Interval)> = joined
            .iter()
            .map(|(a, c, iv)| (a.object_id.clone(), c.object_id.clone(), *iv))
            .collect();
        assert_eq!(
            got,
            vec![
                ("a1".into(), "c1".into(), Interval::closed(51, 100).unwrap()),
                (
                    "a1".into(),
                    "c1".into(),
                    Interval::closed(101, 200).unwrap()
                ),
            ],
            "raw GT-join keeps the two adjacent tuples uncoalesced"
        );
    }

    #[test]
    fn query_level_result_is_coalesced() {
        let ws = fixture();
        let rel = ws
            .run_query(
                "SELECT GIS a.id, c.id FROM OVERLAP airports a, cities c WHERE Contains(c, a)",
            )
            .unwrap();
        assert_eq!(
            id_rows(&rel),
            vec![("a1".into(), "c1".into(), "51".into(), "200".into())],
            "adjacent intervals merge at the query boundary"
        );
    }

    #[test]
    fn distance_query_matches_the_worked_example() {
        let ws = fixture();
        let rel = ws
            .run_query(
                "SELECT GIS c,p FROM OVERLAP parcels p, cities c \
                 WHERE Distance(c.the_geom,p.the_geom) < 100",
            )
            .unwrap();
        let mut rows = id_rows(&rel);
        rows.sort();
        assert_eq!(
            rows,
            vec![
                ("c1".into(), "p1".into(), "10".into(), "20".into()),
                ("c1".into(), "p2".into(), "30".into(), "50".into()),
                ("c1".into(), "p3".into(), "40".into(), "100".into()),
            ]
        );
    }

    #[test]
    fn snapshot_drops_intervals_and_dedups() {
        let ws = fixture();
        let rel = ws
            .run_query(
                "SELECT GIS SNAPSHOT c.id FROM OVERLAP parcels p, cities c \
                 WHERE Distance(c.the_geom,p.the_geom) < 100",
            )
            .unwrap();
        assert!(!rel.temporal);
        assert_eq!(rel.rows.len(), 1, "c1 appears once after deduplication");
        assert_eq!(rel.rows[0].cells, vec![Cell::Str("c1".into())]);
    }

    #[test]
    fn current_keeps_live_candidates_only() {
        let ws = fixture();
        // Only c1's second stage is live; no parcel stage is.
        let rel = ws
            .run_query("SELECT GIS CURRENT c.id FROM cities c WHERE StartsBefore(c, 100)")
            .unwrap();
        assert_eq!(rel.rows.len(), 1);
        let none = ws
            .run_query("SELECT GIS CURRENT p.id FROM parcels p WHERE StartsBefore(p, 100)")
            .unwrap();
        assert_eq!(none.rows.len(), 0);
    }

    #[test]
    fn false_condition_yields_empty_relation() {
        let ws = fixture();
        let rel = ws
            .run_query("SELECT GIS c,p FROM OVERLAP parcels p, cities c WHERE 1 > 2")
            .unwrap();
        assert!(rel.rows.is_empty());
    }

    #[test]
    fn t_join_kinds() {
        let mut left = Layer::new("l", GeometryKind::Point, vec![]);
        left.create("x", parse_wkt("POINT(0 0)").unwrap(), &[], 0)
            .unwrap();
        left.delete("x", 11).unwrap();
        let mut right = Layer::new("r", GeometryKind::Point, vec![]);
        right
            .create("y", parse_wkt("POINT(1 1)").unwrap(), &[], 10)
            .unwrap();
        right.delete("y", 21).unwrap();

        // X.TO = 10 <= Y.FROM = 10: joined (equality allowed).
        assert_eq!(
            t_join(left.stages(), right.stages(), TJoinKind::Before).len(),
            1
        );
        // Meet requires exact equality of X.TO and Y.FROM.
        assert_eq!(
            t_join(left.stages(), right.stages(), TJoinKind::Meet).len(),
            1
        );
        let ov = t_join(left.stages(), right.stages(), TJoinKind::Overlap);
        assert_eq!(ov.len(), 1);
        assert_eq!(
            ov[0].2,
            Some(Interval::closed(10, 10).unwrap()),
            "shared tick 10"
        );

        let mut gap = Layer::new("g", GeometryKind::Point, vec![]);
        gap.create("z", parse_wkt("POINT(2 2)").unwrap(), &[], 11)
            .unwrap();
        gap.delete("z", 21).unwrap();
        assert!(t_join(left.stages(), gap.stages(), TJoinKind::Meet).is_empty());
        assert_eq!(
            t_join(left.stages(), gap.stages(), TJoinKind::Before).len(),
            1
        );
        assert!(t_join(left.stages(), gap.stages(), TJoinKind::Overlap).is_empty());
    }

    #[test]
    fn explain_names_the_join_and_memoization() {
        let ws = fixture();
        let plan = ws
            .explain_query(
                "SELECT GIS c,p FROM OVERLAP parcels p, cities c \
                 WHERE Distance(c.the_geom,p.the_geom) < 100",
            )
            .unwrap();
        assert!(plan.contains("overlap join"), "{plan}");
        assert!(plan.contains("2 sources"), "{plan}");
        let empty_layer_plan = {
            let mut ws2 = fixture();
            ws2.layers
                .push(Layer::new("empty", GeometryKind::Point, vec![]));
            ws2.explain_query("SELECT GIS e.id FROM empty e WHERE StartsBefore(e, 5)")
                .unwrap()
        };
        assert!(
            empty_layer_plan.contains("zero cardinality"),
            "{empty_layer_plan}"
        );
    }

    #[test]
    fn windows_may_end_at_now() {
        let ws = fixture();
        // Only the second city stage is valid over the whole open window.
        let rel = ws
            .run_query("SELECT GIS c.id, c.from FROM cities c WHERE COVERS(c,[60,Now])")
            .unwrap();
        assert_eq!(rel.rows.len(), 1);
        assert_eq!(rel.rows[0].cells[1], Cell::Instant(Instant::At(51)));
        // A finite stage can never cover a window reaching Now.
        let none = ws
            .run_query("SELECT GIS p.id FROM parcels p WHERE COVERS(p,[60,Now])")
            .unwrap();
        assert!(none.rows.is_empty());
    }

    #[test]
    fn from_to_pseudo_attributes_compare_and_project() {
        let ws = fixture();
        // Disjoint join with explicit interval columns; the live city stage
        // starts after p3 does, and its open end renders as Now.
        let rel = ws
            .run_query(
                "SELECT GIS c.id, p.id, c.from, c.to FROM parcels p, cities c \
                 WHERE c.from > p.from AND p.id = \"p3\"",
            )
            .unwrap();
        assert!(
            !rel.temporal,
            "explicit interval columns, no implicit stamp"
        );
        assert!(rel
            .rows
            .iter()
            .any(|r| r.cells.contains(&Cell::Instant(Instant::Now))));
        // c.to = Now reads as the maximum in comparisons.
        let live = ws
            .run_query("SELECT GIS SNAPSHOT c.id FROM cities c WHERE c.to > 1000000")
            .unwrap();
        assert_eq!(
            live.rows.len(),
            1,
            "only the live stage exceeds any finite bound"
        );
    }

    #[test]
    fn disjoint_multi_source_with_bare_alias_is_rejected() {
        let ws = fixture();
        let err = ws
            .run_query("SELECT GIS c,p FROM parcels p, cities c WHERE 1 < 2")
            .unwrap_err();
        assert!(err.to_string().contains("OVERLAP"), "{err}");
        // Explicit projections stay legal.
        assert!(ws
            .run_query("SELECT GIS c.id,p.id FROM parcels p, cities c WHERE 1 < 2")
            .is_ok());
    }
}

#[cfg(test)]
mod invariant_tests {
    use super::tests::fixture;
    use super::*;
    use crate::layer::Layer;
    use crate::result::Cell;
    use crate::temporal::Tick;

    const DISTANCE: &str = "SELECT GIS c.id,p.id FROM OVERLAP parcels p, cities c \
                            WHERE Distance(c.the_geom,p.the_geom) < 100";

    fn keys(rel: &ResultRelation) -> std::collections::BTreeSet<Vec<String>> {
        rel.rows
            .iter()
            .map(|r| {
                r.cells
                    .iter()
                    .map(|c| match c {
                        Cell::Str(s) => s.clone(),
                        other => panic!("{other:?}"),
                    })
                    .collect()
            })
            .collect()
    }

    /// Rows valid at t of the full result equal the result of the same query
    /// over per-tick snapshots of the inputs.
    #[test]
    fn snapshot_commutation() {
        let ws = fixture();
        let full = ws.run_query(DISTANCE).unwrap();
        for t in (0..=120).step_by(5) {
            let at_t: std::collections::BTreeSet<Vec<String>> = full
                .rows
                .iter()
                .filter(|r| r.interval.unwrap().at(t))
                .map(|r| {
                    r.cells
                        .iter()
                        .map(|c| match c {
                            Cell::Str(s) => s.clone(),
                            other => panic!("{other:?}"),
                        })
                        .collect()
                })
                .collect();
            let mut restricted = ws.clone();
            restricted.layers = ws
                .layers
                .iter()
                .map(|l| layer_from_stages(l, l.snapshot(t)))
                .collect();
            let snap = restricted.run_query(DISTANCE).unwrap();
            assert_eq!(at_t, keys(&snap), "diverged at tick {t}");
        }
    }

    /// Rebuild a layer holding only the given stages (through the CSV codec,
    /// which is the public construction path for arbitrary histories).
    fn layer_from_stages(layer: &Layer, stages: Vec<&Stage>) -> Layer {
        let mut csv = String::from("object_id,wkt,from,to\n");
        for s in stages {
            csv.push_str(&crate::csvio::write_record(&[
                s.object_id.clone(),
                s.geometry.to_wkt(),
                s.interval.from().to_string(),
                s.interval.to().to_string(),
            ]));
            csv.push('\n');
        }
        crate::layer::load_layer_csv(&layer.name, layer.kind, "mem", &csv).unwrap()
    }

    /// Adding OVERLAP never adds rows: its id tuples are a subset of the
    /// disjoint join's. The moved city is within 100 of the first parcel
    /// stage only asynchronously, so the disjoint join is strictly larger.
    #[test]
    fn overlap_monotonicity() {
        let ws = fixture();
        let cond = "Distance(c.the_geom,p.the_geom) < 100 AND AFTER(c,[0,20])";
        let with = ws
            .run_query(&format!(
                "SELECT GIS c.id,p.id FROM OVERLAP parcels p, cities c WHERE {cond}"
            ))
            .unwrap();
        let without = ws
            .run_query(&format!(
                "SELECT GIS SNAPSHOT c.id,p.id FROM parcels p, cities c WHERE {cond}"
            ))
            .unwrap();
        let with_keys = keys(&with);
        let without_keys = keys(&without);
        assert!(
            with_keys.is_subset(&without_keys),
            "{with_keys:?} vs {without_keys:?}"
        );
        assert!(
            without_keys.len() > with_keys.len(),
            "the fixture separates them"
        );
    }

    /// Pre-splitting a stage into adjacent pieces does not change the result.
    #[test]
    fn presplit_invariance() {
        let ws = fixture();
        let baseline = ws.run_query(DISTANCE).unwrap();
        let mut split_ws = ws.clone();
        for layer in &mut split_ws.layers {
            if layer.name == "parcels" {
                let csv = split_stage_csv(layer, "p3", 70);
                *layer = crate::layer::load_layer_csv("parcels", layer.kind, "mem", &csv).unwrap();
            }
        }
        let split_rel = split_ws.run_query(DISTANCE).unwrap();
        assert_eq!(keys(&baseline), keys(&split_rel));
        let ivs = |rel: &ResultRelation| -> Vec<String> {
            let mut v: Vec<String> = rel
                .rows
                .iter()
                .map(|r| r.interval.unwrap().to_string())
                .collect();
            v.sort();
            v
        };
        assert_eq!(ivs(&baseline), ivs(&split_rel));
    }

    fn split_stage_csv(layer: &Layer, id: &str, cut: Tick) -> String {
        let mut csv = String::from("object_id,wkt,from,to\n");
        for s in layer.stages() {
            if s.object_id == id && s.interval.at(cut) && s.interval.at(cut + 1) {
                for (lo, hi) in [
                    (s.interval.from().to_string(), cut.to_string()),
                    ((cut + 1).to_string(), s.interval.to().to_string()),
                ] {
                    csv.push_str(&crate::csvio::write_record(&[
                        s.object_id.clone(),
                        s.geometry.to_wkt(),
                        lo,
                        hi,
                    ]));
                    csv.push('\n');
                }
            } else {
                csv.push_str(&crate::csvio::write_record(&[
                    s.object_id.clone(),
                    s.geometry.to_wkt(),
                    s.interval.from().to_string(),
                    s.interval.to().to_string(),
                ]));
                csv.push('\n');
            }
        }
        csv
    }
}
