//! Semantic validation: resolve every layer, alias, attribute, cube,
//! dimension path and measure against the loaded catalog, type-check
//! predicate arguments, resolve time literals to ticks, and produce the
//! executable form of the query.

use std::fmt;

use thiserror::Error;

use crate::ast::{
    self, Atom, Condition, CubeSelect, CubeSlicer, MemberPath, Modifier, ProjItem, Query, Span,
    SpatialPred, TemporalPred,
};
use crate::geometry::GeometryKind;
use crate::layer::Layer;
use crate::olap::{AlphaMapping, MemberSetQuery, Slicer, TableQuery, Warehouse};
use crate::temporal::{Interval, Tick};
use crate::time::TimeConfig;
use crate::value::CmpOp;

#[derive(Debug, Clone, PartialEq, Error)]
pub struct ValidateError {
    pub span: Span,
    pub msg: String,
}

impl fmt::Display for ValidateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.span.line, self.span.col, self.msg)
    }
}

fn err<T>(span: Span, msg: impl Into<String>) -> Result<T, ValidateError> {
    Err(ValidateError {
        span,
        msg: msg.into(),
    })
}

/// Everything name resolution can see.
pub struct Catalog<'a> {
    pub layers: &'a [Layer],
    pub warehouse: &'a Warehouse,
    pub mappings: &'a [AlphaMapping],
    pub time: &'a TimeConfig,
}

impl<'a> Catalog<'a> {
    /// Layer lookup is exact first, then case-insensitive (queries spell
    /// layer names with varying case).
    pub fn layer(&self, name: &str) -> Option<&'a Layer> {
        self.layers.iter().find(|l| l.name == name).or_else(|| {
            self.layers
                .iter()
                .find(|l| l.name.eq_ignore_ascii_case(name))
        })
    }

    pub fn mapping_for(&self, dimension: &str, layer: &str) -> Option<&'a AlphaMapping> {
        self.mappings.iter().find(|m| {
            m.dimension.eq_ignore_ascii_case(dimension) && m.layer.eq_ignore_ascii_case(layer)
        })
    }
}

// ---------------------------------------------------------------------------
// checked (executable) form
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum CheckedQuery {
    Gis(CheckedGis),
    Cube(CheckedCube),
}

#[derive(Debug, Clone)]
pub struct CheckedGis {
    pub modifier: Option<Modifier>,
    pub overlap: bool,
    /// (canonical layer name, alias) per source.
    pub sources: Vec<(String, String)>,
    pub projection: Vec<(String, ColumnRef)>,
    pub condition: CheckedCond,
    /// Number of IN-subquery slots in the condition.
    pub in_count: usize,
}

/// What a result column reads from a candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ColumnRef {
    Id(usize),
    Geom(usize),
    Attr(usize, usize),
    From(usize),
    To(usize),
}

#[derive(Debug, Clone)]
pub enum CheckedCond {
    Or(Box<CheckedCond>, Box<CheckedCond>),
    And(Box<CheckedCond>, Box<CheckedCond>),
    Not(Box<CheckedCond>),
    Atom(CheckedAtom),
}

#[derive(Debug, Clone)]
pub enum CheckedAtom {
    Spatial {
        pred: SpatialPred,
        left: usize,
        right: usize,
        span: Span,
    },
    Temporal {
        pred: TemporalPred,
        source: usize,
        arg: ResolvedArg,
    },
    Cmp {
        left: CheckedExpr,
        op: CmpOp,
        right: CheckedExpr,
        span: Span,
    },
    In {
        source: usize,
        slot: usize,
        subquery: Box<CheckedCube>,
        /// Dimension the member set comes from; paired with the source's
        /// layer to pick the alpha mapping.
        dimension: String,
        layer: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResolvedArg {
    Instant(Tick),
    Window(Interval),
}

#[derive(Debug, Clone)]
pub enum CheckedExpr {
    Id(usize),
    Attr(usize, usize),
    From(usize),
    To(usize),
    Distance(usize, usize),
    Area(usize),
    Str(String),
    Num(f64),
}

#[derive(Debug, Clone)]
pub enum CheckedCubeKind {
    MemberSet(MemberSetQuery),
    Table(TableQuery),
}

#[derive(Debug, Clone)]
pub struct CheckedCube {
    pub kind: CheckedCubeKind,
    /// A GIS subquery restricting one dimension, with the mapping link
    /// (dimension name, layer name).
    pub gis_in: Option<GisInLink>,
    /// Tick range implied by Time-dimension slicers; used as the temporal
    /// context for alpha mapping rows.
    pub time_range: Option<Interval>,
}

#[derive(Debug, Clone)]
pub struct GisInLink {
    pub dimension: String,
    pub layer: String,
    pub query: Box<CheckedGis>,
}

// ---------------------------------------------------------------------------
// validation
// ---------------------------------------------------------------------------

pub fn validate(query: &Query, catalog: &Catalog) -> Result<CheckedQuery, ValidateError> {
    match query {
        Query::Gis(q) => Ok(CheckedQuery::Gis(check_gis(q, catalog, true)?)),
        Query::Cube(q) => Ok(CheckedQuery::Cube(check_cube(q, catalog, true)?)),
    }
}

struct GisCtx<'a> {
    aliases: Vec<(String, &'a Layer)>,
}

impl<'a> GisCtx<'a> {
    fn alias_idx(&self, alias: &str, span: Span) -> Result<usize, ValidateError> {
        self.aliases
            .iter()
            .position(|(a, _)| a == alias)
            .ok_or(ValidateError {
                span,
                msg: format!("unknown alias '{alias}'"),
            })
    }
}

fn is_geom_attr(attr: &str) -> bool {
    attr.eq_ignore_ascii_case("the_geom") || attr.eq_ignore_ascii_case("geom")
}

fn check_gis(
    q: &ast::GisQuery,
    catalog: &Catalog,
    allow_in: bool,
) -> Result<CheckedGis, ValidateError> {
    let mut aliases = Vec::new();
    let mut sources = Vec::new();
    for s in &q.sources {
        let layer = catalog.layer(&s.node.layer.node).ok_or(ValidateError {
            span: s.node.layer.span,
            msg: format!("unknown layer '{}'", s.node.layer.node),
        })?;
        aliases.push((s.node.alias.clone(), layer));
        sources.push((layer.name.clone(), s.node.alias.clone()));
    }
    let ctx = GisCtx { aliases };

    // Projection: bare aliases expand to id, geometry and every attribute.
    let mut projection: Vec<(String, ColumnRef)> = Vec::new();
    let mut has_bare_alias = false;
    for item in &q.projection {
        match &item.node {
            ProjItem::Alias(alias) => {
                has_bare_alias = true;
                let idx = ctx.alias_idx(alias, item.span)?;
                projection.push((format!("{alias}.id"), ColumnRef::Id(idx)));
                projection.push((format!("{alias}.the_geom"), ColumnRef::Geom(idx)));
                for (ai, attr) in ctx.aliases[idx].1.attr_names.iter().enumerate() {
                    projection.push((format!("{alias}.{attr}"), ColumnRef::Attr(idx, ai)));
                }
            }
            ProjItem::Attr { alias, attr } => {
                let idx = ctx.alias_idx(alias, item.span)?;
                let layer = ctx.aliases[idx].1;
                let col = if attr.eq_ignore_ascii_case("id") {
                    ColumnRef::Id(idx)
                } else if is_geom_attr(attr) {
                    ColumnRef::Geom(idx)
                } else if attr.eq_ignore_ascii_case("from") {
                    ColumnRef::From(idx)
                } else if attr.eq_ignore_ascii_case("to") {
                    ColumnRef::To(idx)
                } else if let Some(ai) = layer.attr_names.iter().position(|a| a == attr) {
                    ColumnRef::Attr(idx, ai)
                } else {
                    return err(
                        item.span,
                        format!("layer '{}' has no attribute '{attr}'", layer.name),
                    );
                };
                projection.push((format!("{alias}.{attr}"), col));
            }
        }
    }
    // A multi-source disjoint join has one interval per alias; a bare-alias
    // projection without SNAPSHOT/CURRENT would not say which to keep.
    if !q.overlap && q.sources.len() >= 2 && q.modifier.is_none() && has_bare_alias {
        return err(
            q.projection[0].span,
            "projecting a bare alias needs OVERLAP, SNAPSHOT or CURRENT when joining \
             several layers without OVERLAP; project explicit attributes \
             (e.g. alias.id, alias.from, alias.to) instead",
        );
    }

    let mut in_count = 0usize;
    let condition = check_cond(&q.condition, &ctx, catalog, allow_in, &mut in_count)?;
    Ok(CheckedGis {
        modifier: q.modifier,
        overlap: q.overlap,
        sources,
        projection,
        condition,
        in_count,
    })
}

fn check_cond(
    cond: &Condition,
    ctx: &GisCtx,
    catalog: &Catalog,
    allow_in: bool,
    in_count: &mut usize,
) -> Result<CheckedCond, ValidateError> {
    Ok(match cond {
        Condition::Or(a, b) => CheckedCond::Or(
            Box::new(check_cond(a, ctx, catalog, allow_in, in_count)?),
            Box::new(check_cond(b, ctx, catalog, allow_in, in_count)?),
        ),
        Condition::And(a, b) => CheckedCond::And(
            Box::new(check_cond(a, ctx, catalog, allow_in, in_count)?),
            Box::new(check_cond(b, ctx, catalog, allow_in, in_count)?),
        ),
        Condition::Not(c) => {
            CheckedCond::Not(Box::new(check_cond(c, ctx, catalog, allow_in, in_count)?))
        }
        Condition::Atom(atom) => CheckedCond::Atom(check_atom(
            &atom.node, atom.span, ctx, catalog, allow_in, in_count,
        )?),
    })
}

fn check_geom_ref(g: &ast::GeomRef, span: Span, ctx: &GisCtx) -> Result<usize, ValidateError> {
    if let Some(attr) = &g.attr {
        if !is_geom_attr(attr) {
            return err(
                span,
                format!(
                    "'{}.{attr}' is not a geometry; use {0} or {0}.the_geom",
                    g.alias
                ),
            );
        }
    }
    ctx.alias_idx(&g.alias, span)
}

fn check_atom(
    atom: &Atom,
    span: Span,
    ctx: &GisCtx,
    catalog: &Catalog,
    allow_in: bool,
    in_count: &mut usize,
) -> Result<CheckedAtom, ValidateError> {
    match atom {
        Atom::Spatial { pred, args } => {
            if args.len() != 2 {
                return err(
                    span,
                    format!("{} takes 2 arguments, got {}", pred.name(), args.len()),
                );
            }
            let left = check_geom_ref(&args[0], span, ctx)?;
            let right = check_geom_ref(&args[1], span, ctx)?;
            if *pred == SpatialPred::Crosses {
                let (lk, rk) = (ctx.aliases[left].1.kind, ctx.aliases[right].1.kind);
                let curve_surface = matches!(
                    (lk, rk),
                    (GeometryKind::LineString, GeometryKind::Polygon)
                        | (GeometryKind::Polygon, GeometryKind::LineString)
                        | (GeometryKind::LineString, GeometryKind::LineString)
                );
                if !curve_surface {
                    return err(
                        span,
                        format!("Crosses requires a curve/surface pair, got {lk} and {rk}"),
                    );
                }
            }
            Ok(CheckedAtom::Spatial {
                pred: *pred,
                left,
                right,
                span,
            })
        }
        Atom::Temporal { pred, alias, arg } => {
            let source = ctx.alias_idx(alias, span)?;
            let arg = match arg {
                ast::TemporalArg::Instant(lit) => {
                    ResolvedArg::Instant(catalog.time.resolve_instant(lit).map_err(|e| {
                        ValidateError {
                            span,
                            msg: e.to_string(),
                        }
                    })?)
                }
                ast::TemporalArg::Interval(a, b) => {
                    ResolvedArg::Window(catalog.time.resolve_interval(a, b).map_err(|e| {
                        ValidateError {
                            span,
                            msg: e.to_string(),
                        }
                    })?)
                }
            };
            Ok(CheckedAtom::Temporal {
                pred: *pred,
                source,
                arg,
            })
        }
        Atom::Cmp { left, op, right } => Ok(CheckedAtom::Cmp {
            left: check_expr(left, span, ctx)?,
            op: *op,
            right: check_expr(right, span, ctx)?,
            span,
        }),
        Atom::In {
            alias,
            attr,
            subquery,
        } => {
            if !allow_in {
                return err(
                    span,
                    "IN subqueries cannot nest deeper than one level in each direction",
                );
            }
            if let Some(attr) = attr {
                if !attr.eq_ignore_ascii_case("id") {
                    return err(
                        span,
                        format!("IN links on the object identifier; use {alias} or {alias}.id"),
                    );
                }
            }
            let source = ctx.alias_idx(alias, span)?;
            let layer_name = ctx.aliases[source].1.name.clone();
            let sub = check_cube(subquery, catalog, false)?;
            let CheckedCubeKind::MemberSet(ms) = &sub.kind else {
                return err(
                    span,
                    "an IN subquery must be a member-set query: filter(<level>.Members, <measure> cmp <n>)",
                );
            };
            let dimension = ms.dimension.clone();
            if catalog.mapping_for(&dimension, &layer_name).is_none() {
                return err(
                    span,
                    format!(
                        "dimension '{dimension}' has no mapping to layer '{layer_name}'; \
                         the IN link needs one"
                    ),
                );
            }
            let slot = *in_count;
            *in_count += 1;
            Ok(CheckedAtom::In {
                source,
                slot,
                subquery: Box::new(sub),
                dimension,
                layer: layer_name,
            })
        }
    }
}

fn check_expr(expr: &ast::Expr, span: Span, ctx: &GisCtx) -> Result<CheckedExpr, ValidateError> {
    Ok(match expr {
        ast::Expr::Attr { alias, attr } => {
            let idx = ctx.alias_idx(alias, span)?;
            let layer = ctx.aliases[idx].1;
            if attr.eq_ignore_ascii_case("id") {
                CheckedExpr::Id(idx)
            } else if attr.eq_ignore_ascii_case("from") {
                CheckedExpr::From(idx)
            } else if attr.eq_ignore_ascii_case("to") {
                CheckedExpr::To(idx)
            } else if let Some(ai) = layer.attr_names.iter().position(|a| a == attr) {
                CheckedExpr::Attr(idx, ai)
            } else {
                return err(
                    span,
                    format!("layer '{}' has no attribute '{attr}'", layer.name),
                );
            }
        }
        ast::Expr::Distance(a, b) => {
            CheckedExpr::Distance(check_geom_ref(a, span, ctx)?, check_geom_ref(b, span, ctx)?)
        }
        ast::Expr::Area(g) => {
            let idx = check_geom_ref(g, span, ctx)?;
            if ctx.aliases[idx].1.kind != GeometryKind::Polygon {
                return err(
                    span,
                    format!(
                        "area needs a polygon layer; '{}' holds {} geometries",
                        ctx.aliases[idx].1.name, ctx.aliases[idx].1.kind
                    ),
                );
            }
            CheckedExpr::Area(idx)
        }
        ast::Expr::Str(s) => CheckedExpr::Str(s.clone()),
        ast::Expr::Num(n) => CheckedExpr::Num(*n),
    })
}

// ---------------------------------------------------------------------------
// cube validation
// ---------------------------------------------------------------------------

/// A path names a dimension in its first segment; the last segment is the
/// level or member within it.
fn split_path(path: &MemberPath, span: Span) -> Result<(&str, &str), ValidateError> {
    match path.segments.len() {
        0 => err(span, "empty path"),
        1 => err(
            span,
            format!(
                "path [{}] needs a dimension and a level/member",
                path.segments[0]
            ),
        ),
        _ => Ok((
            path.segments[0].as_str(),
            path.segments.last().unwrap().as_str(),
        )),
    }
}

fn check_cube(
    q: &ast::CubeQuery,
    catalog: &Catalog,
    allow_in: bool,
) -> Result<CheckedCube, ValidateError> {
    let cube = catalog
        .warehouse
        .cube(&q.cube.node)
        .map_err(|e| ValidateError {
            span: q.cube.span,
            msg: e.to_string(),
        })?;

    // Slicers: member slicers resolve to (dimension, member); at most one
    // GIS IN link.
    let mut slicers = Vec::new();
    let mut gis_in: Option<GisInLink> = None;
    let mut time_range: Option<Interval> = None;
    let add_member_slicer = |path: &MemberPath,
                             span: Span,
                             slicers: &mut Vec<Slicer>,
                             time_range: &mut Option<Interval>|
     -> Result<(), ValidateError> {
        let (dim_name, member) = split_path(path, span)?;
        let dim = catalog
            .warehouse
            .dimension(dim_name)
            .map_err(|e| ValidateError {
                span,
                msg: e.to_string(),
            })?;
        if cube.dim_index(&dim.name).is_err() {
            return err(
                span,
                format!("cube '{}' has no dimension '{}'", cube.name, dim.name),
            );
        }
        if !dim.is_member(member) {
            return err(
                span,
                format!("'{member}' is not a member of dimension '{}'", dim.name),
            );
        }
        if dim.name.eq_ignore_ascii_case("time") {
            if let Some((lo, hi)) = catalog.time.member_year_range(member) {
                let range = Interval::closed(lo, hi).expect("year range is ordered");
                *time_range = Some(match *time_range {
                    Some(existing) => existing.intersection(&range).unwrap_or(range),
                    None => range,
                });
            }
        }
        slicers.push(Slicer {
            dimension: dim.name.clone(),
            member: member.to_string(),
        });
        Ok(())
    };

    for slicer in &q.slicers {
        match slicer {
            CubeSlicer::Member(p) => {
                add_member_slicer(&p.node, p.span, &mut slicers, &mut time_range)?
            }
            CubeSlicer::GisIn { path, query } => {
                if !allow_in {
                    return err(
                        path.span,
                        "IN subqueries cannot nest deeper than one level in each direction",
                    );
                }
                if gis_in.is_some() {
                    return err(path.span, "only one GIS IN slicer per cube query");
                }
                let (dim_name, rest) = split_path(&path.node, path.span)?;
                let dim = catalog
                    .warehouse
                    .dimension(dim_name)
                    .map_err(|e| ValidateError {
                        span: path.span,
                        msg: e.to_string(),
                    })?;
                if cube.dim_index(&dim.name).is_err() {
                    return err(
                        path.span,
                        format!("cube '{}' has no dimension '{}'", cube.name, dim.name),
                    );
                }
                if dim.level_index(rest).is_none() && !dim.is_member(rest) {
                    return err(
                        path.span,
                        format!(
                            "'{rest}' is neither a level nor a member of dimension '{}'",
                            dim.name
                        ),
                    );
                }
                let sub = check_gis(query, catalog, false)?;
                // The subquery must project a single identifier column.
                let ids: Vec<&ColumnRef> = sub.projection.iter().map(|(_, c)| c).collect();
                if ids.len() != 1 || !matches!(ids[0], ColumnRef::Id(_)) {
                    return err(
                        path.span,
                        "the GIS subquery of an IN slicer must project exactly one identifier \
                         (alias.id)",
                    );
                }
                let ColumnRef::Id(alias_idx) = ids[0] else {
                    unreachable!()
                };
                let layer = sub.sources[*alias_idx].0.clone();
                if catalog.mapping_for(&dim.name, &layer).is_none() {
                    return err(
                        path.span,
                        format!("dimension '{}' has no mapping to layer '{layer}'; the IN link needs one", dim.name),
                    );
                }
                gis_in = Some(GisInLink {
                    dimension: dim.name.clone(),
                    layer,
                    query: Box::new(sub),
                });
            }
        }
    }
    if let Some(slice) = &q.slice {
        add_member_slicer(&slice.node, slice.span, &mut slicers, &mut time_range)?;
    }

    let kind = match &q.select {
        CubeSelect::Filter {
            path,
            measure,
            op,
            threshold,
        } => {
            let (dim_name, level) = split_path(&path.node, path.span)?;
            let dim = catalog
                .warehouse
                .dimension(dim_name)
                .map_err(|e| ValidateError {
                    span: path.span,
                    msg: e.to_string(),
                })?;
            if cube.dim_index(&dim.name).is_err() {
                return err(
                    path.span,
                    format!("cube '{}' has no dimension '{}'", cube.name, dim.name),
                );
            }
            let Some(level_idx) = dim.level_index(level) else {
                return err(
                    path.span,
                    format!("dimension '{}' has no level '{level}'", dim.name),
                );
            };
            let Some(measure_name) = measure.node.as_measure() else {
                return err(
                    measure.span,
                    "the filter comparison needs a [Measures].[...] path",
                );
            };
            cube.measure_index(measure_name)
                .map_err(|e| ValidateError {
                    span: measure.span,
                    msg: e.to_string(),
                })?;
            CheckedCubeKind::MemberSet(MemberSetQuery {
                cube: cube.name.clone(),
                dimension: dim.name.clone(),
                level: dim.levels[level_idx].clone(),
                measure: measure_name.to_string(),
                op: *op,
                threshold: *threshold,
                slicers: slicers.clone(),
            })
        }
        CubeSelect::Items { items, axis: _ } => {
            let mut measures = Vec::new();
            let mut row_level: Option<(String, String)> = None;
            for item in items {
                if let Some(m) = item.node.as_measure() {
                    cube.measure_index(m).map_err(|e| ValidateError {
                        span: item.span,
                        msg: e.to_string(),
                    })?;
                    measures.push(m.to_string());
                    continue;
                }
                let (dim_name, level) = split_path(&item.node, item.span)?;
                let dim = catalog
                    .warehouse
                    .dimension(dim_name)
                    .map_err(|e| ValidateError {
                        span: item.span,
                        msg: e.to_string(),
                    })?;
                if cube.dim_index(&dim.name).is_err() {
                    return err(
                        item.span,
                        format!("cube '{}' has no dimension '{}'", cube.name, dim.name),
                    );
                }
                let Some(level_idx) = dim.level_index(level) else {
                    return err(
                        item.span,
                        format!("dimension '{}' has no level '{level}'", dim.name),
                    );
                };
                if row_level.is_some() {
                    return err(item.span, "only one level path may define the row axis");
                }
                row_level = Some((dim.name.clone(), dim.levels[level_idx].clone()));
            }
            if measures.is_empty() {
                return err(
                    q.cube.span,
                    "a tabular cube query needs at least one [Measures].[...] item",
                );
            }
            CheckedCubeKind::Table(TableQuery {
                cube: cube.name.clone(),
                measures,
                row_level,
                slicers: slicers.clone(),
            })
        }
    };
    Ok(CheckedCube {
        kind,
        gis_in,
        time_range,
    })
}
