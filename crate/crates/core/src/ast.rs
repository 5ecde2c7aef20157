//! Typed query AST for the TPiet-QL language, plus the canonical printer.
//! Printing an AST and reparsing it yields an equal AST; spans are carried
//! for diagnostics but ignored by equality.

use std::fmt;

use crate::time::TimeLiteral;
use crate::value::{fmt_num, CmpOp};

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A node with its source position; equality compares the node only.
#[derive(Debug, Clone)]
pub struct Spanned<T> {
    pub node: T,
    pub span: Span,
}

impl<T> Spanned<T> {
    pub fn new(node: T, span: Span) -> Spanned<T> {
        Spanned { node, span }
    }
}

impl<T: PartialEq> PartialEq for Spanned<T> {
    fn eq(&self, other: &Self) -> bool {
        self.node == other.node
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Query {
    Gis(GisQuery),
    Cube(CubeQuery),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modifier {
    /// Return a non-temporal relation: drop the interval columns.
    Snapshot,
    /// Keep only live tuples, then drop the interval columns.
    Current,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Source {
    pub layer: Spanned<String>,
    pub alias: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProjItem {
    /// A bare alias projects the object id, geometry and all attributes.
    Alias(String),
    Attr {
        alias: String,
        attr: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GisQuery {
    pub modifier: Option<Modifier>,
    pub projection: Vec<Spanned<ProjItem>>,
    pub overlap: bool,
    pub sources: Vec<Spanned<Source>>,
    pub condition: Condition,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    Or(Box<Condition>, Box<Condition>),
    And(Box<Condition>, Box<Condition>),
    Not(Box<Condition>),
    Atom(Spanned<Atom>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpatialPred {
    Intersects,
    Crosses,
    Contains,
    Touches,
}

impl SpatialPred {
    pub fn from_name(name: &str) -> Option<SpatialPred> {
        match name.to_ascii_lowercase().as_str() {
            "intersects" => Some(SpatialPred::Intersects),
            "crosses" => Some(SpatialPred::Crosses),
            "contains" => Some(SpatialPred::Contains),
            "touches" => Some(SpatialPred::Touches),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SpatialPred::Intersects => "Intersects",
            SpatialPred::Crosses => "Crosses",
            SpatialPred::Contains => "Contains",
            SpatialPred::Touches => "Touches",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemporalPred {
    At,
    StartsBefore,
    FinishesAfter,
    BeginsAfter,
    Before,
    After,
    During,
    Overlaps,
    Covers,
    Meets,
}

impl TemporalPred {
    pub fn from_name(name: &str) -> Option<TemporalPred> {
        match name.to_ascii_lowercase().as_str() {
            "at" => Some(TemporalPred::At),
            "startsbefore" => Some(TemporalPred::StartsBefore),
            "finishesafter" => Some(TemporalPred::FinishesAfter),
            "beginsafter" => Some(TemporalPred::BeginsAfter),
            "before" => Some(TemporalPred::Before),
            "after" => Some(TemporalPred::After),
            "during" => Some(TemporalPred::During),
            "overlaps" => Some(TemporalPred::Overlaps),
            "covers" => Some(TemporalPred::Covers),
            "meets" => Some(TemporalPred::Meets),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TemporalPred::At => "AT",
            TemporalPred::StartsBefore => "StartsBefore",
            TemporalPred::FinishesAfter => "FinishesAfter",
            TemporalPred::BeginsAfter => "BeginsAfter",
            TemporalPred::Before => "BEFORE",
            TemporalPred::After => "AFTER",
            TemporalPred::During => "DURING",
            TemporalPred::Overlaps => "OVERLAPS",
            TemporalPred::Covers => "COVERS",
            TemporalPred::Meets => "MEETS",
        }
    }

    /// Does this predicate take an instant (vs an interval) argument?
    pub fn takes_instant(&self) -> bool {
        matches!(
            self,
            TemporalPred::At
                | TemporalPred::StartsBefore
                | TemporalPred::FinishesAfter
                | TemporalPred::BeginsAfter
        )
    }
}

/// An alias, optionally qualified by a geometry pseudo-attribute
/// (`the_geom` or `geom`).
#[derive(Debug, Clone, PartialEq)]
pub struct GeomRef {
    pub alias: String,
    pub attr: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TemporalArg {
    Instant(TimeLiteral),
    Interval(TimeLiteral, TimeLiteral),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Attr { alias: String, attr: String },
    Distance(GeomRef, GeomRef),
    Area(GeomRef),
    Str(String),
    Num(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Atom {
    Spatial {
        pred: SpatialPred,
        args: Vec<GeomRef>,
    },
    Temporal {
        pred: TemporalPred,
        alias: String,
        arg: TemporalArg,
    },
    Cmp {
        left: Expr,
        op: CmpOp,
        right: Expr,
    },
    /// `alias IN (cube)` or `alias.attr IN (cube)`; the bare form is sugar
    /// for the object identifier.
    In {
        alias: String,
        attr: Option<String>,
        subquery: Box<CubeQuery>,
    },
}

/// A bracketed path such as `[Land].[Land parcelId]` or `Product.[All_Products]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberPath {
    pub segments: Vec<String>,
}

impl MemberPath {
    pub fn new(segments: Vec<String>) -> MemberPath {
        MemberPath { segments }
    }

    /// Is this a `[Measures].[X]` path? Returns the measure name.
    pub fn as_measure(&self) -> Option<&str> {
        if self.segments.len() == 2 && self.segments[0].eq_ignore_ascii_case("measures") {
            Some(&self.segments[1])
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Rows,
    Columns,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CubeSelect {
    /// `filter(<path>.Members, [Measures].[m] cmp n)` — a member-set query.
    Filter {
        path: Spanned<MemberPath>,
        measure: Spanned<MemberPath>,
        op: CmpOp,
        threshold: f64,
    },
    /// A list of measure/level paths, optionally tagged with an axis.
    Items {
        items: Vec<Spanned<MemberPath>>,
        axis: Option<Axis>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum CubeSlicer {
    Member(Spanned<MemberPath>),
    /// `<path> IN (<gis query>)` — restrict the dimension by a spatial result.
    GisIn {
        path: Spanned<MemberPath>,
        query: Box<GisQuery>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubeQuery {
    pub select: CubeSelect,
    pub cube: Spanned<String>,
    pub slicers: Vec<CubeSlicer>,
    pub slice: Option<Spanned<MemberPath>>,
}

// ---------------------------------------------------------------------------
// canonical printing
// ---------------------------------------------------------------------------

fn fmt_time(lit: &TimeLiteral, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match lit {
        TimeLiteral::Number(n) => write!(f, "{n}"),
        TimeLiteral::Date { day, month, year } => write!(f, "{day}/{month}/{year}"),
        TimeLiteral::Now => write!(f, "Now"),
    }
}

impl fmt::Display for GeomRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.attr {
            Some(attr) => write!(f, "{}.{attr}", self.alias),
            None => write!(f, "{}", self.alias),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Attr { alias, attr } => write!(f, "{alias}.{attr}"),
            Expr::Distance(a, b) => write!(f, "Distance({a},{b})"),
            Expr::Area(g) => write!(f, "area({g})"),
            Expr::Str(s) => write!(f, "\"{s}\""),
            Expr::Num(n) => write!(f, "{}", fmt_num(*n)),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Spatial { pred, args } => {
                write!(f, "{}(", pred.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Atom::Temporal { pred, alias, arg } => {
                write!(f, "{}({alias},", pred.name())?;
                match arg {
                    TemporalArg::Instant(t) => fmt_time(t, f)?,
                    TemporalArg::Interval(a, b) => {
                        write!(f, "[")?;
                        fmt_time(a, f)?;
                        write!(f, ",")?;
                        fmt_time(b, f)?;
                        write!(f, "]")?;
                    }
                }
                write!(f, ")")
            }
            Atom::Cmp { left, op, right } => write!(f, "{left} {op} {right}"),
            Atom::In {
                alias,
                attr,
                subquery,
            } => match attr {
                Some(attr) => write!(f, "{alias}.{attr} IN ({subquery})"),
                None => write!(f, "{alias} IN ({subquery})"),
            },
        }
    }
}

impl Condition {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent: u8) -> fmt::Result {
        let prec = match self {
            Condition::Or(..) => 1,
            Condition::And(..) => 2,
            Condition::Not(_) => 3,
            Condition::Atom(_) => 4,
        };
        let parens = prec < parent;
        if parens {
            write!(f, "(")?;
        }
        match self {
            Condition::Or(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " OR ")?;
                b.fmt_prec(f, 2)?;
            }
            Condition::And(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, " AND ")?;
                b.fmt_prec(f, 3)?;
            }
            Condition::Not(c) => {
                write!(f, "NOT ")?;
                c.fmt_prec(f, 3)?;
            }
            Condition::Atom(a) => write!(f, "{}", a.node)?,
        }
        if parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl fmt::Display for MemberPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, seg) in self.segments.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "[{seg}]")?;
        }
        Ok(())
    }
}

impl fmt::Display for GisQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SELECT GIS ")?;
        match self.modifier {
            Some(Modifier::Snapshot) => write!(f, "SNAPSHOT ")?,
            Some(Modifier::Current) => write!(f, "CURRENT ")?,
            None => {}
        }
        for (i, item) in self.projection.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            match &item.node {
                ProjItem::Alias(a) => write!(f, "{a}")?,
                ProjItem::Attr { alias, attr } => write!(f, "{alias}.{attr}")?,
            }
        }
        write!(f, " FROM ")?;
        if self.overlap {
            write!(f, "OVERLAP ")?;
        }
        for (i, s) in self.sources.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{} {}", s.node.layer.node, s.node.alias)?;
        }
        write!(f, " WHERE {}", self.condition)
    }
}

impl fmt::Display for CubeQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SELECT CUBE ")?;
        match &self.select {
            CubeSelect::Filter {
                path,
                measure,
                op,
                threshold,
            } => {
                write!(
                    f,
                    "filter({}.Members, {} {op} {})",
                    path.node,
                    measure.node,
                    fmt_num(*threshold)
                )?;
            }
            CubeSelect::Items { items, axis } => {
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", item.node)?;
                }
                match axis {
                    Some(Axis::Rows) => write!(f, " ON ROWS")?,
                    Some(Axis::Columns) => write!(f, " ON COLUMNS")?,
                    None => {}
                }
            }
        }
        write!(f, " FROM [{}]", self.cube.node)?;
        if !self.slicers.is_empty() {
            write!(f, " WHERE ")?;
            for (i, s) in self.slicers.iter().enumerate() {
                if i > 0 {
                    write!(f, " AND ")?;
                }
                match s {
                    CubeSlicer::Member(p) => write!(f, "{}", p.node)?,
                    CubeSlicer::GisIn { path, query } => write!(f, "{} IN ({query})", path.node)?,
                }
            }
        }
        if let Some(slice) = &self.slice {
            write!(f, " SLICE {}", slice.node)?;
        }
        Ok(())
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Query::Gis(q) => write!(f, "{q}"),
            Query::Cube(q) => write!(f, "{q}"),
        }
    }
}
