//! tpiet-core: a spatio-temporal query engine over valid-time thematic
//! layers and OLAP cubes, with the TPiet-QL query language.
//!
//! The engine models discrete change: spatial objects evolve by create,
//! split, merge, update, delete and reincarnate events, each stage of an
//! object's history carrying a closed validity interval with a moving `Now`
//! upper bound. Queries join layers under overlap or disjoint temporal
//! semantics, mix spatial and interval predicates, and link to warehouse
//! cubes in both directions through `IN` subqueries.

pub mod ast;
pub mod csvio;
pub mod exec;
pub mod geometry;
pub mod layer;
pub mod lexer;
pub mod olap;
pub mod parser;
pub mod result;
pub mod temporal;
pub mod time;
pub mod validate;
pub mod value;
pub mod workspace;

pub use exec::{explain, gt_join, t_join, TJoinKind};
pub use geometry::{parse_wkt, Geometry, GeometryKind, Point};
pub use layer::{ChangeEvent, Layer, NewObject, Stage};
pub use olap::{AlphaMapping, Cube, Dimension, DimensionMode, Warehouse};
pub use parser::parse_query;
pub use result::ResultRelation;
pub use temporal::{coalesce, Instant, Interval, TemporalRow, Tick};
pub use time::{Granularity, TimeConfig, TimeLiteral};
pub use value::{CmpOp, Value};
pub use workspace::Workspace;
