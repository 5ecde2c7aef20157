use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use tpiet_core::geometry::{self, parse_wkt};
use tpiet_core::layer::Layer;
use tpiet_core::olap::{DimensionMode, Warehouse};
use tpiet_core::temporal::{coalesce, Interval, TemporalRow};
use tpiet_core::time::TimeConfig;
use tpiet_core::value::Value;
use tpiet_core::{parse_query, GeometryKind, Workspace};

fn square(x0: i64, y0: i64, x1: i64, y1: i64) -> tpiet_core::Geometry {
    parse_wkt(&format!(
        "POLYGON(({x0} {y0},{x1} {y0},{x1} {y1},{x0} {y1},{x0} {y0}))"
    ))
    .unwrap()
}

/// The city/airport/parcel workspace the worked examples run against.
fn demo_workspace() -> Workspace {
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
    ws.layers = vec![cities, parcels];
    ws
}

fn interval_predicates(c: &mut Criterion) {
    let intervals: Vec<Interval> = (0..64u64)
        .map(|i| Interval::closed(i % 30, i % 30 + i % 7).unwrap())
        .collect();
    c.bench_function("interval_predicates_64x64", |b| {
        b.iter(|| {
            let mut hits = 0u32;
            for i in &intervals {
                for w in &intervals {
                    if i.overlaps(w) || i.during(w) || i.meets(w) {
                        hits += 1;
                    }
                }
            }
            black_box(hits)
        })
    });
}

fn coalesce_rows(c: &mut Criterion) {
    let rows: Vec<TemporalRow> = (0..2000u64)
        .map(|i| {
            TemporalRow::new(
                vec![Value::Str(format!("k{}", i % 20))],
                Interval::closed(i % 200, i % 200 + 3).unwrap(),
            )
        })
        .collect();
    c.bench_function("coalesce_2000_rows", |b| {
        b.iter_batched(
            || rows.clone(),
            |rows| black_box(coalesce(&rows)),
            BatchSize::SmallInput,
        )
    });
}

fn point_in_polygon(c: &mut Criterion) {
    let poly = square(0, 0, 100, 100);
    let pt = parse_wkt("POINT(50 50)").unwrap();
    let outside = parse_wkt("POINT(150 50)").unwrap();
    c.bench_function("polygon_contains_point", |b| {
        b.iter(|| {
            black_box(geometry::contains(&poly, &pt));
            black_box(geometry::contains(&poly, &outside))
        })
    });
}

fn parse_distance_query(c: &mut Criterion) {
    let text = "SELECT GIS c,p FROM OVERLAP Parcels p, Cities c \
                WHERE Distance(c.the_geom,p.the_geom) < 100";
    c.bench_function("parse_distance_query", |b| {
        b.iter(|| black_box(parse_query(text).unwrap()))
    });
}

fn run_distance_query(c: &mut Criterion) {
    let ws = demo_workspace();
    let text = "SELECT GIS c,p FROM OVERLAP parcels p, cities c \
                WHERE Distance(c.the_geom,p.the_geom) < 100";
    c.bench_function("run_distance_query", |b| {
        b.iter(|| black_box(ws.run_query(text).unwrap()))
    });
}

criterion_group!(
    benches,
    interval_predicates,
    coalesce_rows,
    point_in_polygon,
    parse_distance_query,
    run_distance_query
);
criterion_main!(benches);
