//! Printing any constructible AST and reparsing it yields an equal AST, and
//! parse rejections always point inside the input.

use proptest::prelude::*;

use tpiet_core::ast::*;
use tpiet_core::parser::parse_query;
use tpiet_core::time::TimeLiteral;
use tpiet_core::value::CmpOp;

fn sp<T>(node: T) -> Spanned<T> {
    Spanned::new(node, Span::default())
}

fn alias() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("a".to_string()),
        Just("b".to_string()),
        Just("l".to_string()),
        Just("p".to_string()),
        Just("r2x".to_string()),
    ]
}

fn layer_name() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("land".to_string()),
        Just("rivers".to_string()),
        Just("cities".to_string()),
        Just("Parcels".to_string()),
    ]
}

fn attr_name() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("name".to_string()),
        Just("owner".to_string()),
        Just("val".to_string()),
        Just("id".to_string()),
        Just("from".to_string()),
        Just("to".to_string()),
    ]
}

fn segment() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("Land".to_string()),
        Just("Land parcelId".to_string()),
        Just("All Land".to_string()),
        Just("Time".to_string()),
        Just("2009".to_string()),
        Just("All_Products".to_string()),
    ]
}

fn measure_name() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("Parcel Sales".to_string()),
        Just("qty".to_string()),
        Just("Production Cost".to_string()),
    ]
}

fn time_literal() -> impl Strategy<Value = TimeLiteral> {
    prop_oneof![
        (0u64..3000).prop_map(TimeLiteral::Number),
        (1u32..=28, 1u32..=12, 1980i64..2030)
            .prop_map(|(day, month, year)| { TimeLiteral::Date { day, month, year } }),
        Just(TimeLiteral::Now),
    ]
}

fn cmp_op() -> impl Strategy<Value = CmpOp> {
    prop_oneof![
        Just(CmpOp::Eq),
        Just(CmpOp::Ne),
        Just(CmpOp::Lt),
        Just(CmpOp::Le),
        Just(CmpOp::Gt),
        Just(CmpOp::Ge),
    ]
}

fn geom_ref() -> impl Strategy<Value = GeomRef> {
    (
        alias(),
        prop_oneof![Just(None), Just(Some("the_geom".to_string()))],
    )
        .prop_map(|(alias, attr)| GeomRef { alias, attr })
}

fn expr() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (alias(), attr_name()).prop_map(|(alias, attr)| Expr::Attr { alias, attr }),
        (geom_ref(), geom_ref()).prop_map(|(a, b)| Expr::Distance(a, b)),
        geom_ref().prop_map(Expr::Area),
        "[a-zA-Z][a-zA-Z ]{0,6}".prop_map(Expr::Str),
        (-1000i64..1000).prop_map(|n| Expr::Num(n as f64)),
        (0i64..100).prop_map(|n| Expr::Num(n as f64 + 0.5)),
    ]
}

fn spatial_pred() -> impl Strategy<Value = SpatialPred> {
    prop_oneof![
        Just(SpatialPred::Intersects),
        Just(SpatialPred::Crosses),
        Just(SpatialPred::Contains),
        Just(SpatialPred::Touches),
    ]
}

fn temporal_atom() -> impl Strategy<Value = Atom> {
    let instant_pred = prop_oneof![
        Just(TemporalPred::At),
        Just(TemporalPred::StartsBefore),
        Just(TemporalPred::FinishesAfter),
        Just(TemporalPred::BeginsAfter),
    ];
    let window_pred = prop_oneof![
        Just(TemporalPred::Before),
        Just(TemporalPred::After),
        Just(TemporalPred::During),
        Just(TemporalPred::Overlaps),
        Just(TemporalPred::Covers),
        Just(TemporalPred::Meets),
    ];
    prop_oneof![
        (instant_pred, alias(), time_literal()).prop_map(|(pred, alias, t)| Atom::Temporal {
            pred,
            alias,
            arg: TemporalArg::Instant(t),
        }),
        (window_pred, alias(), time_literal(), time_literal()).prop_map(|(pred, alias, a, b)| {
            Atom::Temporal {
                pred,
                alias,
                arg: TemporalArg::Interval(a, b),
            }
        }),
    ]
}

fn member_path() -> impl Strategy<Value = MemberPath> {
    prop::collection::vec(segment(), 2..4).prop_map(MemberPath::new)
}

fn member_slicer() -> impl Strategy<Value = CubeSlicer> {
    member_path().prop_map(|p| CubeSlicer::Member(sp(p)))
}

/// Cube queries as they appear under an IN atom: no GIS slicers inside.
fn cube_query(filter_only: bool) -> impl Strategy<Value = CubeQuery> {
    let filter_select = (member_path(), measure_name(), cmp_op(), 0i64..100_000).prop_map(
        |(path, measure, op, threshold)| CubeSelect::Filter {
            path: sp(path),
            measure: sp(MemberPath::new(vec!["Measures".into(), measure])),
            op,
            threshold: threshold as f64,
        },
    );
    let items_select = (
        prop::collection::vec(
            prop_oneof![
                measure_name().prop_map(|m| MemberPath::new(vec!["Measures".into(), m])),
                member_path(),
            ],
            1..3,
        ),
        prop_oneof![
            Just(None),
            Just(Some(Axis::Rows)),
            Just(Some(Axis::Columns))
        ],
    )
        .prop_map(|(items, axis)| CubeSelect::Items {
            items: items.into_iter().map(sp).collect(),
            axis,
        });
    let select = if filter_only {
        filter_select.boxed()
    } else {
        prop_oneof![filter_select, items_select].boxed()
    };
    (
        select,
        prop_oneof![Just("Sales".to_string()), Just("Production".to_string())],
        prop::collection::vec(member_slicer(), 0..3),
        prop_oneof![Just(None), member_path().prop_map(|p| Some(sp(p)))],
    )
        .prop_map(|(select, cube, slicers, slice)| CubeQuery {
            select,
            cube: sp(cube),
            slicers,
            slice,
        })
}

fn atom(with_in: bool) -> BoxedStrategy<Atom> {
    let base = prop_oneof![
        (spatial_pred(), geom_ref(), geom_ref()).prop_map(|(pred, a, b)| Atom::Spatial {
            pred,
            args: vec![a, b],
        }),
        temporal_atom(),
        (expr(), cmp_op(), expr()).prop_map(|(left, op, right)| Atom::Cmp { left, op, right }),
    ];
    if with_in {
        prop_oneof![
            base,
            (
                alias(),
                prop_oneof![Just(None), Just(Some("id".to_string()))],
                cube_query(true)
            )
                .prop_map(|(alias, attr, subquery)| Atom::In {
                    alias,
                    attr,
                    subquery: Box::new(subquery),
                }),
        ]
        .boxed()
    } else {
        base.boxed()
    }
}

fn condition(with_in: bool) -> impl Strategy<Value = Condition> {
    atom(with_in)
        .prop_map(|a| Condition::Atom(sp(a)))
        .prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Condition::And(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Condition::Or(Box::new(a), Box::new(b))),
                inner.prop_map(|c| Condition::Not(Box::new(c))),
            ]
        })
}

fn gis_query(with_in: bool) -> impl Strategy<Value = GisQuery> {
    let sources = prop::collection::btree_set(alias(), 1..3).prop_flat_map(|aliases| {
        let aliases: Vec<String> = aliases.into_iter().collect();
        prop::collection::vec(layer_name(), aliases.len()..=aliases.len()).prop_map(move |layers| {
            layers
                .into_iter()
                .zip(aliases.clone())
                .map(|(layer, alias)| {
                    sp(Source {
                        layer: sp(layer),
                        alias,
                    })
                })
                .collect::<Vec<_>>()
        })
    });
    let projection = prop::collection::vec(
        prop_oneof![
            alias().prop_map(ProjItem::Alias),
            (alias(), attr_name()).prop_map(|(alias, attr)| ProjItem::Attr { alias, attr }),
        ],
        1..3,
    );
    (
        prop_oneof![
            Just(None),
            Just(Some(Modifier::Snapshot)),
            Just(Some(Modifier::Current))
        ],
        projection,
        any::<bool>(),
        sources,
        condition(with_in),
    )
        .prop_map(|(modifier, projection, overlap, sources, cond)| GisQuery {
            modifier,
            projection: projection.into_iter().map(sp).collect(),
            overlap,
            sources,
            condition: cond,
        })
}

fn query() -> impl Strategy<Value = Query> {
    prop_oneof![
        gis_query(true).prop_map(Query::Gis),
        (
            cube_query(false),
            prop_oneof![Just(true), Just(false)],
            gis_query(false)
        )
            .prop_map(|(mut cube, with_gis, gis)| {
                if with_gis {
                    cube.slicers.push(CubeSlicer::GisIn {
                        path: sp(MemberPath::new(vec!["Land".into(), "All Land".into()])),
                        query: Box::new(gis),
                    });
                }
                Query::Cube(cube)
            }),
    ]
}

/// Deeply nested strategies need more stack than the default test thread has.
fn on_big_stack(f: impl FnOnce() + Send + 'static) {
    std::thread::Builder::new()
        .stack_size(64 * 1024 * 1024)
        .spawn(f)
        .unwrap()
        .join()
        .unwrap();
}

#[test]
fn print_then_parse_is_identity() {
    on_big_stack(|| {
        let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig {
            cases: 512,
            ..ProptestConfig::default()
        });
        runner
            .run(&query(), |q| {
                let printed = q.to_string();
                let reparsed = parse_query(&printed).map_err(|e| {
                    proptest::test_runner::TestCaseError::fail(format!(
                        "printed query failed to reparse: {e}\n  {printed}"
                    ))
                })?;
                prop_assert_eq!(q, reparsed, "round trip through `{}`", printed);
                Ok(())
            })
            .unwrap();
    });
}

#[test]
fn truncated_inputs_error_inside_the_text() {
    on_big_stack(|| {
        let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig {
            cases: 256,
            ..ProptestConfig::default()
        });
        runner
            .run(&(gis_query(false), 1usize..60), |(q, cut)| {
                let printed = Query::Gis(q).to_string();
                if cut >= printed.len() {
                    return Ok(());
                }
                let prefix: String = printed.chars().take(printed.len() - cut).collect();
                if let Err(e) = parse_query(&prefix) {
                    let lines = prefix.lines().count().max(1) as u32;
                    prop_assert!(e.line >= 1 && e.line <= lines, "line {} of {lines}", e.line);
                    prop_assert!(e.col >= 1);
                    let line_len = prefix
                        .lines()
                        .nth(e.line as usize - 1)
                        .map(|l| l.chars().count() + 1)
                        .unwrap_or(1) as u32;
                    prop_assert!(
                        e.col <= line_len + 1,
                        "col {} beyond line length {line_len}",
                        e.col
                    );
                }
                Ok(())
            })
            .unwrap();
    });
}
