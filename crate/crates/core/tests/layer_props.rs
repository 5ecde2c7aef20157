//! Bookkeeping properties of the layer update semantics: any sequence of
//! create/split/merge/update/delete/reincarnate operations with strictly
//! increasing instants keeps histories disjoint, keeps snapshots free of
//! duplicate identifiers, and moves the live id set exactly as each
//! operation promises.

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use tpiet_core::geometry::parse_wkt;
use tpiet_core::layer::{Layer, NewObject};
use tpiet_core::temporal::Tick;
use tpiet_core::GeometryKind;

fn square(idx: u64) -> tpiet_core::Geometry {
    let x = (idx % 10) * 3;
    let y = (idx / 10 % 10) * 3;
    parse_wkt(&format!(
        "POLYGON(({x} {y},{x1} {y},{x1} {y1},{x} {y1},{x} {y}))",
        x1 = x + 2,
        y1 = y + 2
    ))
    .unwrap()
}

#[test]
fn random_op_sequences_keep_the_invariants() {
    let horizon: Tick = 120;
    for seed in 0..60u64 {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut layer = Layer::new("land", GeometryKind::Polygon, vec![]);
        let mut next_id = 0u64;
        let fresh = |next_id: &mut u64| {
            let id = format!("o{next_id}");
            *next_id += 1;
            id
        };
        let mut t: Tick = 1;
        let mut ever: BTreeSet<String> = BTreeSet::new();

        let id0 = fresh(&mut next_id);
        layer.create(&id0, square(0), &[], 0).unwrap();
        ever.insert(id0);

        for _ in 0..25 {
            t += rng.random_range(2..5);
            if t >= horizon {
                break;
            }
            let live: Vec<String> = layer
                .object_ids()
                .iter()
                .filter(|id| layer.live_stage(id).is_some())
                .map(|s| s.to_string())
                .collect();
            let dead: Vec<String> = layer
                .object_ids()
                .iter()
                .filter(|id| layer.live_stage(id).is_none())
                .map(|s| s.to_string())
                .collect();
            let live_before: BTreeSet<String> = live.iter().cloned().collect();
            match rng.random_range(0..6) {
                0 => {
                    let id = fresh(&mut next_id);
                    layer.create(&id, square(next_id), &[], t).unwrap();
                    ever.insert(id.clone());
                    assert_eq!(
                        live_set(&layer).len(),
                        live_before.len() + 1,
                        "create adds one live id"
                    );
                }
                1 if !live.is_empty() => {
                    let parent = &live[rng.random_range(0..live.len())];
                    let parts: Vec<NewObject> = (0..rng.random_range(2..4))
                        .map(|_| {
                            let id = fresh(&mut next_id);
                            ever.insert(id.clone());
                            NewObject {
                                id,
                                geometry: square(next_id),
                                attrs: vec![],
                            }
                        })
                        .collect();
                    let n = parts.len();
                    layer.split(parent, t, parts).unwrap();
                    let after = live_set(&layer);
                    assert!(!after.contains(parent), "split retires the parent");
                    assert_eq!(after.len(), live_before.len() - 1 + n);
                }
                2 if live.len() >= 2 => {
                    let k = rng.random_range(2..=live.len().min(3));
                    let parents: Vec<String> = live[..k].to_vec();
                    let id = fresh(&mut next_id);
                    ever.insert(id.clone());
                    layer
                        .merge(
                            &parents,
                            t,
                            NewObject {
                                id,
                                geometry: square(next_id),
                                attrs: vec![],
                            },
                        )
                        .unwrap();
                    assert_eq!(live_set(&layer).len(), live_before.len() - k + 1);
                }
                3 if !live.is_empty() => {
                    let id = &live[rng.random_range(0..live.len())];
                    layer.update(id, t, square(next_id + 50), &[]).unwrap();
                    assert_eq!(
                        live_set(&layer),
                        live_before,
                        "update keeps the live id set"
                    );
                }
                4 if !live.is_empty() => {
                    let id = &live[rng.random_range(0..live.len())];
                    layer.delete(id, t).unwrap();
                    assert_eq!(live_set(&layer).len(), live_before.len() - 1);
                }
                5 if !dead.is_empty() => {
                    // Reincarnation needs a gap past the last end; ops are
                    // several ticks apart so t is past it whenever valid.
                    let id = &dead[rng.random_range(0..dead.len())];
                    if layer.reincarnate(id, t, square(next_id + 70), &[]).is_ok() {
                        assert_eq!(live_set(&layer).len(), live_before.len() + 1);
                    }
                }
                _ => {}
            }
        }

        assert!(
            layer.check_invariants().is_empty(),
            "seed {seed}: {:?}",
            layer.check_invariants()
        );
        for tick in 0..=horizon {
            let snap = layer.snapshot(tick);
            let ids: BTreeSet<&str> = snap.iter().map(|s| s.object_id.as_str()).collect();
            assert_eq!(ids.len(), snap.len(), "seed {seed}: duplicate id at {tick}");
            // Snapshot/stage duality.
            for stage in layer.stages() {
                assert_eq!(
                    snap.iter().any(|s| std::ptr::eq(*s, stage)),
                    stage.interval.at(tick)
                );
            }
        }
        assert!(ever.len() >= layer.object_ids().len());
    }
}

fn live_set(layer: &Layer) -> BTreeSet<String> {
    layer
        .object_ids()
        .iter()
        .filter(|id| layer.live_stage(id).is_some())
        .map(|s| s.to_string())
        .collect()
}
