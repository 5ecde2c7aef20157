//! Textual update-op specs for the `op` subcommand:
//!
//! ```text
//! create      <layer> <id> @<t> <wkt> [name=value ...]
//! split       <layer> <parent> @<t> <id>:<wkt> <id>:<wkt> ... [--rollup <member>]
//! merge       <layer> <id> <id> ... @<t> <new-id> <wkt> [name=value ...] [--rollup <member>]
//! update      <layer> <id> @<t> <wkt> [name=value ...]
//! delete      <layer> <id> @<t>
//! reincarnate <layer> <id> @<t> <wkt> [name=value ...]
//! ```
//!
//! Instants after `@` accept a tick, a d/m/yyyy date, or `now`.

use tpiet_core::geometry::parse_wkt;
use tpiet_core::layer::NewObject;
use tpiet_core::temporal::Tick;
use tpiet_core::time::{TimeConfig, TimeLiteral};
use tpiet_core::value::Value;
use tpiet_core::workspace::UpdateOp;

pub fn parse_op(args: &[String], time: &TimeConfig) -> Result<UpdateOp, String> {
    let mut args: Vec<String> = args.to_vec();
    let rollup = extract_rollup(&mut args)?;
    let mut it = args.into_iter();
    let verb = it.next().ok_or("empty op spec")?;
    let rest: Vec<String> = it.collect();
    match verb.as_str() {
        "create" => {
            let (layer, id, at, wkt, attrs) = id_at_wkt(&rest, time)?;
            Ok(UpdateOp::Create {
                layer,
                id,
                geometry: wkt,
                attrs,
                at,
            })
        }
        "update" => {
            let (layer, id, at, wkt, attrs) = id_at_wkt(&rest, time)?;
            Ok(UpdateOp::Update {
                layer,
                id,
                geometry: wkt,
                attrs,
                at,
            })
        }
        "reincarnate" => {
            let (layer, id, at, wkt, attrs) = id_at_wkt(&rest, time)?;
            Ok(UpdateOp::Reincarnate {
                layer,
                id,
                geometry: wkt,
                attrs,
                at,
            })
        }
        "delete" => {
            if rest.len() != 3 {
                return Err("usage: delete <layer> <id> @<t>".into());
            }
            Ok(UpdateOp::Delete {
                layer: rest[0].clone(),
                id: rest[1].clone(),
                at: instant(&rest[2], time)?,
            })
        }
        "split" => {
            if rest.len() < 5 {
                return Err(
                    "usage: split <layer> <parent> @<t> <id>:<wkt> <id>:<wkt> ... [--rollup <member>]"
                        .into(),
                );
            }
            let layer = rest[0].clone();
            let parent = rest[1].clone();
            let at = instant(&rest[2], time)?;
            let mut parts = Vec::new();
            for spec in &rest[3..] {
                let (id, wkt) = spec
                    .split_once(':')
                    .ok_or_else(|| format!("part '{spec}' must be <id>:<wkt>"))?;
                parts.push(NewObject {
                    id: id.to_string(),
                    geometry: parse_wkt(wkt).map_err(|e| e.to_string())?,
                    attrs: vec![],
                });
            }
            Ok(UpdateOp::Split {
                layer,
                parent,
                at,
                parts,
                rollup,
            })
        }
        "merge" => {
            // parents run until the @<t> marker.
            let at_pos = rest
                .iter()
                .position(|a| a.starts_with('@'))
                .ok_or("merge needs an @<t> instant")?;
            if at_pos < 3 || rest.len() < at_pos + 3 {
                return Err(
                    "usage: merge <layer> <id> <id> ... @<t> <new-id> <wkt> [name=value ...]"
                        .into(),
                );
            }
            let layer = rest[0].clone();
            let parents: Vec<String> = rest[1..at_pos].to_vec();
            let at = instant(&rest[at_pos], time)?;
            let new_id = rest[at_pos + 1].clone();
            let geometry = parse_wkt(&rest[at_pos + 2]).map_err(|e| e.to_string())?;
            let attrs = attr_list(&rest[at_pos + 3..])?;
            Ok(UpdateOp::Merge {
                layer,
                parents,
                at,
                new: NewObject {
                    id: new_id,
                    geometry,
                    attrs,
                },
                rollup,
            })
        }
        other => Err(format!(
            "unknown op '{other}' (create, split, merge, update, delete, reincarnate)"
        )),
    }
}

fn extract_rollup(args: &mut Vec<String>) -> Result<Option<String>, String> {
    if let Some(pos) = args.iter().position(|a| a == "--rollup") {
        if pos + 1 >= args.len() {
            return Err("--rollup needs a member name".into());
        }
        let value = args.remove(pos + 1);
        args.remove(pos);
        Ok(Some(value))
    } else {
        Ok(None)
    }
}

type ObjectArgs = (
    String,
    String,
    Tick,
    tpiet_core::Geometry,
    Vec<(String, Value)>,
);

fn id_at_wkt(rest: &[String], time: &TimeConfig) -> Result<ObjectArgs, String> {
    if rest.len() < 4 {
        return Err("usage: <layer> <id> @<t> <wkt> [name=value ...]".into());
    }
    let geometry = parse_wkt(&rest[3]).map_err(|e| e.to_string())?;
    Ok((
        rest[0].clone(),
        rest[1].clone(),
        instant(&rest[2], time)?,
        geometry,
        attr_list(&rest[4..])?,
    ))
}

fn attr_list(args: &[String]) -> Result<Vec<(String, Value)>, String> {
    args.iter()
        .map(|a| {
            a.split_once('=')
                .map(|(k, v)| (k.to_string(), Value::parse(v)))
                .ok_or_else(|| format!("attribute '{a}' must be name=value"))
        })
        .collect()
}

fn instant(arg: &str, time: &TimeConfig) -> Result<Tick, String> {
    let text = arg.strip_prefix('@').unwrap_or(arg);
    let lit = if text.eq_ignore_ascii_case("now") {
        TimeLiteral::Now
    } else if let Ok(n) = text.parse::<u64>() {
        TimeLiteral::Number(n)
    } else {
        let parts: Vec<&str> = text.split('/').collect();
        if parts.len() == 3 {
            TimeLiteral::Date {
                day: parts[0]
                    .parse()
                    .map_err(|_| format!("bad instant '{text}'"))?,
                month: parts[1]
                    .parse()
                    .map_err(|_| format!("bad instant '{text}'"))?,
                year: parts[2]
                    .parse()
                    .map_err(|_| format!("bad instant '{text}'"))?,
            }
        } else {
            return Err(format!("bad instant '{text}' (tick, d/m/yyyy, or now)"));
        }
    };
    time.resolve_instant(&lit).map_err(|e| e.to_string())
}
