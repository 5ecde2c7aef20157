//! Workspace configuration: a flat key/section text file describing the time
//! domain, the layers, the warehouse pieces and the alpha mappings, plus the
//! loader that turns it into a live engine and the saver that writes the
//! stores back out.
//!
//! Grammar (one `key = value` per line, `#` comments):
//!
//! ```text
//! dimension_mode = temporal            # or: static
//!
//! [time]
//! granularity = year                   # or: day
//! epoch = 0                            # epoch year, or d/m/yyyy for days
//! current = 2012                       # tick, d/m/yyyy, or today
//!
//! [layer land]
//! kind = polygon                       # point | linestring | polygon
//! file = land.csv
//!
//! [dimension Land]
//! levels = parcelId, region, country   # bottom to top
//! file = dim_land.csv
//!
//! [cube Sales]
//! dimensions = Land, Time
//! measures = Parcel Sales
//! facts = facts_sales.csv
//!
//! [mapping land]
//! dimension = Land
//! level = parcelId
//! layer = land
//! file = map_land.csv
//! ```
//!
//! File paths are relative to the config file. The environment variable
//! `TPIET_WORKSPACE` supplies a default config path when none is given.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use tpiet_core::geometry::GeometryKind;
use tpiet_core::layer::{layer_to_csv, load_layer_csv};
use tpiet_core::olap::{
    dimension_to_csv, facts_to_csv, load_dimension_csv, load_facts_csv, load_mapping_csv,
    mapping_to_csv, DimensionMode, Warehouse,
};
use tpiet_core::time::TimeConfig;
use tpiet_core::Workspace;

#[derive(Debug)]
pub struct ConfigError(pub Vec<String>);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, msg) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{msg}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

fn single(msg: impl Into<String>) -> ConfigError {
    ConfigError(vec![msg.into()])
}

#[derive(Debug, Clone)]
pub struct LayerSpec {
    pub name: String,
    pub kind: GeometryKind,
    pub file: PathBuf,
}

#[derive(Debug, Clone)]
pub struct DimensionSpec {
    pub name: String,
    pub levels: Vec<String>,
    pub file: PathBuf,
}

#[derive(Debug, Clone)]
pub struct CubeSpec {
    pub name: String,
    pub dimensions: Vec<String>,
    pub measures: Vec<String>,
    pub facts: PathBuf,
}

#[derive(Debug, Clone)]
pub struct MappingSpec {
    pub dimension: String,
    pub level: String,
    pub layer: String,
    pub file: PathBuf,
}

/// The parsed config, before any data file is read.
#[derive(Debug, Clone)]
pub struct WorkspaceSpec {
    pub dimension_mode: DimensionMode,
    pub time: TimeConfig,
    pub layers: Vec<LayerSpec>,
    pub dimensions: Vec<DimensionSpec>,
    pub cubes: Vec<CubeSpec>,
    pub mappings: Vec<MappingSpec>,
}

struct Section {
    kind: String,
    name: String,
    line: usize,
    keys: BTreeMap<String, (usize, String)>,
}

fn parse_sections(
    text: &str,
    file: &str,
) -> Result<(BTreeMap<String, String>, Vec<Section>), ConfigError> {
    let mut top = BTreeMap::new();
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.split_once('#') {
            Some((head, _)) => head.trim(),
            None => raw.trim(),
        };
        if line.is_empty() {
            continue;
        }
        if let Some(inner) = line.strip_prefix('[') {
            let Some(inner) = inner.strip_suffix(']') else {
                return Err(single(format!(
                    "{file}:{line_no}: unterminated section header"
                )));
            };
            let (kind, name) = match inner.trim().split_once(' ') {
                Some((k, n)) => (k.trim().to_string(), n.trim().to_string()),
                None => (inner.trim().to_string(), String::new()),
            };
            sections.push(Section {
                kind,
                name,
                line: line_no,
                keys: BTreeMap::new(),
            });
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(single(format!("{file}:{line_no}: expected 'key = value'")));
        };
        let entry = (line_no, value.trim().to_string());
        match sections.last_mut() {
            Some(s) => {
                s.keys.insert(key.trim().to_string(), entry);
            }
            None => {
                top.insert(key.trim().to_string(), entry.1);
            }
        }
    }
    Ok((top, sections))
}

fn list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

fn unix_days_today() -> i64 {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    (secs / 86_400) as i64
}

pub fn parse_spec(path: &Path) -> Result<WorkspaceSpec, ConfigError> {
    let file = path.display().to_string();
    let text = fs::read_to_string(path)
        .map_err(|e| single(format!("cannot read config '{file}': {e}")))?;
    let dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let (top, sections) = parse_sections(&text, &file)?;

    let dimension_mode = match top.get("dimension_mode").map(String::as_str) {
        Some("temporal") | None => DimensionMode::Temporal,
        Some("static") => DimensionMode::Static,
        Some(other) => {
            return Err(single(format!(
                "{file}: dimension_mode must be static or temporal, got '{other}'"
            )))
        }
    };

    let mut time: Option<TimeConfig> = None;
    let mut layers = Vec::new();
    let mut dimensions = Vec::new();
    let mut cubes = Vec::new();
    let mut mappings = Vec::new();

    let get = |s: &Section, key: &str| -> Result<String, ConfigError> {
        s.keys.get(key).map(|(_, v)| v.clone()).ok_or_else(|| {
            single(format!(
                "{file}:{}: [{} {}] needs '{key} = ...'",
                s.line, s.kind, s.name
            ))
        })
    };

    for s in &sections {
        match s.kind.as_str() {
            "time" => {
                let gran = get(s, "granularity")?;
                let epoch = get(s, "epoch")?;
                let mut cfg = match gran.as_str() {
                    "year" => {
                        let epoch_year: i64 = epoch.trim().parse().map_err(|_| {
                            single(format!("{file}:{}: epoch must be a year number", s.line))
                        })?;
                        TimeConfig::years(epoch_year, 0)
                    }
                    "day" => {
                        let parts: Vec<&str> = epoch.split('/').collect();
                        if parts.len() != 3 {
                            return Err(single(format!(
                                "{file}:{}: epoch must be d/m/yyyy with day granularity",
                                s.line
                            )));
                        }
                        let parse = |p: &str| -> Result<u32, ConfigError> {
                            p.trim()
                                .parse()
                                .map_err(|_| single(format!("{file}:{}: bad epoch date", s.line)))
                        };
                        let year: i64 = parts[2]
                            .trim()
                            .parse()
                            .map_err(|_| single(format!("{file}:{}: bad epoch year", s.line)))?;
                        TimeConfig::days(parse(parts[0])?, parse(parts[1])?, year, 0)
                            .map_err(|e| single(format!("{file}:{}: {e}", s.line)))?
                    }
                    other => {
                        return Err(single(format!(
                            "{file}:{}: granularity must be day or year, got '{other}'",
                            s.line
                        )))
                    }
                };
                let current = get(s, "current")?;
                cfg.current = if current.eq_ignore_ascii_case("today") {
                    cfg.tick_for_unix_days(unix_days_today())
                        .map_err(|e| single(format!("{file}:{}: {e}", s.line)))?
                } else if let Ok(t) = current.trim().parse() {
                    t
                } else {
                    let parts: Vec<&str> = current.split('/').collect();
                    if parts.len() == 3 {
                        let d: u32 = parts[0].trim().parse().unwrap_or(0);
                        let m: u32 = parts[1].trim().parse().unwrap_or(0);
                        let y: i64 = parts[2].trim().parse().unwrap_or(0);
                        cfg.date_to_tick(d, m, y)
                            .map_err(|e| single(format!("{file}:{}: {e}", s.line)))?
                    } else {
                        return Err(single(format!(
                            "{file}:{}: current must be a tick, a date, or 'today'",
                            s.line
                        )));
                    }
                };
                time = Some(cfg);
            }
            "layer" => {
                let kind_text = get(s, "kind")?;
                let kind = GeometryKind::parse(&kind_text).ok_or_else(|| {
                    single(format!(
                        "{file}:{}: kind must be point, linestring or polygon",
                        s.line
                    ))
                })?;
                layers.push(LayerSpec {
                    name: s.name.clone(),
                    kind,
                    file: dir.join(get(s, "file")?),
                });
            }
            "dimension" => {
                dimensions.push(DimensionSpec {
                    name: s.name.clone(),
                    levels: list(&get(s, "levels")?),
                    file: dir.join(get(s, "file")?),
                });
            }
            "cube" => {
                cubes.push(CubeSpec {
                    name: s.name.clone(),
                    dimensions: list(&get(s, "dimensions")?),
                    measures: list(&get(s, "measures")?),
                    facts: dir.join(get(s, "facts")?),
                });
            }
            "mapping" => {
                mappings.push(MappingSpec {
                    dimension: get(s, "dimension")?,
                    level: get(s, "level")?,
                    layer: get(s, "layer")?,
                    file: dir.join(get(s, "file")?),
                });
            }
            other => {
                return Err(single(format!(
                    "{file}:{}: unknown section kind '{other}'",
                    s.line
                )))
            }
        }
    }

    let time = time.ok_or_else(|| single(format!("{file}: missing [time] section")))?;
    for (kind, names) in [
        (
            "layer",
            layers
                .iter()
                .map(|l: &LayerSpec| l.name.clone())
                .collect::<Vec<_>>(),
        ),
        (
            "dimension",
            dimensions.iter().map(|d| d.name.clone()).collect(),
        ),
        ("cube", cubes.iter().map(|c| c.name.clone()).collect()),
    ] {
        let mut seen: Vec<String> = Vec::new();
        for name in names {
            let lowered = name.to_ascii_lowercase();
            if seen.contains(&lowered) {
                return Err(single(format!("{file}: duplicate {kind} '{name}'")));
            }
            seen.push(lowered);
        }
    }
    Ok(WorkspaceSpec {
        dimension_mode,
        time,
        layers,
        dimensions,
        cubes,
        mappings,
    })
}

/// Load every data file and build the engine; all load and consistency
/// problems are reported together.
pub fn load_workspace(path: &Path) -> Result<(WorkspaceSpec, Workspace), ConfigError> {
    let spec = parse_spec(path)?;
    let mut errors: Vec<String> = Vec::new();
    let mut ws = Workspace::new(Warehouse::new(spec.dimension_mode), spec.time);

    let read = |p: &Path, errors: &mut Vec<String>| -> Option<String> {
        match fs::read_to_string(p) {
            Ok(t) => Some(t),
            Err(e) => {
                errors.push(format!("cannot read '{}': {e}", p.display()));
                None
            }
        }
    };

    for l in &spec.layers {
        let Some(text) = read(&l.file, &mut errors) else {
            continue;
        };
        match load_layer_csv(&l.name, l.kind, &l.file.display().to_string(), &text) {
            Ok(layer) => ws.layers.push(layer),
            Err(errs) => errors.extend(errs.into_iter().map(|e| e.to_string())),
        }
    }
    for d in &spec.dimensions {
        let Some(text) = read(&d.file, &mut errors) else {
            continue;
        };
        match load_dimension_csv(
            &d.name,
            d.levels.clone(),
            &d.file.display().to_string(),
            &text,
        ) {
            Ok(dim) => ws.warehouse.dimensions.push(dim),
            Err(errs) => errors.extend(errs.into_iter().map(|e| e.to_string())),
        }
    }
    for c in &spec.cubes {
        let Some(text) = read(&c.facts, &mut errors) else {
            continue;
        };
        match load_facts_csv(
            &c.name,
            &c.dimensions,
            &c.measures,
            &c.facts.display().to_string(),
            &text,
        ) {
            Ok(cube) => ws.warehouse.cubes.push(cube),
            Err(errs) => errors.extend(errs.into_iter().map(|e| e.to_string())),
        }
    }
    for m in &spec.mappings {
        let Some(text) = read(&m.file, &mut errors) else {
            continue;
        };
        match load_mapping_csv(
            &m.dimension,
            &m.level,
            &m.layer,
            &m.file.display().to_string(),
            &text,
        ) {
            Ok(mapping) => ws.mappings.push(mapping),
            Err(errs) => errors.extend(errs.into_iter().map(|e| e.to_string())),
        }
    }
    if errors.is_empty() {
        errors.extend(ws.check_consistency());
    }
    if errors.is_empty() {
        Ok((spec, ws))
    } else {
        Err(ConfigError(errors))
    }
}

/// Rewrite every data file from the in-memory stores.
pub fn save_workspace(spec: &WorkspaceSpec, ws: &Workspace) -> Result<(), ConfigError> {
    let mut errors = Vec::new();
    let mut write = |path: &Path, content: String| {
        if let Err(e) = fs::write(path, content) {
            errors.push(format!("cannot write '{}': {e}", path.display()));
        }
    };
    for l in &spec.layers {
        if let Some(layer) = ws.layer(&l.name) {
            write(&l.file, layer_to_csv(layer));
        }
    }
    for d in &spec.dimensions {
        if let Ok(dim) = ws.warehouse.dimension(&d.name) {
            write(&d.file, dimension_to_csv(dim));
        }
    }
    for c in &spec.cubes {
        if let Ok(cube) = ws.warehouse.cube(&c.name) {
            write(&c.facts, facts_to_csv(cube));
        }
    }
    for m in &spec.mappings {
        if let Some(mapping) = ws.mapping_for(&m.dimension, &m.layer) {
            write(&m.file, mapping_to_csv(mapping));
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(ConfigError(errors))
    }
}

/// One-paragraph summary printed by `load`.
pub fn summary(ws: &Workspace) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "time: granularity {:?}, current tick {}\n",
        ws.time.granularity, ws.time.current
    ));
    for layer in &ws.layers {
        let spans: Vec<String> = layer.lifespan().iter().map(|iv| iv.to_string()).collect();
        out.push_str(&format!(
            "layer {} ({}): {} objects, {} stages, lifespan {}\n",
            layer.name,
            layer.kind,
            layer.object_ids().len(),
            layer.stages().len(),
            if spans.is_empty() {
                "empty".to_string()
            } else {
                spans.join(" ")
            }
        ));
    }
    for dim in &ws.warehouse.dimensions {
        out.push_str(&format!(
            "dimension {}: levels {}, {} member rows\n",
            dim.name,
            dim.levels.join(" -> "),
            dim.rows.len()
        ));
    }
    for cube in &ws.warehouse.cubes {
        out.push_str(&format!(
            "cube {}: dimensions {}, measures {}, {} facts\n",
            cube.name,
            cube.dim_names.join(", "),
            cube.measure_names.join(", "),
            cube.facts.len()
        ));
    }
    for m in &ws.mappings {
        out.push_str(&format!(
            "mapping {} ({}) -> layer {}: {} rows\n",
            m.dimension,
            m.level,
            m.layer,
            m.rows.len()
        ));
    }
    out
}
