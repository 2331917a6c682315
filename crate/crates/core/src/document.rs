//! Space-files: the JSON presentation of a measure space and its maps.
//!
//! ```json
//! { "kind": "finite",
//!   "atoms": [ { "family": "x", "indices": [1], "mass": "1/2" } ],
//!   "maps": { "phi": { "x[1]": "x[1]" } } }
//!
//! { "kind": "generated",
//!   "generator": { "name": "three-families", "params": { "b_total": "1" } } }
//! ```
//!
//! Masses are exact rational strings. A generated presentation resolves its
//! maps from the generator; the identity `id` is always available.

use std::collections::BTreeMap;

use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::exact::{format_rational, parse_rational};
use crate::radon::h_table;
use crate::registry::{generator, Params};
use crate::space::{check_nonsingular, AtomId, FiniteMap, FiniteSpace, Mass, MeasureSpace, Transformation};
use crate::verdict::Verdict;

#[derive(Debug, Clone)]
pub struct LoadedSpace {
    pub space: MeasureSpace,
    pub maps: BTreeMap<String, Transformation>,
}

impl LoadedSpace {
    pub fn map(&self, name: &str) -> Result<&Transformation> {
        self.maps.get(name).ok_or_else(|| {
            let known: Vec<&str> = self.maps.keys().map(String::as_str).collect();
            Error::Usage(format!("no map named {name:?}; available: {}", known.join(", ")))
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomEntry {
    family: String,
    #[serde(default)]
    indices: Vec<u64>,
    mass: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorEntry {
    name: String,
    #[serde(default)]
    params: BTreeMap<String, Value>,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum Document {
    Finite {
        atoms: Vec<AtomEntry>,
        #[serde(default)]
        maps: BTreeMap<String, BTreeMap<String, String>>,
    },
    Generated {
        generator: GeneratorEntry,
    },
}

fn classify_serde(e: serde_json::Error) -> Error {
    use serde_json::error::Category;
    match e.classify() {
        Category::Syntax | Category::Eof | Category::Io => Error::Parse(e.to_string()),
        Category::Data => Error::Schema(e.to_string()),
    }
}

fn param_string(key: &str, v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        _ => Err(Error::Schema(format!("parameter {key:?} must be a string or number"))),
    }
}

/// Parses and validates a space-file.
pub fn load_space(text: &str) -> Result<LoadedSpace> {
    let doc: Document = serde_json::from_str(text).map_err(classify_serde)?;
    let mut maps = BTreeMap::new();
    let space = match doc {
        Document::Finite { atoms, maps: raw_maps } => {
            let mut entries = Vec::with_capacity(atoms.len());
            for a in atoms {
                let mass = parse_rational(&a.mass)?;
                entries.push((AtomId::new(a.family, a.indices), Mass::new(mass)?));
            }
            let finite = FiniteSpace::new(entries)?;
            for (name, pairs) in raw_maps {
                let mut image = BTreeMap::new();
                for (x, y) in pairs {
                    let x: AtomId = x.parse()?;
                    let y: AtomId = y.parse()?;
                    image.insert(x, y);
                }
                let map = FiniteMap::new(image);
                map.validate(&finite).map_err(|e| Error::Schema(format!("map {name:?}: {e}")))?;
                maps.insert(name, Transformation::Finite(map.into()));
            }
            MeasureSpace::finite(finite)
        }
        Document::Generated { generator: g } => {
            let params: Params =
                g.params.iter().map(|(k, v)| Ok((k.clone(), param_string(k, v)?))).collect::<Result<_>>()?;
            let space = MeasureSpace::Generated(generator(&g.name, &params)?);
            maps.extend(space.generated_maps());
            space
        }
    };
    maps.entry("id".to_string()).or_insert(Transformation::Identity);
    Ok(LoadedSpace { space, maps })
}

/// Serializes a space and its finite maps; generated spaces serialize as their generator call.
pub fn to_document(space: &MeasureSpace, maps: &BTreeMap<String, Transformation>) -> Result<Value> {
    match space {
        MeasureSpace::Finite(s) => {
            let atoms: Vec<Value> = s
                .masses()
                .iter()
                .map(|(a, m)| json!({ "family": a.family, "indices": a.indices, "mass": format_rational(m.value()) }))
                .collect();
            let all: Vec<AtomId> = s.atoms().cloned().collect();
            let mut out_maps = Map::new();
            for (name, t) in maps {
                if matches!(t, Transformation::Identity) && name == "id" {
                    continue;
                }
                let pairs: Map<String, Value> =
                    t.to_pairs(&all).into_iter().map(|(x, y)| (x.to_string(), Value::String(y.to_string()))).collect();
                out_maps.insert(name.clone(), Value::Object(pairs));
            }
            Ok(json!({ "kind": "finite", "atoms": atoms, "maps": out_maps }))
        }
        MeasureSpace::Generated(g) => Ok(json!({
            "kind": "generated",
            "generator": { "name": g.name(), "params": g.params() },
        })),
    }
}

/// Outcome of [`validate`].
#[derive(Debug, Clone)]
pub struct Diagnostics {
    pub atoms: usize,
    pub level: u32,
    /// Per map: `(name, nonsingularity verdict)`.
    pub nonsingular: Vec<(String, Verdict)>,
}

impl Diagnostics {
    pub fn to_json(&self) -> Value {
        json!({
            "status": "ok",
            "window": self.level,
            "atoms": self.atoms,
            "nonsingular": self.nonsingular.iter().map(|(n, v)| (n.clone(), v.to_json(self.level))).collect::<Map<_, _>>(),
        })
    }
}

/// Loads a space-file and cross-checks every map's annotated tails against
/// partial sums up to `max_power` at the given window.
pub fn validate(text: &str, level: u32, max_power: u32) -> Result<Diagnostics> {
    let loaded = load_space(text)?;
    let window = loaded.space.window(level);
    let mut nonsingular = Vec::new();
    for (name, t) in &loaded.maps {
        h_table(&loaded.space, t, max_power, &window)?;
        nonsingular.push((name.clone(), check_nonsingular(&loaded.space, t, &window)?));
    }
    Ok(Diagnostics { atoms: window.atoms.len(), level: window.level, nonsingular })
}
