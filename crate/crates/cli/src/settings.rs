//! Phase-settings files.
//!
//! ```json
//! {
//!   "alice": [[0.0, 1.0471975511965976, -1.0471975511965976], [0.0, 0.0, 0.0]],
//!   "bob":   [[0.0, 0.52359877559829882, -0.52359877559829882], [0.0, -0.52359877559829882, 0.52359877559829882]],
//!   "relabel": {"a1": [1, 3, 2], "a2": [1, 3, 2], "b1": [1, 3, 2], "b2": [2, 1, 3]}
//! }
//! ```
//!
//! Angles are radians. `relabel` is optional; each entry lists the new names
//! of outcomes 1, 2, 3 of that observable.

use std::fmt;
use std::path::Path;

use qutrit_ch::quantum::{Permutation, PhaseSettings, PhaseVector, Relabeling};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::report::nums;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettingsFile {
    pub alice: [[f64; 3]; 2],
    pub bob: [[f64; 3]; 2],
    #[serde(default)]
    pub relabel: Option<RelabelFile>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelabelFile {
    pub a1: [usize; 3],
    pub a2: [usize; 3],
    pub b1: [usize; 3],
    pub b2: [usize; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SettingsError(pub String);

impl fmt::Display for SettingsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for SettingsError {}

impl SettingsFile {
    pub fn parse(text: &str) -> Result<Self, SettingsError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." {
                SettingsError(inner.to_string())
            } else {
                SettingsError(format!("field `{path}`: {inner}"))
            }
        })
    }

    pub fn read(path: &Path) -> Result<(Self, Vec<u8>), SettingsError> {
        let bytes = std::fs::read(path).map_err(|e| SettingsError(format!("cannot read {}: {e}", path.display())))?;
        let text = std::str::from_utf8(&bytes).map_err(|_| SettingsError("settings file is not UTF-8".into()))?;
        Ok((Self::parse(text)?, bytes))
    }

    pub fn to_settings(&self) -> Result<PhaseSettings, SettingsError> {
        let phase = |field: &str, p: [f64; 3]| {
            PhaseVector::new(p).map_err(|_| SettingsError(format!("field `{field}`: phases must be finite")))
        };
        let alice = [phase("alice[0]", self.alice[0])?, phase("alice[1]", self.alice[1])?];
        let bob = [phase("bob[0]", self.bob[0])?, phase("bob[1]", self.bob[1])?];
        let relabel = match &self.relabel {
            None => Relabeling::identity(),
            Some(r) => {
                let perm = |field: &str, images: [usize; 3]| {
                    Permutation::from_one_based(images).map_err(|_| {
                        SettingsError(format!(
                            "field `relabel.{field}`: {images:?} is not a permutation of 1, 2, 3"
                        ))
                    })
                };
                Relabeling {
                    alice: [perm("a1", r.a1)?, perm("a2", r.a2)?],
                    bob: [perm("b1", r.b1)?, perm("b2", r.b2)?],
                }
            }
        };
        Ok(PhaseSettings { alice, bob, relabel })
    }

    pub fn from_settings(settings: &PhaseSettings) -> Self {
        let r = settings.relabel;
        SettingsFile {
            alice: settings.alice.map(|p| p.0),
            bob: settings.bob.map(|p| p.0),
            relabel: (!r.is_identity()).then(|| RelabelFile {
                a1: r.alice[0].one_based(),
                a2: r.alice[1].one_based(),
                b1: r.bob[0].one_based(),
                b2: r.bob[1].one_based(),
            }),
        }
    }

    /// JSON form with 17-digit angles.
    pub fn to_json(&self) -> Value {
        let mut doc = Map::new();
        doc.insert("alice".into(), Value::Array(self.alice.iter().map(nums).collect()));
        doc.insert("bob".into(), Value::Array(self.bob.iter().map(nums).collect()));
        if let Some(r) = &self.relabel {
            doc.insert(
                "relabel".into(),
                json!({ "a1": r.a1, "a2": r.a2, "b1": r.b1, "b2": r.b2 }),
            );
        }
        Value::Object(doc)
    }
}
