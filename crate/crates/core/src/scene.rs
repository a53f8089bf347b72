//! Scene files: a single JSON document bundling the optional inputs of a
//! run (lattice, cone, fan, group, model, window, flags). Unknown keys are
//! rejected and every section is checked against its invariants.

use crate::cones::{Fan, RationalCone};
use crate::lattice::IntegralLattice;
use crate::linalg::IntMat;
use crate::{Error, Result};
use serde::Deserialize;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, untagged)]
pub enum LatticeSpec {
    Gram { gram: Vec<Vec<i64>> },
    Name { name: String },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeSpec {
    pub generators: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FanSpec {
    pub cones: Vec<Vec<Vec<i64>>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFlags {
    pub height: Option<i64>,
    pub g: Option<usize>,
    pub d: Option<i64>,
    pub component: Option<Vec<i64>>,
    pub probe_height: Option<i64>,
    pub lift_bound: Option<i64>,
}

/// The scene document. Every section is optional; a subcommand states which
/// ones it needs.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub lattice: Option<LatticeSpec>,
    pub cone: Option<ConeSpec>,
    pub fan: Option<FanSpec>,
    /// A list of generator matrices.
    pub group: Option<Vec<Vec<Vec<i64>>>>,
    pub model: Option<String>,
    pub window: Option<ConeSpec>,
    pub flags: Option<SceneFlags>,
}

#[derive(Clone, Debug)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl SceneFile {
    /// Parse a scene document; JSON syntax errors carry line/column anchors.
    pub fn parse_str(text: &str) -> Result<SceneFile> {
        serde_json::from_str(text).map_err(|e| {
            Error::SceneInvalid(format!("line {}, column {}: {}", e.line(), e.column(), e))
        })
    }

    pub fn from_path(path: &std::path::Path) -> Result<SceneFile> {
        let text = std::fs::read_to_string(path)?;
        SceneFile::parse_str(&text)
    }

    pub fn lattice(&self) -> Result<Option<IntegralLattice>> {
        match &self.lattice {
            None => Ok(None),
            Some(LatticeSpec::Name { name }) => Ok(Some(IntegralLattice::from_name(name)?)),
            Some(LatticeSpec::Gram { gram }) => {
                let rows: Vec<Vec<i64>> = gram.clone();
                let m = IntMat::from_rows(&rows);
                Ok(Some(IntegralLattice::new(m)?))
            }
        }
    }

    pub fn cone(&self) -> Result<Option<RationalCone>> {
        match &self.cone {
            None => Ok(None),
            Some(spec) => Ok(Some(cone_from_spec(spec)?)),
        }
    }

    pub fn window_cone(&self) -> Result<Option<RationalCone>> {
        match &self.window {
            None => Ok(None),
            Some(spec) => Ok(Some(cone_from_spec(spec)?)),
        }
    }

    pub fn fan(&self) -> Result<Option<Fan>> {
        match &self.fan {
            None => Ok(None),
            Some(spec) => {
                let cones: Vec<RationalCone> = spec
                    .cones
                    .iter()
                    .map(|rows| {
                        let dim = rows.first().map(|r| r.len()).unwrap_or(0);
                        RationalCone::from_rows(rows, dim)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Some(Fan::from_maximal(&cones)?))
            }
        }
    }

    pub fn group(&self) -> Result<Option<Vec<IntMat>>> {
        match &self.group {
            None => Ok(None),
            Some(mats) => Ok(Some(mats.iter().map(|m| IntMat::from_rows(m)).collect())),
        }
    }

    /// Structural validation: every present section must satisfy its
    /// invariants. Returns all diagnostics rather than stopping at the first.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if let Some(LatticeSpec::Gram { gram }) = &self.lattice {
            let n = gram.len();
            if n == 0 {
                out.push(Diagnostic {
                    field: "lattice.gram".into(),
                    message: "empty matrix".into(),
                });
            } else if gram.iter().any(|row| row.len() != n) {
                out.push(Diagnostic {
                    field: "lattice.gram".into(),
                    message: "matrix is not square".into(),
                });
            } else {
                for i in 0..n {
                    for j in (i + 1)..n {
                        if gram[i][j] != gram[j][i] {
                            out.push(Diagnostic {
                                field: "lattice.gram".into(),
                                message: format!(
                                    "not symmetric: entries ({i},{j}) = {} and ({j},{i}) = {}",
                                    gram[i][j], gram[j][i]
                                ),
                            });
                        }
                    }
                }
            }
        }
        if let Some(LatticeSpec::Name { name }) = &self.lattice {
            if IntegralLattice::from_name(name).is_err() {
                out.push(Diagnostic {
                    field: "lattice.name".into(),
                    message: format!("unknown lattice name: {name}"),
                });
            }
        }
        if let Some(spec) = &self.cone {
            match cone_from_spec(spec) {
                Ok(c) => {
                    if !c.is_pointed() {
                        out.push(Diagnostic {
                            field: "cone".into(),
                            message: "cone is not pointed (contains a line)".into(),
                        });
                    }
                }
                Err(e) => out.push(Diagnostic {
                    field: "cone".into(),
                    message: e.to_string(),
                }),
            }
        }
        if let Some(mats) = &self.group {
            for (k, rows) in mats.iter().enumerate() {
                let n = rows.len();
                if n == 0 || rows.iter().any(|r| r.len() != n) {
                    out.push(Diagnostic {
                        field: format!("group[{k}]"),
                        message: "generator is not a square matrix".into(),
                    });
                    continue;
                }
                let m = IntMat::from_rows(rows);
                if !m.is_unimodular() {
                    out.push(Diagnostic {
                        field: format!("group[{k}]"),
                        message: format!("generator has determinant {}, not ±1", m.det()),
                    });
                }
            }
        }
        if let Some(model) = &self.model {
            if model != "lorentzian" && model != "psd" {
                out.push(Diagnostic {
                    field: "model".into(),
                    message: format!("unknown model '{model}' (expected lorentzian or psd)"),
                });
            }
        }
        if let Some(spec) = &self.fan {
            if spec.cones.is_empty() {
                out.push(Diagnostic {
                    field: "fan".into(),
                    message: "fan needs at least one cone".into(),
                });
            } else if let Err(e) = self.fan() {
                out.push(Diagnostic {
                    field: "fan".into(),
                    message: e.to_string(),
                });
            }
        }
        out
    }
}

fn cone_from_spec(spec: &ConeSpec) -> Result<RationalCone> {
    if spec.generators.is_empty() {
        return Err(Error::EmptyInput(
            "cone needs at least one generator".into(),
        ));
    }
    let dim = spec.generators[0].len();
    RationalCone::from_rows(&spec.generators, dim)
}

/// Load a cone from a standalone cone file {"generators": [[..]]}.
pub fn load_cone_file(path: &std::path::Path) -> Result<RationalCone> {
    let text = std::fs::read_to_string(path)?;
    let spec: ConeSpec = serde_json::from_str(&text).map_err(|e| {
        Error::SceneInvalid(format!(
            "{}: line {}, column {}: {}",
            path.display(),
            e.line(),
            e.column(),
            e
        ))
    })?;
    cone_from_spec(&spec)
}

/// Load a lattice from a file {"gram": [[..]]} or a built-in name.
pub fn load_lattice(file_or_name: &str) -> Result<IntegralLattice> {
    let path = std::path::Path::new(file_or_name);
    if path.exists() {
        let text = std::fs::read_to_string(path)?;
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct LatticeFile {
            gram: Vec<Vec<i64>>,
        }
        let spec: LatticeFile = serde_json::from_str(&text).map_err(|e| {
            Error::SceneInvalid(format!(
                "{}: line {}, column {}: {}",
                path.display(),
                e.line(),
                e.column(),
                e
            ))
        })?;
        IntegralLattice::new(IntMat::from_rows(&spec.gram))
    } else {
        IntegralLattice::from_name(file_or_name)
    }
}

/// Load a group file: a JSON list of generator matrices.
pub fn load_group_file(path: &std::path::Path) -> Result<Vec<IntMat>> {
    let text = std::fs::read_to_string(path)?;
    let mats: Vec<Vec<Vec<i64>>> = serde_json::from_str(&text).map_err(|e| {
        Error::SceneInvalid(format!(
            "{}: line {}, column {}: {}",
            path.display(),
            e.line(),
            e.column(),
            e
        ))
    })?;
    Ok(mats.iter().map(|m| IntMat::from_rows(m)).collect())
}

/// Load a fan file {"cones": [[[..]]]}.
pub fn load_fan_file(path: &std::path::Path) -> Result<Fan> {
    let text = std::fs::read_to_string(path)?;
    let spec: FanSpec = serde_json::from_str(&text).map_err(|e| {
        Error::SceneInvalid(format!(
            "{}: line {}, column {}: {}",
            path.display(),
            e.line(),
            e.column(),
            e
        ))
    })?;
    let cones: Vec<RationalCone> = spec
        .cones
        .iter()
        .map(|rows| {
            let dim = rows.first().map(|r| r.len()).unwrap_or(0);
            RationalCone::from_rows(rows, dim)
        })
        .collect::<Result<Vec<_>>>()?;
    Fan::from_maximal(&cones)
}
