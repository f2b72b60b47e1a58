//! System definition files: a JSON manifest (`pmor-system/1`) naming one
//! Matrix Market file per matrix plus the coefficient tag of every term,
//! with matrix paths resolved relative to the manifest's directory.

use crate::error::{Error, Result};
use crate::io::matrix_market;
use crate::system::{AffineParametricSystem, AffineTerm, Coefficient, ParamSpec};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const SYSTEM_SCHEMA: &str = "pmor-system/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermEntry {
    pub coeff: Coefficient,
    pub matrix: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemManifest {
    pub schema: String,
    pub e: String,
    pub a_terms: Vec<TermEntry>,
    pub b_terms: Vec<TermEntry>,
    pub c_terms: Vec<TermEntry>,
    #[serde(default)]
    pub params: Vec<ParamSpec>,
}

fn read_manifest(path: &Path) -> Result<SystemManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display(), e))?;
    let manifest: SystemManifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if manifest.schema != SYSTEM_SCHEMA {
        return Err(Error::InvalidArgument(format!(
            "unsupported system schema '{}', expected '{SYSTEM_SCHEMA}'",
            manifest.schema
        )));
    }
    Ok(manifest)
}

/// Load a system from its manifest; matrix paths resolve against the
/// manifest's parent directory.
pub fn load_system(manifest_path: &Path) -> Result<AffineParametricSystem> {
    let manifest = read_manifest(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let load_terms = |entries: &[TermEntry]| -> Result<Vec<AffineTerm>> {
        entries
            .iter()
            .map(|t| {
                Ok(AffineTerm::new(
                    t.coeff.clone(),
                    matrix_market::read_matrix(&base.join(&t.matrix))?,
                ))
            })
            .collect()
    };
    AffineParametricSystem::new(
        matrix_market::read_matrix(&base.join(&manifest.e))?,
        load_terms(&manifest.a_terms)?,
        load_terms(&manifest.b_terms)?,
        load_terms(&manifest.c_terms)?,
        manifest.params.clone(),
    )
}

/// Write `<name>.json` plus one `.mtx` file per matrix into `dir`; returns
/// the manifest path.
pub fn save_system(sys: &AffineParametricSystem, dir: &Path, name: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display(), e))?;
    let write_terms = |terms: &[AffineTerm], tag: &str| -> Result<Vec<TermEntry>> {
        terms
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let file = format!("{name}_{tag}{i}.mtx");
                matrix_market::write_matrix(&dir.join(&file), &t.matrix)?;
                Ok(TermEntry {
                    coeff: t.coeff.clone(),
                    matrix: file,
                })
            })
            .collect()
    };
    let e_file = format!("{name}_e.mtx");
    matrix_market::write_matrix(&dir.join(&e_file), sys.e_matrix())?;
    let manifest = SystemManifest {
        schema: SYSTEM_SCHEMA.into(),
        e: e_file,
        a_terms: write_terms(sys.a_terms(), "a")?,
        b_terms: write_terms(sys.b_terms(), "b")?,
        c_terms: write_terms(sys.c_terms(), "c")?,
        params: sys.params().to_vec(),
    };
    let path = dir.join(format!("{name}.json"));
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::InvalidArgument(format!("manifest serialization: {e}")))?;
    std::fs::write(&path, text).map_err(|e| Error::io(path.display(), e))?;
    Ok(path)
}
