//! Snapshot of a reduction run (`pmor-state/1`): the three bases as explicit
//! column-major arrays, the inner-product convention, the interpolation
//! history, and optionally the fitted surrogate bank. Loading reprojects the
//! snapshot onto a system, so the file stays valid across tool versions as
//! long as the basis dimensions match.

use crate::error::{Error, Result};
use crate::estimator::{InnerProduct, InterpolationRecord, ReductionState};
use crate::linalg::BasisMatrix;
use crate::rbf::SurrogateBank;
use crate::system::AffineParametricSystem;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const STATE_SCHEMA: &str = "pmor-state/1";

/// Column-major dense storage, the only layout in the file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenseData {
    pub nrows: usize,
    pub ncols: usize,
    pub data: Vec<f64>,
}

impl DenseData {
    fn from_matrix(m: &DMatrix<f64>) -> Self {
        DenseData {
            nrows: m.nrows(),
            ncols: m.ncols(),
            data: m.as_slice().to_vec(),
        }
    }

    fn to_matrix(&self) -> Result<DMatrix<f64>> {
        if self.data.len() != self.nrows * self.ncols {
            return Err(Error::dim(
                "dense snapshot entries",
                self.nrows * self.ncols,
                self.data.len(),
            ));
        }
        Ok(DMatrix::from_column_slice(self.nrows, self.ncols, &self.data))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSnapshot {
    pub schema: String,
    pub inner: InnerProduct,
    pub v: DenseData,
    pub v_du: DenseData,
    pub v_e: DenseData,
    pub history: Vec<InterpolationRecord>,
    #[serde(default)]
    pub surrogate: Option<SurrogateBank>,
}

pub fn save_state(
    path: &Path,
    state: &ReductionState,
    surrogate: Option<&SurrogateBank>,
) -> Result<()> {
    let snapshot = StateSnapshot {
        schema: STATE_SCHEMA.into(),
        inner: state.inner_product(),
        v: DenseData::from_matrix(state.basis().as_matrix()),
        v_du: DenseData::from_matrix(state.dual_basis().as_matrix()),
        v_e: DenseData::from_matrix(state.error_basis().as_matrix()),
        history: state.history().to_vec(),
        surrogate: surrogate.cloned(),
    };
    let text = serde_json::to_string(&snapshot)
        .map_err(|e| Error::InvalidArgument(format!("state serialization: {e}")))?;
    std::fs::write(path, text).map_err(|e| Error::io(path.display(), e))
}

pub fn load_state(
    path: &Path,
    sys: &AffineParametricSystem,
) -> Result<(ReductionState, Option<SurrogateBank>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display(), e))?;
    let snapshot: StateSnapshot = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if snapshot.schema != STATE_SCHEMA {
        return Err(Error::InvalidArgument(format!(
            "unsupported state schema '{}', expected '{STATE_SCHEMA}'",
            snapshot.schema
        )));
    }
    let state = ReductionState::new(
        sys,
        BasisMatrix::from_orthonormal(snapshot.v.to_matrix()?),
        BasisMatrix::from_orthonormal(snapshot.v_du.to_matrix()?),
        BasisMatrix::from_orthonormal(snapshot.v_e.to_matrix()?),
        snapshot.inner,
    )?
    .with_history(snapshot.history);
    Ok((state, snapshot.surrogate))
}
