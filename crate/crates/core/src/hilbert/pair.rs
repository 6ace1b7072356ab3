use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DensityMatrix, MatrixRepr, RegisterLayout};
use crate::error::Result;

/// A (ρ, σ) pair on one register "A", as stored in fixture files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatePair {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub rho: MatrixRepr,
    pub sigma: MatrixRepr,
}

impl StatePair {
    pub fn new(name: Option<String>, rho: &DensityMatrix, sigma: &DensityMatrix) -> Self {
        Self {
            name,
            rho: MatrixRepr::from(rho.matrix()),
            sigma: MatrixRepr::from(sigma.matrix()),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn states(&self) -> Result<(DensityMatrix, DensityMatrix)> {
        let rho = self.rho.to_matrix()?;
        let sigma = self.sigma.to_matrix()?;
        let layout = RegisterLayout::single("A", rho.nrows());
        Ok((
            DensityMatrix::new(rho, layout.clone())?,
            DensityMatrix::new(sigma, layout)?,
        ))
    }
}
