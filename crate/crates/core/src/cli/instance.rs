use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{BallSystem, Instance, Tolerances, Vector};

pub const SCHEMA: &str = "v1";

/// On-disk ball-system instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub n: usize,
    pub r: f64,
    pub centers: Vec<Vec<f64>>,
    pub c0: Vec<f64>,
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("instance file: {e}")))?;
        file.validate()?;
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(Error::InvalidInput(format!("unsupported schema {:?}, expected {SCHEMA:?}", self.schema)));
        }
        if self.c0.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: self.c0.len() });
        }
        if let Some(c) = self.centers.iter().find(|c| c.len() != self.n) {
            return Err(Error::DimensionMismatch { expected: self.n, got: c.len() });
        }
        if self.centers.len() <= self.n {
            return Err(Error::InvalidInput(format!(
                "need more centers than dimensions (m = {}, n = {})",
                self.centers.len(),
                self.n
            )));
        }
        Ok(())
    }

    pub fn system(&self) -> Result<BallSystem> {
        BallSystem::new(self.centers.iter().map(|c| Vector::from_column_slice(c)).collect(), self.r)
    }

    pub fn instance(&self, tol: Tolerances) -> Result<Instance> {
        Instance::with_tolerances(self.system()?, Vector::from_column_slice(&self.c0), tol)
    }
}
