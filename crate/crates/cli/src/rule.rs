use std::path::Path;

use qmcforge::cbc::CbcTrace;
use qmcforge::walsh::PolyLatticeRule;
use qmcforge::LatticeRule;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum AnyRule {
    Lattice(LatticeRule),
    PolyLattice(PolyLatticeRule),
}

/// How a rule file was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Construction {
    pub alpha: f64,
    /// Weight specification as given on the command line.
    pub weights: String,
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub trace: CbcTrace,
}

/// Contents of a rule file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleDocument {
    #[serde(flatten)]
    pub rule: AnyRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<Construction>,
}

impl RuleDocument {
    pub fn read(path: &Path) -> CliResult<Self> {
        let name = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: name.clone(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| CliError::Json { path: name, source })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rule documents serialize")
    }
}
