//! JSON problem files.
//!
//! ```json
//! {
//!   "name": "ident2",
//!   "prior": [0.5, 0.5],
//!   "utilities": [[1, 0], [0, 1]],
//!   "state_labels": ["rain", "sun"],
//!   "action_labels": ["umbrella", "none"],
//!   "generator": { "kind": "negative_entropy", "reference": [0.5, 0.5] }
//! }
//! ```
//!
//! Labels and the generator block are optional. The generator block is only
//! read by the resource (Bregman) commands: the simplex is the set of mixed
//! actions, scored by each action's expected payoff under the prior.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use voi_core::bregman::{BregmanGenerator, ResourceProblem};
use voi_core::{DecisionProblem, Distribution};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub name: String,
    pub prior: Vec<f64>,
    pub utilities: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorBlock {
    /// `negative_entropy` or `squared_euclidean`.
    pub kind: String,
    /// Distance anchor over actions; uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Vec<f64>>,
}

impl ProblemFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        let file: ProblemFile = serde_json::from_str(&text)?;
        file.to_problem()?;
        Ok(file)
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn from_problem(name: impl Into<String>, prob: &DecisionProblem) -> Self {
        ProblemFile {
            name: name.into(),
            prior: prob.prior().probs().to_vec(),
            utilities: prob.utility_rows(),
            state_labels: Some(prob.state_labels().to_vec()),
            action_labels: Some(prob.action_labels().to_vec()),
            generator: None,
        }
    }

    pub fn to_problem(&self) -> CliResult<DecisionProblem> {
        if self.utilities.is_empty() {
            return Err(CliError::Input("utilities must have one row per state".into()));
        }
        let prior = Distribution::new(self.prior.clone())?;
        let prob = DecisionProblem::new(prior, self.utilities.clone())?;
        let states = self.state_labels.clone().unwrap_or_else(|| prob.state_labels().to_vec());
        let actions = self.action_labels.clone().unwrap_or_else(|| prob.action_labels().to_vec());
        Ok(prob.with_labels(states, actions)?)
    }

    /// The resource problem over mixed actions at bound `lambda`.
    pub fn to_resource(&self, lambda: f64) -> CliResult<ResourceProblem> {
        let prob = self.to_problem()?;
        let block = self
            .generator
            .as_ref()
            .ok_or_else(|| CliError::Input("problem file has no generator block".into()))?;
        let n = prob.n_actions();
        let reference = match &block.reference {
            Some(r) => Distribution::new(r.clone())?,
            None => Distribution::uniform(n)?,
        };
        let generator = match block.kind.as_str() {
            "negative_entropy" => BregmanGenerator::negative_entropy(reference.clone())?,
            "squared_euclidean" => BregmanGenerator::squared_euclidean(n)?,
            other => {
                return Err(CliError::Input(format!(
                    "unknown generator kind `{other}` (expected negative_entropy or squared_euclidean)"
                )))
            }
        };
        Ok(ResourceProblem::new(prob.action_values(), generator, reference, lambda)?)
    }
}
