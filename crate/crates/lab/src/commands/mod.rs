pub mod eigen;
pub mod optimize;
pub mod predict;
pub mod simulate;
pub mod verify;

use patchfront::GrowthParams;
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::failure::{Failure, Outcome};
use crate::output::Artifacts;

/// What a subcommand hands back: a summary printed on stdout and the files
/// to write.
pub struct Report {
    pub stdout: Vec<u8>,
    pub artifacts: Artifacts,
    /// Inputs derived from the flags, such as a scenario file's contents or
    /// the patch length solved from `--lambda1`.
    pub resolved: Option<serde_json::Value>,
}

impl Report {
    pub fn json<T: Serialize + ?Sized>(summary: &T, artifacts: Artifacts) -> Outcome<Self> {
        Ok(Report {
            stdout: crate::output::json_bytes(summary)?,
            artifacts,
            resolved: None,
        })
    }

    pub fn resolved<T: Serialize>(mut self, value: &T) -> Outcome<Self> {
        self.resolved = Some(serde_json::to_value(value).map_err(Failure::runtime)?);
        Ok(self)
    }
}

/// Growth parameters as recorded in the manifest.
#[derive(Serialize)]
pub struct ResolvedParams {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    #[serde(rename = "L")]
    pub length: f64,
}

impl From<&GrowthParams> for ResolvedParams {
    fn from(p: &GrowthParams) -> Self {
        ResolvedParams {
            r1: p.r1,
            r2: p.r2,
            r3: p.r3,
            length: p.length,
        }
    }
}

/// A scenario file together with the patch length it resolves to.
#[derive(Serialize)]
pub struct ResolvedScenario<'a> {
    pub scenario: &'a ScenarioConfig,
    pub params: ResolvedParams,
}
