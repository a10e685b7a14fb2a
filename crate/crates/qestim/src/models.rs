use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use qestim_core::bayes::ParameterGrid;
use qestim_core::model::{
    DiscreteModel, FeedbackInterferometerModel, NoonPhaseModel, TwoParamNoonModel,
};

use crate::error::Result;
use crate::io::read_table_model;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelSpec {
    Noon,
    Noon2,
    Feedback,
    Table(PathBuf),
}

impl FromStr for ModelSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "noon" => Ok(Self::Noon),
            "noon2" => Ok(Self::Noon2),
            "feedback" => Ok(Self::Feedback),
            _ => match s.strip_prefix("table:") {
                Some(path) if !path.is_empty() => Ok(Self::Table(path.into())),
                _ => Err(format!(
                    "unknown model {s:?}; expected noon, noon2, feedback or table:<path>"
                )),
            },
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Noon => f.write_str("noon"),
            Self::Noon2 => f.write_str("noon2"),
            Self::Feedback => f.write_str("feedback"),
            Self::Table(p) => write!(f, "table:{}", p.display()),
        }
    }
}

/// Fixed model settings that are not estimated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSettings {
    pub visibility: f64,
    pub feedback_phase: f64,
}

impl Default for ModelSettings {
    fn default() -> Self {
        Self {
            visibility: 0.9,
            feedback_phase: 0.0,
        }
    }
}

impl ModelSpec {
    pub fn build(&self, settings: ModelSettings) -> Result<Box<dyn DiscreteModel>> {
        Ok(match self {
            Self::Noon => Box::new(NoonPhaseModel::new(settings.visibility)?),
            Self::Noon2 => Box::new(TwoParamNoonModel::new()),
            Self::Feedback => Box::new(FeedbackInterferometerModel::new(settings.feedback_phase)?),
            Self::Table(path) => Box::new(read_table_model(path)?),
        })
    }

    /// Parameter names, in model order.
    pub fn parameter_names(&self) -> &'static [&'static str] {
        match self {
            Self::Noon | Self::Feedback => &["phi"],
            Self::Noon2 => &["phi", "vis"],
            Self::Table(_) => &["lambda"],
        }
    }

    /// Parameter vector at which `phi` (or λ) and the visibility are evaluated.
    pub fn params(&self, phi: f64, settings: ModelSettings) -> Vec<f64> {
        match self {
            Self::Noon2 => vec![phi, settings.visibility],
            _ => vec![phi],
        }
    }
}

/// Natural grid for the first parameter: the model period when it has one,
/// otherwise the admissible interval.
pub fn default_grid(
    spec: &ModelSpec,
    model: &dyn DiscreteModel,
    points: usize,
) -> Result<ParameterGrid> {
    Ok(match spec {
        ModelSpec::Noon | ModelSpec::Noon2 => ParameterGrid::noon_phase(points)?,
        ModelSpec::Feedback => ParameterGrid::full_phase(points)?,
        ModelSpec::Table(_) => {
            let (lo, hi) = model.param_bounds(0);
            ParameterGrid::new(lo, hi, points)?
        }
    })
}
