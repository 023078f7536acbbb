use serde::{Deserialize, Serialize};

use super::embed::Embedding2D;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostMode {
    /// `d / |dh|`: distance over altitude difference.
    Printed,
    /// `|dh| / d`: altitude difference over distance.
    #[default]
    Slope,
}

impl std::str::FromStr for CostMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "printed" => Ok(CostMode::Printed),
            "slope" => Ok(CostMode::Slope),
            other => Err(format!(
                "unknown cost mode `{other}` (expected printed|slope)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    pub a: f64,
    pub mode: CostMode,
    /// Floor on the denominator so the ratio stays finite.
    pub epsilon_h: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            a: 4.0,
            mode: CostMode::Slope,
            epsilon_h: 1e-9,
        }
    }
}

/// Cost value between embedded points `i` and `j`; zero on the diagonal.
pub fn cost_value(e: &Embedding2D, i: usize, j: usize, p: &CostParams) -> f64 {
    if i == j {
        return 0.0;
    }
    let d = e.distance(i, j);
    let dh = (e.altitudes[i] - e.altitudes[j]).abs();
    match p.mode {
        CostMode::Printed => d / dh.max(p.epsilon_h),
        CostMode::Slope => dh / d.max(p.epsilon_h),
    }
}
