//! Result documents written by the subcommands.

use mirrorsweep_core::eval::{CurveData, MetricsReport};
use mirrorsweep_core::sampler::RoundTrace;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::scene_spec::PlaneDoc;

/// One search round: the cap searched and every candidate's score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundDoc {
    pub cap_center: [f64; 3],
    pub cap_delta_deg: f64,
    pub best_index: usize,
    pub candidates: Vec<[f64; 3]>,
    pub scores: Vec<f64>,
}

impl From<&RoundTrace> for RoundDoc {
    fn from(r: &RoundTrace) -> Self {
        RoundDoc {
            cap_center: r.cap.center().vector().to_array(),
            cap_delta_deg: r.cap.delta(),
            best_index: r.best_index,
            candidates: r.candidates.iter().map(|d| d.vector().to_array()).collect(),
            scores: r.scores.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsDoc {
    pub silog: f64,
    pub absrel: f64,
    pub sqrel: f64,
    pub rmse: f64,
    pub mean_l1: f64,
    pub median_l1: f64,
    pub pixel_count: usize,
    /// Mean `|pred − (‖ŵ‖/‖w‖)·gt|`, present when both planes are known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_dpt: Option<f64>,
}

impl From<&MetricsReport> for MetricsDoc {
    fn from(m: &MetricsReport) -> Self {
        MetricsDoc {
            silog: m.silog,
            absrel: m.absrel,
            sqrel: m.sqrel,
            rmse: m.rmse,
            mean_l1: m.mean_l1,
            median_l1: m.median_l1,
            pixel_count: m.pixel_count,
            l_dpt: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane: Option<PlaneDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<RoundDoc>,
    /// Angle in degrees to a reference plane, when one was given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_error_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_confidence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsDoc>,
    /// The run configuration with `threads` reset to 0; results do not
    /// depend on it.
    pub config: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl ResultRecord {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        ResultRecord {
            command: command.to_owned(),
            plane: None,
            score: None,
            trace: Vec::new(),
            angle_error_deg: None,
            mean_confidence: None,
            metrics: None,
            config: RunConfig { threads: 0, ..config.clone() },
            timings: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serializes");
        s.push('\n');
        s
    }
}

/// `threshold,fraction` rows with a header.
pub fn curve_csv(curve: &CurveData) -> String {
    let mut out = String::from("threshold,fraction\n");
    for (t, f) in curve.thresholds.iter().zip(&curve.fractions) {
        out.push_str(&format!("{t},{f}\n"));
    }
    out
}
