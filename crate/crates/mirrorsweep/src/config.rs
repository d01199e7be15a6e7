//! Run configuration shared by all subcommands.

use mirrorsweep_core::photo::{DepthHypotheses, FeatureConfig, MatchingParams};
use mirrorsweep_core::pipeline::PipelineConfig;
use mirrorsweep_core::sampler::ScheduleConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Every tunable of a run. Missing fields take their defaults; unknown
/// fields are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub d_min: f64,
    pub d_max: f64,
    /// Number of depth hypotheses.
    pub depth_count: usize,
    /// Cap radii in degrees for the rounds after the first.
    pub deltas: Vec<f64>,
    /// Candidates per search round.
    pub candidates: usize,
    /// Feature stride in pixels.
    pub stride: usize,
    pub patch_radius: usize,
    pub match_radius: usize,
    pub slant_levels: usize,
    pub patch_slant_levels: usize,
    pub cost_ceiling: f64,
    pub census_weight: f64,
    pub min_separation: f64,
    pub temperature: f64,
    pub score_temperature: f64,
    /// Depth at which candidate planes cross the optical axis; `null` uses
    /// the middle of the depth range.
    pub anchor_depth: Option<f64>,
    pub consistency_epsilon: f64,
    /// Background color excluded from matching; `null` treats every pixel
    /// as foreground.
    pub background: Option<[u8; 3]>,
    /// Worker threads; 0 lets the runtime decide.
    pub threads: usize,
    /// Seed for generated inputs (`bench`).
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = PipelineConfig::default();
        let s = ScheduleConfig::default();
        RunConfig {
            d_min: p.hypotheses.d_min(),
            d_max: p.hypotheses.d_max(),
            depth_count: p.hypotheses.count(),
            deltas: s.deltas().to_vec(),
            candidates: s.candidates(),
            stride: p.features.stride,
            patch_radius: p.matching.patch_radius,
            match_radius: p.matching.match_radius,
            slant_levels: p.matching.slant_levels,
            patch_slant_levels: p.matching.patch_slant_levels,
            cost_ceiling: p.matching.cost_ceiling,
            census_weight: p.matching.census_weight,
            min_separation: p.matching.min_separation,
            temperature: p.temperature,
            score_temperature: p.score_temperature,
            anchor_depth: p.anchor_depth,
            consistency_epsilon: p.consistency_epsilon,
            background: p.features.background,
            threads: 0,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::validation("config", e))?;
        cfg.pipeline()?;
        cfg.schedule()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn pipeline(&self) -> Result<PipelineConfig, CliError> {
        let hypotheses = DepthHypotheses::new(self.d_min, self.d_max, self.depth_count)
            .map_err(|e| CliError::validation("config", e))?;
        let cfg = PipelineConfig {
            features: FeatureConfig { stride: self.stride, background: self.background, ..FeatureConfig::default() },
            hypotheses,
            matching: MatchingParams {
                patch_radius: self.patch_radius,
                match_radius: self.match_radius,
                cost_ceiling: self.cost_ceiling,
                census_weight: self.census_weight,
                min_separation: self.min_separation,
                slant_levels: self.slant_levels,
                patch_slant_levels: self.patch_slant_levels,
            },
            temperature: self.temperature,
            score_temperature: self.score_temperature,
            anchor_depth: self.anchor_depth,
            consistency_epsilon: self.consistency_epsilon,
        };
        cfg.validate().map_err(|e| CliError::validation("config", e))?;
        Ok(cfg)
    }

    pub fn schedule(&self) -> Result<ScheduleConfig, CliError> {
        ScheduleConfig::new(self.deltas.clone(), self.candidates).map_err(|e| CliError::validation("config", e))
    }

    /// Total search rounds, counting the full-sphere round.
    pub fn rounds(&self) -> usize {
        self.deltas.len() + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
        assert_eq!(c.rounds(), 5);
        assert_eq!(c.deltas, vec![20.7, 6.44, 1.99, 0.61]);
    }

    #[test]
    fn partial_documents_fill_defaults() {
        let c = RunConfig::from_json(r#"{"stride": 8, "background": null}"#).unwrap();
        assert_eq!(c.stride, 8);
        assert_eq!(c.background, None);
        assert_eq!(c.candidates, 64);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(RunConfig::from_json(r#"{"strides": 8}"#).is_err());
        assert!(RunConfig::from_json(r#"{"deltas": [1.0, 2.0]}"#).is_err());
        assert!(RunConfig::from_json(r#"{"d_min": 2.0}"#).is_err());
        assert!(RunConfig::from_json(r#"{"temperature": 0}"#).is_err());
    }
}
