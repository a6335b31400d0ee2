//! Scenario configuration: the JSON document driving a simulation run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::moments::BasisKind;

/// Simulation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Stationary robots, estimation only.
    EstimateOnly,
    /// Moving robots where every robot uses the centrally computed swarm
    /// moments (perfect estimates).
    ControlOnlyPerfect,
    /// Full coupled estimation and control.
    Coupled,
}

/// Communication topology rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologySpec {
    /// Complete digraph.
    AllToAll,
    /// Edges between all pairs within the radius, recomputed every
    /// iteration as robots move.
    Radius(f64),
    /// A fixed explicit edge list (incompatible with add/remove events).
    Edges(Vec<(usize, usize)>),
}

impl Default for TopologySpec {
    fn default() -> Self {
        TopologySpec::AllToAll
    }
}

/// Where the desired moments come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSpec {
    /// Grayscale PGM measured with [`crate::moments::moments_of_grid`].
    Image {
        path: PathBuf,
        #[serde(default)]
        invert: bool,
    },
    /// Previously exported moment CSV.
    MomentsCsv(PathBuf),
}

/// Region initial positions are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitRegion {
    /// Uniform over a disk centered at the origin.
    Disk { radius: f64 },
    /// Uniform over a centered square of the given half-extent.
    Square { half_extent: f64 },
}

impl Default for InitRegion {
    fn default() -> Self {
        InitRegion::Disk { radius: 0.25 }
    }
}

/// A disk region used by add/remove events.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskRegion {
    pub center: [f64; 2],
    pub radius: f64,
}

/// A scheduled swarm change, applied at the end of the given iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Event {
    pub iteration: u64,
    pub action: EventAction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventAction {
    Add(AddSpec),
    Remove(RemoveSpec),
}

/// Robots to add: either explicit positions or a count sampled uniformly
/// from a disk region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct AddSpec {
    #[serde(default)]
    pub positions: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub region: Option<DiskRegion>,
}

/// Robots to remove: explicit ids, or a count taken nearest a region
/// center (without a region, the highest-id robots go first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RemoveSpec {
    #[serde(default)]
    pub ids: Option<Vec<usize>>,
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub region: Option<DiskRegion>,
}

/// Control-law parameters as configured (see
/// [`crate::controller::ControlParams`] for semantics and defaults).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlConfig {
    #[serde(default = "defaults::v_max")]
    pub v_max: f64,
    #[serde(default = "defaults::v_min")]
    pub v_min: f64,
    #[serde(default = "defaults::dt")]
    pub dt: f64,
    /// Three-zone repulsion toggle; the pure gradient-flow studies switch
    /// it off.
    #[serde(default = "defaults::yes")]
    pub collision: bool,
    #[serde(default = "defaults::zone_radii")]
    pub zone_radii: [f64; 3],
    /// Zone gains as multiples of `v_max`, innermost first.
    #[serde(default = "defaults::zone_gain_factors")]
    pub zone_gain_factors: [f64; 3],
}

impl Default for ControlConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields defaulted")
    }
}

impl ControlConfig {
    pub fn to_params(&self) -> crate::controller::ControlParams {
        crate::controller::ControlParams {
            v_max: self.v_max,
            v_min: self.v_min,
            zone_radii: self.zone_radii,
            zone_gains: [
                self.zone_gain_factors[0] * self.v_max,
                self.zone_gain_factors[1] * self.v_max,
                self.zone_gain_factors[2] * self.v_max,
            ],
            dt: self.dt,
        }
    }
}

mod defaults {
    pub fn v_max() -> f64 {
        0.01
    }
    pub fn v_min() -> f64 {
        0.001
    }
    pub fn dt() -> f64 {
        1.0
    }
    pub fn yes() -> bool {
        true
    }
    pub fn zone_radii() -> [f64; 3] {
        [0.05, 0.08, 0.12]
    }
    pub fn zone_gain_factors() -> [f64; 3] {
        [3.0, 1.0, 0.3]
    }
    pub fn gain_beta() -> f64 {
        1.7
    }
    pub fn gain_scale() -> f64 {
        1.0
    }
    pub fn memory() -> bool {
        true
    }
    pub fn convergence_threshold() -> f64 {
        0.01
    }
    pub fn metric_every() -> u64 {
        1
    }
}

/// Full scenario description. Unknown JSON keys are rejected; missing keys
/// take the documented defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Robot count; may be omitted when `initial_positions` is given.
    #[serde(default)]
    pub robots: Option<usize>,
    pub basis: BasisKind,
    pub order: u32,
    pub mode: Mode,
    #[serde(default)]
    pub target: Option<TargetSpec>,
    #[serde(default)]
    pub topology: TopologySpec,
    #[serde(default)]
    pub drop_rate: f64,
    /// Neighbor memory for dropped packets.
    #[serde(default = "defaults::memory")]
    pub memory: bool,
    /// Iterations a silent neighbor stays in memory. Defaults to 75 in
    /// estimate-only mode and ceil(1.5 N) otherwise.
    #[serde(default)]
    pub forget_horizon: Option<u32>,
    /// Estimator gain gamma. Defaults to 1/N_max, where N_max is the
    /// largest robot count the event schedule can reach (gamma must keep
    /// gamma * d_out < 1 as robots join).
    #[serde(default)]
    pub estimator_gain: Option<f64>,
    /// Gain schedule exponent (components of degree d get d^-beta).
    #[serde(default = "defaults::gain_beta")]
    pub gain_beta: f64,
    /// Uniform multiplier on the gain schedule.
    #[serde(default = "defaults::gain_scale")]
    pub gain_scale: f64,
    #[serde(default)]
    pub control: ControlConfig,
    /// Iteration cap.
    pub iterations: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub init: InitRegion,
    #[serde(default)]
    pub initial_positions: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub events: Vec<Event>,
    /// Robot whose estimate trace is logged.
    #[serde(default)]
    pub trace_robot: Option<usize>,
    /// Estimation convergence threshold on the worst per-robot error.
    #[serde(default = "defaults::convergence_threshold")]
    pub convergence_threshold: f64,
    /// Metric logging cadence in iterations.
    #[serde(default = "defaults::metric_every")]
    pub metric_every: u64,
    /// Reconstruction snapshot cadence (consumed by the CLI).
    #[serde(default)]
    pub snapshot_every: Option<u64>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let scenario: Scenario =
            serde_json::from_str(text).map_err(|e| SimError::Scenario(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// Loads a scenario file, resolving relative target paths against the
    /// file's directory.
    pub fn from_path(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Scenario(format!("{}: {e}", path.display())))?;
        let mut scenario = Self::from_json(&text)?;
        if let Some(dir) = path.parent() {
            scenario.resolve_paths(dir);
        }
        Ok(scenario)
    }

    fn resolve_paths(&mut self, dir: &Path) {
        if let Some(target) = &mut self.target {
            let p = match target {
                TargetSpec::Image { path, .. } => path,
                TargetSpec::MomentsCsv(path) => path,
            };
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
    }

    /// Initial robot count.
    pub fn initial_count(&self) -> usize {
        match (&self.initial_positions, self.robots) {
            (Some(p), _) => p.len(),
            (None, Some(n)) => n,
            (None, None) => 0,
        }
    }

    /// Largest robot count reachable through the event schedule.
    pub fn max_count(&self) -> usize {
        let mut count = self.initial_count() as i64;
        let mut max = count;
        let mut events: Vec<&Event> = self.events.iter().collect();
        events.sort_by_key(|e| e.iteration);
        for event in events {
            match &event.action {
                EventAction::Add(spec) => {
                    count += spec
                        .positions
                        .as_ref()
                        .map(Vec::len)
                        .or(spec.count)
                        .unwrap_or(0) as i64;
                }
                EventAction::Remove(spec) => {
                    count -= spec.ids.as_ref().map(Vec::len).or(spec.count).unwrap_or(0) as i64;
                }
            }
            max = max.max(count);
        }
        max.max(1) as usize
    }

    pub fn effective_gamma(&self) -> f64 {
        self.estimator_gain
            .unwrap_or_else(|| 1.0 / self.max_count() as f64)
    }

    pub fn effective_horizon(&self) -> u32 {
        if !self.memory {
            return 0;
        }
        self.forget_horizon.unwrap_or(match self.mode {
            Mode::EstimateOnly => 75,
            _ => (1.5 * self.initial_count() as f64).ceil() as u32,
        })
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |msg: String| Err(SimError::Scenario(msg));
        if self.iterations < 1 {
            return fail("iterations must be at least 1".into());
        }
        if self.initial_count() == 0 {
            return fail("set `robots` or `initial_positions`".into());
        }
        if let (Some(n), Some(p)) = (self.robots, &self.initial_positions) {
            if n != p.len() {
                return fail(format!(
                    "robots = {n} disagrees with {} initial positions",
                    p.len()
                ));
            }
        }
        if !(0.0..1.0).contains(&self.drop_rate) {
            return fail(format!("drop_rate must be in [0, 1) (got {})", self.drop_rate));
        }
        if self.effective_gamma() <= 0.0 {
            return fail(format!(
                "estimator_gain must be positive (got {})",
                self.effective_gamma()
            ));
        }
        if self.gain_scale <= 0.0 {
            return fail(format!("gain_scale must be positive (got {})", self.gain_scale));
        }
        // Control modes need a target, but it may be supplied
        // programmatically rather than through `target`; the simulator
        // enforces presence once resolution has happened.
        if let TopologySpec::Radius(r) = self.topology {
            if r <= 0.0 {
                return fail(format!("communication radius must be positive (got {r})"));
            }
        }
        if matches!(self.topology, TopologySpec::Edges(_)) && !self.events.is_empty() {
            return fail("explicit edge lists cannot be combined with add/remove events".into());
        }
        for event in &self.events {
            match &event.action {
                EventAction::Add(spec) => {
                    let by_positions = spec.positions.as_ref().map(Vec::len);
                    match (by_positions, spec.count, &spec.region) {
                        (Some(n), _, _) if n > 0 => {}
                        (None, Some(c), Some(_)) if c > 0 => {}
                        _ => {
                            return fail(format!(
                                "add event at iteration {} needs positions, or count with region",
                                event.iteration
                            ))
                        }
                    }
                }
                EventAction::Remove(spec) => {
                    let by_ids = spec.ids.as_ref().map(Vec::len);
                    match (by_ids, spec.count) {
                        (Some(n), _) if n > 0 => {}
                        (None, Some(c)) if c > 0 => {}
                        _ => {
                            return fail(format!(
                                "remove event at iteration {} needs ids or count",
                                event.iteration
                            ))
                        }
                    }
                }
            }
        }
        if self.metric_every == 0 {
            return fail("metric_every must be at least 1".into());
        }
        if self.convergence_threshold <= 0.0 {
            return fail("convergence_threshold must be positive".into());
        }
        self.control.to_params().validate().map_err(SimError::Controller)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_json() -> &'static str {
        r#"{
            "robots": 10,
            "basis": "legendre",
            "order": 3,
            "mode": "estimate_only",
            "iterations": 100
        }"#
    }

    #[test]
    fn minimal_scenario_parses_with_defaults() {
        let s = Scenario::from_json(minimal_json()).unwrap();
        assert_eq!(s.initial_count(), 10);
        assert_eq!(s.topology, TopologySpec::AllToAll);
        assert_eq!(s.drop_rate, 0.0);
        assert!(s.memory);
        assert_eq!(s.effective_horizon(), 75);
        assert_eq!(s.effective_gamma(), 0.1);
        assert_eq!(s.gain_beta, 1.7);
        assert_eq!(s.metric_every, 1);
        assert_eq!(s.init, InitRegion::Disk { radius: 0.25 });
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{
            "robots": 10, "basis": "legendre", "order": 3,
            "mode": "estimate_only", "iterations": 100, "bogus": 1
        }"#;
        let err = Scenario::from_json(text).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn topology_spellings() {
        for (json, expected) in [
            (r#""all_to_all""#, TopologySpec::AllToAll),
            (r#"{"radius": 0.5}"#, TopologySpec::Radius(0.5)),
            (r#"{"edges": [[0, 1], [1, 0]]}"#, TopologySpec::Edges(vec![(0, 1), (1, 0)])),
        ] {
            let parsed: TopologySpec = serde_json::from_str(json).unwrap();
            assert_eq!(parsed, expected);
        }
    }

    #[test]
    fn control_modes_require_targets_at_build() {
        let text = r#"{
            "robots": 5, "basis": "legendre", "order": 2,
            "mode": "coupled", "iterations": 10
        }"#;
        let s = Scenario::from_json(text).unwrap();
        let err = crate::swarmsim::SwarmSim::with_target(s, None).unwrap_err();
        assert!(err.to_string().contains("target"), "{err}");
    }

    #[test]
    fn max_count_tracks_events() {
        let mut s = Scenario::from_json(minimal_json()).unwrap();
        s.events = vec![
            Event {
                iteration: 5,
                action: EventAction::Remove(RemoveSpec {
                    count: Some(4),
                    ..Default::default()
                }),
            },
            Event {
                iteration: 9,
                action: EventAction::Add(AddSpec {
                    count: Some(8),
                    region: Some(DiskRegion { center: [0.5, -0.5], radius: 0.3 }),
                    ..Default::default()
                }),
            },
        ];
        assert_eq!(s.max_count(), 14);
        // Default gamma respects the peak count.
        assert!((s.effective_gamma() - 1.0 / 14.0).abs() < 1e-15);
    }

    #[test]
    fn gain_constraint_default_formation_horizon() {
        let text = r#"{
            "robots": 20, "basis": "legendre", "order": 2,
            "mode": "coupled", "iterations": 10,
            "target": {"moments_csv": "m.csv"}
        }"#;
        let s = Scenario::from_json(text).unwrap();
        assert_eq!(s.effective_horizon(), 30);
    }

    #[test]
    fn memory_off_means_zero_horizon() {
        let mut s = Scenario::from_json(minimal_json()).unwrap();
        s.memory = false;
        assert_eq!(s.effective_horizon(), 0);
    }

    #[test]
    fn edges_with_events_rejected() {
        let mut s = Scenario::from_json(minimal_json()).unwrap();
        s.topology = TopologySpec::Edges(vec![(0, 1)]);
        s.events = vec![Event {
            iteration: 1,
            action: EventAction::Remove(RemoveSpec { count: Some(1), ..Default::default() }),
        }];
        assert!(s.validate().is_err());
    }

    #[test]
    fn scenario_round_trips_through_json() {
        let s = Scenario::from_json(minimal_json()).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back = Scenario::from_json(&text).unwrap();
        assert_eq!(s, back);
    }
}
