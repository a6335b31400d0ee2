//! Synchronous per-iteration simulation coupling sensing, estimation,
//! communication, and control.
//!
//! Each iteration runs, in order: estimator inputs from current positions,
//! delivery sampling of the previous iteration's broadcasts, one estimator
//! step per robot, broadcast recording, mode-dependent control velocities,
//! collision filtering and saturation, the Euler position update, topology
//! rebuild, scheduled add/remove events, and metric logging. Messages
//! computed at iteration `t` are received at `t + 1`.
//!
//! Runs are deterministic: one seeded stream per concern (initial
//! positions, packet delivery, collision tie-breaks, event sampling), and
//! every per-robot loop iterates in a fixed order.

mod metrics;
mod scenario;

pub use metrics::{MetricKind, MetricLog, MetricRow, TraceRow};
pub use scenario::{
    AddSpec, ControlConfig, DiskRegion, Event, EventAction, InitRegion, Mode, RemoveSpec,
    Scenario, TargetSpec, TopologySpec,
};

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::controller::{
    collision_filter, control_velocity, gain_matrix, saturate_deadband, ControlParams,
    GainSchedule,
};
use crate::error::SimError;
use crate::estimator::{estimator_input, EstimatorState, Message};
use crate::moments::{
    moments_of_grid, phi, phi_jacobian, BasisKind, MomentBasis, MomentVector, MsreEvaluator,
};
use crate::network::{build_radius_graph, strongly_connected, Digraph, PacketLossModel};
use crate::numeric::norm2_diff;
use crate::{io, Position};

/// Robots commanded outside the unit disk in PZM scenarios are clipped to
/// this radius before moment evaluation.
pub const PZM_CLIP_RADIUS: f64 = 0.999;

/// Plateau detector window for control-mode convergence (iterations).
const PLATEAU_WINDOW: u64 = 500;
/// Relative MSRE change below which a control run counts as converged.
const PLATEAU_REL_CHANGE: f64 = 1e-4;

/// Named RNG streams derived from the scenario seed.
mod streams {
    pub const POSITIONS: u64 = 1;
    pub const DELIVERY: u64 = 2;
    pub const COLLISION: u64 = 3;
    pub const EVENTS: u64 = 4;
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone)]
pub struct Robot {
    pub id: usize,
    pub position: Position,
}

/// Result of [`SwarmSim::run`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOutcome {
    /// First iteration the convergence criterion held, if any.
    pub converged_at: Option<u64>,
    pub iterations_run: u64,
}

pub struct SwarmSim {
    scenario: Scenario,
    basis: MomentBasis,
    target: Option<MomentVector>,
    gains: GainSchedule,
    params: ControlParams,
    gamma: f64,
    horizon: u32,
    robots: Vec<Robot>,
    estimators: Vec<EstimatorState>,
    graph: Digraph,
    broadcasts: BTreeMap<usize, Vec<f64>>,
    last_estimates: BTreeMap<usize, Vec<f64>>,
    loss: PacketLossModel,
    collision_rng: ChaCha8Rng,
    events_rng: ChaCha8Rng,
    iteration: u64,
    next_id: usize,
    converged_at: Option<u64>,
    msre_eval: Option<MsreEvaluator>,
    msre_history: Vec<f64>,
    metrics: MetricLog,
}

impl SwarmSim {
    /// Builds a simulation, resolving the scenario's target from disk.
    pub fn new(scenario: Scenario) -> Result<Self, SimError> {
        let basis = MomentBasis::new(scenario.basis, scenario.order)?;
        let target = match &scenario.target {
            None => None,
            Some(TargetSpec::Image { path, invert }) => {
                let grid = io::pgm::read_pgm(path)?.into_density(*invert);
                Some(moments_of_grid(&basis, &grid)?)
            }
            Some(TargetSpec::MomentsCsv(path)) => {
                let m = io::csv::read_moments_csv(path)?;
                basis.check_compatible(m.basis())?;
                Some(m)
            }
        };
        Self::with_target(scenario, target)
    }

    /// Builds a simulation with an already-computed target (programmatic
    /// use; `scenario.target` is ignored).
    pub fn with_target(
        scenario: Scenario,
        target: Option<MomentVector>,
    ) -> Result<Self, SimError> {
        scenario.validate()?;
        let basis = MomentBasis::new(scenario.basis, scenario.order)?;
        if let Some(t) = &target {
            basis.check_compatible(t.basis())?;
        }
        if scenario.mode != Mode::EstimateOnly && target.is_none() {
            return Err(SimError::Scenario(format!(
                "mode {:?} needs a target",
                scenario.mode
            )));
        }

        let mut positions_rng = stream_rng(scenario.seed, streams::POSITIONS);
        let mut positions: Vec<Position> = match &scenario.initial_positions {
            Some(list) => list.iter().map(|&[x, y]| Position::new(x, y)).collect(),
            None => (0..scenario.initial_count())
                .map(|_| sample_region(&scenario.init, &mut positions_rng))
                .collect(),
        };
        for p in &positions {
            if p.x.abs() > 1.0 || p.y.abs() > 1.0 {
                return Err(SimError::OutsideArena { x: p.x, y: p.y });
            }
        }
        if basis.kind() == BasisKind::PseudoZernike {
            for p in &mut positions {
                clip_to_disk(p);
            }
        }

        let robots: Vec<Robot> = positions
            .iter()
            .enumerate()
            .map(|(id, &position)| Robot { id, position })
            .collect();
        let next_id = robots.len();

        let gamma = scenario.effective_gamma();
        let horizon = scenario.effective_horizon();
        let embedding = basis.embedding_len();
        let estimators: Vec<EstimatorState> = robots
            .iter()
            .map(|_| EstimatorState::new(embedding, gamma, horizon))
            .collect();

        let graph = build_topology(&scenario.topology, &robots)?;
        let loss = PacketLossModel::new(
            scenario.drop_rate,
            stream_rng(scenario.seed, streams::DELIVERY),
        )?;
        let gains = gain_matrix(&basis, scenario.gain_beta).scaled(scenario.gain_scale);
        let params = scenario.control.to_params();
        params.validate()?;
        let msre_eval = target.as_ref().map(|_| MsreEvaluator::new(&basis));

        Ok(Self {
            collision_rng: stream_rng(scenario.seed, streams::COLLISION),
            events_rng: stream_rng(scenario.seed, streams::EVENTS),
            scenario,
            basis,
            target,
            gains,
            params,
            gamma,
            horizon,
            robots,
            estimators,
            graph,
            broadcasts: BTreeMap::new(),
            last_estimates: BTreeMap::new(),
            loss,
            iteration: 0,
            next_id,
            converged_at: None,
            msre_eval,
            msre_history: Vec::new(),
            metrics: MetricLog::default(),
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn basis(&self) -> &MomentBasis {
        &self.basis
    }

    pub fn target(&self) -> Option<&MomentVector> {
        self.target.as_ref()
    }

    pub fn gains(&self) -> &GainSchedule {
        &self.gains
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn converged_at(&self) -> Option<u64> {
        self.converged_at
    }

    pub fn robots(&self) -> &[Robot] {
        &self.robots
    }

    pub fn positions(&self) -> Vec<Position> {
        self.robots.iter().map(|r| r.position).collect()
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    pub fn metrics(&self) -> &MetricLog {
        &self.metrics
    }

    pub fn estimator_of(&self, id: usize) -> Option<&EstimatorState> {
        let idx = self.robots.iter().position(|r| r.id == id)?;
        Some(&self.estimators[idx])
    }

    /// The swarm's actual moment vector `M(s)` (mean of `phi`).
    pub fn swarm_moments(&self) -> MomentVector {
        crate::moments::moments_of_points(&self.basis, &self.positions())
            .expect("swarm is nonempty and in-domain")
    }

    /// Current estimate of a robot, falling back to its last valid estimate
    /// while the push-sum weight crosses zero.
    pub fn estimate_of(&self, id: usize) -> Option<Vec<f64>> {
        let idx = self.robots.iter().position(|r| r.id == id)?;
        Some(self.current_estimate(idx))
    }

    fn current_estimate(&self, idx: usize) -> Vec<f64> {
        let id = self.robots[idx].id;
        match self.estimators[idx].estimate() {
            Some(est) => est,
            None => self
                .last_estimates
                .get(&id)
                .cloned()
                .unwrap_or_else(|| vec![0.0; self.basis.embedding_len()]),
        }
    }

    /// One synchronous iteration.
    pub fn step(&mut self) -> Result<(), SimError> {
        let n = self.robots.len();
        let m = self.basis.embedding_len();
        let t = self.iteration;

        // (1) Estimator inputs from current positions.
        let mut inputs: Vec<Vec<f64>> = Vec::with_capacity(n);
        for robot in &self.robots {
            inputs.push(estimator_input(&phi(&self.basis, robot.position)?));
        }

        // (2) Delivery of the previous iteration's broadcasts over the
        // current topology.
        let delivered = self.loss.sample_delivery(&self.graph);
        let mut inbox: Vec<Vec<Message>> = vec![Vec::new(); n];
        for (src, dst) in delivered {
            let sender = self.robots[src].id;
            if let Some(payload) = self.broadcasts.get(&sender) {
                inbox[dst].push(Message { sender, payload: payload.clone() });
            }
        }

        // (3) Estimator step per robot.
        for i in 0..n {
            let d_out = self.graph.out_degree(i);
            self.estimators[i]
                .step(&inputs[i], &inbox[i], d_out)
                .map_err(SimError::Estimator)?;
        }

        // (4) Record broadcasts for delivery next iteration.
        for (robot, est) in self.robots.iter().zip(&self.estimators) {
            self.broadcasts.insert(robot.id, est.w().to_vec());
        }

        // Swarm moments from the inputs gathered this iteration.
        let mut m_current = vec![0.0; m];
        for u in &inputs {
            for (acc, v) in m_current.iter_mut().zip(u) {
                *acc += v;
            }
        }
        for v in &mut m_current {
            *v /= n as f64;
        }

        // (5)-(6) Mode-dependent velocities, collision filter, saturation.
        let mut velocities = vec![Position::new(0.0, 0.0); n];
        if self.scenario.mode != Mode::EstimateOnly {
            let target = self.target.as_ref().expect("control modes have targets");
            let positions = self.positions();
            for i in 0..n {
                let jac = phi_jacobian(&self.basis, self.robots[i].position)?;
                let mhat = match self.scenario.mode {
                    Mode::ControlOnlyPerfect => m_current.clone(),
                    Mode::Coupled => {
                        let est = self.current_estimate(i);
                        let id = self.robots[i].id;
                        if self.estimators[i].estimate().is_some() {
                            self.last_estimates.insert(id, est.clone());
                        }
                        est
                    }
                    Mode::EstimateOnly => unreachable!(),
                };
                let mut v = control_velocity(&jac, &mhat, target.values(), &self.gains)
                    .map_err(SimError::Controller)?;
                if self.scenario.control.collision {
                    let neighbors: Vec<Position> = positions
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .map(|(_, &p)| p)
                        .collect();
                    v = collision_filter(
                        v,
                        self.robots[i].position,
                        &neighbors,
                        &self.params,
                        &mut self.collision_rng,
                    );
                }
                velocities[i] = saturate_deadband(v, &self.params);
            }
        }

        // (7) Euler update, with PZM domain clipping.
        let pz = self.basis.kind() == BasisKind::PseudoZernike;
        for (robot, v) in self.robots.iter_mut().zip(&velocities) {
            robot.position += self.params.dt * v;
            if pz {
                clip_to_disk(&mut robot.position);
            }
        }

        // (8) Rebuild radius topologies (robots moved).
        if matches!(self.scenario.topology, TopologySpec::Radius(_))
            && self.scenario.mode != Mode::EstimateOnly
        {
            self.graph = build_topology(&self.scenario.topology, &self.robots)?;
        }

        // (9) Scheduled events.
        let due: Vec<Event> = self
            .scenario
            .events
            .iter()
            .filter(|e| e.iteration == t)
            .cloned()
            .collect();
        for event in due {
            self.apply_event(&event)?;
        }

        // (10) Metrics, convergence detection, trace.
        self.record_metrics(&m_current)?;

        self.iteration += 1;
        Ok(())
    }

    fn record_metrics(&mut self, m_before_events: &[f64]) -> Result<(), SimError> {
        let t = self.iteration;
        // Events may have changed the swarm this iteration; measure the
        // swarm as it stands at the end of the step.
        let events_fired = self.scenario.events.iter().any(|e| e.iteration == t);
        let m_current: Vec<f64> = if events_fired {
            self.swarm_moments().values().to_vec()
        } else {
            m_before_events.to_vec()
        };

        let est_err_max = self
            .robots
            .iter()
            .enumerate()
            .map(|(i, _)| norm2_diff(&self.current_estimate(i), &m_current))
            .fold(0.0f64, f64::max);

        let moment_err = self
            .target
            .as_ref()
            .map(|target| norm2_diff(&m_current, target.values()));

        let msre = match (&self.msre_eval, &self.target) {
            (Some(eval), Some(target)) => {
                Some(eval.msre_values(&m_current, target.values())?)
            }
            _ => None,
        };
        if let Some(v) = msre {
            self.msre_history.push(v);
        }

        // Convergence: estimation runs watch the worst estimate error;
        // control runs watch for an MSRE plateau.
        if self.converged_at.is_none() {
            let converged = match self.scenario.mode {
                Mode::EstimateOnly => est_err_max < self.scenario.convergence_threshold,
                _ => {
                    let w = PLATEAU_WINDOW as usize;
                    if self.msre_history.len() > w {
                        let cur = self.msre_history[self.msre_history.len() - 1];
                        let prev = self.msre_history[self.msre_history.len() - 1 - w];
                        cur.is_finite()
                            && (cur - prev).abs() / prev.max(1e-12) < PLATEAU_REL_CHANGE
                    } else {
                        false
                    }
                }
            };
            if converged {
                self.converged_at = Some(t);
                self.metrics.push(t, MetricKind::Converged, None, 1.0);
            }
        }

        if t % self.scenario.metric_every != 0 {
            return Ok(());
        }

        self.metrics.push(t, MetricKind::EstErrMax, None, est_err_max);
        if let Some(v) = moment_err {
            self.metrics.push(t, MetricKind::MomentErr, None, v);
        }
        if let Some(v) = msre {
            self.metrics.push(t, MetricKind::Msre, None, v);
        }
        self.metrics.push(
            t,
            MetricKind::StronglyConnected,
            None,
            if strongly_connected(&self.graph) { 1.0 } else { 0.0 },
        );

        if let Some(trace_id) = self.scenario.trace_robot {
            if let Some(idx) = self.robots.iter().position(|r| r.id == trace_id) {
                let estimate = self.current_estimate(idx);
                let reference = self
                    .target
                    .as_ref()
                    .map(|t| t.values().to_vec())
                    .unwrap_or(m_current);
                let err = norm2_diff(&estimate, &reference);
                self.metrics.trace.push(TraceRow { robot: trace_id, iteration: t, estimate, err });
            }
        }
        Ok(())
    }

    fn apply_event(&mut self, event: &Event) -> Result<(), SimError> {
        match &event.action {
            EventAction::Add(spec) => {
                let positions: Vec<Position> = match (&spec.positions, spec.count, &spec.region) {
                    (Some(list), _, _) => {
                        list.iter().map(|&[x, y]| Position::new(x, y)).collect()
                    }
                    (None, Some(count), Some(region)) => (0..count)
                        .map(|_| {
                            let r = region.radius * self.events_rng.random::<f64>().sqrt();
                            let a = self.events_rng.random_range(0.0..std::f64::consts::TAU);
                            Position::new(
                                region.center[0] + r * a.cos(),
                                region.center[1] + r * a.sin(),
                            )
                        })
                        .collect(),
                    _ => {
                        return Err(SimError::Scenario(
                            "add event needs positions, or count with region".into(),
                        ))
                    }
                };
                self.add_robots(&positions)?;
            }
            EventAction::Remove(spec) => {
                let ids: Vec<usize> = match (&spec.ids, spec.count) {
                    (Some(ids), _) => ids.clone(),
                    (None, Some(count)) => {
                        let mut ranked: Vec<(f64, usize)> = match &spec.region {
                            // Nearest to the region center go first.
                            Some(region) => self
                                .robots
                                .iter()
                                .map(|r| {
                                    let d = (r.position.x - region.center[0])
                                        .hypot(r.position.y - region.center[1]);
                                    (d, r.id)
                                })
                                .collect(),
                            // Without a region: highest ids (latest joiners).
                            None => self.robots.iter().map(|r| (-(r.id as f64), r.id)).collect(),
                        };
                        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                        ranked.into_iter().take(count).map(|(_, id)| id).collect()
                    }
                    _ => {
                        return Err(SimError::Scenario("remove event needs ids or count".into()))
                    }
                };
                self.remove_robots(&ids)?;
            }
        }
        Ok(())
    }

    /// Adds robots at the given positions. New robots start with zero
    /// estimator state and empty memory; self-healing re-converges the
    /// estimates to the new swarm mean. Returns the assigned ids.
    pub fn add_robots(&mut self, positions: &[Position]) -> Result<Vec<usize>, SimError> {
        if matches!(self.scenario.topology, TopologySpec::Edges(_)) {
            return Err(SimError::Scenario(
                "cannot add robots under an explicit edge-list topology".into(),
            ));
        }
        let pz = self.basis.kind() == BasisKind::PseudoZernike;
        let mut ids = Vec::with_capacity(positions.len());
        for &p in positions {
            if p.x.abs() > 1.0 || p.y.abs() > 1.0 {
                return Err(SimError::OutsideArena { x: p.x, y: p.y });
            }
            let mut position = p;
            if pz {
                clip_to_disk(&mut position);
            }
            let id = self.next_id;
            self.next_id += 1;
            self.robots.push(Robot { id, position });
            self.estimators.push(EstimatorState::new(
                self.basis.embedding_len(),
                self.gamma,
                self.horizon,
            ));
            ids.push(id);
        }
        self.graph = build_topology(&self.scenario.topology, &self.robots)?;
        Ok(ids)
    }

    /// Removes robots by id. Their in-flight broadcasts vanish with them;
    /// neighbors keep remembered messages until the forget horizon passes.
    pub fn remove_robots(&mut self, ids: &[usize]) -> Result<(), SimError> {
        if matches!(self.scenario.topology, TopologySpec::Edges(_)) {
            return Err(SimError::Scenario(
                "cannot remove robots under an explicit edge-list topology".into(),
            ));
        }
        for &id in ids {
            if !self.robots.iter().any(|r| r.id == id) {
                return Err(SimError::UnknownRobot(id));
            }
        }
        if ids.len() >= self.robots.len() {
            return Err(SimError::WouldEmptySwarm);
        }
        let doomed: std::collections::BTreeSet<usize> = ids.iter().copied().collect();
        let mut keep_robots = Vec::with_capacity(self.robots.len() - ids.len());
        let mut keep_estimators = Vec::with_capacity(self.robots.len() - ids.len());
        for (robot, est) in self.robots.drain(..).zip(self.estimators.drain(..)) {
            if doomed.contains(&robot.id) {
                self.broadcasts.remove(&robot.id);
                self.last_estimates.remove(&robot.id);
            } else {
                keep_robots.push(robot);
                keep_estimators.push(est);
            }
        }
        self.robots = keep_robots;
        self.estimators = keep_estimators;
        self.graph = build_topology(&self.scenario.topology, &self.robots)?;
        Ok(())
    }

    /// Runs until the iteration cap, stopping early in estimate-only mode
    /// once the convergence threshold holds. Control-mode runs continue to
    /// the cap (events may be scheduled late) while still recording the
    /// first convergence.
    pub fn run(&mut self) -> Result<RunOutcome, SimError> {
        while self.iteration < self.scenario.iterations {
            self.step()?;
            if self.scenario.mode == Mode::EstimateOnly && self.converged_at.is_some() {
                break;
            }
        }
        Ok(RunOutcome { converged_at: self.converged_at, iterations_run: self.iteration })
    }

    /// `id,x,y` CSV of the current robot positions.
    pub fn positions_to_csv(&self) -> String {
        let mut out = String::from("id,x,y\n");
        for r in &self.robots {
            out.push_str(&format!("{},{},{}\n", r.id, r.position.x, r.position.y));
        }
        out
    }
}

fn build_topology(spec: &TopologySpec, robots: &[Robot]) -> Result<Digraph, SimError> {
    match spec {
        TopologySpec::AllToAll => Ok(Digraph::all_to_all(robots.len())),
        TopologySpec::Radius(r) => {
            let positions: Vec<Position> = robots.iter().map(|r| r.position).collect();
            Ok(build_radius_graph(&positions, *r))
        }
        TopologySpec::Edges(edges) => {
            Digraph::from_edges(robots.len(), edges).map_err(SimError::Network)
        }
    }
}

fn sample_region(region: &InitRegion, rng: &mut ChaCha8Rng) -> Position {
    match region {
        InitRegion::Disk { radius } => {
            let r = radius * rng.random::<f64>().sqrt();
            let a = rng.random_range(0.0..std::f64::consts::TAU);
            Position::new(r * a.cos(), r * a.sin())
        }
        InitRegion::Square { half_extent } => Position::new(
            rng.random_range(-half_extent..*half_extent),
            rng.random_range(-half_extent..*half_extent),
        ),
    }
}

fn clip_to_disk(p: &mut Position) {
    let r = p.norm();
    if r > PZM_CLIP_RADIUS {
        *p *= PZM_CLIP_RADIUS / r;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::moments_of_points;

    fn estimation_scenario(n: usize, iterations: u64) -> Scenario {
        Scenario::from_json(&format!(
            r#"{{
                "robots": {n},
                "basis": "legendre",
                "order": 2,
                "mode": "estimate_only",
                "iterations": {iterations},
                "init": {{"square": {{"half_extent": 1.0}}}},
                "seed": 7
            }}"#
        ))
        .unwrap()
    }

    #[test]
    fn single_robot_estimates_exactly_after_first_step() {
        let mut scenario = estimation_scenario(1, 5);
        scenario.robots = Some(1);
        let mut sim = SwarmSim::with_target(scenario, None).unwrap();
        sim.step().unwrap();
        let est = sim.estimate_of(0).unwrap();
        let truth = sim.swarm_moments();
        for (a, b) in est.iter().zip(truth.values()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(sim.converged_at(), Some(0));
    }

    #[test]
    fn estimation_converges_to_central_mean() {
        let scenario = estimation_scenario(10, 10_000);
        let mut sim = SwarmSim::with_target(scenario, None).unwrap();
        let outcome = sim.run().unwrap();
        assert!(outcome.converged_at.is_some(), "estimation did not converge");
        let truth = moments_of_points(sim.basis(), &sim.positions()).unwrap();
        for robot in sim.robots() {
            let est = sim.estimate_of(robot.id).unwrap();
            let err = norm2_diff(&est, truth.values());
            assert!(err < 0.01, "robot {} error {err}", robot.id);
        }
    }

    #[test]
    fn estimate_only_robots_never_move() {
        let scenario = estimation_scenario(6, 50);
        let mut sim = SwarmSim::with_target(scenario, None).unwrap();
        let before = sim.positions();
        for _ in 0..50 {
            sim.step().unwrap();
        }
        assert_eq!(before, sim.positions());
    }

    #[test]
    fn deterministic_given_seed() {
        let build = || {
            let mut scenario = estimation_scenario(8, 300);
            scenario.drop_rate = 0.3;
            scenario.trace_robot = Some(3);
            SwarmSim::with_target(scenario, None).unwrap()
        };
        let mut a = build();
        let mut b = build();
        a.run().unwrap();
        b.run().unwrap();
        assert_eq!(a.metrics().to_csv(), b.metrics().to_csv());
        assert_eq!(a.metrics().trace_to_csv(), b.metrics().trace_to_csv());
        assert_eq!(a.positions_to_csv(), b.positions_to_csv());
    }

    #[test]
    fn control_only_at_target_stays_put() {
        // Robots already achieving the target moments: zero error, zero
        // velocity, positions fixed forever.
        let mut scenario = estimation_scenario(4, 20);
        scenario.mode = Mode::ControlOnlyPerfect;
        scenario.control.collision = false;
        scenario.initial_positions = Some(vec![
            [0.4, 0.0],
            [-0.4, 0.0],
            [0.0, 0.4],
            [0.0, -0.4],
        ]);
        scenario.robots = None;
        let basis = MomentBasis::legendre(2).unwrap();
        let target = moments_of_points(
            &basis,
            &[
                Position::new(0.4, 0.0),
                Position::new(-0.4, 0.0),
                Position::new(0.0, 0.4),
                Position::new(0.0, -0.4),
            ],
        )
        .unwrap();
        let mut sim = SwarmSim::with_target(scenario, Some(target)).unwrap();
        let before = sim.positions();
        for _ in 0..20 {
            sim.step().unwrap();
        }
        assert_eq!(before, sim.positions());
    }

    #[test]
    fn add_and_remove_round_trip_restores_count() {
        let scenario = estimation_scenario(5, 100);
        let mut sim = SwarmSim::with_target(scenario, None).unwrap();
        sim.step().unwrap();
        let ids = sim.add_robots(&[Position::new(0.5, 0.5)]).unwrap();
        assert_eq!(sim.robots().len(), 6);
        sim.remove_robots(&ids).unwrap();
        assert_eq!(sim.robots().len(), 5);
        assert!(matches!(
            sim.remove_robots(&[0, 1, 2, 3, 4]),
            Err(SimError::WouldEmptySwarm)
        ));
        assert!(matches!(sim.remove_robots(&[99]), Err(SimError::UnknownRobot(99))));
    }

    #[test]
    fn add_rejects_out_of_arena_positions() {
        let scenario = estimation_scenario(3, 10);
        let mut sim = SwarmSim::with_target(scenario, None).unwrap();
        assert!(matches!(
            sim.add_robots(&[Position::new(1.5, 0.0)]),
            Err(SimError::OutsideArena { .. })
        ));
    }

    #[test]
    fn churn_reconverges_to_new_mean() {
        let mut scenario = estimation_scenario(6, 4000);
        scenario.events = vec![
            Event {
                iteration: 500,
                action: EventAction::Remove(RemoveSpec { count: Some(2), ..Default::default() }),
            },
            Event {
                iteration: 1000,
                action: EventAction::Add(AddSpec {
                    count: Some(3),
                    region: Some(DiskRegion { center: [0.5, -0.5], radius: 0.2 }),
                    ..Default::default()
                }),
            },
        ];
        let mut sim = SwarmSim::with_target(scenario, None).unwrap();
        for _ in 0..4000 {
            sim.step().unwrap();
        }
        assert_eq!(sim.robots().len(), 7);
        let truth = moments_of_points(sim.basis(), &sim.positions()).unwrap();
        for robot in sim.robots() {
            let est = sim.estimate_of(robot.id).unwrap();
            let err = norm2_diff(&est, truth.values());
            assert!(err < 1e-6, "robot {} error {err} after churn", robot.id);
        }
    }

    #[test]
    fn removed_robot_memory_ages_out() {
        let mut scenario = estimation_scenario(4, 400);
        scenario.forget_horizon = Some(10);
        let mut sim = SwarmSim::with_target(scenario, None).unwrap();
        // Let memory fill, then remove robot 0 directly.
        for _ in 0..5 {
            sim.step().unwrap();
        }
        sim.remove_robots(&[0]).unwrap();
        let has_zero = |sim: &SwarmSim| {
            sim.robots()
                .iter()
                .any(|r| sim.estimator_of(r.id).unwrap().memory_ages().contains_key(&0))
        };
        assert!(has_zero(&sim), "memory of removed robot should linger");
        for _ in 0..12 {
            sim.step().unwrap();
        }
        assert!(!has_zero(&sim), "memory should age out after the horizon");
    }

    #[test]
    fn pzm_positions_clipped_to_disk() {
        let mut scenario = estimation_scenario(4, 10);
        scenario.basis = BasisKind::PseudoZernike;
        scenario.order = 2;
        scenario.init = InitRegion::Square { half_extent: 1.0 };
        let sim = SwarmSim::with_target(scenario, None).unwrap();
        for p in sim.positions() {
            assert!(p.norm() <= PZM_CLIP_RADIUS + 1e-12);
        }
    }

    #[test]
    fn non_strongly_connected_topology_still_runs() {
        let mut scenario = estimation_scenario(3, 50);
        scenario.topology = TopologySpec::Edges(vec![(0, 1), (1, 0)]);
        let mut sim = SwarmSim::with_target(scenario, None).unwrap();
        sim.run().unwrap();
        let connected = sim.metrics().series(MetricKind::StronglyConnected);
        assert!(connected.iter().all(|&(_, v)| v == 0.0));
    }
}
