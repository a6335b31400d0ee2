//! Per-iteration metric logging.

/// Swarm- and robot-level metrics recorded each logging step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    /// Worst per-robot estimate error against the current swarm moments.
    EstErrMax,
    /// 2-norm of `M(s) - M*` (needs a target).
    MomentErr,
    /// Mean-square reconstruction error of `M(s)` against the target.
    Msre,
    /// 1.0 at the iteration convergence was first detected.
    Converged,
    /// 1.0 if the communication graph is strongly connected.
    StronglyConnected,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::EstErrMax => "est_err_max",
            MetricKind::MomentErr => "moment_err",
            MetricKind::Msre => "msre",
            MetricKind::Converged => "converged",
            MetricKind::StronglyConnected => "strongly_connected",
        }
    }
}

#[derive(Debug, Clone)]
pub struct MetricRow {
    pub iteration: u64,
    pub kind: MetricKind,
    /// Robot id for per-robot metrics, empty for swarm-level ones.
    pub robot: Option<usize>,
    pub value: f64,
}

/// One designated robot's estimate, mirrored each logging step.
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub robot: usize,
    pub iteration: u64,
    pub estimate: Vec<f64>,
    /// `||Mhat - M*||_2` against the target when one exists, otherwise
    /// against the current swarm moments.
    pub err: f64,
}

#[derive(Debug, Clone, Default)]
pub struct MetricLog {
    pub rows: Vec<MetricRow>,
    pub trace: Vec<TraceRow>,
}

impl MetricLog {
    pub fn push(&mut self, iteration: u64, kind: MetricKind, robot: Option<usize>, value: f64) {
        self.rows.push(MetricRow { iteration, kind, robot, value });
    }

    /// Values of one swarm-level metric in iteration order.
    pub fn series(&self, kind: MetricKind) -> Vec<(u64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.kind == kind)
            .map(|r| (r.iteration, r.value))
            .collect()
    }

    /// `iteration,metric,robot_id,value` CSV (robot_id empty for
    /// swarm-level rows).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,metric,robot_id,value\n");
        for row in &self.rows {
            let robot = row.robot.map(|r| r.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.iteration,
                row.kind.name(),
                robot,
                row.value
            ));
        }
        out
    }

    /// Trace CSV: `robot_id,iteration,mhat_0,...,mhat_{m-1},err`.
    pub fn trace_to_csv(&self) -> String {
        let Some(first) = self.trace.first() else {
            return String::from("robot_id,iteration,err\n");
        };
        let mut out = String::from("robot_id,iteration");
        for i in 0..first.estimate.len() {
            out.push_str(&format!(",mhat_{i}"));
        }
        out.push_str(",err\n");
        for row in &self.trace {
            out.push_str(&format!("{},{}", row.robot, row.iteration));
            for v in &row.estimate {
                out.push_str(&format!(",{v}"));
            }
            out.push_str(&format!(",{}\n", row.err));
        }
        out
    }
}
