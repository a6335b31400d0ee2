// Scratch: packet-loss convergence behavior (deleted before commit).
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swarm_moments::estimator::{estimator_input, EstimatorState, Message};
use swarm_moments::moments::{moments_of_points, phi, MomentBasis};
use swarm_moments::network::{Digraph, PacketLossModel};
use swarm_moments::numeric::norm2_diff;
use swarm_moments::Position;

fn main() {
    let basis = MomentBasis::legendre(8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let n = 50;
    let positions: Vec<Position> = (0..n)
        .map(|_| Position::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let inputs: Vec<Vec<f64>> = positions
        .iter()
        .map(|&s| estimator_input(&phi(&basis, s).unwrap()))
        .collect();
    let oracle = moments_of_points(&basis, &positions).unwrap();
    let g = Digraph::all_to_all(n);

    for (drop, horizon, cap) in [
        (0.3, 75u32, 2_000usize),
        (0.3, 0, 500_000),
        (0.05, 0, 500_000),
        (0.01, 0, 500_000),
    ] {
        let mut loss = PacketLossModel::new(drop, ChaCha8Rng::seed_from_u64(1234)).unwrap();
        let dim = inputs[0].len() - 1;
        let mut states: Vec<EstimatorState> =
            (0..n).map(|_| EstimatorState::new(dim, 1.0 / n as f64, horizon)).collect();
        let mut broadcasts: Vec<Vec<f64>> = states.iter().map(|s| s.w().to_vec()).collect();
        let mut first_cross = None;
        let mut min_worst = f64::INFINITY;
        let mut min_single = f64::INFINITY;
        for t in 0..cap {
            let delivered = loss.sample_delivery(&g);
            let mut inbox: Vec<Vec<Message>> = vec![Vec::new(); n];
            if t > 0 {
                for (src, dst) in delivered {
                    inbox[dst].push(Message { sender: src, payload: broadcasts[src].clone() });
                }
            }
            for (i, state) in states.iter_mut().enumerate() {
                state.step(&inputs[i], &inbox[i], g.out_degree(i)).unwrap();
            }
            for (b, s) in broadcasts.iter_mut().zip(&states) {
                b.copy_from_slice(s.w());
            }
            let errs: Vec<f64> = states
                .iter()
                .map(|s| match s.estimate() {
                    Some(est) => norm2_diff(&est, oracle.values()),
                    None => f64::INFINITY,
                })
                .collect();
            let worst = errs.iter().cloned().fold(0.0f64, f64::max);
            min_worst = min_worst.min(worst);
            min_single = min_single.min(errs[15.min(n - 1)]);
            if worst < 0.01 && first_cross.is_none() {
                first_cross = Some(t);
                break;
            }
        }
        println!(
            "drop={drop} h={horizon} first_cross={first_cross:?} min_worst={min_worst:.3e} min_single={min_single:.3e}"
        );
    }
}
