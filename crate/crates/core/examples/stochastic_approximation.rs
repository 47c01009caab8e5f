//! Robbins-Monro search for the optimal θ, with the series gradient and
//! with a simulated one.

use constrained_erasure::capacity_opt::{
    maximize_theta, stochastic_approximation, GradientEstimator, SaConfig,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let eps = 0.3;
    let target = maximize_theta(eps, 1e-10)?;
    println!("golden section: θ* = {:.6}", target.theta_star);

    for (estimator, steps) in [(GradientEstimator::Series, 5_000), (GradientEstimator::MonteCarlo, 800)] {
        let cfg = SaConfig {
            steps,
            seed: 11,
            estimator,
            ..SaConfig::default()
        };
        let run = stochastic_approximation(eps, &cfg)?;
        let checkpoints: Vec<String> = [0, steps / 100, steps / 10, steps]
            .iter()
            .map(|&n| format!("θ_{n} = {:.4}", run.trajectory[n]))
            .collect();
        println!("{estimator:?}: {}", checkpoints.join(", "));
        println!(
            "    final error {:.2e}, capacity {:.6} bits",
            (run.point.theta_star - target.theta_star).abs(),
            run.point.capacity_bits()
        );
    }
    Ok(())
}
