//! Small-ε expansions of θ_max and of the capacity, checked against the
//! optimizer.

use constrained_erasure::asymptotics::{capacity_taylor, theta_max_taylor};
use constrained_erasure::capacity_opt::maximize_theta;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let theta = theta_max_taylor(4)?;
    let cap = capacity_taylor(4)?;
    println!("θ_max coefficients: {:.6?}", theta.coefficients);
    println!("capacity coefficients (bits): {:.6?}", cap.coefficients_bits());

    for eps in [0.01, 0.05, 0.1, 0.2] {
        let p = maximize_theta(eps, 1e-12)?;
        println!(
            "ε = {eps:<4}: θ error {:.1e}, capacity error {:.1e} nats",
            (theta.eval(eps) - p.theta_star).abs(),
            (cap.eval(eps) - p.capacity).abs()
        );
    }
    Ok(())
}
