//! First-order Markov capacity of the (1,inf)-RLL erasure channel against
//! the erasure rate, with the optimal θ.

use constrained_erasure::capacity_opt::capacity_curve;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid: Vec<f64> = (0..10).map(|i| i as f64 / 10.0).collect();
    let curve = capacity_curve(&grid, 1e-10)?;
    println!("{:>5} {:>10} {:>12} {:>12}", "ε", "θ*", "C (bits)", "(1-ε)C(0)");
    let c0 = curve.points[0].capacity_bits();
    for p in &curve.points {
        println!(
            "{:>5.2} {:>10.6} {:>12.6} {:>12.6}",
            p.eps,
            p.theta_star,
            p.capacity_bits(),
            (1.0 - p.eps) * c0
        );
    }
    Ok(())
}
