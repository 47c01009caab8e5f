//! Feedback capacity beside the first-order capacity without feedback.

use constrained_erasure::asymptotics::capacity_taylor;
use constrained_erasure::feedback::{feedback_asymptotics, feedback_gain_curve};
use constrained_erasure::info::to_bits;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (_, fb_slope) = feedback_asymptotics();
    let slope = capacity_taylor(1)?.coefficients[1];
    println!(
        "slopes at ε = 0: with feedback {:.5} bits, without {:.5} bits",
        to_bits(fb_slope),
        to_bits(slope)
    );

    let grid: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
    println!("{:>5} {:>8} {:>10} {:>10} {:>10}", "ε", "p*", "C_FB", "C1", "gap");
    for row in feedback_gain_curve(&grid, 1e-10)? {
        println!(
            "{:>5.2} {:>8.5} {:>10.6} {:>10.6} {:>10.2e}",
            row.eps,
            row.p_star,
            to_bits(row.c_fb),
            to_bits(row.c1),
            to_bits(row.gap)
        );
    }
    Ok(())
}
