//! Noiseless capacities of a few run-length-limited constraints.

use constrained_erasure::constraint::ForbiddenWordSet;
use constrained_erasure::info::to_bits;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:<12} {:>6} {:>10} {:>12}", "constraint", "order", "vertices", "C (bits)");
    for name in ["rll(1,inf)", "rll(1,3)", "rll(2,7)", "rll(2,inf)", "full(3)"] {
        let g = ForbiddenWordSet::preset(name)?.compile()?;
        println!(
            "{:<12} {:>6} {:>10} {:>12.6}",
            name,
            g.order(),
            g.vertices().len(),
            to_bits(g.noiseless_capacity()?)
        );
    }

    // A constraint built from raw forbidden words: no "33" and no "31".
    let custom = ForbiddenWordSet::from_strings(3, &["33", "31"])?.compile()?;
    println!("custom ternary: {:.6} bits", to_bits(custom.noiseless_capacity()?));
    Ok(())
}
