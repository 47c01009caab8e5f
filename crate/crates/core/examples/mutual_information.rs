//! Three ways to get the information rate of the (1,inf)-RLL Parry input
//! over a binary erasure channel, and one Markov-erasure case.

use constrained_erasure::erasure::ErasureProcess;
use constrained_erasure::markov::RllThetaChain;
use constrained_erasure::mi_rate::{mi_rate_finite_n, series_first_order};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let parry = RllThetaChain::parry();
    let chain = parry.to_markov();

    for eps in [0.05, 0.2, 0.5] {
        let e = ErasureProcess::iid(eps)?;
        let series = series_first_order(&parry, &e, 1e-12)?;
        println!("ε = {eps}: series {:.10} bits ({} terms)", series.value_bits(), series.truncation);
        for n in [4, 8, 16] {
            let r = mi_rate_finite_n(&chain, &e, n)?;
            println!("    window n = {n:2}: {:.10} bits, tail ≤ {:.1e}", r.value_bits(), r.tail_bound_bits());
        }
    }

    // Bursty erasures with the same 20% erasure rate.
    let bursty = ErasureProcess::markov_from_stay(0.95, 0.2)?;
    let r = mi_rate_finite_n(&chain, &bursty, 20)?;
    println!(
        "bursty erasures (rate {:.2}): {:.8} bits, tail ≤ {:.1e}",
        bursty.erasure_rate(),
        r.value_bits(),
        r.tail_bound_bits()
    );
    Ok(())
}
