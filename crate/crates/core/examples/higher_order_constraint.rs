//! Information rate of the max-entropy input on the (1,3)-RLL constraint,
//! whose Parry chain has order 3.

use constrained_erasure::asymptotics::linear_coefficients;
use constrained_erasure::constraint::ForbiddenWordSet;
use constrained_erasure::erasure::ErasureProcess;
use constrained_erasure::info::to_bits;
use constrained_erasure::mi_rate::{mi_rate_finite_n, series_mth_order};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = ForbiddenWordSet::preset("rll(1,3)")?.compile()?;
    let parry = g.parry_chain()?;
    let (c0, c1) = linear_coefficients(&g)?;
    println!(
        "order {}, {} states, C(S,0) = {:.6} bits, slope {:.6} bits",
        parry.order(),
        parry.states().len(),
        to_bits(c0),
        to_bits(c1)
    );

    for eps in [0.02, 0.1] {
        let e = ErasureProcess::iid(eps)?;
        let s = series_mth_order(&parry, &e, 12)?;
        let w = mi_rate_finite_n(&parry, &e, 16)?;
        println!(
            "ε = {eps}: series {:.8} (tail ≤ {:.1e}), window {:.8} (tail ≤ {:.1e}), linear {:.8}",
            s.value_bits(),
            s.tail_bound_bits(),
            w.value_bits(),
            w.tail_bound_bits(),
            to_bits(c0 + c1 * eps)
        );
    }
    Ok(())
}
