//! Scalar search routines for unimodal objectives and monotone roots.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const MAX_ITER: usize = 10_000;

/// Maximizer of a unimodal `f` on `[a, b]`, stopping when the bracket is no
/// wider than `width`. Returns `(x, f(x))` at the best point seen.
pub fn golden_section_max<F>(mut f: F, mut a: f64, mut b: f64, width: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut iter = 0;
    while b - a > width {
        iter += 1;
        if iter > MAX_ITER {
            return Err(Error::NoConvergence("golden-section search", MAX_ITER));
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}

/// Root of `f` on `[a, b]` by bisection, assuming `f(a)` and `f(b)` have
/// opposite signs (a zero endpoint is returned as is). Stops once the
/// bracket is no wider than `width` and returns its midpoint.
pub fn bisect<F>(mut f: F, mut a: f64, mut b: f64, width: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let fa = f(a)?;
    if fa == 0.0 {
        return Ok(a);
    }
    let fb = f(b)?;
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Precondition(format!(
            "no sign change on [{a}, {b}]: f(a) = {fa}, f(b) = {fb}"
        )));
    }
    let mut iter = 0;
    while b - a > width {
        iter += 1;
        if iter > MAX_ITER {
            return Err(Error::NoConvergence("bisection", MAX_ITER));
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, fx) = golden_section_max(|x| Ok(-(x - 0.3) * (x - 0.3)), 0.0, 1.0, 1e-9).unwrap();
        assert!((x - 0.3).abs() < 1e-8);
        assert!(fx <= 0.0);
    }

    #[test]
    fn golden_section_handles_endpoint_maximum() {
        let (x, _) = golden_section_max(Ok, 0.0, 1.0, 1e-10).unwrap();
        assert!(x > 1.0 - 1e-9);
    }

    #[test]
    fn bisection_root() {
        let r = bisect(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
        assert!(bisect(|x| Ok(x * x + 1.0), 0.0, 2.0, 1e-6).is_err());
    }
}
