use std::f64::consts::LN_2;

use crate::error::{Error, Result};

/// `ln cosh x` without overflow.
pub fn ln_cosh(x: f64) -> f64 {
    let x = x.abs();
    x + (-2.0 * x).exp().ln_1p() - LN_2
}

/// `ln sinh x` for `x > 0`, without overflow or loss for small `x`.
pub fn ln_sinh(x: f64) -> f64 {
    x + (-(-2.0 * x).exp_m1()).ln() - LN_2
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln sinh(A/2)` for the side `A` opposite `a`, from
/// `2 sinh^2(A/2) = (cosh a + cosh(b - c)) / (sinh b sinh c)`.
fn ln_sinh_half_opposite(a: f64, b: f64, c: f64) -> f64 {
    let numerator = log_add_exp(ln_cosh(a), ln_cosh(b - c));
    0.5 * (numerator - LN_2 - ln_sinh(b) - ln_sinh(c))
}

fn asinh_exp(l: f64) -> f64 {
    if l > 0.0 {
        l + (1.0 + (-2.0 * l).exp()).sqrt().ln_1p()
    } else {
        l.exp().asinh()
    }
}

/// Side opposite `a` in the right-angled hexagon with alternating sides
/// `a, b, c`.
pub fn opposite_side(a: f64, b: f64, c: f64) -> f64 {
    2.0 * asinh_exp(ln_sinh_half_opposite(a, b, c))
}

/// Natural log of [`opposite_side`], accurate when the side is far below
/// the smallest normal float's scale.
pub fn log_opposite_side(a: f64, b: f64, c: f64) -> f64 {
    let l = ln_sinh_half_opposite(a, b, c);
    if l < -700.0 {
        LN_2 + l
    } else {
        (2.0 * asinh_exp(l)).ln()
    }
}

/// The three sides opposite `a`, `b` and `c`.
pub fn solve_hexagon(a: f64, b: f64, c: f64) -> Result<(f64, f64, f64)> {
    if [a, b, c].iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
        return Err(Error::HexagonInput(a, b, c));
    }
    let out = (
        opposite_side(a, b, c),
        opposite_side(b, c, a),
        opposite_side(c, a, b),
    );
    if [out.0, out.1, out.2]
        .iter()
        .any(|x| !(*x > 0.0) || !x.is_finite())
    {
        return Err(Error::Numerical(format!(
            "hexagon ({a}, {b}, {c}) has a degenerate side"
        )));
    }
    Ok(out)
}
