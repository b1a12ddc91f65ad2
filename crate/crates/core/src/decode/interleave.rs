use nalgebra::DVector;

use crate::error::{invalid, Result};
use crate::measureop::MeasurementMatrix;

/// Largest precision for which `2p` binary digits fit a double exactly.
pub const MAX_PRECISION: u32 = 26;

fn check_precision(p: u32) -> Result<()> {
    if p == 0 || p > MAX_PRECISION {
        return Err(invalid(format!("precision must be in 1..={MAX_PRECISION}, got {p}")));
    }
    Ok(())
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..1.0).contains(&v) {
        return Err(invalid(format!("{name} = {v} is outside [0, 1)")));
    }
    Ok(())
}

/// First `p` binary digits of `v ∈ [0,1)` as an integer.
fn digits(v: f64, p: u32) -> u64 {
    (v * (1u64 << p) as f64).floor() as u64
}

/// Spreads the low 32 bits of `v` onto even bit positions.
fn spread(mut v: u64) -> u64 {
    v &= 0xffff_ffff;
    v = (v | (v << 16)) & 0x0000_ffff_0000_ffff;
    v = (v | (v << 8)) & 0x00ff_00ff_00ff_00ff;
    v = (v | (v << 4)) & 0x0f0f_0f0f_0f0f_0f0f;
    v = (v | (v << 2)) & 0x3333_3333_3333_3333;
    (v | (v << 1)) & 0x5555_5555_5555_5555
}

fn gather(mut v: u64) -> u64 {
    v &= 0x5555_5555_5555_5555;
    v = (v | (v >> 1)) & 0x3333_3333_3333_3333;
    v = (v | (v >> 2)) & 0x0f0f_0f0f_0f0f_0f0f;
    v = (v | (v >> 4)) & 0x00ff_00ff_00ff_00ff;
    v = (v | (v >> 8)) & 0x0000_ffff_0000_ffff;
    (v | (v >> 16)) & 0xffff_ffff
}

/// Interleaves the first `p` binary digits of `x` and `y`:
/// `z = Σ x_i 2^{-(2i-1)} + y_i 2^{-2i}`.
///
/// ```
/// assert_eq!(alc::interleave_compress(0.5, 0.25, 2).unwrap(), 0.5625);
/// ```
pub fn interleave_compress(x: f64, y: f64, p: u32) -> Result<f64> {
    check_precision(p)?;
    check_unit("x", x)?;
    check_unit("y", y)?;
    let bits = (spread(digits(x, p)) << 1) | spread(digits(y, p));
    Ok(bits as f64 / (1u64 << (2 * p)) as f64)
}

/// Inverse of [`interleave_compress`] on the `p`-digit grid. Digits of `z`
/// beyond position `2p` are dropped.
pub fn deinterleave(z: f64, p: u32) -> Result<(f64, f64)> {
    check_precision(p)?;
    check_unit("z", z)?;
    let bits = digits(z, 2 * p);
    let scale = (1u64 << p) as f64;
    Ok((gather(bits >> 1) as f64 / scale, gather(bits) as f64 / scale))
}

/// The point `(x, y, κ(x, y))` on the graph of the interleaving map, together
/// with the single-row measurement `f(v) = v₃` that is one-to-one on it.
pub fn graph_point(x: f64, y: f64, p: u32) -> Result<(DVector<f64>, MeasurementMatrix)> {
    let z = interleave_compress(x, y, p)?;
    let f = MeasurementMatrix::from_row_slice(1, 3, &[0.0, 0.0, 1.0])?;
    Ok((DVector::from_vec(vec![x, y, z]), f))
}
