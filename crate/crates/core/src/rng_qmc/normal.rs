use statrs::function::erf::{erfc, erfc_inv};

use super::shift::{shift_coord, ShiftVector};
use super::sobol::{to_unit, Sobol};
use crate::error::{check_dim, Error, Result};

/// Smallest uniform passed to the inverse CDF.
pub const UNIFORM_FLOOR: f64 = 1.0 / 9_007_199_254_740_992.0; // 2^-53
/// Largest uniform passed to the inverse CDF.
pub const UNIFORM_CEIL: f64 = 1.0 - UNIFORM_FLOOR;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal distribution function.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile.
pub fn inv_normal_cdf(u: f64) -> Result<f64> {
    if u > 0.0 && u < 1.0 {
        Ok(inv_normal_cdf_unchecked(u))
    } else {
        Err(Error::OutOfDomain(u))
    }
}

#[inline]
pub(crate) fn inv_normal_cdf_unchecked(u: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * u)
}

#[inline]
pub(crate) fn clamp_uniform(u: f64) -> f64 {
    u.clamp(UNIFORM_FLOOR, UNIFORM_CEIL)
}

/// A vector of independent standard normal draws.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalVector {
    pub values: Vec<f64>,
}

impl NormalVector {
    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Maps shifted integer Sobol coordinates to normals in place.
#[inline]
pub(crate) fn normals_from_bits(bits: &[u32], shift: &[f64], out: &mut [f64]) {
    for ((o, &b), &s) in out.iter_mut().zip(bits).zip(shift) {
        *o = inv_normal_cdf_unchecked(clamp_uniform(shift_coord(to_unit(b), s)));
    }
}

/// Shifted Sobol point `index` mapped through the normal quantile.
pub fn normal_vector(index: u32, shift: &ShiftVector, dim: usize) -> Result<NormalVector> {
    check_dim(dim, shift.dim())?;
    let sobol = Sobol::new(dim)?;
    let mut bits = vec![0u32; dim];
    sobol.point_bits(index, &mut bits);
    let mut values = vec![0.0; dim];
    normals_from_bits(&bits, &shift.coords, &mut values);
    Ok(NormalVector { values })
}
