use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sobol::QmcPoint;
use crate::error::{check_dim, Error, Result};

/// Cranley–Patterson rotation vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftVector {
    pub coords: Vec<f64>,
}

impl ShiftVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = coords.iter().find(|c| !(0.0..1.0).contains(*c)) {
            return Err(Error::OutOfDomain(bad));
        }
        Ok(Self { coords })
    }

    pub fn zero(dim: usize) -> Self {
        Self { coords: vec![0.0; dim] }
    }

    /// Shift for one batch. ChaCha is keyed by `seed` and the batch index
    /// selects the stream, so every batch is reproducible on its own.
    pub fn from_seed(seed: u64, batch: u64, dim: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(batch);
        Self {
            coords: (0..dim).map(|_| rng.random::<f64>()).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// The shift that undoes this one.
    pub fn inverse(&self) -> Self {
        Self {
            coords: self
                .coords
                .iter()
                .map(|&s| if s == 0.0 { 0.0 } else { 1.0 - s })
                .collect(),
        }
    }
}

#[inline]
pub(crate) fn shift_coord(p: f64, s: f64) -> f64 {
    let y = p + s;
    if y >= 1.0 {
        y - 1.0
    } else {
        y
    }
}

/// Coordinatewise `(p + s) mod 1`.
pub fn apply_shift(p: &QmcPoint, s: &ShiftVector) -> Result<QmcPoint> {
    check_dim(p.dim(), s.dim())?;
    Ok(QmcPoint {
        coords: p
            .coords
            .iter()
            .zip(&s.coords)
            .map(|(&p, &s)| shift_coord(p, s))
            .collect(),
    })
}
