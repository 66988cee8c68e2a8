//! Randomly shifted Sobol points and their standard-normal images.

mod normal;
mod shift;
mod sobol;

pub use normal::{
    inv_normal_cdf, norm_cdf, norm_pdf, normal_vector, NormalVector, UNIFORM_CEIL, UNIFORM_FLOOR,
};
pub(crate) use normal::normals_from_bits;
pub use shift::{apply_shift, ShiftVector};
pub use sobol::{
    max_dimension, parse_direction_numbers, sobol_point, GrayCodePoints, PrimitiveEntry, QmcPoint,
    Sobol, BITS,
};
