//! Householder reflections, reflection chains, and Brownian path
//! constructions.

mod basket;
mod chain;
mod construction;
mod householder;

pub use basket::{basket_construct, BasketConstruction, BasketCovSpec, BasketForward, BasketPca};
pub use chain::{complete_first_k_columns, TransformChain, ORTHONORMAL_TOL};
pub use construction::{
    brownian_covariance, construct_path, pca_eigenpairs, ConstructionKind, PathConstruction,
};
pub use householder::{apply_householder, householder_from_target, HouseholderReflection};
