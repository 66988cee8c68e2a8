use super::householder::{householder_from_target, HouseholderReflection};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, DenseMatrix};

/// Product `U_1 U_2 ... U_k` of Householder reflections.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformChain {
    n: usize,
    reflections: Vec<HouseholderReflection>,
}

impl TransformChain {
    pub fn identity(n: usize) -> Self {
        Self { n, reflections: Vec::new() }
    }

    pub fn from_reflections(n: usize, reflections: Vec<HouseholderReflection>) -> Result<Self> {
        for r in &reflections {
            check_dim(n, r.dim())?;
        }
        Ok(Self { n, reflections })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.reflections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reflections.is_empty()
    }

    pub fn reflections(&self) -> &[HouseholderReflection] {
        &self.reflections
    }

    /// Appends `r` on the right: `U <- U r`.
    pub fn push(&mut self, r: HouseholderReflection) -> Result<()> {
        check_dim(self.n, r.dim())?;
        self.reflections.push(r);
        Ok(())
    }

    /// `x <- U x`; the rightmost factor acts first.
    #[inline]
    pub fn apply_in_place(&self, x: &mut [f64]) {
        for r in self.reflections.iter().rev() {
            r.apply_in_place(x);
        }
    }

    /// `x <- Uᵀ x`.
    #[inline]
    pub fn apply_transpose_in_place(&self, x: &mut [f64]) {
        for r in &self.reflections {
            r.apply_in_place(x);
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, x.len())?;
        let mut out = x.to_vec();
        self.apply_in_place(&mut out);
        Ok(out)
    }

    pub fn apply_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, x.len())?;
        let mut out = x.to_vec();
        self.apply_transpose_in_place(&mut out);
        Ok(out)
    }

    /// Dense `n × n` product, for inspection and tests.
    pub fn to_matrix(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n, self.n);
        let mut col = vec![0.0; self.n];
        for j in 0..self.n {
            col.iter_mut().for_each(|c| *c = 0.0);
            col[j] = 1.0;
            self.apply_in_place(&mut col);
            for (i, &c) in col.iter().enumerate() {
                m[(i, j)] = c;
            }
        }
        m
    }
}

/// Tolerance on the Gram matrix of supplied columns.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Chain `U_1 ... U_k` whose first `k` columns equal the supplied
/// orthonormal columns. Reflection `j` acts on coordinates `j..n` only, so
/// applying the chain costs `O(nk)`.
pub fn complete_first_k_columns(columns: &[Vec<f64>]) -> Result<TransformChain> {
    let Some(first) = columns.first() else {
        return Err(Error::InvalidParameter("no columns supplied".into()));
    };
    let n = first.len();
    if columns.len() > n {
        return Err(Error::InvalidParameter(format!("{} columns exceed dimension {n}", columns.len())));
    }
    for c in columns {
        check_dim(n, c.len())?;
    }
    let mut deviation: f64 = 0.0;
    for (i, ci) in columns.iter().enumerate() {
        for (j, cj) in columns.iter().enumerate().take(i + 1) {
            let target = if i == j { 1.0 } else { 0.0 };
            deviation = deviation.max((dot(ci, cj) - target).abs());
        }
    }
    if deviation > ORTHONORMAL_TOL {
        return Err(Error::NotOrthonormal { deviation });
    }

    let mut chain = TransformChain::identity(n);
    for (j, column) in columns.iter().enumerate() {
        // (U_1 ... U_j)ᵀ û_{j+1} has (numerically) zero leading j entries
        let mut w = column.clone();
        chain.apply_transpose_in_place(&mut w);
        w[..j].iter_mut().for_each(|x| *x = 0.0);
        chain.push(householder_from_target(&w, j)?)?;
    }
    Ok(chain)
}
