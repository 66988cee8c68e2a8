use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, DenseMatrix};

/// `I - 2 v vᵀ / vᵀv`, with `v` supported on coordinates `offset..n`.
///
/// A zero `v` is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct HouseholderReflection {
    n: usize,
    offset: usize,
    v: Vec<f64>,
    beta: f64,
}

impl HouseholderReflection {
    pub fn identity(n: usize) -> Self {
        Self { n, offset: n, v: Vec::new(), beta: 0.0 }
    }

    /// Reflection in `R^n` with Householder vector `v` on the trailing
    /// `n - offset` coordinates.
    pub fn new(n: usize, offset: usize, v: Vec<f64>) -> Result<Self> {
        if offset > n {
            return Err(Error::InvalidParameter(format!("offset {offset} exceeds dimension {n}")));
        }
        check_dim(n - offset, v.len())?;
        let vtv = dot(&v, &v);
        if vtv == 0.0 {
            return Ok(Self::identity(n));
        }
        Ok(Self { n, offset, v, beta: 2.0 / vtv })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// First coordinate the reflection acts on.
    pub fn offset(&self) -> usize {
        self.offset
    }

    /// Householder vector restricted to coordinates `offset..n`.
    pub fn vector(&self) -> &[f64] {
        &self.v
    }

    pub fn is_identity(&self) -> bool {
        self.beta == 0.0
    }

    /// Reflects `x` in place: two passes over the trailing coordinates.
    #[inline]
    pub fn apply_in_place(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        if self.beta == 0.0 {
            return;
        }
        let tail = &mut x[self.offset..];
        let s = self.beta * dot(&self.v, tail);
        for (xi, &vi) in tail.iter_mut().zip(&self.v) {
            *xi -= s * vi;
        }
    }

    pub fn to_matrix(&self) -> DenseMatrix {
        let mut m = DenseMatrix::identity(self.n);
        for (i, &vi) in self.v.iter().enumerate() {
            for (j, &vj) in self.v.iter().enumerate() {
                m[(self.offset + i, self.offset + j)] -= self.beta * vi * vj;
            }
        }
        m
    }
}

/// `U x` for a Householder reflection `U`.
pub fn apply_householder(u: &HouseholderReflection, x: &[f64]) -> Result<Vec<f64>> {
    check_dim(u.dim(), x.len())?;
    let mut out = x.to_vec();
    u.apply_in_place(&mut out);
    Ok(out)
}

/// Reflection acting on coordinates `k..n` that maps `e_k` to `a / |a|`.
///
/// `k` is zero-based. The entries of `a` before `k` must vanish (up to
/// rounding); a zero `a` gives the identity.
pub fn householder_from_target(a: &[f64], k: usize) -> Result<HouseholderReflection> {
    let n = a.len();
    if k >= n {
        return Err(Error::InvalidParameter(format!("target index {k} out of range for dimension {n}")));
    }
    let full_norm = dot(a, a).sqrt();
    let lead_tol = 64.0 * f64::EPSILON * full_norm;
    if let Some((index, &value)) = a[..k].iter().enumerate().find(|(_, v)| v.abs() > lead_tol) {
        return Err(Error::TargetNotInSubspace { index, value });
    }
    let tail = &a[k..];
    let norm = dot(tail, tail).sqrt();
    if norm == 0.0 {
        return Ok(HouseholderReflection::identity(n));
    }
    let mut v: Vec<f64> = tail.iter().map(|x| x / norm).collect();
    let head = v[0];
    // v = â - e_k; for â_k > 0 compute â_k - 1 without cancellation
    v[0] = if head > 0.0 {
        let rest: f64 = v[1..].iter().map(|x| x * x).sum();
        -rest / (1.0 + head)
    } else {
        head - 1.0
    };
    HouseholderReflection::new(n, k, v)
}
