/// Symmetric tridiagonal matrix stored by diagonal and first off-diagonal.
#[derive(Debug, Clone)]
pub(crate) struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    /// Thomas algorithm. The matrix must be positive definite.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        debug_assert_eq!(rhs.len(), n);
        let mut c = vec![0.0; n];
        let mut x = vec![0.0; n];
        let mut denom = self.diag[0];
        x[0] = rhs[0] / denom;
        for i in 1..n {
            c[i - 1] = self.off[i - 1] / denom;
            denom = self.diag[i] - self.off[i - 1] * c[i - 1];
            x[i] = (rhs[i] - self.off[i - 1] * x[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        x
    }

    #[cfg(test)]
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * v[i + 1];
                }
                s
            })
            .collect()
    }
}
