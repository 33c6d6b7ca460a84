use faer::linalg::solvers::SolveLstsq;
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares fit `y(L) = a + b/L + c/L²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverseLFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl InverseLFit {
    pub fn eval(&self, l: f64) -> f64 {
        self.a + self.b / l + self.c / (l * l)
    }
}

pub fn fit_inverse_l(sizes: &[usize], values: &[f64]) -> Result<InverseLFit> {
    if sizes.len() != values.len() || sizes.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least three (L, y) points, got {} sizes and {} values",
            sizes.len(),
            values.len()
        )));
    }
    let n = sizes.len();
    let a = Mat::<f64>::from_fn(n, 3, |i, j| (1.0 / sizes[i] as f64).powi(j as i32));
    let rhs = Mat::<f64>::from_fn(n, 1, |i, _| values[i]);
    let x = a.qr().solve_lstsq(&rhs);
    Ok(InverseLFit {
        a: x[(0, 0)],
        b: x[(1, 0)],
        c: x[(2, 0)],
    })
}
