use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major array of doubles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if shape.contains(&0) {
            return Err(Error::Shape(format!("zero-sized dimension in {shape:?}")));
        }
        let expected: usize = shape.iter().product();
        if expected != values.len() {
            return Err(Error::Shape(format!(
                "shape {shape:?} needs {expected} values, got {}",
                values.len()
            )));
        }
        Ok(Tensor { shape, values })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Tensor {
            shape,
            values: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `out += m · v` for an `out.len() × v.len()` matrix.
pub(crate) fn matvec_acc(out: &mut [f64], m: &[f64], v: &[f64]) {
    let cols = v.len();
    debug_assert_eq!(m.len(), out.len() * cols);
    for (o, row) in out.iter_mut().zip(m.chunks_exact(cols)) {
        *o += row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// `out += mᵀ · v` for a `v.len() × out.len()` matrix.
pub(crate) fn matvec_t_acc(out: &mut [f64], m: &[f64], v: &[f64]) {
    let cols = out.len();
    debug_assert_eq!(m.len(), v.len() * cols);
    for (&vi, row) in v.iter().zip(m.chunks_exact(cols)) {
        if vi == 0.0 {
            continue;
        }
        for (o, a) in out.iter_mut().zip(row) {
            *o += a * vi;
        }
    }
}

/// `g += a · bᵀ`.
pub(crate) fn outer_acc(g: &mut [f64], a: &[f64], b: &[f64]) {
    let cols = b.len();
    debug_assert_eq!(g.len(), a.len() * cols);
    for (&ai, row) in a.iter().zip(g.chunks_exact_mut(cols)) {
        if ai == 0.0 {
            continue;
        }
        for (gij, bj) in row.iter_mut().zip(b) {
            *gij += ai * bj;
        }
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_checked() {
        assert!(Tensor::new(vec![2, 3], vec![0.0; 6]).is_ok());
        assert!(Tensor::new(vec![2, 3], vec![0.0; 5]).is_err());
        assert!(Tensor::new(vec![2, 0], vec![]).is_err());
    }

    #[test]
    fn products() {
        // [[1,2],[3,4],[5,6]]
        let m = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let mut out = [0.0; 3];
        matvec_acc(&mut out, &m, &[1.0, -1.0]);
        assert_eq!(out, [-1.0, -1.0, -1.0]);
        let mut out = [0.0; 2];
        matvec_t_acc(&mut out, &m, &[1.0, 0.0, 2.0]);
        assert_eq!(out, [11.0, 14.0]);
        let mut g = [0.0; 6];
        outer_acc(&mut g, &[1.0, 2.0, 3.0], &[1.0, 10.0]);
        assert_eq!(g, [1.0, 10.0, 2.0, 20.0, 3.0, 30.0]);
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-1000.0) >= 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
        assert!((sigmoid(2.0) + sigmoid(-2.0) - 1.0).abs() < 1e-15);
    }
}
