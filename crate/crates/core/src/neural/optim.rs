use std::collections::BTreeMap;

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// Adam over a flat parameter vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub learning_rate: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(len: usize, learning_rate: f64) -> Self {
        Adam {
            learning_rate,
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    fn update(&mut self, i: usize, param: &mut f64, g: f64, c1: f64, c2: f64) {
        self.m[i] = BETA1 * self.m[i] + (1.0 - BETA1) * g;
        self.v[i] = BETA2 * self.v[i] + (1.0 - BETA2) * g * g;
        let m_hat = self.m[i] / c1;
        let v_hat = self.v[i] / c2;
        *param -= self.learning_rate * m_hat / (v_hat.sqrt() + EPSILON);
    }

    fn advance(&mut self) -> (f64, f64) {
        self.t += 1;
        let t = self.t as i32;
        (1.0 - BETA1.powi(t), 1.0 - BETA2.powi(t))
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        let (c1, c2) = self.advance();
        for (i, (p, &g)) in params.iter_mut().zip(grads).enumerate() {
            self.update(i, p, g, c1, c2);
        }
    }

    /// Updates only the rows present in `rows`, leaving the moments of
    /// other rows untouched.
    pub fn step_rows(&mut self, params: &mut [f64], dim: usize, rows: &BTreeMap<usize, Vec<f64>>) {
        let (c1, c2) = self.advance();
        for (&row, grad) in rows {
            for (j, &g) in grad.iter().enumerate() {
                let i = row * dim + j;
                self.update(i, &mut params[i], g, c1, c2);
            }
        }
    }
}
