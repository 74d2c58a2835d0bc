//! The 2-h-2 perceptron: sigmoid hidden layer, identity ("pureline") output.
//!
//! Parameter vector layout, used by the trainer and the snapshot file:
//! `W1` row-major (h×2), `b1` (h), `W2` row-major (2×h), `b2` (2). Length
//! is `5h + 2`.
//!
//! Residuals are `target − prediction`, interleaved per sample as
//! `(σ, ε)`, so row `2k + c` of the Jacobian belongs to sample `k`,
//! channel `c`.

use crate::dataset::Samples;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const INPUTS: usize = 2;
pub const OUTPUTS: usize = 2;

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn param_count(hidden: usize) -> usize {
    5 * hidden + 2
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    hidden: usize,
    /// h×2, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// 2×h, row-major.
    pub w2: Vec<f64>,
    pub b2: [f64; OUTPUTS],
}

impl MlpParams {
    pub fn zeros(hidden: usize) -> Result<Self> {
        if hidden == 0 {
            return Err(Error::InvalidHidden);
        }
        Ok(MlpParams {
            hidden,
            w1: vec![0.0; hidden * INPUTS],
            b1: vec![0.0; hidden],
            w2: vec![0.0; OUTPUTS * hidden],
            b2: [0.0; OUTPUTS],
        })
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut theta = Vec::with_capacity(param_count(self.hidden));
        theta.extend_from_slice(&self.w1);
        theta.extend_from_slice(&self.b1);
        theta.extend_from_slice(&self.w2);
        theta.extend_from_slice(&self.b2);
        theta
    }

    pub fn unflatten(theta: &[f64], hidden: usize) -> Result<Self> {
        if hidden == 0 {
            return Err(Error::InvalidHidden);
        }
        let expected = param_count(hidden);
        if theta.len() != expected {
            return Err(Error::ParamLength {
                got: theta.len(),
                expected,
            });
        }
        let h = hidden;
        Ok(MlpParams {
            hidden,
            w1: theta[..2 * h].to_vec(),
            b1: theta[2 * h..3 * h].to_vec(),
            w2: theta[3 * h..5 * h].to_vec(),
            b2: [theta[5 * h], theta[5 * h + 1]],
        })
    }

    pub fn is_finite(&self) -> bool {
        self.flatten().iter().all(|v| v.is_finite())
    }

    fn hidden_activations(&self, x: [f64; INPUTS], out: &mut [f64]) {
        for (j, a) in out.iter_mut().enumerate() {
            let z = self.w1[2 * j] * x[0] + self.w1[2 * j + 1] * x[1] + self.b1[j];
            *a = sigmoid(z);
        }
    }

    fn output(&self, act: &[f64]) -> [f64; OUTPUTS] {
        let h = self.hidden;
        let mut y = self.b2;
        for (c, yc) in y.iter_mut().enumerate() {
            *yc += self.w2[c * h..(c + 1) * h]
                .iter()
                .zip(act)
                .map(|(w, a)| w * a)
                .sum::<f64>();
        }
        y
    }

    /// `W2·sigmoid(W1·x + b1) + b2`, in scaled units.
    pub fn forward(&self, x: [f64; INPUTS]) -> [f64; OUTPUTS] {
        let mut act = vec![0.0; self.hidden];
        self.hidden_activations(x, &mut act);
        self.output(&act)
    }

    /// Interleaved `target − prediction`, length `2N`.
    pub fn residuals(&self, data: &Samples) -> Vec<f64> {
        let mut act = vec![0.0; self.hidden];
        let mut r = Vec::with_capacity(OUTPUTS * data.len());
        for (x, t) in data.inputs.iter().zip(&data.targets) {
            self.hidden_activations(*x, &mut act);
            let y = self.output(&act);
            r.push(t[0] - y[0]);
            r.push(t[1] - y[1]);
        }
        r
    }

    pub fn sse(&self, data: &Samples) -> f64 {
        self.residuals(data).iter().map(|v| v * v).sum()
    }

    /// `∂r/∂θ`, a `2N × (5h+2)` matrix. Since `r = t − y`, every entry is
    /// the negated derivative of the prediction.
    pub fn jacobian(&self, data: &Samples) -> Matrix {
        self.residuals_and_jacobian(data).1
    }

    pub fn residuals_and_jacobian(&self, data: &Samples) -> (Vec<f64>, Matrix) {
        let h = self.hidden;
        let p = param_count(h);
        let (b1_at, w2_at, b2_at) = (2 * h, 3 * h, 5 * h);
        let mut jac = Matrix::zeros(OUTPUTS * data.len(), p);
        let mut r = Vec::with_capacity(OUTPUTS * data.len());
        let mut act = vec![0.0; h];
        for (k, (x, t)) in data.inputs.iter().zip(&data.targets).enumerate() {
            self.hidden_activations(*x, &mut act);
            let y = self.output(&act);
            for c in 0..OUTPUTS {
                r.push(t[c] - y[c]);
                let row = jac.row_mut(OUTPUTS * k + c);
                let w2c = &self.w2[c * h..(c + 1) * h];
                for j in 0..h {
                    let s = act[j];
                    // ∂y_c/∂z_j through the sigmoid: w2[c,j]·s(1−s)
                    let dz = w2c[j] * s * (1.0 - s);
                    row[2 * j] = -dz * x[0];
                    row[2 * j + 1] = -dz * x[1];
                    row[b1_at + j] = -dz;
                    row[w2_at + c * h + j] = -s;
                }
                row[b2_at + c] = -1.0;
            }
        }
        (r, jac)
    }
}
