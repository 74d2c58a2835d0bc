//! Test-only oracles, independent of the library's evaluation paths.

#![allow(dead_code)]

use std::ops::{Add, Div, Mul, Neg, Sub};

use lmnet::{Dataset, Role};

pub fn fixture(name: &str) -> String {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn fixture_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn dataset(name: &str, role: Role) -> Dataset {
    Dataset::parse_csv(&fixture(name), role).unwrap()
}

/// Double-double real: `hi + lo` with `|lo| <= ulp(hi)/2`, about 32
/// significant digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    const LN2: Dd = Dd {
        hi: std::f64::consts::LN_2,
        lo: 2.3190468138462996e-17,
    };

    pub fn new(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn scale(self, factor: f64) -> Dd {
        // factor is a power of two: exact
        Dd {
            hi: self.hi * factor,
            lo: self.lo * factor,
        }
    }

    pub fn exp(self) -> Dd {
        let k = (self.hi / Self::LN2.hi).round();
        let r = (self - Self::LN2 * Dd::new(k)).scale(1.0 / 1024.0);
        // Taylor series; |r| < 4e-4 so 14 terms are far past DD precision.
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        for n in 1..=14 {
            term = term * r / Dd::new(n as f64);
            sum = sum + term;
        }
        for _ in 0..10 {
            sum = sum * sum;
        }
        sum.scale(2f64.powi(k as i32))
    }

    pub fn sigmoid(self) -> Dd {
        Dd::ONE / (Dd::ONE + (-self).exp())
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, y: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, y.hi);
        let (t, f) = two_sum(self.lo, y.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, y: Dd) -> Dd {
        self + (-y)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, y: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, y.hi);
        let (hi, lo) = quick_two_sum(p, e + (self.hi * y.lo + self.lo * y.hi));
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, y: Dd) -> Dd {
        let q1 = self.hi / y.hi;
        let r = self - y * Dd::new(q1);
        let q2 = r.hi / y.hi;
        let r = r - y * Dd::new(q2);
        let q3 = r.hi / y.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

/// Network residuals `t − y`, interleaved per sample, evaluated directly
/// from a flat parameter vector in double-double.
pub fn residuals_dd(theta: &[Dd], hidden: usize, inputs: &[[f64; 2]], targets: &[[f64; 2]]) -> Vec<Dd> {
    let h = hidden;
    assert_eq!(theta.len(), 5 * h + 2);
    let mut out = Vec::new();
    for (x, t) in inputs.iter().zip(targets) {
        let act: Vec<Dd> = (0..h)
            .map(|j| (theta[2 * j] * Dd::new(x[0]) + theta[2 * j + 1] * Dd::new(x[1]) + theta[2 * h + j]).sigmoid())
            .collect();
        for c in 0..2 {
            let mut y = theta[5 * h + c];
            for j in 0..h {
                y = y + theta[3 * h + c * h + j] * act[j];
            }
            out.push(Dd::new(t[c]) - y);
        }
    }
    out
}

/// Central differences of [`residuals_dd`] with step `step`, returned as a
/// row-major `2N × P` matrix.
pub fn fd_jacobian(
    theta: &[f64],
    hidden: usize,
    inputs: &[[f64; 2]],
    targets: &[[f64; 2]],
    step: f64,
) -> Vec<Vec<f64>> {
    let p = theta.len();
    let m = 2 * inputs.len();
    let mut jac = vec![vec![0.0; p]; m];
    let base: Vec<Dd> = theta.iter().map(|&v| Dd::new(v)).collect();
    for c in 0..p {
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus[c] = plus[c] + Dd::new(step);
        minus[c] = minus[c] - Dd::new(step);
        let rp = residuals_dd(&plus, hidden, inputs, targets);
        let rm = residuals_dd(&minus, hidden, inputs, targets);
        for k in 0..m {
            jac[k][c] = ((rp[k] - rm[k]) / Dd::new(2.0 * step)).to_f64();
        }
    }
    jac
}

/// Largest `|a − b| / max(|a|, |b|)` over entries where either magnitude
/// exceeds `floor`.
pub fn max_relative_deviation(analytic: &lmnet::linalg::Matrix, fd: &[Vec<f64>], floor: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, row) in fd.iter().enumerate() {
        for (c, &b) in row.iter().enumerate() {
            let a = analytic[(k, c)];
            let scale = a.abs().max(b.abs());
            if scale > floor {
                worst = worst.max((a - b).abs() / scale);
            }
        }
    }
    worst
}

/// Published Table II rows: inputs, actual, simulated, then absolute and
/// relative error columns as printed.
pub const TABLE2: [[f64; 10]; 15] = [
    [1.0, 0.0, 22.10, 2.82, 23.05, 3.13, -0.95, -0.31, -4.30, -10.90],
    [1.0, 0.0, 24.60, 3.38, 23.05, 3.13, 1.55, 0.25, 6.30, 7.47],
    [1.0, 45.0, 14.30, 3.20, 15.73, 2.80, -1.43, 0.40, -10.03, 12.42],
    [1.0, 45.0, 16.23, 3.80, 15.73, 2.80, 0.50, 1.00, 3.06, 26.25],
    [1.0, 45.0, 17.90, 3.45, 15.73, 2.80, 2.17, 0.65, 12.10, 18.77],
    [1.0, 90.0, 14.95, 2.66, 14.97, 2.77, -0.02, -0.11, -0.16, -4.15],
    [1.0, 90.0, 16.80, 2.83, 14.97, 2.77, 1.83, 0.06, 10.87, 2.11],
    [2.0, 0.0, 13.10, 2.90, 14.18, 2.23, -1.08, 0.67, -8.23, 23.03],
    [2.0, 0.0, 14.40, 2.40, 14.18, 2.23, 0.22, 0.17, 1.54, 6.99],
    [2.0, 0.0, 17.00, 2.63, 14.18, 2.23, 2.82, 0.40, 16.60, 15.13],
    [2.0, 45.0, 21.40, 2.84, 21.42, 3.04, -0.02, -0.20, -0.09, -7.12],
    [2.0, 45.0, 22.30, 3.41, 21.42, 3.04, 0.88, 0.37, 3.95, 10.79],
    [2.0, 90.0, 14.30, 2.45, 16.30, 2.83, -2.00, -0.38, -13.98, -15.36],
    [2.0, 90.0, 16.50, 2.64, 16.30, 2.83, 0.20, -0.19, 1.22, -7.06],
    [2.0, 90.0, 18.10, 3.10, 16.30, 2.83, 1.80, 0.27, 9.95, 8.83],
];

/// Published Table III outputs in row order: (layout, angle, sigma, eps).
pub const TABLE3: [(u8, f64, f64, f64); 36] = [
    (1, -10.0, 14.13, 6.30),
    (1, 0.0, 23.05, 3.13),
    (1, 1.0, 20.86, 1.81),
    (1, 10.0, 10.07, -0.70),
    (1, 22.0, 17.72, 2.89),
    (1, 35.0, 16.38, 2.83),
    (1, 45.0, 15.73, 2.80),
    (1, 46.0, 15.69, 2.80),
    (1, 55.0, 15.36, 2.79),
    (1, 67.0, 15.13, 2.78),
    (1, 80.0, 15.01, 2.77),
    (1, 90.0, 14.97, 2.77),
    (1, 91.0, 14.97, 2.77),
    (1, 100.0, 14.95, 2.77),
    (1, 112.0, 14.95, 2.77),
    (1, 170.0, 23.06, 3.09),
    (1, 181.0, 23.05, 3.09),
    (1, 202.0, 20.06, 3.05),
    (1, 225.0, 15.69, 2.98),
    (2, -10.0, 17.11, 4.32),
    (2, 0.0, 14.18, 2.23),
    (2, 1.0, 19.43, 4.94),
    (2, 10.0, 22.70, 3.10),
    (2, 22.0, 22.51, 3.09),
    (2, 35.0, 22.06, 3.07),
    (2, 45.0, 21.42, 3.04),
    (2, 46.0, 21.34, 3.04),
    (2, 55.0, 20.44, 3.00),
    (2, 67.0, 18.90, 2.94),
    (2, 80.0, 17.25, 2.87),
    (2, 90.0, 16.30, 2.83),
    (2, 91.0, 16.22, 2.82),
    (2, 100.0, 15.69, 2.80),
    (2, 112.0, 15.28, 2.78),
    (2, 260.0, 21.09, 3.06),
    (2, 290.0, 15.69, 2.98),
];

/// Published Table I group means (columns 7-8), plus the (1,90) stand-in.
pub const TABLE1_MEANS: [(u8, f64, f64, f64); 6] = [
    (1, 0.0, 23.05, 3.13),
    (1, 45.0, 15.69, 3.02),
    (1, 90.0, 14.97, 2.77),
    (2, 0.0, 14.18, 2.23),
    (2, 45.0, 21.44, 2.99),
    (2, 90.0, 16.28, 2.96),
];

pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}
