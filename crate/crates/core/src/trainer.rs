//! Levenberg-Marquardt training.
//!
//! Each step solves `(JᵀJ + μI)·δ = −Jᵀr` by Cholesky, where `J = ∂r/∂θ`
//! and `r = target − prediction`. A candidate is accepted only if it
//! strictly lowers the sum of squared residuals; then `μ ← μ·mu_dec`.
//! Otherwise, or if the damped matrix fails to factor, `μ ← μ·mu_inc` and
//! the solve is retried until acceptance or `μ > mu_max`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::Samples;
use crate::error::{Error, Result};
use crate::linalg::{inf_norm, Cholesky, Matrix};
use crate::network::{param_count, MlpParams};

#[derive(Debug, Clone, PartialEq)]
pub struct LmConfig {
    pub mu0: f64,
    pub mu_inc: f64,
    pub mu_dec: f64,
    pub mu_max: f64,
    pub max_epochs: usize,
    /// Threshold on the ∞-norm of `Jᵀr`.
    pub grad_tol: f64,
    pub seed: u64,
    pub restarts: usize,
}

impl Default for LmConfig {
    fn default() -> Self {
        LmConfig {
            mu0: 1e-3,
            mu_inc: 10.0,
            mu_dec: 0.1,
            mu_max: 1e10,
            max_epochs: 1000,
            grad_tol: 1e-7,
            seed: 42,
            restarts: 10,
        }
    }
}

impl LmConfig {
    // negated comparisons so that NaN fails every check
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.into()));
        if !(self.mu0 > 0.0) {
            return bad("mu0 must be positive");
        }
        if !(self.mu_max > self.mu0) {
            return bad("mu_max must exceed mu0");
        }
        if !(self.mu_inc > 1.0) {
            return bad("mu_inc must be greater than 1");
        }
        if !(self.mu_dec > 0.0 && self.mu_dec < 1.0) {
            return bad("mu_dec must lie in (0, 1)");
        }
        if !(self.grad_tol >= 0.0) {
            return bad("grad_tol must be non-negative");
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    None,
    MaxEpochs,
    GradTol,
    MuOverflow,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::None => "none",
            StopReason::MaxEpochs => "max_epochs",
            StopReason::GradTol => "grad_tol",
            StopReason::MuOverflow => "mu_overflow",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmState {
    pub theta: Vec<f64>,
    pub mu: f64,
    pub epoch: usize,
    /// `‖r‖²` at `theta`, in scaled space.
    pub sse: f64,
    pub stop: StopReason,
}

impl LmState {
    pub fn new<P: LeastSquares + ?Sized>(problem: &P, theta: Vec<f64>, cfg: &LmConfig) -> Self {
        let sse = sum_sq(&problem.residuals(&theta));
        LmState {
            theta,
            mu: cfg.mu0,
            epoch: 0,
            sse,
            stop: StopReason::None,
        }
    }
}

/// One damped solve attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Candidate SSE; NaN when the damped matrix failed to factor.
    pub sse: f64,
    pub mu: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainHistory {
    pub records: Vec<EpochRecord>,
}

impl TrainHistory {
    pub fn accepted(&self) -> impl Iterator<Item = &EpochRecord> {
        self.records.iter().filter(|r| r.accepted)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,sse,mu,accepted\n");
        for r in &self.records {
            out.push_str(&format!("{},{:e},{:e},{}\n", r.epoch, r.sse, r.mu, r.accepted as u8));
        }
        out
    }
}

/// A least-squares problem in the form the LM loop consumes.
pub trait LeastSquares {
    fn param_count(&self) -> usize;
    fn residuals(&self, theta: &[f64]) -> Vec<f64>;
    /// Residuals and `∂r/∂θ` at `theta`.
    fn residuals_and_jacobian(&self, theta: &[f64]) -> (Vec<f64>, Matrix);
}

/// Perceptron regression over scaled samples.
pub struct MlpProblem<'a> {
    pub hidden: usize,
    pub data: &'a Samples,
}

impl MlpProblem<'_> {
    fn params(&self, theta: &[f64]) -> MlpParams {
        MlpParams::unflatten(theta, self.hidden).expect("theta length checked by caller")
    }
}

impl LeastSquares for MlpProblem<'_> {
    fn param_count(&self) -> usize {
        param_count(self.hidden)
    }

    fn residuals(&self, theta: &[f64]) -> Vec<f64> {
        self.params(theta).residuals(self.data)
    }

    fn residuals_and_jacobian(&self, theta: &[f64]) -> (Vec<f64>, Matrix) {
        self.params(theta).residuals_and_jacobian(self.data)
    }
}

/// Relative margin below which two training MSEs count as tied. Restarts
/// that reach the same optimum differ only in the last few bits.
pub const TIE_RTOL: f64 = 1e-9;

/// True if `candidate` beats `incumbent` by more than the tie margin.
pub fn strictly_better(candidate: f64, incumbent: f64) -> bool {
    candidate < incumbent - TIE_RTOL * incumbent.abs()
}

fn sum_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Uniform [−0.5, 0.5] entries from a ChaCha8 stream seeded with `seed`.
pub fn init_params(hidden: usize, seed: u64) -> Result<MlpParams> {
    if hidden == 0 {
        return Err(Error::InvalidHidden);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta: Vec<f64> = (0..param_count(hidden)).map(|_| rng.gen_range(-0.5..=0.5)).collect();
    MlpParams::unflatten(&theta, hidden)
}

/// The damped LM step `δ` for given `JᵀJ`, `Jᵀr` and `μ`, or `None` if
/// `JᵀJ + μI` is not numerically positive definite.
pub fn damped_delta(normal: &Matrix, grad: &[f64], mu: f64) -> Option<Vec<f64>> {
    let mut a = normal.clone();
    for i in 0..a.rows() {
        a[(i, i)] += mu;
    }
    let chol = Cholesky::factor(&a)?;
    let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
    Some(chol.solve(&neg))
}

fn damped_step<P: LeastSquares + ?Sized>(
    problem: &P,
    state: &LmState,
    cfg: &LmConfig,
    jac: &Matrix,
    grad: &[f64],
    log: &mut Vec<EpochRecord>,
) -> LmState {
    let epoch = state.epoch + 1;
    let normal = jac.gram();
    let mut mu = state.mu;
    while mu <= cfg.mu_max {
        let candidate = damped_delta(&normal, grad, mu).and_then(|delta| {
            let theta: Vec<f64> = state.theta.iter().zip(&delta).map(|(t, d)| t + d).collect();
            let sse = sum_sq(&problem.residuals(&theta));
            sse.is_finite().then_some((theta, sse))
        });
        match candidate {
            Some((theta, sse)) if sse < state.sse => {
                log.push(EpochRecord {
                    epoch,
                    sse,
                    mu,
                    accepted: true,
                });
                return LmState {
                    theta,
                    mu: mu * cfg.mu_dec,
                    epoch,
                    sse,
                    stop: StopReason::None,
                };
            }
            other => {
                log.push(EpochRecord {
                    epoch,
                    sse: other.map_or(f64::NAN, |(_, s)| s),
                    mu,
                    accepted: false,
                });
                mu *= cfg.mu_inc;
            }
        }
    }
    LmState {
        theta: state.theta.clone(),
        mu,
        epoch,
        sse: state.sse,
        stop: StopReason::MuOverflow,
    }
}

/// One LM iteration: retries with growing damping until a candidate is
/// accepted or damping exceeds `mu_max`, in which case `theta` is returned
/// unchanged with `stop = MuOverflow`.
pub fn lm_step<P: LeastSquares + ?Sized>(problem: &P, state: &LmState, cfg: &LmConfig) -> LmState {
    let (r, jac) = problem.residuals_and_jacobian(&state.theta);
    let grad = jac.transpose_mul(&r);
    damped_step(problem, state, cfg, &jac, &grad, &mut Vec::new())
}

/// Runs LM from `theta` until the gradient test, the epoch budget, or
/// damping overflow stops it.
pub fn run_lm<P: LeastSquares + ?Sized>(problem: &P, theta: Vec<f64>, cfg: &LmConfig) -> (LmState, TrainHistory) {
    assert_eq!(theta.len(), problem.param_count());
    let mut state = LmState::new(problem, theta, cfg);
    let mut history = TrainHistory::default();
    loop {
        if state.epoch >= cfg.max_epochs {
            state.stop = StopReason::MaxEpochs;
            break;
        }
        let (r, jac) = problem.residuals_and_jacobian(&state.theta);
        let grad = jac.transpose_mul(&r);
        if inf_norm(&grad) < cfg.grad_tol {
            state.stop = StopReason::GradTol;
            break;
        }
        state = damped_step(problem, &state, cfg, &jac, &grad, &mut history.records);
        if state.stop == StopReason::MuOverflow {
            break;
        }
    }
    (state, history)
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub params: MlpParams,
    pub history: TrainHistory,
    pub state: LmState,
}

/// Trains one network from `init_params(hidden, cfg.seed)`.
pub fn train(cfg: &LmConfig, hidden: usize, data: &Samples) -> Result<Trained> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let init = init_params(hidden, cfg.seed)?;
    let problem = MlpProblem { hidden, data };
    let (state, history) = run_lm(&problem, init.flatten(), cfg);
    let params = MlpParams::unflatten(&state.theta, hidden)?;
    Ok(Trained { params, history, state })
}

/// Mean squared residual over all `2N` components, in physical units.
pub fn physical_mse(params: &MlpParams, data: &Samples) -> f64 {
    let r = params.residuals(data);
    let units = data.output_units;
    let total: f64 = r
        .chunks_exact(2)
        .map(|c| (c[0] * units[0]).powi(2) + (c[1] * units[1]).powi(2))
        .sum();
    total / r.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartSummary {
    pub seed: u64,
    pub mse: f64,
    pub sse: f64,
    pub epochs: usize,
    pub stop: StopReason,
}

#[derive(Debug, Clone)]
pub struct BestOf {
    pub trained: Trained,
    pub seed: u64,
    /// Training MSE of the selected run, physical units.
    pub mse: f64,
    pub restarts: Vec<RestartSummary>,
}

/// Trains with seeds `seed, seed+1, …` and keeps the lowest physical
/// training MSE; ties (within [`TIE_RTOL`]) go to the lower seed. Restarts run in parallel and
/// are reduced in seed order.
pub fn train_best(cfg: &LmConfig, hidden: usize, data: &Samples) -> Result<BestOf> {
    cfg.validate()?;
    let runs: Vec<(u64, Trained, f64)> = (0..cfg.restarts as u64)
        .into_par_iter()
        .map(|i| {
            let seed = cfg.seed.wrapping_add(i);
            let run_cfg = LmConfig { seed, ..cfg.clone() };
            let trained = train(&run_cfg, hidden, data)?;
            let mse = physical_mse(&trained.params, data);
            Ok((seed, trained, mse))
        })
        .collect::<Result<_>>()?;

    let restarts = runs
        .iter()
        .map(|(seed, t, mse)| RestartSummary {
            seed: *seed,
            mse: *mse,
            sse: t.state.sse,
            epochs: t.state.epoch,
            stop: t.state.stop,
        })
        .collect();

    let (seed, trained, mse) = runs
        .into_iter()
        .reduce(|best, next| if strictly_better(next.2, best.2) { next } else { best })
        .expect("restarts >= 1");
    Ok(BestOf {
        trained,
        seed,
        mse,
        restarts,
    })
}
