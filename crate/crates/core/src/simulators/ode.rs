use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use super::{check_theta, Simulator};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::stochastics::Stream;

pub const DEFAULT_STEP: f64 = 1e-3;

/// `rhs(t, x, theta, dxdt)` writes the time derivative of `x` into `dxdt`.
pub type RhsFn = Box<dyn Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync>;

/// Deterministic ODE observed with i.i.d. Gaussian noise.
pub struct OdeModel {
    rhs: RhsFn,
    x0: Vec<f64>,
    param_dim: usize,
    noise_sd: f64,
    step: f64,
}

impl OdeModel {
    pub fn new(rhs: RhsFn, x0: Vec<f64>, param_dim: usize, noise_sd: f64) -> Result<Self> {
        if x0.is_empty() {
            return Err(Error::Model("ODE dimension must be at least 1".into()));
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Model("initial state must be finite".into()));
        }
        if !(noise_sd >= 0.0) || !noise_sd.is_finite() {
            return Err(Error::Model(format!("noise sd {noise_sd} must be >= 0")));
        }
        Ok(Self {
            rhs,
            x0,
            param_dim,
            noise_sd,
            step: DEFAULT_STEP,
        })
    }

    /// Overrides the RK4 step size.
    pub fn with_step(mut self, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::Model(format!("step {step} must be positive")));
        }
        self.step = step;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub fn noise_sd(&self) -> f64 {
        self.noise_sd
    }

    pub fn step(&self) -> f64 {
        self.step
    }
}

impl core::fmt::Debug for OdeModel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("OdeModel")
            .field("x0", &self.x0)
            .field("param_dim", &self.param_dim)
            .field("noise_sd", &self.noise_sd)
            .field("step", &self.step)
            .finish_non_exhaustive()
    }
}

struct Rk4Scratch {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Scratch {
    fn new(n: usize) -> Self {
        Self {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }
}

#[allow(clippy::needless_range_loop)]
fn rk4_step(rhs: &RhsFn, t: f64, h: f64, x: &mut [f64], theta: &[f64], s: &mut Rk4Scratch) {
    let n = x.len();
    rhs(t, x, theta, &mut s.k1);
    for i in 0..n {
        s.tmp[i] = x[i] + 0.5 * h * s.k1[i];
    }
    rhs(t + 0.5 * h, &s.tmp, theta, &mut s.k2);
    for i in 0..n {
        s.tmp[i] = x[i] + 0.5 * h * s.k2[i];
    }
    rhs(t + 0.5 * h, &s.tmp, theta, &mut s.k3);
    for i in 0..n {
        s.tmp[i] = x[i] + h * s.k3[i];
    }
    rhs(t + h, &s.tmp, theta, &mut s.k4);
    for i in 0..n {
        x[i] += h / 6.0 * (s.k1[i] + 2.0 * s.k2[i] + 2.0 * s.k3[i] + s.k4[i]);
    }
}

/// Classic fixed-step RK4 from `t = 0`, recording the state at `times`.
///
/// Each interval between recorded times is split into equal sub-steps no
/// longer than the model's step size, so recorded times are hit exactly.
pub fn integrate_ode(model: &OdeModel, theta: &[f64], times: &[f64]) -> Result<Dataset> {
    check_theta(model.param_dim, theta)?;
    if let Some(&t0) = times.first() {
        if !(t0 >= 0.0) {
            return Err(Error::Argument(format!(
                "observation time {t0} precedes t = 0"
            )));
        }
    }
    let n = model.dim();
    let mut x = model.x0.clone();
    let mut scratch = Rk4Scratch::new(n);
    let mut values = Vec::with_capacity(times.len() * n);
    let mut t = 0.0;
    for &target in times {
        let span = target - t;
        if span > 0.0 {
            let steps = libm::ceil(span / model.step - 1e-9).max(1.0) as u64;
            let h = span / steps as f64;
            for k in 0..steps {
                let tk = t + k as f64 * h;
                rk4_step(&model.rhs, tk, h, &mut x, theta, &mut scratch);
                if x.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Divergence { time: tk + h });
                }
            }
            t = target;
        }
        values.extend_from_slice(&x);
    }
    Dataset::new(times.to_vec(), values, n)
}

/// Noise-free trajectory plus independent `N(0, noise_sd^2)` noise on every entry.
pub fn simulate_deterministic(
    model: &OdeModel,
    theta: &[f64],
    times: &[f64],
    rng: &mut Stream,
) -> Result<Dataset> {
    let clean = integrate_ode(model, theta, times)?;
    if model.noise_sd == 0.0 {
        return Ok(clean);
    }
    let width = clean.width();
    let noisy = clean
        .values()
        .iter()
        .map(|&v| {
            let z: f64 = StandardNormal.sample(rng);
            v + model.noise_sd * z
        })
        .collect();
    Dataset::new(times.to_vec(), noisy, width)
}

impl Simulator for OdeModel {
    fn param_dim(&self) -> usize {
        self.param_dim
    }

    fn simulate(&self, theta: &[f64], times: &[f64], rng: &mut Stream) -> Result<Dataset> {
        simulate_deterministic(self, theta, times, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastics::Seed;

    fn decay(step: f64) -> OdeModel {
        OdeModel::new(
            Box::new(|_, x, th, dx| dx[0] = -th[0] * x[0]),
            vec![1.0],
            1,
            0.0,
        )
        .unwrap()
        .with_step(step)
        .unwrap()
    }

    #[test]
    fn exponential_decay() {
        let m = decay(DEFAULT_STEP);
        let d = integrate_ode(&m, &[1.0], &[1.0]).unwrap();
        assert!((d.values()[0] - libm::exp(-1.0)).abs() < 1e-6);
        assert!((d.values()[0] - 0.3678794).abs() < 1e-6);
        let d = integrate_ode(&m, &[2.0], &[0.5]).unwrap();
        assert!((d.values()[0] - libm::exp(-1.0)).abs() < 1e-6);
    }

    #[test]
    fn constant_and_initial_time() {
        let m = OdeModel::new(Box::new(|_, _, _, dx| dx[0] = 0.0), vec![4.2], 0, 0.0).unwrap();
        let d = integrate_ode(&m, &[], &[0.0, 0.5, 3.0]).unwrap();
        assert_eq!(d.values(), &[4.2, 4.2, 4.2]);
        assert!(integrate_ode(&m, &[], &[-1.0]).is_err());
        assert!(integrate_ode(&m, &[1.0], &[1.0]).is_err());
    }

    #[test]
    fn fourth_order_convergence() {
        let times: Vec<f64> = (1..=10).map(|i| i as f64 * 0.5).collect();
        let max_err = |h: f64| {
            let d = integrate_ode(&decay(h), &[1.0], &times).unwrap();
            times
                .iter()
                .zip(d.values())
                .map(|(t, v)| (v - libm::exp(-t)).abs())
                .fold(0.0, f64::max)
        };
        let ratio = max_err(0.1) / max_err(0.05);
        assert!((8.0..=32.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn divergence_is_reported() {
        let m = OdeModel::new(
            Box::new(|_, x, _, dx| dx[0] = x[0] * x[0]),
            vec![1.0],
            0,
            0.0,
        )
        .unwrap();
        assert!(matches!(
            integrate_ode(&m, &[], &[2.0]),
            Err(Error::Divergence { .. })
        ));
    }

    #[test]
    fn noise_conventions() {
        let times = [0.5, 1.0];
        let clean = integrate_ode(&decay(0.01), &[1.0], &times).unwrap();
        let mut rng = Seed(1).stream(0, 0);
        assert_eq!(
            simulate_deterministic(&decay(0.01), &[1.0], &times, &mut rng).unwrap(),
            clean
        );

        let noisy = OdeModel::new(
            Box::new(|_, x, th, dx| dx[0] = -th[0] * x[0]),
            vec![1.0],
            1,
            0.1,
        )
        .unwrap()
        .with_step(0.01)
        .unwrap();
        let a = noisy
            .simulate(&[1.0], &times, &mut Seed(1).stream(0, 0))
            .unwrap();
        let b = noisy
            .simulate(&[1.0], &times, &mut Seed(1).stream(0, 0))
            .unwrap();
        let c = noisy
            .simulate(&[1.0], &times, &mut Seed(2).stream(0, 0))
            .unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);

        let reps = 10_000;
        let truth = clean.values()[1];
        let mut rng = Seed(9).stream(0, 0);
        let ss: f64 = (0..reps)
            .map(|_| {
                let v = noisy.simulate(&[1.0], &[1.0], &mut rng).unwrap().values()[0] - truth;
                v * v
            })
            .sum();
        let sd = libm::sqrt(ss / reps as f64);
        assert!((sd - 0.1).abs() < 0.005, "sd {sd}");
    }
}
