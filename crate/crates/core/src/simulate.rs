//! Reference trajectories: initial conditions, classical RK4 on `ȧ = N·a`
//! in coefficient space, and exact propagation by a Koopman matrix.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::chebyshev::{forward, BasisSpec, CoeffVector};
use crate::error::{Error, Result};
use crate::linalg::{all_finite, mat_vec};
use crate::operators::{assemble_generator, GeneratorMatrix, KoopmanMatrix, PdeSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// `A·exp(-Σ_d (q_d - c_d)² / (2σ²))` sampled at the nodes.
    Gaussian {
        center: Vec<f64>,
        width: f64,
        amplitude: f64,
    },
    /// i.i.d. standard normal coefficients damped by `decay^{Σ m_d}`.
    RandomSmooth { seed: u64, decay: f64 },
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition::Gaussian {
            center: vec![0.0, 0.0],
            width: 0.3,
            amplitude: 1.0,
        }
    }
}

impl InitialCondition {
    pub fn validate(&self, basis: &BasisSpec) -> Result<()> {
        match self {
            InitialCondition::Gaussian {
                center,
                width,
                amplitude,
            } => {
                if center.len() != basis.dims() {
                    return Err(Error::InvalidParameter(format!(
                        "gaussian center has {} coordinates, basis has {} axes",
                        center.len(),
                        basis.dims()
                    )));
                }
                if center.iter().any(|c| !(-1.0..=1.0).contains(c)) {
                    return Err(Error::InvalidParameter(
                        "gaussian center must lie in [-1, 1]^D".into(),
                    ));
                }
                if !(*width > 0.0 && width.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "gaussian width must be positive, got {width}"
                    )));
                }
                if !amplitude.is_finite() {
                    return Err(Error::NonFinite("gaussian amplitude"));
                }
            }
            InitialCondition::RandomSmooth { decay, .. } => {
                if !(*decay > 0.0 && *decay < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "spectral decay must lie in (0, 1), got {decay}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Coefficient vector of an initial condition.
pub fn make_ic(ic: &InitialCondition, basis: &BasisSpec) -> Result<CoeffVector> {
    ic.validate(basis)?;
    match ic {
        InitialCondition::Gaussian {
            center,
            width,
            amplitude,
        } => {
            let two_sigma2 = 2.0 * width * width;
            let u = basis.sample(|q| {
                let r2: f64 = q.iter().zip(center).map(|(x, c)| (x - c) * (x - c)).sum();
                amplitude * (-r2 / two_sigma2).exp()
            });
            forward(&u)
        }
        InitialCondition::RandomSmooth { seed, decay } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let values = (0..basis.total_size())
                .map(|flat| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    let degree: usize = basis.multi_index(flat).iter().sum();
                    z * decay.powi(degree as i32)
                })
                .collect();
            CoeffVector::new(basis.clone(), values)
        }
    }
}

/// Ordered coefficient snapshots `a_0 … a_{N-1}` at spacing `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub basis: BasisSpec,
    pub dt: f64,
    pub pde_name: String,
    pub snapshots: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new(basis: BasisSpec, dt: f64, pde_name: String, snapshots: Vec<Vec<f64>>) -> Result<Self> {
        if snapshots.len() < 2 {
            return Err(Error::TooFewSnapshots(snapshots.len()));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        for s in &snapshots {
            basis.check_len(s.len())?;
        }
        Ok(Trajectory {
            basis,
            dt,
            pde_name,
            snapshots,
        })
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn snapshot(&self, k: usize) -> CoeffVector {
        CoeffVector {
            basis: self.basis.clone(),
            values: self.snapshots[k].clone(),
        }
    }

    pub fn last(&self) -> CoeffVector {
        self.snapshot(self.snapshots.len() - 1)
    }
}

fn axpy(y: &[f64], alpha: f64, x: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(a, b)| a + alpha * b).collect()
}

fn rk4_raw(n: &GeneratorMatrix, a: &[f64], dt: f64) -> Vec<f64> {
    let k1 = mat_vec(&n.entries, a);
    let k2 = mat_vec(&n.entries, &axpy(a, 0.5 * dt, &k1));
    let k3 = mat_vec(&n.entries, &axpy(a, 0.5 * dt, &k2));
    let k4 = mat_vec(&n.entries, &axpy(a, dt, &k3));
    a.iter()
        .enumerate()
        .map(|(i, &ai)| ai + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// One classical Runge–Kutta step of `ȧ = N·a`.
pub fn rk4_step(n: &GeneratorMatrix, a: &CoeffVector, dt: f64) -> Result<CoeffVector> {
    n.basis.check_same(&a.basis)?;
    a.basis.check_len(a.values.len())?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if !all_finite(&n.entries) {
        return Err(Error::NonFinite("generator matrix"));
    }
    if a.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("state vector"));
    }
    Ok(CoeffVector {
        basis: a.basis.clone(),
        values: rk4_raw(n, &a.values, dt),
    })
}

/// Number of RK4 steps covering `[0, horizon]`; absorbs the rounding error
/// of `horizon / dt` (e.g. `0.5 / 5e-4`).
pub fn step_count(dt: f64, horizon: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if !(horizon.is_finite() && horizon >= dt * (1.0 - 1e-9)) {
        return Err(Error::InvalidParameter(format!(
            "horizon {horizon} must be at least dt = {dt}"
        )));
    }
    Ok((horizon / dt * (1.0 + 1e-12)).floor() as usize)
}

/// RK4 integration from a given coefficient vector.
pub fn integrate(
    n: &GeneratorMatrix,
    a0: &CoeffVector,
    dt: f64,
    steps: usize,
    pde_name: &str,
) -> Result<Trajectory> {
    let mut a = a0.clone();
    let mut snapshots = Vec::with_capacity(steps + 1);
    snapshots.push(a.values.clone());
    for _ in 0..steps {
        a = rk4_step(n, &a, dt)?;
        snapshots.push(a.values.clone());
    }
    if snapshots.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("trajectory"));
    }
    Trajectory::new(a0.basis.clone(), dt, pde_name.to_string(), snapshots)
}

/// Simulates `spec` from `ic` over `[0, horizon]`; `floor(horizon/dt) + 1` snapshots.
pub fn simulate(
    spec: &PdeSpec,
    ic: &InitialCondition,
    basis: &BasisSpec,
    dt: f64,
    horizon: f64,
) -> Result<Trajectory> {
    let steps = step_count(dt, horizon)?;
    let n = assemble_generator(spec, basis)?;
    let a0 = make_ic(ic, basis)?;
    integrate(&n, &a0, dt, steps, &spec.name)
}

/// `a_{k+1} = K·a_k` for `steps` steps.
pub fn exact_propagate(k: &KoopmanMatrix, a0: &CoeffVector, steps: usize) -> Result<Trajectory> {
    k.basis.check_same(&a0.basis)?;
    a0.basis.check_len(a0.values.len())?;
    if steps == 0 {
        return Err(Error::InvalidParameter(
            "exact propagation needs at least one step".into(),
        ));
    }
    let mut snapshots = Vec::with_capacity(steps + 1);
    snapshots.push(a0.values.clone());
    for s in 0..steps {
        let next = mat_vec(&k.entries, &snapshots[s]);
        snapshots.push(next);
    }
    let name = k.label.clone().unwrap_or_else(|| "exact".to_string());
    Trajectory::new(a0.basis.clone(), k.dt, name, snapshots)
}
