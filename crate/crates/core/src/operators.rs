//! Candidate PDE library and the equation-driven Koopman matrix
//! `K* = exp(Δt·N)`.
//!
//! A candidate is a linear operator `u_t = Σ c·∂^{o_1}_{q_1}⋯∂^{o_D}_{q_D} u`.
//! Its generator `N` acts on scaled Chebyshev coefficients and is assembled by
//! composing the per-axis differentiation operators.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::chebyshev::{diff_operator, BasisSpec, LinearOperatorMatrix};
use crate::error::{Error, Result};
use crate::expm::expm;
use crate::linalg::{all_finite, scaled};

pub const ADVECTION_X: &str = "advection-x";
pub const ADVECTION_Y: &str = "advection-y";
pub const DIFFUSION: &str = "diffusion";
pub const ADVECTION_DIFFUSION: &str = "advection-diffusion";

/// Names of the builtin candidates, in table order.
pub const BUILTIN_NAMES: [&str; 4] = [ADVECTION_X, ADVECTION_Y, DIFFUSION, ADVECTION_DIFFUSION];

/// One monomial `coeff · Π_d ∂^{orders[d]}/∂q_d^{orders[d]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeTerm {
    pub coeff: f64,
    pub orders: Vec<u32>,
}

impl PdeTerm {
    pub fn new(coeff: f64, orders: Vec<u32>) -> Self {
        PdeTerm { coeff, orders }
    }
}

/// A named linear spatial operator `𝒩` in `u_t = 𝒩[u]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeSpec {
    pub name: String,
    pub dims: usize,
    pub terms: Vec<PdeTerm>,
}

impl PdeSpec {
    pub fn new(name: impl Into<String>, dims: usize, terms: Vec<PdeTerm>) -> Result<Self> {
        let spec = PdeSpec {
            name: name.into(),
            dims,
            terms,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims == 0 {
            return Err(Error::EmptyBasis);
        }
        if self.terms.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "PDE `{}` has no terms",
                self.name
            )));
        }
        for term in &self.terms {
            if term.orders.len() != self.dims {
                return Err(Error::InvalidParameter(format!(
                    "PDE `{}`: term has {} derivative orders, expected {}",
                    self.name,
                    term.orders.len(),
                    self.dims
                )));
            }
            if !term.coeff.is_finite() {
                return Err(Error::NonFinite("PDE term coefficient"));
            }
        }
        Ok(())
    }
}

/// Physical coefficients of the builtin testbed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    #[serde(default = "default_speed")]
    pub cx: f64,
    #[serde(default = "default_speed")]
    pub cy: f64,
    #[serde(default = "default_nu")]
    pub nu: f64,
}

fn default_speed() -> f64 {
    1.0
}

fn default_nu() -> f64 {
    0.1
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            cx: default_speed(),
            cy: default_speed(),
            nu: default_nu(),
        }
    }
}

/// The four 2-D candidates: `u_t + c_x u_x = 0`, `u_t + c_y u_y = 0`,
/// `u_t = ν Δu` and their combination.
pub fn builtin_library(dims: usize, params: PhysicalParams) -> Result<Vec<PdeSpec>> {
    if dims != 2 {
        return Err(Error::InvalidParameter(format!(
            "builtin candidates are two-dimensional, got dims = {dims}"
        )));
    }
    let PhysicalParams { cx, cy, nu } = params;
    let adv_x = PdeTerm::new(-cx, vec![1, 0]);
    let adv_y = PdeTerm::new(-cy, vec![0, 1]);
    let diff_x = PdeTerm::new(nu, vec![2, 0]);
    let diff_y = PdeTerm::new(nu, vec![0, 2]);
    Ok(vec![
        PdeSpec::new(ADVECTION_X, 2, vec![adv_x.clone()])?,
        PdeSpec::new(ADVECTION_Y, 2, vec![adv_y.clone()])?,
        PdeSpec::new(DIFFUSION, 2, vec![diff_x.clone(), diff_y.clone()])?,
        PdeSpec::new(ADVECTION_DIFFUSION, 2, vec![adv_x, adv_y, diff_x, diff_y])?,
    ])
}

/// Looks up a builtin candidate by name.
pub fn builtin(name: &str, params: PhysicalParams) -> Result<PdeSpec> {
    builtin_library(2, params)?
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownPde {
            name: name.to_string(),
            available: BUILTIN_NAMES.iter().map(|s| s.to_string()).collect(),
        })
}

/// Coefficient-space matrix of `𝒩`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    pub basis: BasisSpec,
    pub entries: Mat<f64>,
}

impl GeneratorMatrix {
    pub fn zeros(basis: &BasisSpec) -> Self {
        let p = basis.total_size();
        GeneratorMatrix {
            basis: basis.clone(),
            entries: Mat::zeros(p, p),
        }
    }
}

impl From<LinearOperatorMatrix> for GeneratorMatrix {
    fn from(op: LinearOperatorMatrix) -> Self {
        GeneratorMatrix {
            basis: op.basis,
            entries: op.entries,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    EquationDriven,
    DataDriven,
}

/// One-step propagator on scaled coefficients, either `K*` or `K̂`.
#[derive(Debug, Clone, PartialEq)]
pub struct KoopmanMatrix {
    pub basis: BasisSpec,
    pub dt: f64,
    pub entries: Mat<f64>,
    pub provenance: Provenance,
    /// Name of the PDE this matrix was derived from or estimated on.
    pub label: Option<String>,
}

impl KoopmanMatrix {
    pub fn new(
        basis: BasisSpec,
        dt: f64,
        entries: Mat<f64>,
        provenance: Provenance,
        label: Option<String>,
    ) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        let p = basis.total_size();
        for dim in [entries.nrows(), entries.ncols()] {
            if dim != p {
                return Err(Error::ShapeMismatch {
                    expected: p,
                    found: dim,
                });
            }
        }
        Ok(KoopmanMatrix {
            basis,
            dt,
            entries,
            provenance,
            label,
        })
    }
}

/// `N = Σ_terms coeff · Π_d (D^{(d)})^{o_d}`.
pub fn assemble_generator(spec: &PdeSpec, basis: &BasisSpec) -> Result<GeneratorMatrix> {
    spec.validate()?;
    if spec.dims != basis.dims() {
        return Err(Error::InvalidParameter(format!(
            "PDE `{}` is {}-dimensional but the basis has {} axes",
            spec.name,
            spec.dims,
            basis.dims()
        )));
    }
    let p = basis.total_size();
    let axes: Vec<LinearOperatorMatrix> = (0..basis.dims())
        .map(|d| diff_operator(basis, d))
        .collect::<Result<_>>()?;
    let mut total = Mat::<f64>::zeros(p, p);
    for term in &spec.terms {
        let mut product = Mat::<f64>::identity(p, p);
        for (axis, &order) in term.orders.iter().enumerate() {
            for _ in 0..order {
                product = &axes[axis].entries * &product;
            }
        }
        total = &total + scaled(&product, term.coeff);
    }
    Ok(GeneratorMatrix {
        basis: basis.clone(),
        entries: total,
    })
}

/// `K* = exp(dt·N)`.
pub fn matrix_exponential(n: &GeneratorMatrix, dt: f64) -> Result<KoopmanMatrix> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if !all_finite(&n.entries) {
        return Err(Error::NonFinite("generator matrix"));
    }
    let k = expm(&scaled(&n.entries, dt));
    if !all_finite(&k) {
        return Err(Error::NonFinite("matrix exponential"));
    }
    KoopmanMatrix::new(n.basis.clone(), dt, k, Provenance::EquationDriven, None)
}

/// Assembles and exponentiates in one step, labelling the result with the
/// candidate name.
pub fn derive_koopman(spec: &PdeSpec, basis: &BasisSpec, dt: f64) -> Result<KoopmanMatrix> {
    let n = assemble_generator(spec, basis)?;
    let mut k = matrix_exponential(&n, dt)?;
    k.label = Some(spec.name.clone());
    Ok(k)
}
