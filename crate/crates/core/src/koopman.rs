//! Observation-driven Koopman matrices and their spectra.
//!
//! `K̂ = A₁·A₀†` fits the one-step map to consecutive coefficient snapshots.
//! Eigendecompositions are normalized so downstream metrics are
//! reproducible: unit 2-norm, the largest-modulus entry of each vector made
//! real and nonnegative, and a fixed total order on the pairs.

use std::cmp::Ordering;

use faer::{c64, Mat};

use crate::chebyshev::{inverse, BasisSpec, CoeffVector};
use crate::eigen::real_eigen;
use crate::error::{Error, Result};
use crate::linalg::{all_finite, frobenius};
use crate::operators::{KoopmanMatrix, Provenance};
use crate::simulate::Trajectory;

/// Shifted snapshot matrices `A₀ = (a_0 … a_{N-2})`, `A₁ = (a_1 … a_{N-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotPairs {
    pub basis: BasisSpec,
    pub a0: Mat<f64>,
    pub a1: Mat<f64>,
}

impl SnapshotPairs {
    pub fn len(&self) -> usize {
        self.a0.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.a0.ncols() == 0
    }

    /// Concatenates the columns of several pair sets over the same basis.
    pub fn concat(sets: &[SnapshotPairs]) -> Result<SnapshotPairs> {
        let first = sets
            .first()
            .ok_or_else(|| Error::InvalidParameter("no snapshot pairs to concatenate".into()))?;
        for s in sets {
            first.basis.check_same(&s.basis)?;
        }
        let p = first.basis.total_size();
        let cols: usize = sets.iter().map(SnapshotPairs::len).sum();
        let mut a0 = Mat::zeros(p, cols);
        let mut a1 = Mat::zeros(p, cols);
        let mut offset = 0;
        for s in sets {
            for j in 0..s.len() {
                for i in 0..p {
                    a0[(i, offset + j)] = s.a0[(i, j)];
                    a1[(i, offset + j)] = s.a1[(i, j)];
                }
            }
            offset += s.len();
        }
        Ok(SnapshotPairs {
            basis: first.basis.clone(),
            a0,
            a1,
        })
    }
}

pub fn build_pairs(traj: &Trajectory) -> Result<SnapshotPairs> {
    let n = traj.snapshots.len();
    if n < 2 {
        return Err(Error::TooFewSnapshots(n));
    }
    let p = traj.basis.total_size();
    for s in &traj.snapshots {
        traj.basis.check_len(s.len())?;
    }
    let snaps = &traj.snapshots;
    Ok(SnapshotPairs {
        basis: traj.basis.clone(),
        a0: Mat::from_fn(p, n - 1, |i, k| snaps[k][i]),
        a1: Mat::from_fn(p, n - 1, |i, k| snaps[k + 1][i]),
    })
}

/// Moore–Penrose pseudo-inverse by SVD; singular values at or below
/// `rcond·σ_max` are treated as zero.
pub fn pseudo_inverse(a: &Mat<f64>, rcond: f64) -> Result<Mat<f64>> {
    if !all_finite(a) {
        return Err(Error::NonFinite("pseudo-inverse input"));
    }
    let svd = a.thin_svd().map_err(|e| Error::Svd(format!("{e:?}")))?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let sigma_max = (0..s.nrows()).map(|k| s[k]).fold(0.0f64, f64::max);
    let cutoff = rcond * sigma_max;
    let mut out = Mat::<f64>::zeros(a.ncols(), a.nrows());
    for k in 0..s.nrows() {
        let sk = s[k];
        if sk <= cutoff || sk == 0.0 {
            continue;
        }
        let inv = 1.0 / sk;
        for i in 0..a.nrows() {
            let ui = u[(i, k)] * inv;
            if ui == 0.0 {
                continue;
            }
            for j in 0..a.ncols() {
                out[(j, i)] += v[(j, k)] * ui;
            }
        }
    }
    Ok(out)
}

/// Default cutoff, `P·ε`.
pub fn default_rcond(basis: &BasisSpec) -> f64 {
    basis.total_size() as f64 * f64::EPSILON
}

/// Least-squares one-step map `K̂ = A₁·A₀†`.
pub fn estimate(pairs: &SnapshotPairs, dt: f64) -> Result<KoopmanMatrix> {
    if pairs.is_empty() {
        return Err(Error::TooFewSnapshots(pairs.len() + 1));
    }
    if pairs.a0.ncols() != pairs.a1.ncols() || pairs.a0.nrows() != pairs.a1.nrows() {
        return Err(Error::ShapeMismatch {
            expected: pairs.a0.ncols(),
            found: pairs.a1.ncols(),
        });
    }
    pairs.basis.check_len(pairs.a0.nrows())?;
    if frobenius(&pairs.a0) == 0.0 {
        return Err(Error::DegenerateData);
    }
    let pinv = pseudo_inverse(&pairs.a0, default_rcond(&pairs.basis))?;
    let k = &pairs.a1 * &pinv;
    KoopmanMatrix::new(pairs.basis.clone(), dt, k, Provenance::DataDriven, None)
}

/// Eigenpairs with the normalization and ordering conventions of this module.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<c64>,
    /// Unit-norm eigenvectors, one per eigenvalue.
    pub eigenvectors: Vec<Vec<c64>>,
    /// `‖K·v_j − λ_j·v_j‖₂` for each pair.
    pub residuals: Vec<f64>,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// `λ_j·v_j` for every pair.
    pub fn scaled_vectors(&self) -> Vec<Vec<c64>> {
        self.eigenvalues
            .iter()
            .zip(&self.eigenvectors)
            .map(|(&l, v)| v.iter().map(|&x| l * x).collect())
            .collect()
    }
}

fn vec_norm(v: &[c64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Unit norm, then rotate so the first largest-modulus entry is real and ≥ 0.
pub(crate) fn normalize_phase(v: &mut [c64]) {
    let norm = vec_norm(v);
    if norm > 0.0 {
        for z in v.iter_mut() {
            *z /= norm;
        }
    }
    let mut pivot = 0;
    let mut best = -1.0;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm();
        if m > best {
            best = m;
            pivot = i;
        }
    }
    if best > 0.0 {
        let phase = v[pivot].conj() / best;
        for z in v.iter_mut() {
            *z *= phase;
        }
        v[pivot] = c64::new(v[pivot].re, 0.0);
    }
}

fn pair_order(a: (&c64, &[c64]), b: (&c64, &[c64])) -> Ordering {
    let (la, va) = a;
    let (lb, vb) = b;
    lb.norm()
        .total_cmp(&la.norm())
        .then(lb.re.total_cmp(&la.re))
        .then(lb.im.total_cmp(&la.im))
        .then_with(|| {
            for (x, y) in va.iter().zip(vb) {
                let c = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
                if c != Ordering::Equal {
                    return c;
                }
            }
            Ordering::Equal
        })
}

fn condition_error(k: &Mat<f64>, reason: String) -> Error {
    let (sigma_max, sigma_min) = match k.singular_values() {
        Ok(s) if !s.is_empty() => (
            s.iter().copied().fold(f64::MIN, f64::max),
            s.iter().copied().fold(f64::MAX, f64::min),
        ),
        _ => (f64::NAN, f64::NAN),
    };
    Error::Eigen {
        reason,
        frobenius: frobenius(k),
        sigma_max,
        sigma_min,
    }
}

/// Eigendecomposition of a real square matrix.
pub fn decompose_matrix(k: &Mat<f64>) -> Result<SpectralDecomposition> {
    if k.nrows() != k.ncols() {
        return Err(Error::ShapeMismatch {
            expected: k.nrows(),
            found: k.ncols(),
        });
    }
    if !all_finite(k) {
        return Err(Error::NonFinite("matrix to decompose"));
    }
    let n = k.nrows();
    let (values, vectors) =
        real_eigen(k).ok_or_else(|| condition_error(k, "QR iteration did not converge".into()))?;
    let mut pairs: Vec<(c64, Vec<c64>)> = values
        .into_iter()
        .zip(vectors)
        .map(|(l, mut v)| {
            normalize_phase(&mut v);
            (l, v)
        })
        .collect();
    if pairs
        .iter()
        .any(|(l, v)| !l.re.is_finite() || !l.im.is_finite() || vec_norm(v) == 0.0)
    {
        return Err(condition_error(k, "non-finite or null eigenpair".into()));
    }
    pairs.sort_by(|a, b| pair_order((&a.0, &a.1), (&b.0, &b.1)));

    let residuals = pairs
        .iter()
        .map(|(l, v)| {
            (0..n)
                .map(|i| {
                    let kv: c64 = (0..n).map(|j| v[j] * k[(i, j)]).sum();
                    (kv - l * v[i]).norm_sqr()
                })
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let (eigenvalues, eigenvectors) = pairs.into_iter().unzip();
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        residuals,
    })
}

pub fn decompose(k: &KoopmanMatrix) -> Result<SpectralDecomposition> {
    decompose_matrix(&k.entries)
}

/// Node-space Koopman modes `ξ_j = Cᵀ·v_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct KoopmanModes {
    pub modes: Vec<Vec<c64>>,
}

pub fn modes(dec: &SpectralDecomposition, basis: &BasisSpec) -> Result<KoopmanModes> {
    let modes = dec
        .eigenvectors
        .iter()
        .map(|v| {
            basis.check_len(v.len())?;
            let re = inverse(&CoeffVector::new(
                basis.clone(),
                v.iter().map(|z| z.re).collect(),
            )?)?;
            let im = inverse(&CoeffVector::new(
                basis.clone(),
                v.iter().map(|z| z.im).collect(),
            )?)?;
            Ok(re
                .values
                .into_iter()
                .zip(im.values)
                .map(|(r, i)| c64::new(r, i))
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(KoopmanModes { modes })
}
