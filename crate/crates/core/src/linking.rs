//! Spectrum linking between an equation-driven `K*` and a data-driven `K̂`.
//!
//! Both metrics compare eigenvalue-scaled eigenvectors `λ_i v_i`:
//!
//! * distance `d = (1/P) Σ_i min_j ‖λ*_i v*_i − λ̂_j v̂_j‖₂` (lower is better),
//! * similarity `s = (1/P) Σ_i max_j |⟨λ*_i v*_i, λ̂_j v̂_j⟩| / (‖·‖ ‖·‖)` (higher is better).
//!
//! Each star pair is matched independently; there is no one-to-one assignment.

use faer::c64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::koopman::{decompose, SpectralDecomposition};
use crate::linalg::frobenius;
use crate::operators::{KoopmanMatrix, PdeSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkScore {
    pub d: f64,
    pub s: f64,
    /// For each star pair, the hat pair attaining the minimum distance.
    pub d_matches: Vec<usize>,
    /// For each star pair, the hat pair attaining the maximum similarity;
    /// `None` when every candidate term was skipped.
    pub s_matches: Vec<Option<usize>>,
}

fn check_dims(star: &SpectralDecomposition, hat: &SpectralDecomposition) -> Result<()> {
    let p = star.len();
    if hat.len() != p {
        return Err(Error::ShapeMismatch {
            expected: p,
            found: hat.len(),
        });
    }
    for v in star.eigenvectors.iter().chain(&hat.eigenvectors) {
        if v.len() != p {
            return Err(Error::ShapeMismatch {
                expected: p,
                found: v.len(),
            });
        }
    }
    if p == 0 {
        return Err(Error::InvalidParameter("empty decomposition".into()));
    }
    Ok(())
}

fn norm(v: &[c64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn distance(x: &[c64], y: &[c64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `|⟨x, y⟩|` with conjugation on `x`.
fn abs_inner(x: &[c64], y: &[c64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum::<c64>().norm()
}

pub fn link_score(star: &SpectralDecomposition, hat: &SpectralDecomposition) -> Result<LinkScore> {
    check_dims(star, hat)?;
    let xs = star.scaled_vectors();
    let ys = hat.scaled_vectors();
    let y_norms: Vec<f64> = ys.iter().map(|y| norm(y)).collect();
    let p = xs.len() as f64;

    let mut d_sum = 0.0;
    let mut s_sum = 0.0;
    let mut d_matches = Vec::with_capacity(xs.len());
    let mut s_matches = Vec::with_capacity(xs.len());
    for x in &xs {
        let (mut best_d, mut arg_d) = (f64::INFINITY, 0);
        for (j, y) in ys.iter().enumerate() {
            let dist = distance(x, y);
            if dist < best_d {
                best_d = dist;
                arg_d = j;
            }
        }
        d_sum += best_d;
        d_matches.push(arg_d);

        let x_norm = norm(x);
        let mut best_s: Option<(f64, usize)> = None;
        if x_norm > 0.0 {
            for (j, y) in ys.iter().enumerate() {
                if y_norms[j] == 0.0 {
                    continue;
                }
                let sim = (abs_inner(x, y) / (x_norm * y_norms[j])).min(1.0);
                if best_s.is_none_or(|(b, _)| sim > b) {
                    best_s = Some((sim, j));
                }
            }
        }
        s_sum += best_s.map_or(0.0, |(v, _)| v);
        s_matches.push(best_s.map(|(_, j)| j));
    }
    Ok(LinkScore {
        d: d_sum / p,
        s: s_sum / p,
        d_matches,
        s_matches,
    })
}

pub fn distance_d(star: &SpectralDecomposition, hat: &SpectralDecomposition) -> Result<f64> {
    link_score(star, hat).map(|l| l.d)
}

pub fn similarity_s(star: &SpectralDecomposition, hat: &SpectralDecomposition) -> Result<f64> {
    link_score(star, hat).map(|l| l.s)
}

/// A candidate with its equation-driven matrix and spectrum precomputed.
#[derive(Debug, Clone)]
pub struct PreparedCandidate {
    pub spec: PdeSpec,
    pub koopman: KoopmanMatrix,
    pub spectrum: SpectralDecomposition,
}

impl PreparedCandidate {
    pub fn new(spec: PdeSpec, koopman: KoopmanMatrix) -> Result<Self> {
        let spectrum = decompose(&koopman)?;
        Ok(PreparedCandidate {
            spec,
            koopman,
            spectrum,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateScore {
    pub name: String,
    pub d: f64,
    pub s: f64,
    /// `‖K̂ − K*‖_F`.
    pub frobenius: f64,
    #[serde(skip)]
    pub link: LinkScore,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Identification {
    pub scores: Vec<CandidateScore>,
    /// Candidate indices by ascending `d`.
    pub by_d: Vec<usize>,
    /// Candidate indices by descending `s`.
    pub by_s: Vec<usize>,
    /// Candidate indices by ascending Frobenius discrepancy.
    pub by_frobenius: Vec<usize>,
    /// Name of the `s`-ranking winner.
    pub verdict: String,
    /// True when the three rankings disagree on the winner.
    pub rankings_disagree: bool,
}

fn ranking(values: &[f64], descending: bool) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        let c = values[a].total_cmp(&values[b]);
        if descending { c.reverse() } else { c }.then(a.cmp(&b))
    });
    idx
}

/// Scores `K̂` against prepared candidates.
pub fn identify_prepared(
    hat: &KoopmanMatrix,
    hat_spectrum: &SpectralDecomposition,
    candidates: &[PreparedCandidate],
) -> Result<Identification> {
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("no candidates to compare against".into()));
    }
    let mut scores = Vec::with_capacity(candidates.len());
    for c in candidates {
        hat.basis.check_same(&c.koopman.basis)?;
        let link = link_score(&c.spectrum, hat_spectrum)?;
        scores.push(CandidateScore {
            name: c.spec.name.clone(),
            d: link.d,
            s: link.s,
            frobenius: frobenius(&(&hat.entries - &c.koopman.entries)),
            link,
        });
    }
    let by_d = ranking(&scores.iter().map(|s| s.d).collect::<Vec<_>>(), false);
    let by_s = ranking(&scores.iter().map(|s| s.s).collect::<Vec<_>>(), true);
    let by_frobenius = ranking(&scores.iter().map(|s| s.frobenius).collect::<Vec<_>>(), false);
    let rankings_disagree = by_d[0] != by_s[0] || by_s[0] != by_frobenius[0];
    Ok(Identification {
        verdict: scores[by_s[0]].name.clone(),
        scores,
        by_d,
        by_s,
        by_frobenius,
        rankings_disagree,
    })
}

/// Decomposes `K̂` and every candidate `K*`, then ranks the candidates.
pub fn identify(hat: &KoopmanMatrix, candidates: &[(PdeSpec, KoopmanMatrix)]) -> Result<Identification> {
    let prepared = candidates
        .iter()
        .map(|(s, k)| PreparedCandidate::new(s.clone(), k.clone()))
        .collect::<Result<Vec<_>>>()?;
    let hat_spectrum = decompose(hat)?;
    identify_prepared(hat, &hat_spectrum, &prepared)
}
