//! Confusion-matrix experiments: every true PDE is simulated, `K̂` is
//! estimated from its trajectory and scored against every candidate `K*`.
//!
//! Tables are laid out with one row per candidate and one column per true
//! PDE; cells are averaged over the initial-condition seeds.

use serde::{Deserialize, Serialize};

use crate::chebyshev::BasisSpec;
use crate::error::{Error, Result};
use crate::koopman::{build_pairs, decompose, default_rcond, estimate};
use crate::linking::{identify_prepared, PreparedCandidate};
use crate::operators::{builtin, builtin_library, derive_koopman, PdeSpec, PhysicalParams};
use crate::simulate::{simulate, InitialCondition};

/// A candidate given either by builtin name or as a full specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CandidateEntry {
    Builtin(String),
    Custom(PdeSpec),
}

/// Initial-condition family; seeds come from [`ExperimentConfig::seeds`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IcFamily {
    RandomSmooth {
        #[serde(default = "default_decay")]
        decay: f64,
    },
    /// A single deterministic Gaussian; seeds are ignored.
    Gaussian {
        center: Vec<f64>,
        width: f64,
        amplitude: f64,
    },
}

fn default_decay() -> f64 {
    0.7
}

impl Default for IcFamily {
    fn default() -> Self {
        IcFamily::RandomSmooth {
            decay: default_decay(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_basis")]
    pub basis: BasisSpec,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_horizon", alias = "T")]
    pub horizon: f64,
    #[serde(default)]
    pub params: PhysicalParams,
    /// Rows of the tables; `None` means the four builtin candidates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<CandidateEntry>>,
    /// Columns of the tables; `None` reuses the candidate set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truths: Option<Vec<CandidateEntry>>,
    #[serde(default)]
    pub ic: IcFamily,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Also run every true PDE once from the default Gaussian initial condition.
    #[serde(default = "default_true")]
    pub gaussian_reference: bool,
    /// Where reports are written; front ends may override it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
}

fn default_basis() -> BasisSpec {
    BasisSpec::uniform(2, 8).expect("8 is a valid resolution")
}

fn default_dt() -> f64 {
    5e-4
}

fn default_horizon() -> f64 {
    0.5
}

fn default_seeds() -> Vec<u64> {
    (1..=5).collect()
}

fn default_true() -> bool {
    true
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::paper_preset()
    }
}

impl ExperimentConfig {
    /// `M = 8` per axis on `[-1,1]²`, `Δt = 5·10⁻⁴`, `T = 0.5`, the four
    /// builtin candidates and random smooth initial conditions with seeds 1–5.
    pub fn paper_preset() -> Self {
        ExperimentConfig {
            basis: default_basis(),
            dt: default_dt(),
            horizon: default_horizon(),
            params: PhysicalParams::default(),
            candidates: None,
            truths: None,
            ic: IcFamily::default(),
            seeds: default_seeds(),
            gaussian_reference: true,
            out_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.horizon >= self.dt) {
            return Err(Error::InvalidParameter(format!(
                "horizon {} must be at least dt = {}",
                self.horizon, self.dt
            )));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidParameter("seed list is empty".into()));
        }
        for list in [self.candidate_specs()?, self.true_specs()?] {
            for (i, a) in list.iter().enumerate() {
                if a.dims != self.basis.dims() {
                    return Err(Error::InvalidParameter(format!(
                        "PDE `{}` is {}-dimensional but the basis has {} axes",
                        a.name,
                        a.dims,
                        self.basis.dims()
                    )));
                }
                if list[..i].iter().any(|b| b.name == a.name) {
                    return Err(Error::InvalidParameter(format!(
                        "duplicate PDE name `{}`",
                        a.name
                    )));
                }
            }
        }
        for ic in self.initial_conditions() {
            ic.1.validate(&self.basis)?;
        }
        Ok(())
    }

    fn resolve(&self, entries: &Option<Vec<CandidateEntry>>) -> Result<Vec<PdeSpec>> {
        match entries {
            None => builtin_library(self.basis.dims(), self.params),
            Some(list) => list
                .iter()
                .map(|e| match e {
                    CandidateEntry::Builtin(name) => builtin(name, self.params),
                    CandidateEntry::Custom(spec) => spec.validate().map(|_| spec.clone()),
                })
                .collect(),
        }
    }

    pub fn candidate_specs(&self) -> Result<Vec<PdeSpec>> {
        self.resolve(&self.candidates)
    }

    pub fn true_specs(&self) -> Result<Vec<PdeSpec>> {
        match &self.truths {
            None => self.candidate_specs(),
            some => self.resolve(some),
        }
    }

    /// `(seed, ic)` for every run of one true PDE.
    pub fn initial_conditions(&self) -> Vec<(Option<u64>, InitialCondition)> {
        match &self.ic {
            IcFamily::RandomSmooth { decay } => self
                .seeds
                .iter()
                .map(|&seed| (Some(seed), InitialCondition::RandomSmooth { seed, decay: *decay }))
                .collect(),
            IcFamily::Gaussian {
                center,
                width,
                amplitude,
            } => vec![(
                None,
                InitialCondition::Gaussian {
                    center: center.clone(),
                    width: *width,
                    amplitude: *amplitude,
                },
            )],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    D,
    S,
    Frobenius,
}

impl Metric {
    pub fn higher_is_better(self) -> bool {
        matches!(self, Metric::S)
    }
}

/// Rows are candidates, columns are true PDEs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfusionMatrix {
    pub metric: Metric,
    pub candidate_names: Vec<String>,
    pub true_names: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

/// Outcome of the per-column diagonal check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnCheck {
    pub true_name: String,
    /// Row of the candidate carrying the true PDE's name, if any.
    pub diagonal_row: Option<usize>,
    /// Row attaining the column's best value.
    pub best_row: usize,
    pub holds: bool,
}

impl ConfusionMatrix {
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[j]).collect()
    }

    /// Whether each column attains its best value (min, or max for `s`) on
    /// the row of the matching candidate. Ties count as holding.
    pub fn diagonal_checks(&self) -> Vec<ColumnCheck> {
        (0..self.true_names.len())
            .map(|j| {
                let col = self.column(j);
                let mut best_row = 0;
                for (i, &v) in col.iter().enumerate() {
                    let better = if self.metric.higher_is_better() {
                        v > col[best_row]
                    } else {
                        v < col[best_row]
                    };
                    if better {
                        best_row = i;
                    }
                }
                let diagonal_row = self.candidate_names.iter().position(|n| *n == self.true_names[j]);
                let holds = diagonal_row.is_some_and(|r| col[r] == col[best_row]);
                ColumnCheck {
                    true_name: self.true_names[j].clone(),
                    diagonal_row,
                    best_row,
                    holds,
                }
            })
            .collect()
    }

    pub fn diagonal_dominant(&self) -> bool {
        self.diagonal_checks().iter().all(|c| c.holds)
    }
}

/// One (true PDE, seed, candidate) evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellDetail {
    pub truth: String,
    pub candidate: String,
    pub seed: Option<u64>,
    pub d: f64,
    pub s: f64,
    pub frobenius: f64,
    pub d_matches: Vec<usize>,
    pub s_matches: Vec<Option<usize>>,
}

/// Diagnostics for one estimated `K̂`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunDetail {
    pub truth: String,
    pub seed: Option<u64>,
    pub snapshots: usize,
    /// Numerical rank of `A₀` at the estimation cutoff.
    pub data_rank: usize,
    pub max_residual: f64,
    /// Winner of the `s` ranking.
    pub verdict: String,
    pub rankings_disagree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfusionTables {
    pub d: ConfusionMatrix,
    pub s: ConfusionMatrix,
    pub frobenius: ConfusionMatrix,
    pub runs: Vec<RunDetail>,
    pub cells: Vec<CellDetail>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateSpectrum {
    pub name: String,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfusionReport {
    pub config: ExperimentConfig,
    pub candidates: Vec<CandidateSpectrum>,
    #[serde(flatten)]
    pub tables: ConfusionTables,
    /// Same protocol from the default Gaussian initial condition only.
    pub gaussian_reference: Option<ConfusionTables>,
}

fn wrap(truth: &str, candidate: &str, seed: Option<u64>) -> impl FnOnce(Error) -> Error {
    let (truth, candidate) = (truth.to_string(), candidate.to_string());
    move |e| Error::Experiment {
        truth,
        candidate,
        seed,
        source: Box::new(e),
    }
}

fn run_tables(
    config: &ExperimentConfig,
    candidates: &[PreparedCandidate],
    truths: &[PdeSpec],
    ics: &[(Option<u64>, InitialCondition)],
) -> Result<ConfusionTables> {
    let rows = candidates.len();
    let cols = truths.len();
    let mut d = vec![vec![0.0; cols]; rows];
    let mut s = vec![vec![0.0; cols]; rows];
    let mut frob = vec![vec![0.0; cols]; rows];
    let mut runs = Vec::new();
    let mut cells = Vec::new();
    let weight = 1.0 / ics.len() as f64;

    for (j, truth) in truths.iter().enumerate() {
        for (seed, ic) in ics {
            let err = || wrap(&truth.name, "-", *seed);
            let traj = simulate(truth, ic, &config.basis, config.dt, config.horizon).map_err(err())?;
            let pairs = build_pairs(&traj).map_err(err())?;
            let mut hat = estimate(&pairs, config.dt).map_err(err())?;
            hat.label = Some(truth.name.clone());
            let spectrum = decompose(&hat).map_err(err())?;
            let ident = identify_prepared(&hat, &spectrum, candidates).map_err(err())?;
            let singular = pairs
                .a0
                .singular_values()
                .map_err(|e| err()(Error::Svd(format!("{e:?}"))))?;
            let sigma_max = singular.iter().copied().fold(0.0, f64::max);
            let cutoff = default_rcond(&config.basis) * sigma_max;
            runs.push(RunDetail {
                truth: truth.name.clone(),
                seed: *seed,
                snapshots: traj.len(),
                data_rank: singular.iter().filter(|&&x| x > cutoff).count(),
                max_residual: spectrum.max_residual(),
                verdict: ident.verdict.clone(),
                rankings_disagree: ident.rankings_disagree,
            });
            for (i, score) in ident.scores.into_iter().enumerate() {
                d[i][j] += weight * score.d;
                s[i][j] += weight * score.s;
                frob[i][j] += weight * score.frobenius;
                cells.push(CellDetail {
                    truth: truth.name.clone(),
                    candidate: score.name,
                    seed: *seed,
                    d: score.d,
                    s: score.s,
                    frobenius: score.frobenius,
                    d_matches: score.link.d_matches,
                    s_matches: score.link.s_matches,
                });
            }
        }
    }
    let candidate_names: Vec<String> = candidates.iter().map(|c| c.spec.name.clone()).collect();
    let true_names: Vec<String> = truths.iter().map(|t| t.name.clone()).collect();
    let table = |metric, values| ConfusionMatrix {
        metric,
        candidate_names: candidate_names.clone(),
        true_names: true_names.clone(),
        values,
    };
    Ok(ConfusionTables {
        d: table(Metric::D, d),
        s: table(Metric::S, s),
        frobenius: table(Metric::Frobenius, frob),
        runs,
        cells,
    })
}

/// Runs the full candidate × truth × seed protocol.
pub fn confusion_experiment(config: &ExperimentConfig) -> Result<ConfusionReport> {
    config.validate()?;
    let specs = config.candidate_specs()?;
    let truths = config.true_specs()?;
    let candidates = specs
        .into_iter()
        .map(|spec| {
            let name = spec.name.clone();
            derive_koopman(&spec, &config.basis, config.dt)
                .and_then(|k| PreparedCandidate::new(spec, k))
                .map_err(wrap("-", &name, None))
        })
        .collect::<Result<Vec<_>>>()?;

    let tables = run_tables(config, &candidates, &truths, &config.initial_conditions())?;
    let gaussian_reference = if config.gaussian_reference && !matches!(config.ic, IcFamily::Gaussian { .. }) {
        let ic = InitialCondition::Gaussian {
            center: vec![0.0; config.basis.dims()],
            width: 0.3,
            amplitude: 1.0,
        };
        Some(run_tables(config, &candidates, &truths, &[(None, ic)])?)
    } else {
        None
    };
    Ok(ConfusionReport {
        config: config.clone(),
        candidates: candidates
            .iter()
            .map(|c| CandidateSpectrum {
                name: c.spec.name.clone(),
                max_residual: c.spectrum.max_residual(),
            })
            .collect(),
        tables,
        gaussian_reference,
    })
}
