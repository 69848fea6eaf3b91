use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;
use speclink::experiment::{confusion_experiment, ConfusionReport, IcFamily};
use speclink::io::{read_json, to_json_string, write_json};
use speclink::koopman::{build_pairs, decompose, estimate as estimate_koopman, SpectralDecomposition};
use speclink::linalg::frobenius;
use speclink::linking::link_score;
use speclink::operators::{assemble_generator, builtin, derive_koopman, matrix_exponential};
use speclink::simulate::{exact_propagate, integrate, make_ic, step_count};
use speclink::{
    BasisSpec, Error, ExperimentConfig, InitialCondition, KoopmanMatrix, PdeSpec, PhysicalParams, Result,
    Trajectory,
};

use crate::{CompareArgs, ConfusionArgs, DeriveArgs, EstimateArgs, IcKind, ModelArgs, Preset, SimulateArgs};

fn resolve(out_dir: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        out_dir.join(path)
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    Ok(())
}

struct Model {
    spec: PdeSpec,
    basis: BasisSpec,
    dt: f64,
}

impl ModelArgs {
    fn resolve(&self, out_dir: &Path) -> Result<Model> {
        let (resolution, dims, dt) = match self.preset {
            Some(Preset::Paper) => (8, 2, 5e-4),
            None => (self.resolution, self.dims, self.dt),
        };
        let basis = BasisSpec::uniform(dims, resolution)?;
        let params = PhysicalParams {
            cx: self.cx,
            cy: self.cy,
            nu: self.nu,
        };
        let spec = match (&self.pde, &self.pde_file) {
            (Some(name), _) => builtin(name, params)?,
            (None, Some(file)) => {
                let spec: PdeSpec = read_json(resolve(out_dir, file))?;
                spec.validate()?;
                spec
            }
            (None, None) => {
                return Err(Error::InvalidParameter(
                    "one of --pde or --pde-file is required".into(),
                ));
            }
        };
        Ok(Model { spec, basis, dt })
    }
}

pub fn simulate(out_dir: &Path, args: &SimulateArgs) -> Result<()> {
    let model = args.model.resolve(out_dir)?;
    let horizon = match args.model.preset {
        Some(Preset::Paper) => 0.5,
        None => args.horizon,
    };
    let ic = match args.ic {
        IcKind::Gaussian => InitialCondition::Gaussian {
            center: vec![0.0; model.basis.dims()],
            width: args.width,
            amplitude: args.amplitude,
        },
        IcKind::RandomSmooth => InitialCondition::RandomSmooth {
            seed: args.seed,
            decay: args.decay,
        },
    };
    let steps = step_count(model.dt, horizon)?;
    let a0 = make_ic(&ic, &model.basis)?;
    let traj = if args.exact {
        let k = derive_koopman(&model.spec, &model.basis, model.dt)?;
        exact_propagate(&k, &a0, steps)?
    } else {
        let n = assemble_generator(&model.spec, &model.basis)?;
        integrate(&n, &a0, model.dt, steps, &model.spec.name)?
    };
    let path = resolve(out_dir, &args.out);
    ensure_parent(&path)?;
    write_json(&path, &traj)?;
    println!(
        "{}",
        json!({
            "snapshots": traj.len(),
            "final_norm": traj.last().norm(),
            "path": path.display().to_string(),
        })
    );
    Ok(())
}

pub fn derive(out_dir: &Path, args: &DeriveArgs) -> Result<()> {
    let model = args.model.resolve(out_dir)?;
    let n = assemble_generator(&model.spec, &model.basis)?;
    let mut k = matrix_exponential(&n, model.dt)?;
    k.label = Some(model.spec.name.clone());
    let path = resolve(out_dir, &args.out);
    ensure_parent(&path)?;
    write_json(&path, &k)?;
    println!(
        "{}",
        json!({
            "pde": model.spec.name,
            "size": model.basis.total_size(),
            "frobenius": frobenius(&k.entries),
            "path": path.display().to_string(),
        })
    );
    Ok(())
}

pub fn estimate(out_dir: &Path, args: &EstimateArgs) -> Result<()> {
    let traj: Trajectory = read_json(resolve(out_dir, &args.input))?;
    let pairs = build_pairs(&traj)?;
    let mut k = estimate_koopman(&pairs, traj.dt)?;
    k.label = Some(traj.pde_name.clone());
    let path = resolve(out_dir, &args.out);
    ensure_parent(&path)?;
    write_json(&path, &k)?;
    println!(
        "{}",
        json!({
            "pde": traj.pde_name,
            "transitions": pairs.len(),
            "frobenius": frobenius(&k.entries),
            "path": path.display().to_string(),
        })
    );
    Ok(())
}

fn residual_summary(side: &str, dec: &SpectralDecomposition) -> serde_json::Value {
    let mean = dec.residuals.iter().sum::<f64>() / dec.residuals.len() as f64;
    json!({
        "residuals": side,
        "max": dec.max_residual(),
        "mean": mean,
        "pairs": dec.len(),
    })
}

pub fn compare(out_dir: &Path, args: &CompareArgs) -> Result<()> {
    let star: KoopmanMatrix = read_json(resolve(out_dir, &args.star))?;
    let hat: KoopmanMatrix = read_json(resolve(out_dir, &args.hat))?;
    star.basis.check_same(&hat.basis)?;
    let star_dec = decompose(&star)?;
    let hat_dec = decompose(&hat)?;
    let score = link_score(&star_dec, &hat_dec)?;
    println!("{}", json!({"metric": "d", "value": score.d}));
    println!("{}", json!({"metric": "s", "value": score.s}));
    println!(
        "{}",
        json!({"metric": "frobenius", "value": frobenius(&(&hat.entries - &star.entries))})
    );
    println!("{}", residual_summary("star", &star_dec));
    println!("{}", residual_summary("hat", &hat_dec));
    Ok(())
}

fn print_checks(label: &str, report: &ConfusionReport) {
    let tables = [
        ("d", &report.tables.d),
        ("s", &report.tables.s),
        ("frobenius", &report.tables.frobenius),
    ];
    for (metric, table) in tables {
        for check in table.diagonal_checks() {
            println!(
                "{}",
                json!({
                    "report": label,
                    "metric": metric,
                    "true": check.true_name,
                    "best": table.candidate_names[check.best_row],
                    "diagonal_dominant": check.holds,
                })
            );
        }
    }
}

pub fn confusion(out_dir: &Path, args: &ConfusionArgs) -> Result<()> {
    let mut config = match (&args.config, args.preset) {
        (Some(path), _) => read_json::<ExperimentConfig>(resolve(out_dir, path))?,
        (None, _) => ExperimentConfig::paper_preset(),
    };
    if args.preset == Some(Preset::Paper) {
        let preset = ExperimentConfig::paper_preset();
        config.basis = preset.basis;
        config.dt = preset.dt;
        config.horizon = preset.horizon;
        config.candidates = None;
        config.truths = None;
    }
    if let IcFamily::RandomSmooth { .. } = config.ic {
        if config.seeds.is_empty() {
            return Err(Error::InvalidParameter("seed list is empty".into()));
        }
    }
    let target = match &config.out_dir {
        Some(dir) if out_dir == Path::new(".") => resolve(out_dir, Path::new(dir)),
        _ => out_dir.to_path_buf(),
    };
    let report = confusion_experiment(&config)?;
    fs::create_dir_all(&target)?;
    report.tables.d.write_csv(target.join("confusion_d.csv"))?;
    report.tables.s.write_csv(target.join("confusion_s.csv"))?;
    fs::write(target.join("detail.json"), to_json_string(&report)?)?;
    print_checks("seeds", &report);
    Ok(())
}
