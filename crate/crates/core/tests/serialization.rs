use proptest::prelude::*;
use speclink::io::to_json_string;
use speclink::koopman::decompose;
use speclink::operators::{builtin, derive_koopman};
use speclink::simulate::simulate;
use speclink::{
    BasisSpec, ConfusionMatrix, ExperimentConfig, InitialCondition, KoopmanMatrix, Mat, Metric,
    PhysicalParams, Provenance, SpectralDecomposition, Trajectory,
};

fn stable<T>(value: &T) -> String
where
    T: serde::Serialize + serde::de::DeserializeOwned,
{
    let first = to_json_string(value).unwrap();
    let parsed: T = serde_json::from_str(&first).unwrap();
    let second = to_json_string(&parsed).unwrap();
    assert_eq!(first, second);
    first
}

proptest! {
    #[test]
    fn koopman_matrix_round_trip(entries in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 16)) {
        let basis = BasisSpec::uniform(2, 2).unwrap();
        let m = Mat::from_fn(4, 4, |i, j| entries[i * 4 + j]);
        let k = KoopmanMatrix::new(basis, 1e-3, m, Provenance::DataDriven, None).unwrap();
        let text = stable(&k);
        let back: KoopmanMatrix = serde_json::from_str(&text).unwrap();
        // Bit-exact, including signed zeros.
        for i in 0..4 {
            for j in 0..4 {
                prop_assert_eq!(back.entries[(i, j)].to_bits(), k.entries[(i, j)].to_bits());
            }
        }
    }

    #[test]
    fn trajectory_round_trip(values in prop::collection::vec(-1e300f64..1e300, 12)) {
        let basis = BasisSpec::new(vec![2, 2]).unwrap();
        let snaps = values.chunks(4).map(|c| c.to_vec()).collect();
        let t = Trajectory::new(basis, 0.25, "custom".into(), snaps).unwrap();
        let text = stable(&t);
        let back: Trajectory = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, t);
    }
}

#[test]
fn spectral_decomposition_and_config_round_trip() {
    let basis = BasisSpec::uniform(2, 4).unwrap();
    let spec = builtin("advection-diffusion", PhysicalParams::default()).unwrap();
    let dec = decompose(&derive_koopman(&spec, &basis, 5e-4).unwrap()).unwrap();
    let text = stable(&dec);
    let back: SpectralDecomposition = serde_json::from_str(&text).unwrap();
    assert_eq!(back, dec);
    stable(&ExperimentConfig::paper_preset());
}

#[test]
fn simulated_trajectory_is_byte_stable() {
    let basis = BasisSpec::uniform(2, 4).unwrap();
    let spec = builtin("advection-y", PhysicalParams::default()).unwrap();
    let t = simulate(&spec, &InitialCondition::default(), &basis, 1e-2, 0.1).unwrap();
    let text = stable(&t);
    assert!(text.ends_with("}\n"));
}

#[test]
fn config_accepts_partial_documents() {
    let cfg: ExperimentConfig = serde_json::from_str(r#"{"T": 0.01, "seeds": [7]}"#).unwrap();
    assert_eq!(cfg.horizon, 0.01);
    assert_eq!(cfg.seeds, vec![7]);
    assert_eq!(cfg.basis, BasisSpec::uniform(2, 8).unwrap());
}

#[test]
fn csv_layout() {
    let table = ConfusionMatrix {
        metric: Metric::S,
        candidate_names: vec!["a".into(), "b".into()],
        true_names: vec!["a".into(), "b".into()],
        values: vec![vec![0.5, 1.0 / 3.0], vec![0.25, 2.0 / 3.0]],
    };
    let csv = table.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("candidate,a,b"));
    assert_eq!(lines.next(), Some("a,0.500000000,0.333333333"));
    assert_eq!(lines.next(), Some("b,0.250000000,0.666666667"));
}
