use std::f64::consts::PI;

use dqc_core::central_spin::{CouplingMatrix, ModelConfig};
use dqc_core::dissipation::DissipativeMode;
use dqc_core::exec::Parallelism;
use dqc_core::experiments::{accuracy, generate_dataset, roc, Boundary, LabeledSample};
use dqc_core::training::{
    self, cross_entropy, grad_fd, predict, state_prep_loss, train_classifier, ParamVector, Schedule, TrainOptions,
};
use dqc_core::qcore::DensityMatrix;
use dqc_core::Error;

#[test]
fn fd_gradient_agrees_with_a_forward_stencil() {
    let target = DensityMatrix::from_bloch(training::random_pure_bloch(5)).unwrap();
    for seed in 0..5 {
        let cfg = ModelConfig::seeded(2, 100.0, seed).unwrap();
        let p = ParamVector::from_config(&cfg, true);
        let f = |x: &[f64]| {
            let q = ParamVector { values: x.to_vec(), ..p.clone() };
            state_prep_loss(&q.to_config(&cfg)?, &target)
        };
        let central = grad_fd(f, &p.values, 1e-4, Parallelism::Rayon).unwrap();
        let f0 = f(&p.values).unwrap();
        let h = 1e-5;
        let forward: Vec<f64> = (0..p.values.len())
            .map(|i| {
                let mut q = p.values.clone();
                q[i] += h;
                (f(&q).unwrap() - f0) / h
            })
            .collect();
        let scale = forward.iter().map(|g| g.abs()).fold(0.0, f64::max);
        for (a, b) in central.iter().zip(&forward) {
            assert!((a - b).abs() <= 1e-3 * scale, "seed {seed}: {a} vs {b}");
        }
    }
}

#[test]
fn separable_toy_set_is_learned() {
    let data = [
        LabeledSample { theta1: 0.3, theta2: 2.9, label: 1 },
        LabeledSample { theta1: 2.8, theta2: 2.6, label: 1 },
        LabeledSample { theta1: 0.2, theta2: 0.3, label: 0 },
        LabeledSample { theta1: 2.9, theta2: 0.1, label: 0 },
    ];
    let init = training::initial_classifier_config(1.0, 100.0, 0).unwrap();
    let opts = TrainOptions {
        epochs: 200,
        schedule: Schedule::Constant { eta: 0.05 },
        fd_step: training::FD_STEP,
        parallelism: Parallelism::Sequential,
    };
    let rec = train_classifier(&data, &init, &opts, 10.0).unwrap();
    let preds: Vec<u8> = data.iter().map(|s| predict(&rec.config, s, 10.0).unwrap().1).collect();
    let labels: Vec<u8> = data.iter().map(|s| s.label).collect();
    assert_eq!(accuracy(&preds, &labels).unwrap(), 1.0);
    assert!(rec.final_loss < rec.epochs[0].loss);
}

#[test]
fn classifier_training_only_moves_couplings() {
    let data = generate_dataset(&Boundary::linear(), 20, 1).unwrap();
    let init = training::initial_classifier_config(1.0, 100.0, 3).unwrap();
    let opts = TrainOptions {
        epochs: 3,
        schedule: Schedule::Constant { eta: 0.05 },
        fd_step: training::FD_STEP,
        parallelism: Parallelism::Rayon,
    };
    let rec = train_classifier(&data, &init, &opts, 10.0).unwrap();
    assert_eq!(rec.params.values.len(), 18);
    assert_eq!(rec.config.modes(), init.modes());
    assert_ne!(rec.config.couplings(), init.couplings());
    assert_eq!(rec.epochs.len(), 3);
}

#[test]
fn near_perfect_predictions_cost_nothing() {
    // identity couplings with both modes at a pole pin ⟨σ_z⟩ to ±1
    let cfg = ModelConfig::new(
        vec![CouplingMatrix::identity(); 2],
        vec![DissipativeMode::new(0.0, 0.0, 1.0).unwrap(); 2],
        100.0,
    )
    .unwrap();
    let up = LabeledSample { theta1: 0.0, theta2: 0.0, label: 1 };
    let down = LabeledSample { theta1: PI, theta2: PI, label: 0 };
    let (p_up, c_up) = predict(&cfg, &up, 40.0).unwrap();
    let (p_down, c_down) = predict(&cfg, &down, 40.0).unwrap();
    assert_eq!((c_up, c_down), (1, 0));
    assert!(p_up > 1.0 - 1e-12 && p_down < 1e-12);
    assert!(cross_entropy(&cfg, &[up, down], 40.0, Parallelism::Sequential).unwrap() < 1e-12);
}

#[test]
fn training_errors_name_the_epoch() {
    let data = generate_dataset(&Boundary::linear(), 5, 1).unwrap();
    // decoupled couplings leave the central qubit without a unique steady state
    let cfg = ModelConfig::new(
        vec![CouplingMatrix::zero(); 2],
        vec![DissipativeMode::new(0.0, 0.0, 1.0).unwrap(); 2],
        100.0,
    )
    .unwrap();
    let opts = TrainOptions {
        epochs: 2,
        schedule: Schedule::Constant { eta: 0.05 },
        fd_step: training::FD_STEP,
        parallelism: Parallelism::Sequential,
    };
    let err = train_classifier(&data, &cfg, &opts, 10.0).unwrap_err();
    assert!(matches!(err, Error::Training { epoch: 0, .. }), "{err}");
    assert!(err.is_numerical());
    assert!(err.to_string().starts_with("training failed at epoch 0"));
}

#[test]
fn dataset_examples() {
    let b = Boundary::linear();
    assert_eq!(b.label(0.0, PI), 0);
    assert_eq!(b.label(PI / 2.0, PI), 1);
    let a = generate_dataset(&b, 100, 1).unwrap();
    assert_eq!(a, generate_dataset(&b, 100, 1).unwrap());
    assert_ne!(a, generate_dataset(&b, 100, 2).unwrap());
    assert!(matches!(generate_dataset(&b, 0, 1), Err(Error::EmptyDataset)));
}

#[test]
fn accuracy_examples() {
    assert_eq!(accuracy(&[1, 0, 1], &[1, 0, 1]).unwrap(), 1.0);
    assert_eq!(accuracy(&[1, 0, 1], &[0, 1, 0]).unwrap(), 0.0);
    assert_eq!(accuracy(&[1, 0, 1, 1], &[1, 0, 0, 1]).unwrap(), 0.75);
    assert!(matches!(accuracy(&[1], &[1, 0]), Err(Error::LengthMismatch(1, 2))));
    assert!(matches!(accuracy(&[], &[]), Err(Error::EmptyDataset)));
}

#[test]
fn roc_examples() {
    let labels = [0, 0, 1, 1, 0, 1];
    let perfect = [0.1, 0.2, 0.8, 0.9, 0.3, 0.7];
    assert_eq!(roc(&perfect, &labels).unwrap().auc, 1.0);
    let inverted: Vec<f64> = perfect.iter().map(|p| 1.0 - p).collect();
    assert_eq!(roc(&inverted, &labels).unwrap().auc, 0.0);
    assert!(matches!(roc(&[0.1, 0.2], &[1, 1]), Err(Error::SingleClassDataset)));

    // labels drawn independently of the scores
    let data = generate_dataset(&Boundary::quadratic(), 4000, 9).unwrap();
    let scores: Vec<f64> = generate_dataset(&Boundary::linear(), 4000, 10).unwrap().iter().map(|s| s.theta1).collect();
    let labels: Vec<u8> = data.iter().map(|s| s.label).collect();
    assert!((roc(&scores, &labels).unwrap().auc - 0.5).abs() <= 0.05);
}
