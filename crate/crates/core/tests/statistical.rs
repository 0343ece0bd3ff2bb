//! Seeded statistical checks. Each scenario runs 20 fixed seeds and
//! requires the expected outcome in at least 18 of them.

use mbrank_core::iamb::{correlation_matrix, iamb_report, is_iamb_consistent, partial_correlation, DEFAULT_ALPHA};
use mbrank_core::synth::TARGET_COLUMN;
use mbrank_core::{
    backward_eliminate, bahsic_eliminate, forward_select, gen_mb_dataset, iamb, DataMatrix, KernelSpec, MeasureKind,
    SynthConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const SEEDS: u64 = 20;
const REQUIRED: usize = 18;

fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

fn count_seeds(mut f: impl FnMut(&mut ChaCha8Rng, u64) -> bool) -> usize {
    (0..SEEDS)
        .filter(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            f(&mut rng, s)
        })
        .count()
}

/// Columns `[X1, X2, Y]` with `Y = X1 + noise` and `X2` independent.
fn parent_and_noise(rng: &mut ChaCha8Rng, n: usize) -> DataMatrix {
    let x1 = normals(rng, n);
    let x2 = normals(rng, n);
    let y: Vec<f64> = x1.iter().zip(normals(rng, n)).map(|(a, e)| a + e).collect();
    DataMatrix::from_columns(&[x1, x2, y]).unwrap()
}

#[test]
fn backward_drops_noise_first() {
    for kind in [MeasureKind::M1, MeasureKind::M2] {
        let hits = count_seeds(|rng, _| {
            let data = parent_and_noise(rng, 1000);
            backward_eliminate(&data, 2, kind, &KernelSpec::linear(), 0.0).unwrap().order()[0] == 1
        });
        assert!(hits >= REQUIRED, "{kind}: {hits}/{SEEDS}");
    }
}

#[test]
fn forward_picks_parent_first() {
    for kind in [MeasureKind::M1, MeasureKind::M2] {
        let hits = count_seeds(|rng, _| {
            let data = parent_and_noise(rng, 1000);
            forward_select(&data, 2, kind, &KernelSpec::linear(), Some(1)).unwrap().order() == [0]
        });
        assert!(hits >= REQUIRED, "{kind}: {hits}/{SEEDS}");
    }
}

#[test]
fn bahsic_keeps_copy_of_target_last() {
    for spec in [KernelSpec::linear(), KernelSpec::gaussian_median()] {
        let hits = count_seeds(|rng, _| {
            let n = 200;
            let y = normals(rng, n);
            let mut cols: Vec<Vec<f64>> = (0..4).map(|_| normals(rng, n)).collect();
            cols.insert(2, y.clone());
            cols.push(y);
            let data = DataMatrix::from_columns(&cols).unwrap();
            let r = bahsic_eliminate(&data, 5, &spec).unwrap();
            r.order().last() == Some(&2)
        });
        assert!(hits >= REQUIRED, "{hits}/{SEEDS}");
    }
}

#[test]
fn iamb_on_pure_noise_is_empty() {
    let hits = count_seeds(|rng, _| {
        let n = 2000;
        let data = DataMatrix::from_columns(&[normals(rng, n), normals(rng, n)]).unwrap();
        iamb(&data, 1, DEFAULT_ALPHA).unwrap().members.is_empty()
    });
    assert!(hits >= REQUIRED, "{hits}/{SEEDS}");
}

#[test]
fn iamb_recovers_chain_neighbours() {
    let hits = count_seeds(|rng, _| {
        let n = 2000;
        let x1 = normals(rng, n);
        let y: Vec<f64> = x1.iter().zip(normals(rng, n)).map(|(a, e)| a + e).collect();
        let x2: Vec<f64> = y.iter().zip(normals(rng, n)).map(|(a, e)| a + e).collect();
        let x3 = normals(rng, n);
        let data = DataMatrix::from_columns(&[x1, y, x2, x3]).unwrap();
        iamb(&data, 1, DEFAULT_ALPHA).unwrap().members.into_iter().collect::<Vec<_>>() == [0, 2]
    });
    assert!(hits >= REQUIRED, "{hits}/{SEEDS}");
}

#[test]
fn iamb_output_is_a_fixed_point() {
    for seed in 0..SEEDS {
        let cfg = SynthConfig { n_samples: 300, seed, ..Default::default() };
        let (data, truth) = gen_mb_dataset(&cfg).unwrap();
        let report = iamb_report(&data, truth.target, DEFAULT_ALPHA).unwrap();
        assert!(report.rounds < 2 * data.n_vars() + 2, "seed {seed} hit the round cap");
        assert!(is_iamb_consistent(&data, truth.target, DEFAULT_ALPHA, &report.subset), "seed {seed}");
    }
}

#[test]
fn spouse_is_a_collider() {
    let hits = count_seeds(|_, seed| {
        let (data, _) = gen_mb_dataset(&SynthConfig { n_samples: 5000, seed, ..Default::default() }).unwrap();
        let corr = correlation_matrix(&data);
        let (s1, c1, y) = (data.index_of("S1").unwrap(), data.index_of("C1").unwrap(), TARGET_COLUMN);
        let marginal = corr[(s1, y)].abs();
        let given_child = partial_correlation(&corr, s1, y, &[c1]).unwrap().abs();
        marginal < 0.1 && given_child > 0.2
    });
    assert!(hits >= REQUIRED, "{hits}/{SEEDS}");
}

#[test]
fn root_moments() {
    let n = 500;
    let tol = 4.0 / (n as f64).sqrt();
    for seed in 0..SEEDS {
        let (data, _) = gen_mb_dataset(&SynthConfig { n_samples: n, seed, ..Default::default() }).unwrap();
        for name in ["P1", "P2", "S1", "S2", "E1", "E5", "E10"] {
            let col = data.column(data.index_of(name).unwrap());
            let mean = col.iter().sum::<f64>() / n as f64;
            let sd = (col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
            assert!(mean.abs() < tol, "{name} seed {seed}: mean {mean}");
            assert!((0.8..=1.2).contains(&sd), "{name} seed {seed}: sd {sd}");
        }
    }
}

#[test]
fn extraneous_columns_independent_of_target() {
    let n = 500;
    let tol = 4.0 / (n as f64).sqrt();
    let hits = count_seeds(|_, seed| {
        let (data, _) = gen_mb_dataset(&SynthConfig { n_samples: n, seed, ..Default::default() }).unwrap();
        let corr = correlation_matrix(&data);
        (7..data.n_vars()).all(|j| corr[(j, TARGET_COLUMN)].abs() < tol)
    });
    assert!(hits * 10 >= SEEDS as usize * 9, "{hits}/{SEEDS}");
}

#[test]
fn base_topology_mb_ranked_last() {
    for kind in [MeasureKind::M1, MeasureKind::M2] {
        let hits = (0..10)
            .filter(|&seed| {
                let (data, truth) = gen_mb_dataset(&SynthConfig { n_samples: 300, seed, ..Default::default() }).unwrap();
                let r = backward_eliminate(&data, truth.target, kind, &KernelSpec::linear(), 0.0).unwrap();
                r.order()[r.len() - 6..].iter().all(|v| truth.contains(*v))
            })
            .count();
        assert!(hits >= 8, "{kind}: {hits}/10");
    }
}
