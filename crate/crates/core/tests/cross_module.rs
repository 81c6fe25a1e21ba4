use std::sync::Arc;

use quasiflow_core::flow::{self, Classification, EvolveConfig, ProfileKind};
use quasiflow_core::{energy, stationary, Field, Params, RadialGrid};

fn grid(dim: usize, n: usize) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::new(dim, 15.0, n).unwrap())
}

#[test]
fn ground_state_is_nearly_stationary_for_short_times() {
    // w is a saddle of the flow: discretization error grows like e^{|mu1| t},
    // so only short-time proximity is meaningful
    let g = grid(2, 1500);
    let params = Params::new(2, 3.0, 1.0, 0.0).unwrap();
    let ground = stationary::shoot(&params, g.clone(), 1e-10).unwrap();
    let config = EvolveConfig::for_grid(&g);
    let traj = flow::evolve(&params, &ground.w, 1.0, 0.25, &config).unwrap();
    for snap in &traj.snapshots {
        let d = snap
            .field
            .values()
            .iter()
            .zip(ground.w.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(d <= 1e-3 * ground.w0, "t = {}: {d}", snap.t);
    }
}

#[test]
fn ground_state_energy_is_positive_and_drives_the_threshold() {
    let g = grid(2, 1500);
    let params = Params::new(2, 3.0, 1.0, 0.0).unwrap();
    let ground = stationary::shoot(&params, g.clone(), 1e-10).unwrap();
    let e_w = energy::energy(&ground.w, &params);
    assert!(e_w > 0.0);
    // slightly above w blows up, slightly below decays
    let config = EvolveConfig::for_grid(&g);
    let up = flow::evolve(&params, &ground.w.scaled(1.05), 50.0, 1.0, &config).unwrap();
    let down = flow::evolve(&params, &ground.w.scaled(0.95), 50.0, 1.0, &config).unwrap();
    assert_eq!(up.classification, Classification::BlowUp);
    assert_eq!(down.classification, Classification::Vanish);
    assert!(up.blowup_certificate.is_some());
}

#[test]
fn kappa_zero_reduces_to_the_semilinear_equation() {
    let g = grid(3, 600);
    let params = Params::new(3, 3.0, 0.0, 0.0).unwrap();
    let u = Field::from_fn(g.clone(), |r| 1.3 * (-r * r / 4.0).exp());
    let got = flow::rhs(&u, &params);
    let lap = u.radial_laplacian();
    let n = g.cells();
    for i in 0..n {
        let v = u.values()[i];
        let expected = lap.values()[i] - v + v * v * v;
        assert!((got.values()[i] - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
    }
}

#[test]
fn vanishing_runs_decay_uniformly() {
    let g = grid(2, 600);
    let params = Params::new(2, 3.0, 1.0, 0.5).unwrap();
    let u0 = flow::initial_profile(&ProfileKind::Gaussian { width: 4.0 }, 0.5, g.clone()).unwrap();
    let traj = flow::evolve(&params, &u0, 200.0, 1.0, &EvolveConfig::for_grid(&g)).unwrap();
    assert_eq!(traj.classification, Classification::Vanish);
    assert!(flow::min_value_ratio(&traj) >= 0.0);
    assert!(!flow::monotonicity_check(&traj).flagged);
    // the far field never carries more than a small part of the mass
    assert!(flow::uniform_decay_ratio(&traj) < 0.05, "{}", flow::uniform_decay_ratio(&traj));
    let sups: Vec<f64> = traj.snapshots.iter().map(|s| s.field.sup_norm()).collect();
    assert!(sups.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    assert!(energy::energy_increase(&traj) <= 1e-8);
}
