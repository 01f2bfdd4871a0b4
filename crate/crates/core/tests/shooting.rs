use gravistat_core::shooting::{integrate_xy, normalized_mass};
use gravistat_core::{
    initial_state, integrate, reconstruct_profile, trajectory_distance, Error, IntegratorConfig,
    ModelSpec,
};
use proptest::prelude::*;

fn cfg() -> IntegratorConfig {
    IntegratorConfig::default()
}

fn sfd(eta: f64) -> ModelSpec {
    ModelSpec::simplified_fermi_dirac(eta).unwrap()
}

/// Distance from `(x, y)` to the polyline through `pts`.
fn distance_to_polyline(pts: &[(f64, f64)], x: f64, y: f64) -> f64 {
    pts.windows(2)
        .map(|w| {
            let ((ax, ay), (bx, by)) = (w[0], w[1]);
            let (dx, dy) = (bx - ax, by - ay);
            let len2 = dx * dx + dy * dy;
            let t = if len2 > 0.0 {
                (((x - ax) * dx + (y - ay) * dy) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            (x - ax - t * dx).hypot(y - ay - t * dy)
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn small_mass_law() {
    for model in [ModelSpec::maxwell_boltzmann(), sfd(0.1)] {
        let m = normalized_mass(&model, 1e-4, &cfg()).unwrap();
        assert!((3.0 * m / 1e-4 - 1.0).abs() < 1e-3, "{model}: {m}");
    }
}

#[test]
fn mb_approaches_the_singular_solution() {
    let m = normalized_mass(&ModelSpec::maxwell_boltzmann(), 1e8, &cfg()).unwrap();
    assert!((m - 2.0).abs() < 0.05, "{m}");
}

#[test]
fn profile_is_consistent_with_trajectory() {
    for model in [
        ModelSpec::maxwell_boltzmann(),
        sfd(0.05),
        ModelSpec::fermi_dirac(0.1).unwrap(),
    ] {
        for rho0 in [1e-2, 3.0, 500.0] {
            let traj = integrate(&model, rho0, &cfg()).unwrap();
            let profile = reconstruct_profile(&traj).unwrap();
            let last = traj.final_sample().unwrap();
            assert_eq!(profile.m, last.q);
            assert!((profile.mass / (4.0 * std::f64::consts::PI) - last.q).abs() < 1e-14 * last.q);
            assert_eq!(profile.density_at(1.0), Some(last.p));
            let centre = profile.density_at(traj.t_start.exp()).unwrap();
            assert!((centre / rho0 - 1.0).abs() < 1e-3);
            assert_eq!(profile.potential_at(1.0), Some(0.0));
            assert!(profile.density.windows(2).all(|w| w[1] <= w[0]));
            assert!(
                (profile.lambda - model.enthalpy(last.p).unwrap()).abs()
                    < 1e-8 * profile.lambda.abs().max(1.0)
            );
            if model.is_boltzmann_limit() {
                assert!((profile.lambda - last.y.ln()).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn degenerate_core_keeps_a_finite_multiplier() {
    // The density outside a strongly degenerate core underflows, yet the
    // potential and λ stay finite and φ decreases towards the centre.
    let model = ModelSpec::fermi_dirac(0.1).unwrap();
    let profile = reconstruct_profile(&integrate(&model, 1e6, &cfg()).unwrap()).unwrap();
    assert!(profile.lambda.is_finite());
    assert!(profile.potential.iter().all(|v| v.is_finite()));
    assert!(profile
        .potential
        .windows(2)
        .all(|w| w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0)));
}

#[test]
fn incomplete_trajectory_is_an_error() {
    let tight = IntegratorConfig {
        max_steps: 10,
        ..cfg()
    };
    match integrate(&ModelSpec::maxwell_boltzmann(), 1.0, &tight) {
        Err(Error::Integration { s, .. }) => assert!(s < 0.0),
        other => panic!("expected an integration error, got {other:?}"),
    }
}

#[test]
fn truncation_robustness() {
    for model in [
        ModelSpec::maxwell_boltzmann(),
        sfd(0.01),
        ModelSpec::fermi_dirac(0.1).unwrap(),
    ] {
        for rho0 in [1.0, 100.0, 1e4] {
            let a = normalized_mass(
                &model,
                rho0,
                &IntegratorConfig {
                    eps_cut: 1e-6,
                    ..cfg()
                },
            )
            .unwrap();
            let b = normalized_mass(
                &model,
                rho0,
                &IntegratorConfig {
                    eps_cut: 1e-7,
                    ..cfg()
                },
            )
            .unwrap();
            assert!(
                ((a - b) / a).abs() < 1e-4,
                "{model} rho0 {rho0}: {a} vs {b}"
            );
        }
    }
}

#[test]
fn dual_form_agreement() {
    for model in [
        ModelSpec::maxwell_boltzmann(),
        sfd(0.05),
        ModelSpec::fermi_dirac(0.1).unwrap(),
    ] {
        for rho0 in [1e-2, 1.0, 100.0] {
            let pq = integrate(&model, rho0, &cfg()).unwrap();
            let xy = integrate_xy(&model, rho0, &cfg()).unwrap();
            assert_eq!(pq.samples.len(), xy.len());
            let gap = pq
                .samples
                .iter()
                .zip(&xy)
                .map(|(a, &(s, x, y))| {
                    assert_eq!(a.s, s);
                    (a.x - x).abs().max((a.y - y).abs())
                })
                .fold(0.0, f64::max);
            assert!(gap < 1e-8, "{model} rho0 {rho0}: {gap:e}");
        }
    }
}

#[test]
fn mb_orbits_coincide_in_the_phase_plane() {
    let mb = ModelSpec::maxwell_boltzmann();
    let low = integrate(&mb, 1.0, &cfg()).unwrap();
    let high = integrate(&mb, 100.0, &cfg()).unwrap();
    let curve: Vec<(f64, f64)> = low.samples.iter().map(|t| (t.x, t.y)).collect();
    let cutoff = -0.5 * 100f64.ln();
    let overlap: Vec<_> = high.samples.iter().filter(|t| t.s <= cutoff).collect();
    assert!(overlap.len() > 100);
    let forward = overlap
        .iter()
        .map(|t| distance_to_polyline(&curve, t.x, t.y))
        .fold(0.0, f64::max);
    let shifted: Vec<(f64, f64)> = overlap.iter().map(|t| (t.x, t.y)).collect();
    // The orbit at ρ₀ = 100 is the ρ₀ = 1 orbit delayed by log 10 in s.
    let end = overlap.last().unwrap().s + 10f64.ln();
    let backward = low
        .samples
        .iter()
        .filter(|t| t.s <= end)
        .map(|t| distance_to_polyline(&shifted, t.x, t.y))
        .fold(0.0, f64::max);
    assert!(forward.max(backward) < 1e-3, "{forward:e} {backward:e}");
}

#[test]
fn distance_examples() {
    let d0 = trajectory_distance(&sfd(0.0), 3.0, &cfg()).unwrap();
    assert!(d0 <= 1e-12);
    let bound = |eta: f64, rho0: f64| eta / 6.0 * rho0.powf(8.0 / 3.0) * (rho0 / 3.0).exp();
    let small = trajectory_distance(&sfd(5e-4), 1.0, &cfg()).unwrap();
    let large = trajectory_distance(&sfd(5e-2), 1.0, &cfg()).unwrap();
    assert!(small < large);
    assert!(small <= bound(5e-4, 1.0) && large <= bound(5e-2, 1.0));
    let d = trajectory_distance(&sfd(1e-3), 1.0, &cfg()).unwrap();
    assert!(d <= 2.33e-4);
    let d = trajectory_distance(&sfd(1e-4), 2.0, &cfg()).unwrap();
    assert!(d <= 2.06e-4);
    assert!(trajectory_distance(&ModelSpec::maxwell_boltzmann(), 1.0, &cfg()).is_err());
}

#[test]
fn initial_state_examples() {
    let a = initial_state(1.0, 1e-6).unwrap();
    assert!((a.t_start + 6.907_755_3).abs() < 1e-7);
    assert_eq!(a.p, 1.0);
    assert!((a.q - 0.333_333_3).abs() < 1e-7);
    let b = initial_state(4.0, 1e-6).unwrap();
    assert!((b.t_start + 7.600_902_5).abs() < 1e-7);
    assert!(matches!(
        initial_state(1.0, 0.5),
        Err(Error::Precondition(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trajectories_stay_confined(lr in -4.0f64..6.0, k in 0usize..3) {
        let model = [ModelSpec::maxwell_boltzmann(), sfd(0.01), ModelSpec::fermi_dirac(0.1).unwrap()][k];
        let rho0 = 10f64.powf(lr);
        let cfg = IntegratorConfig { dense_samples: 400, ..cfg() };
        let traj = integrate(&model, rho0, &cfg).unwrap();
        let tol = 1e-8 * rho0.max(1.0);
        for t in &traj.samples {
            prop_assert!(t.x >= 0.0 && t.y >= 0.0);
            prop_assert!(t.p <= 3.0 * t.q + tol);
        }
        for w in traj.samples.windows(2) {
            prop_assert!(w[1].p <= w[0].p + tol);
            prop_assert!(w[1].q <= w[0].q + tol);
        }
        let m = traj.normalized_mass().unwrap();
        prop_assert!(m <= rho0 / 3.0 * (1.0 + 1e-8));
    }
}
