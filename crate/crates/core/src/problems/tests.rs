use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::catalog::*;
use super::*;
use crate::nn::{init_params, Activation, InitScheme, Jet, JetChannels, JetRead, JetSource};
use crate::sampling::{build_training_set, QuadratureKind, SetCounts, SpaceTimeBox, TrainingSet};

/// Exact solution given by a closure returning the full jet.
struct FnSolution<F> {
    d: usize,
    m: usize,
    f: F,
}

impl<F> std::fmt::Debug for FnSolution<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("FnSolution")
    }
}

impl<F: Fn(&[f64], &mut Jet) + Send + Sync> ExactSolution for FnSolution<F> {
    fn input_dim(&self) -> usize {
        self.d
    }
    fn output_dim(&self) -> usize {
        self.m
    }
    fn jet(&self, y: &[f64]) -> Jet {
        let mut j = Jet::zeros(self.m, self.d);
        (self.f)(y, &mut j);
        j
    }
}

fn sets(spec: &ProblemSpec, n: usize, seed: u64) -> TrainingSet {
    build_training_set(
        &spec.geometry,
        spec.boundary.layout(),
        SetCounts { n_int: n, n_sb: n, n_tb: n },
        QuadratureKind::MonteCarlo,
        seed,
    )
    .unwrap()
}

fn exact_bundle(spec: &ProblemSpec, n: usize) -> ResidualBundle {
    let exact = spec.exact.as_ref().unwrap();
    residuals(&Analytic(exact.as_ref()), spec, &sets(spec, n, 17))
}

#[test]
fn zero_field_heat_residuals() {
    let spec = heat_1d().unwrap();
    let zero = FnSolution { d: 2, m: 1, f: |_: &[f64], _: &mut Jet| {} };
    let ts = sets(&spec, 50, 3);
    let b = heat_residuals(&Analytic(&zero), &spec, &ts).unwrap();
    assert!(b.interior.iter().all(|&r| r == 0.0));
    assert!(b.spatial_boundary.iter().all(|&r| r == 0.0));
    for (r, y) in b.temporal_boundary.iter().zip(ts.temporal_boundary.points.chunks_exact(2)) {
        assert!((r - (PI * y[1]).sin()).abs() < 1e-15);
    }
}

#[test]
fn exact_solutions_annihilate_residuals() {
    for spec in [heat_1d().unwrap(), heat_nd(1).unwrap(), heat_nd(5).unwrap(), taylor_vortex(4.0, 0.0).unwrap()] {
        let b = exact_bundle(&spec, 1000);
        let int_max = b.interior.iter().chain(b.divergence.iter().flatten()).fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(int_max <= 1e-10, "{}: interior {int_max}", spec.name);
        let tb_max = b.temporal_boundary.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(tb_max <= 1e-12, "{}: temporal {tb_max}", spec.name);
        if !spec.is_euler() {
            let sb_max = b.spatial_boundary.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(sb_max <= 1e-12, "{}: boundary {sb_max}", spec.name);
        }
    }
}

#[test]
fn taylor_vortex_periodic_mismatch_is_negligible() {
    let b = exact_bundle(&taylor_vortex(4.0, 0.0).unwrap(), 500);
    // The vortex drifts to x = 4 by T = 1, four units from the x = 8 face,
    // so the truncated field is periodic only up to |v| = 4 exp(-7.5).
    let worst = b.spatial_boundary.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(worst <= 4.0 * (-7.5f64).exp() * 1.000001, "{worst}");
}

#[test]
fn nd_heat_residual_needs_matching_dimension() {
    // |x|^2 / n + 2t with n != d leaves residual 2 - 2d/n
    let spec = heat_nd(3).unwrap();
    let wrong = HeatNdExact { spatial_dim: 3, n: 2.0 };
    let b = residuals(&Analytic(&wrong), &spec, &sets(&spec, 20, 1));
    assert!(b.interior.iter().all(|r| (r - (2.0 - 3.0)).abs() < 1e-14));
}

#[test]
fn conservation_law_hand_cases() {
    let spec = burgers_sine(0.0).unwrap();
    let constant = FnSolution { d: 2, m: 1, f: |_: &[f64], j: &mut Jet| j.value[0] = 0.7 };
    let ts = sets(&spec, 64, 4);
    let b = conservation_law_residuals(&Analytic(&constant), &spec, &ts).unwrap();
    assert!(b.interior.iter().all(|&r| r == 0.0));

    let linear = FnSolution {
        d: 2,
        m: 1,
        f: |y: &[f64], j: &mut Jet| {
            j.value[0] = y[1];
            j.grad[1] = 1.0;
        },
    };
    let b = conservation_law_residuals(&Analytic(&linear), &spec, &ts).unwrap();
    for (r, y) in b.interior.iter().zip(ts.interior.points.chunks_exact(2)) {
        assert!((r - y[1]).abs() < 1e-15);
    }

    let nu = 0.3;
    let mut diffusion = burgers_sine(nu).unwrap();
    diffusion.pde = Pde::ConservationLaw { nu, flux: FluxSpec::zero() };
    let decay = FnSolution {
        d: 2,
        m: 1,
        f: move |y: &[f64], j: &mut Jet| {
            let e = (-nu * PI * PI * y[0]).exp();
            let c = (PI * y[1]).cos();
            j.value[0] = e * c;
            j.grad[0] = -nu * PI * PI * e * c;
            j.grad[1] = -PI * e * (PI * y[1]).sin();
            j.hess_diag[1] = -PI * PI * e * c;
        },
    };
    let b = residuals(&Analytic(&decay), &diffusion, &ts);
    assert!(b.interior.iter().all(|r| r.abs() < 1e-12));
}

#[test]
fn rarefaction_fan_solves_inviscid_burgers() {
    let spec = burgers_rarefaction(0.0).unwrap();
    let exact = spec.exact.clone().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let pts: Vec<f64> = (0..200)
        .flat_map(|_| {
            let t: f64 = rng.gen_range(0.01..0.5);
            let s: f64 = rng.gen_range(0.01..0.99);
            [t, s * t]
        })
        .collect();
    let r = interior_residuals_at(&Analytic(exact.as_ref()), &spec, &pts);
    assert!(r.iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn euler_hand_cases() {
    let spec = taylor_vortex(4.0, 0.0).unwrap();
    let ts = sets(&spec, 64, 5);
    let uniform = FnSolution { d: 3, m: 3, f: |_: &[f64], j: &mut Jet| j.value[0] = 4.0 };
    let b = euler_residuals(&Analytic(&uniform), &spec, &ts).unwrap();
    assert!(b.interior.iter().chain(b.divergence.as_ref().unwrap()).all(|&r| r == 0.0));
    assert!(b.spatial_boundary.iter().all(|&r| r == 0.0));
    assert!(b.temporal_boundary.iter().any(|&r| r != 0.0));

    let shear = FnSolution {
        d: 3,
        m: 3,
        f: |y: &[f64], j: &mut Jet| {
            j.value[0] = y[2].sin();
            j.value[1] = y[1].cos();
            j.grad[2] = y[2].cos();
            j.grad[3 + 1] = -y[1].sin();
        },
    };
    let b = euler_residuals(&Analytic(&shear), &spec, &ts).unwrap();
    assert!(b.divergence.unwrap().iter().all(|&r| r == 0.0));
}

#[test]
fn family_mismatch_is_an_error() {
    let spec = heat_1d().unwrap();
    let p = init_params(0, &[2, 4, 1], Activation::Tanh, InitScheme::XavierUniform).unwrap();
    assert!(euler_residuals(&p, &spec, &sets(&spec, 4, 0)).is_err());
}

#[test]
fn conservation_law_with_zero_flux_matches_unit_heat() {
    let heat = heat_1d().unwrap();
    let mut cl = burgers_sine(1.0).unwrap();
    cl.pde = Pde::ConservationLaw { nu: 1.0, flux: FluxSpec::zero() };
    let p = init_params(8, &[2, 10, 10, 1], Activation::Tanh, InitScheme::XavierUniform).unwrap();
    let ts = sets(&heat, 300, 2);
    let a = interior_residuals_at(&p, &heat, &ts.interior.points);
    let b = interior_residuals_at(&p, &cl, &ts.interior.points);
    assert_eq!(a, b);
}

#[test]
fn nonzero_dirichlet_data_enter_boundary_residual() {
    let spec = burgers_rarefaction(0.01).unwrap();
    let zero = FnSolution { d: 2, m: 1, f: |_: &[f64], _: &mut Jet| {} };
    let ts = sets(&spec, 40, 6);
    let b = residuals(&Analytic(&zero), &spec, &ts);
    for (r, f) in b.spatial_boundary.iter().zip(&b.sb_faces) {
        assert_eq!(*r, if *f == 0 { 0.0 } else { -1.0 });
    }
}

fn random_jet(rng: &mut ChaCha8Rng, m: usize, d: usize) -> Jet {
    let mut j = Jet::zeros(m, d);
    for v in j.value.iter_mut().chain(j.grad.iter_mut()).chain(j.hess_diag.iter_mut()) {
        *v = rng.gen_range(-1.0..1.0);
    }
    j
}

#[test]
fn interior_adjoints_match_finite_differences() {
    let mut semilinear = heat_nd(2).unwrap();
    semilinear.pde = Pde::Heat {
        source: SemilinearSource { f: Arc::new(|u: f64| u.sin()), f_prime: Arc::new(|u: f64| u.cos()), lipschitz: 1.0 },
    };
    let mut forced = taylor_vortex(1.0, 2.0).unwrap();
    forced.pde = Pde::Euler { forcing: Some(point_fn(|y| vec![y[0], y[1] * y[2]])) };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for spec in [semilinear, burgers_sine(0.05).unwrap(), forced] {
        let (m, d, k) = (spec.output_dim, spec.input_dim(), spec.interior_components());
        let j = random_jet(&mut rng, m, d);
        let forcing = spec.interior_forcing(&[0.2, 0.3, 0.4][..d]);
        let rbar: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut cot = Jet::zeros(m, d);
        spec.interior_residual_adjoint(&j, &rbar, &mut cot);
        let phi = |j: &Jet| {
            let mut r = vec![0.0; k];
            spec.interior_residual(j, &forcing, &mut r);
            r.iter().zip(&rbar).map(|(a, b)| a * b).sum::<f64>()
        };
        let h = 1e-6;
        let n_entries = j.value.len() + j.grad.len() + j.hess_diag.len();
        for e in 0..n_entries {
            let bump = |j: &Jet, s: f64| {
                let mut c = j.clone();
                let nv = c.value.len();
                let ng = c.grad.len();
                if e < nv {
                    c.value[e] += s;
                } else if e < nv + ng {
                    c.grad[e - nv] += s;
                } else {
                    c.hess_diag[e - nv - ng] += s;
                }
                c
            };
            let fd = (phi(&bump(&j, h)) - phi(&bump(&j, -h))) / (2.0 * h);
            let nv = cot.value.len();
            let ng = cot.grad.len();
            let an = if e < nv {
                cot.value[e]
            } else if e < nv + ng {
                cot.grad[e - nv]
            } else {
                cot.hess_diag[e - nv - ng]
            };
            assert!((fd - an).abs() < 1e-8, "{} entry {e}: fd {fd} vs {an}", spec.name);
        }
    }
}

#[test]
fn analytic_source_respects_channels() {
    let tv = TaylorVortexExact { a_x: 4.0, a_y: 0.0 };
    let ch = JetChannels::new(3, &[1, 2], &[2]).unwrap();
    let b = Analytic(&tv).jet_batch(&[0.1, 0.2, 0.3], &ch);
    let j = tv.jet(&[0.1, 0.2, 0.3]);
    assert_eq!(b.point(0).d(0, 1), j.d(0, 1));
    assert_eq!(b.point(0).dd(2, 2), j.dd(2, 2));
}

#[test]
fn geometry_of_catalog_problems() {
    assert_eq!(heat_1d().unwrap().geometry, SpaceTimeBox::cube(1.0, 1, -1.0, 1.0).unwrap());
    assert_eq!(burgers_rarefaction(0.0).unwrap().t_final(), 0.5);
    let dsl = double_shear_layer(GridField::double_shear_layer(32, 32, 30.0, 0.05), 1.0).unwrap();
    assert_eq!(dsl.output_dim, 3);
    let u0 = (dsl.initial_data)(&[0.0, PI / 2.0]);
    assert!(u0[0].abs() < 1e-12 && u0[1].abs() < 1e-12);
}
