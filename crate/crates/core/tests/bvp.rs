use cliffan::bvp::*;
use cliffan::clifford::{dirac_apply_fd, DiracVariant, Multivector};
use cliffan::series::Lattice;
use cliffan::Error;

fn cube(dim: usize, n: usize) -> VoxelDomain {
    VoxelDomain::from_shape(
        &Shape::Box {
            lo: vec![-1.0; dim],
            hi: vec![1.0; dim],
        },
        n,
    )
    .unwrap()
}

/// `z_k = x_k + e_1 e_(k+1) x_0`, monogenic for `D = Σ e_(k+1) ∂_k`.
fn fueter(dim: usize, k: usize, x: &[f64]) -> Multivector {
    let e1k = &Multivector::basis_vector(dim, 1) * &Multivector::basis_vector(dim, k + 1);
    &Multivector::scalar(dim, x[k]) + &e1k.scale(x[0])
}

/// `z_1^2 + z_1 (2D)` or `z_1^2 + z_1 z_2 + z_2 z_1` (3D); symmetric products stay monogenic.
fn monogenic_poly(dim: usize, x: &[f64]) -> Multivector {
    let z1 = fueter(dim, 1, x);
    if dim == 2 {
        &(&z1 * &z1) + &z1
    } else {
        let z2 = fueter(dim, 2, x);
        &(&(&z1 * &z1) + &(&z1 * &z2)) + &(&z2 * &z1)
    }
}

#[test]
fn test_fields_are_monogenic() {
    for dim in [2, 3] {
        let x: Vec<f64> = (0..dim).map(|i| 0.3 - 0.2 * i as f64).collect();
        let d = dirac_apply_fd(|p| monogenic_poly(dim, p), &x, 0.1, DiracVariant::Dirac);
        assert!(d.max_abs() < 1e-12, "{d:?}");
    }
}

/// Vertices of the spacing-`step` lattice inside `[-r, r]^dim`; vertices on every refinement.
fn probes(dim: usize, r: f64, step: f64) -> Vec<Vec<f64>> {
    let k = (r / step).round() as i64;
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                (-k..=k).map(move |i| {
                    let mut q = p.clone();
                    q.push(i as f64 * step);
                    q
                })
            })
            .collect();
    }
    out
}

/// A smooth field that is not monogenic.
fn generic(dim: usize, x: &[f64]) -> Multivector {
    let mut v = monogenic_poly(dim, x);
    v += &Multivector::basis_vector(dim, 1).scale(x[0].exp() * x[1].cos());
    v += &Multivector::scalar(dim, x[dim - 1] * x[dim - 1]);
    v
}

fn bp_levels(dim: usize, levels: &[usize], pts: &[Vec<f64>], f: fn(usize, &[f64]) -> Multivector) -> Vec<f64> {
    let k = FlatKernel::new(dim).unwrap();
    levels
        .iter()
        .map(|&n| {
            borel_pompeiu_residual_at(&cube(dim, n), |x| f(dim, x), &k, pts)
                .unwrap()
                .residual
        })
        .collect()
}

fn orders(res: &[f64]) -> Vec<f64> {
    res.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[test]
fn borel_pompeiu_converges_in_2d() {
    let pts = probes(2, 0.5, 0.25);
    for f in [monogenic_poly as fn(usize, &[f64]) -> Multivector, generic] {
        let res = bp_levels(2, &[16, 32, 64], &pts, f);
        eprintln!("2d {res:?} {:?}", orders(&res));
        assert!(orders(&res).iter().all(|&o| o >= 1.0), "{res:?}");
    }
}

#[test]
fn borel_pompeiu_converges_in_3d() {
    let pts = probes(3, 1.0 / 3.0, 1.0 / 3.0);
    for f in [monogenic_poly as fn(usize, &[f64]) -> Multivector, generic] {
        let res = bp_levels(3, &[6, 12, 24], &pts, f);
        eprintln!("3d {res:?} {:?}", orders(&res));
        assert!(orders(&res).iter().all(|&o| o >= 1.0), "{res:?}");
    }
}

#[test]
fn teodorescu_is_a_right_inverse() {
    let k = FlatKernel::new(2).unwrap();
    let f = |x: &[f64]| generic(2, x);
    let res: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&n| {
            let dom = cube(2, n);
            let fld = Field::from_fn(&dom, f);
            let dt = dirac_fd(&dom, &teodorescu(&dom, &fld, &k).unwrap());
            dt.sub(&fld).max_norm_on(&dom.cells_at_distance(0.25))
        })
        .collect();
    eprintln!("rinv {res:?} {:?}", orders(&res));
    assert!(res.windows(2).all(|w| w[1] < w[0]), "{res:?}");
}

#[test]
fn cauchy_transform_is_monogenic_inside() {
    let k = FlatKernel::new(2).unwrap();
    let g = |x: &[f64]| generic(2, x);
    let res: Vec<f64> = [16, 32]
        .iter()
        .map(|&n| {
            let dom = cube(2, n);
            let fg = cauchy_transform(&dom, &BoundaryTrace::from_fn(&dom, g), &k).unwrap();
            dirac_fd(&dom, &fg).max_norm_on(&dom.cells_at_distance(0.25))
        })
        .collect();
    assert!(res[1] < 0.5 * res[0] && res[1] < 1e-2, "{res:?}");
}

#[test]
fn projection_properties_against_borel_pompeiu() {
    for (dim, n) in [(2, 16), (2, 32)] {
        let k = FlatKernel::new(dim).unwrap();
        let dom = cube(dim, n);
        let proj = BergmanProjector::new(&dom, &k, BergmanOptions::default()).unwrap();
        let bp = borel_pompeiu_residual(&dom, |x| generic(dim, x), &k, BP_MIN_DEPTH).unwrap().residual;
        let f = Field::from_fn(&dom, |x| generic(dim, x));
        let pf = proj.project(&f).unwrap();
        let idem = proj.project(&pf).unwrap().sub(&pf).max_norm();
        let fg = cauchy_transform(&dom, &BoundaryTrace::from_fn(&dom, |x| generic(dim, x)), &k).unwrap();
        let qfg = proj.complement(&fg).unwrap().max_norm();
        let m = Field::from_fn(&dom, |x| monogenic_poly(dim, x));
        let fixed = proj.project(&m).unwrap().sub(&m).max_norm();
        assert!(idem <= 5.0 * bp && qfg <= 5.0 * bp && fixed <= 5.0 * bp, "{idem} {qfg} {fixed} {bp}");
        assert!(proj.condition() <= 1e6 + 1.0);
    }
}

#[test]
fn projection_rejects_bad_options() {
    let k = FlatKernel::new(2).unwrap();
    let dom = cube(2, 4);
    let bad = BergmanOptions { lambda_rel: -1.0, ..Default::default() };
    assert!(matches!(BergmanProjector::new(&dom, &k, bad), Err(Error::Config(_))));
    let strict = BergmanOptions { cutoff_rel: 0.0, max_condition: 2.0, ..Default::default() };
    assert!(matches!(BergmanProjector::new(&dom, &k, strict), Err(Error::Conditioning { .. })));
}

#[test]
fn stokes_without_forcing_is_at_rest() {
    let k = FlatKernel::new(2).unwrap();
    let dom = cube(2, 8);
    let sol = stokes_solve(&dom, &Field::zero(&dom), 2.0, &k, &StokesOptions::default()).unwrap();
    assert!(sol.u.max_norm() < 1e-12 && sol.p.max_norm() < 1e-12);
}

#[test]
fn stokes_requires_positive_viscosity() {
    let k = FlatKernel::new(2).unwrap();
    let dom = cube(2, 4);
    for eta in [0.0, -1.0, f64::NAN] {
        let r = stokes_solve(&dom, &Field::zero(&dom), eta, &k, &StokesOptions::default());
        assert!(matches!(r, Err(Error::Config(_))));
    }
}

#[test]
fn stokes_manufactured_flow_converges() {
    let k = FlatKernel::new(2).unwrap();
    let eta = 1.0;
    let ms = ManufacturedStokes::new([-1.0, -1.0], [1.0, 1.0]);
    let opts = StokesOptions::default();
    let diags: Vec<StokesDiagnostics> = [8, 16, 32]
        .iter()
        .map(|&n| {
            let dom = cube(2, n);
            let forcing = Field::from_fn(&dom, |x| ms.forcing(x, eta));
            let mut sol = stokes_solve(&dom, &forcing, eta, &k, &opts).unwrap();
            ms.score(&dom, &mut sol, opts.interior_margin);
            sol.diagnostics
        })
        .collect();
    for w in diags.windows(2) {
        assert!(w[1].momentum < w[0].momentum, "{diags:?}");
        assert!(w[1].divergence < w[0].divergence, "{diags:?}");
        assert!(w[1].boundary < w[0].boundary, "{diags:?}");
        assert!(w[1].velocity_error.unwrap() < w[0].velocity_error.unwrap(), "{diags:?}");
        assert!(w[1].pressure_error.unwrap() < w[0].pressure_error.unwrap(), "{diags:?}");
    }
    assert!(diags[2].divergence <= 1e-2, "{diags:?}");
}

#[test]
fn manufactured_flow_is_consistent() {
    let ms = ManufacturedStokes::new([-1.0, -0.5], [0.5, 1.0]);
    let eta = 0.7;
    let x = [0.1, 0.3];
    let du = dirac_apply_fd(|y| ms.velocity(y), &x, 1e-4, DiracVariant::Dirac);
    // div u = -Re(D u)
    assert!(du.scalar_part().abs() < 1e-8);
    let ddu = dirac_apply_fd(|y| dirac_apply_fd(|z| ms.velocity(z), y, 1e-3, DiracVariant::Dirac), &x, 1e-3, DiracVariant::Dirac);
    let dp = dirac_apply_fd(|y| Multivector::scalar(2, ms.pressure(y)), &x, 1e-4, DiracVariant::Dirac);
    let lhs = &ddu + &dp.scale(1.0 / eta);
    assert!(lhs.distance(&ms.forcing(&x, eta)) < 1e-5);
    for y in [[-1.0, 0.2], [0.5, 0.9], [0.0, -0.5]] {
        assert!(ms.velocity(&y).norm() < 1e-14);
    }
}

/// Torus and flat kernels agree below the shortest period, and torus truncations
/// differ by no more than the accumulated tail bounds.
#[test]
fn kernels_are_pluggable() {
    let dom = cube(3, 4);
    let flat = FlatKernel::new(3).unwrap();
    let lattice = Lattice::new(3, vec![vec![0.0, 0.0, 5.0]]).unwrap();
    let near = TorusKernel::new(lattice.clone(), 4.0).unwrap();
    assert_eq!(near.terms(), 1);
    let f = Field::from_fn(&dom, |x| generic(3, x));
    let a = teodorescu(&dom, &f, &flat).unwrap();
    let b = teodorescu(&dom, &f, &near).unwrap();
    assert!(a.sub(&b).max_norm() < 1e-14);

    let short = TorusKernel::new(lattice.clone(), 60.0).unwrap();
    let long = TorusKernel::new(lattice, 600.0).unwrap();
    let ts = teodorescu(&dom, &f, &short).unwrap();
    let tl = teodorescu(&dom, &f, &long).unwrap();
    let vol = dom.cell_volume();
    for (i, x) in dom.centers().iter().enumerate() {
        let bound: f64 = dom
            .centers()
            .iter()
            .zip(&f.values)
            .map(|(y, fy)| vol * fy.norm() * (short.tail_bound(x, y) + long.tail_bound(x, y)))
            .sum();
        let diff = ts.values[i].distance(&tl.values[i]);
        assert!(diff <= bound + 1e-14, "cell {i}: {diff} > {bound}");
    }
    assert!(ts.sub(&a).max_norm() > 1e-6);
}
