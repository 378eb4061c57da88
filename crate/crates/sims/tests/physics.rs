//! Simulation checks against independent direct sums and closed forms.

use std::f64::consts::PI;

use afmm::rng::substream;
use afmm::{EvalSet64, FmmConfig, FmmEngine64, Pyramid64, C64};
use afmm_sims::{
    cylinder_velocities, emit_boundary_vortices, euler_step, gravity_forces, init_rotating_disc, init_shear_layer,
    rk4_convect, stormer_verlet_step, vortex_velocities, CylinderFlow, GravitySystem, Simulation, VortexSystem,
};
use rand::Rng;

fn engine(n_levels: usize) -> FmmEngine64 {
    FmmEngine64::new(FmmConfig {
        n_levels,
        ..Default::default()
    })
    .unwrap()
}

fn rel_err(a: &[C64], b: &[C64]) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

/// `dx_k/dt` from the vortex equation, summed pair by pair.
fn vortex_direct(pos: &[C64], gamma: &[f64], delta: f64) -> Vec<C64> {
    pos.iter()
        .enumerate()
        .map(|(k, xk)| {
            let mut u = 0.0;
            let mut v = 0.0;
            for (i, xi) in pos.iter().enumerate() {
                if i == k {
                    continue;
                }
                let (dx, dy) = (xk.re - xi.re, xk.im - xi.im);
                let r2 = dx * dx + dy * dy;
                let g = 1.0 - (-r2 / (delta * delta)).exp();
                // counter-clockwise swirl around x_i
                u += -gamma[i] * dy / (2.0 * PI * r2) * g;
                v += gamma[i] * dx / (2.0 * PI * r2) * g;
            }
            C64::new(u, v)
        })
        .collect()
}

#[test]
fn vortex_velocities_match_direct_sum() {
    let mut rng = substream(11, "vortex-oracle");
    let n = 2000;
    let pos: Vec<C64> = (0..n).map(|_| C64::new(rng.gen(), rng.gen::<f64>() * 0.25)).collect();
    let gamma: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
    let sys = VortexSystem::new(pos.clone(), gamma.clone(), 0.01, 1e-3).unwrap();
    let fmm = vortex_velocities(&sys, &mut engine(4)).unwrap().values;
    let err = rel_err(&fmm, &vortex_direct(&pos, &gamma, 0.01));
    assert!(err <= 1e-6, "relative error {err:e}");
}

#[test]
fn opposite_pair_translates() {
    let (d, delta) = (1.0, 0.01);
    let sys = VortexSystem::new(vec![C64::new(0.0, 0.0), C64::new(d, 0.0)], vec![1.0, -1.0], delta, 1e-3).unwrap();
    let v = vortex_velocities(&sys, &mut engine(1)).unwrap().values;
    let speed = (1.0 - (-d * d / (delta * delta)).exp()) / (2.0 * PI * d);
    assert!((v[0] - v[1]).norm() < 1e-15);
    assert!((v[0].norm() - speed).abs() < 1e-15);
    // perpendicular to the line joining them
    assert!(v[0].re.abs() < 1e-15);
}

#[test]
fn co_rotating_pair_keeps_separation_to_second_order() {
    let drift = |dt: f64| {
        let mut sys = VortexSystem::new(vec![C64::new(-0.5, 0.0), C64::new(0.5, 0.0)], vec![1.0, 1.0], 1e-3, dt).unwrap();
        let v = vortex_velocities(&sys, &mut engine(1)).unwrap().values;
        euler_step(&mut sys, &v).unwrap();
        ((sys.positions[1] - sys.positions[0]).norm() - 1.0).abs()
    };
    let (a, b) = (drift(1e-2), drift(5e-3));
    let v = 1.0 / (2.0 * PI);
    assert!(a <= 2.0 * v * v * 1e-4 * 1.01, "{a}");
    assert!((a / b - 4.0).abs() < 0.01, "ratio {}", a / b);
}

#[test]
fn circulation_is_conserved_exactly() {
    let mut sys = init_shear_layer(2000, 8.0, 1.0 / 2000.0).unwrap();
    sys.jitter(1e-4, &mut substream(3, "jitter"));
    let before = sys.circulations.clone();
    let total = sys.total_circulation();
    let mut e = engine(4);
    for _ in 0..20 {
        sys.step(&mut e).unwrap();
    }
    assert_eq!(sys.circulations, before);
    assert_eq!(sys.total_circulation(), total);
    assert_eq!(total, 0.0);
}

#[test]
fn shear_layer_clusters() {
    // the small shear-layer configuration
    let mut sys = init_shear_layer(16000, 8.0, 1.0 / 16000.0).unwrap();
    let mut e = engine(6);
    let mut spread = Vec::new();
    for step in 0..=100 {
        if step % 10 == 0 {
            let src = sys.sources().unwrap();
            let pyr = Pyramid64::build(&src, &EvalSet64::at_sources(&src), 5).unwrap();
            spread.push(pyr.radius_spread());
        }
        if step < 100 {
            sys.step(&mut e).unwrap();
        }
    }
    assert!(spread.windows(2).all(|w| w[1] > w[0]), "{spread:?}");
}

/// Softened gravity summed pair by pair.
fn gravity_direct(sys: &GravitySystem) -> Vec<C64> {
    let d2 = sys.delta * sys.delta;
    sys.positions
        .iter()
        .enumerate()
        .map(|(i, xi)| {
            let mut a = C64::new(0.0, 0.0);
            for (j, xj) in sys.positions.iter().enumerate() {
                if i == j {
                    continue;
                }
                let d = xj - xi;
                let r = d.norm();
                a += d / r * (sys.g * sys.masses[j] / (d2 + r * r).sqrt());
            }
            a
        })
        .collect()
}

#[test]
fn gravity_matches_direct_sum() {
    let mut sys = init_rotating_disc(1000, 1.0, 1.0, &mut substream(5, "disc")).unwrap();
    // softening small against the box spacing so the far field is exact
    sys.delta = 1e-5;
    let fmm = gravity_forces(&sys, &mut engine(4)).unwrap().values;
    let err = rel_err(&fmm, &gravity_direct(&sys));
    assert!(err <= 1e-6, "relative error {err:e}");
}

#[test]
fn verlet_energy_stays_bounded() {
    // one body in the field of a fixed softened mass M at the origin
    let (gm, delta) = (1.0, 0.1);
    let field = |s: &GravitySystem| {
        Ok(s.positions
            .iter()
            .map(|x| {
                let r = x.norm();
                -x / r * (gm / (delta * delta + r * r).sqrt())
            })
            .collect())
    };
    let energy = |s: &GravitySystem| 0.5 * s.velocities[0].norm_sqr() + gm * (s.positions[0].norm() / delta).asinh();
    let mut s = GravitySystem::new(vec![C64::new(1.0, 0.0)], vec![C64::new(0.0, 0.8)], vec![1.0], 1.0, delta, 0.01).unwrap();
    let e0 = energy(&s);
    let (mut first, mut second) = (0.0f64, 0.0f64);
    for step in 0..10_000 {
        stormer_verlet_step(&mut s, field).unwrap();
        let dev = (energy(&s) - e0).abs();
        if step < 5000 {
            first = first.max(dev);
        } else {
            second = second.max(dev);
        }
    }
    assert!(first < 1e-4 * e0.abs(), "{first}");
    assert!(second <= 1.1 * first + 1e-12, "{first} then {second}");
}

#[test]
fn verlet_is_time_reversible() {
    let mut s = init_rotating_disc(300, 1.0, 0.5, &mut substream(6, "disc")).unwrap();
    let start = s.positions.clone();
    let v0 = s.velocities.clone();
    let mut e = engine(3);
    for _ in 0..50 {
        s.step(&mut e).unwrap();
    }
    s.reverse();
    for _ in 0..50 {
        s.step(&mut e).unwrap();
    }
    s.reverse();
    let dx = s.positions.iter().zip(&start).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let dv = s.velocities.iter().zip(&v0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(dx <= 1e-10 && dv <= 1e-10, "{dx:e} {dv:e}");
}

#[test]
fn momentum_drift_bounded_by_fmm_error() {
    let n = 200;
    let mut s = init_rotating_disc(n, 1.0, 1.0, &mut substream(7, "disc")).unwrap();
    let p0 = s.momentum();
    let mut e = engine(3);
    let mut fmax = 0.0f64;
    for _ in 0..1000 {
        s.step(&mut e).unwrap();
        let a = gravity_forces(&s, &mut e).unwrap().values;
        fmax = fmax.max(a.iter().zip(&s.masses).map(|(a, m)| a.norm() * m).fold(0.0, f64::max));
    }
    let drift = (s.momentum() - p0).norm();
    let bound = 1e-6 * p0.norm() + e.config().tol * n as f64 * fmax;
    assert!(drift <= bound, "drift {drift:e} > {bound:e}");
}

/// Conjugate velocity of the potential flow plus vortices and mirrors.
fn cylinder_direct(flow: &CylinderFlow, at: &[C64]) -> Vec<C64> {
    let r = flow.radius;
    let delta = flow.vortices.delta;
    let blob = |z: C64, x: C64, gamma: f64, core: f64| {
        let d = z - x;
        let r2 = d.norm_sqr();
        if r2 == 0.0 {
            return C64::new(0.0, 0.0);
        }
        C64::new(0.0, -gamma / (2.0 * PI)) / d * (1.0 - (-r2 / (core * core)).exp())
    };
    at.iter()
        .map(|&z| {
            let mut w = flow.v_inf * (1.0 - r * r / (z * z));
            for (x, g) in flow.vortices.positions.iter().zip(&flow.vortices.circulations) {
                let mirror = r * r / x.conj();
                w += blob(z, *x, *g, delta) + blob(z, mirror, -*g, delta * r / x.norm());
            }
            w.conj()
        })
        .collect()
}

fn random_flow(n: usize, seed: u64) -> CylinderFlow {
    let mut rng = substream(seed, "cylinder");
    let pos: Vec<C64> = (0..n)
        .map(|_| C64::from_polar(1.05 + 2.0 * rng.gen::<f64>(), 2.0 * PI * rng.gen::<f64>()))
        .collect();
    let gamma: Vec<f64> = (0..n).map(|_| 0.1 * (rng.gen::<f64>() - 0.5)).collect();
    CylinderFlow::new(1.0, 1.0, 0.0, 1e-3, 0.01, 64).unwrap().with_vortices(pos, gamma).unwrap()
}

#[test]
fn cylinder_velocities_match_direct_sum() {
    let flow = random_flow(1000, 8);
    let fmm = cylinder_velocities(&flow, &mut engine(4)).unwrap().values;
    let err = rel_err(&fmm, &cylinder_direct(&flow, &flow.vortices.positions));
    assert!(err <= 1e-6, "relative error {err:e}");
}

#[test]
fn single_mirror_pair_is_impermeable() {
    let flow = CylinderFlow::new(1.0, 0.0, 0.0, 1e-3, 0.01, 16)
        .unwrap()
        .with_vortices(vec![C64::new(-0.7, 1.1)], vec![0.8])
        .unwrap();
    let wall = flow.collocation_points();
    assert_eq!(wall.len(), 16);
    for (v, c) in cylinder_direct(&flow, &wall).iter().zip(&wall) {
        let radial = (v * c.conj()).re / c.norm();
        assert!(radial.abs() <= 1e-10, "{radial:e}");
    }
}

#[test]
fn emission_cancels_free_stream_slip() {
    let mut flow = CylinderFlow::new(1.0, 1.0, 0.0, 1e-3, 0.01, 64).unwrap();
    emit_boundary_vortices(&mut flow).unwrap();
    let wall = flow.collocation_points();
    for (v, c) in cylinder_direct(&flow, &wall).iter().zip(&wall) {
        let t = C64::new(0.0, 1.0) * c / c.norm();
        let slip = (v * t.conj()).re;
        assert!(slip.abs() <= 1e-8 * flow.v_inf, "{slip:e}");
    }
}

#[test]
fn wall_stays_impermeable_while_stepping() {
    let mut flow = CylinderFlow::new(1.0, 1.0, 0.0, 1e-3, 0.02, 64).unwrap();
    let mut e = engine(3);
    for _ in 0..5 {
        flow.step(&mut e).unwrap();
        let wall = flow.collocation_points();
        for (v, c) in cylinder_direct(&flow, &wall).iter().zip(&wall) {
            let radial = (v * c.conj()).re / c.norm();
            assert!(radial.abs() <= 1e-6 * flow.v_inf, "{radial:e}");
        }
    }
    assert_eq!(flow.vortices.len(), 5 * 64);
    assert!(flow.vortices.positions.iter().all(|z| z.norm() >= flow.radius));
}

#[test]
fn empty_flow_convection_is_a_no_op() {
    let mut flow = CylinderFlow::new(1.0, 1.0, 0.0, 1e-3, 0.01, 16).unwrap();
    let stats = rk4_convect(&mut flow, &mut engine(2)).unwrap();
    assert_eq!(stats.evaluations, 0);
    assert!(flow.vortices.is_empty());
}

/// Reference path of one vortex: many small RK4 steps of the direct field.
fn reference_path(flow: &CylinderFlow, t: f64, substeps: usize) -> C64 {
    let h = t / substeps as f64;
    let mut f = flow.clone();
    let vel = |f: &CylinderFlow, z: C64| {
        let mut g = f.clone();
        g.vortices.positions[0] = z;
        cylinder_direct(&g, &[z])[0]
    };
    let mut z = f.vortices.positions[0];
    for _ in 0..substeps {
        let k1 = vel(&f, z);
        let k2 = vel(&f, z + k1 * (h / 2.0));
        let k3 = vel(&f, z + k2 * (h / 2.0));
        let k4 = vel(&f, z + k3 * h);
        z += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        f.vortices.positions[0] = z;
    }
    z
}

#[test]
fn far_vortex_advects_with_free_stream() {
    let err = |dt: f64| {
        let mut flow = CylinderFlow::new(1.0, 1.0, 0.0, 1e-3, dt, 16)
            .unwrap()
            .with_vortices(vec![C64::new(-6.0, 3.0)], vec![0.5])
            .unwrap();
        let reference = reference_path(&flow, dt, 64);
        let start = flow.vortices.positions[0];
        rk4_convect(&mut flow, &mut engine(1)).unwrap();
        let moved = flow.vortices.positions[0] - start;
        assert!((moved - C64::new(dt, 0.0)).norm() < 0.1 * dt);
        (flow.vortices.positions[0] - reference).norm()
    };
    let (a, b) = (err(0.4), err(0.2));
    // local error O(dt^5): halving dt divides it by about 32
    assert!(a / b > 16.0, "{a:e} {b:e}");
}

#[test]
fn rk4_and_euler_differ_at_first_order() {
    let gap = |dt: f64| {
        let steps = (1.0 / dt).round() as usize;
        let base = CylinderFlow::new(1.0, 1.0, 0.0, 1e-3, dt, 16)
            .unwrap()
            .with_vortices(vec![C64::new(-2.0, 0.6), C64::new(-2.5, -0.4)], vec![0.3, -0.2])
            .unwrap();
        let mut rk = base.clone();
        let mut e = engine(1);
        for _ in 0..steps {
            rk4_convect(&mut rk, &mut e).unwrap();
        }
        let mut eu = base;
        for _ in 0..steps {
            let v = cylinder_direct(&eu, &eu.vortices.positions);
            euler_step(&mut eu.vortices, &v).unwrap();
        }
        rk.vortices.positions.iter().zip(&eu.vortices.positions).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    };
    let (a, b) = (gap(0.02), gap(0.01));
    assert!((a / b - 2.0).abs() < 0.3, "{a:e} {b:e}");
}

#[test]
fn stage_inside_cylinder_is_reflected() {
    // just upstream of the front stagnation point the flow points into the wall
    let eps = 1e-3;
    let mut flow = CylinderFlow::new(1.0, 1.0, 0.0, 1e-3, 2.0, 16)
        .unwrap()
        .with_vortices(vec![C64::new(-1.0 - eps, 0.0)], vec![0.0])
        .unwrap();
    rk4_convect(&mut flow, &mut engine(1)).unwrap();
    assert!(flow.reflections > 0);
    assert!(flow.vortices.positions[0].norm() >= 1.0);
}
