use proptest::prelude::*;
use radsplit::adrt2::{drt_forward, quadrant_normal};
use radsplit::hypersolve::*;
use radsplit::invert::{invert_drt, InvertOptions};
use radsplit::{prolong, Grid2D, Quadrant};

fn hump(n: usize, center: [f64; 2]) -> Grid2D {
    make_cosine_hump(center, 1.0, 1.0, &Grid2D::zeros(n, 4.0).unwrap())
}

fn centroid(g: &Grid2D) -> [f64; 2] {
    let n = g.n();
    let (mut m, mut x, mut y) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let v = g.get(i, j);
            m += v;
            x += v * g.center(j);
            y += v * g.center(i);
        }
    }
    [x / m, y / m]
}

fn max_diff(a: &Grid2D, b: &Grid2D) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn radial_solution_keeps_quarter_turn_symmetry() {
    // Quarter-turned digital lines round the other way, so single CG
    // iterates are not symmetric; the least-squares solution is.
    let q0 = AcousticState::at_rest(hump(16, [0.0, 0.0]));
    let mut opts = SolveOptions::default();
    opts.invert.tol = 1e-12;
    let sol = solve_acoustics(&q0, MaterialParams::default(), 1.5, &opts).unwrap();
    let p = &sol.state.p;
    let rel = max_diff(p, &p.rotate90()) / p.max_abs();
    assert!(rel <= 1e-10, "{rel}");
    // Velocity turns with the grid: rot(u) = v and rot(v) = −u.
    let (u, v) = (&sol.state.u, &sol.state.v);
    let minus_u = u.with_data(u.data().iter().map(|x| -x).collect()).unwrap();
    assert!(max_diff(&u.rotate90(), v) / u.max_abs() <= 1e-10);
    assert!(max_diff(&v.rotate90(), &minus_u) / u.max_abs() <= 1e-10);
}

#[test]
fn zero_time_is_a_round_trip() {
    let q0 = hump(16, [0.5, -0.25]);
    let sol = solve_transport(&q0, [0.6, 0.8], 0.0, &SolveOptions::default()).unwrap();
    assert!(sol.stats.converged);
    assert!(max_diff(&sol.grid, &q0) < 1e-6);
}

#[test]
fn integer_shifts_compose_exactly_on_slices() {
    // With n = 16 and L = 4, t = 15 moves every slice by a whole number of
    // cells, and so does t = 7.5, up to rounding in the slope geometry.
    let n = 16;
    let q0 = hump(n / 2, [0.0, 0.0]);
    let sino = drt_forward(&prolong(&q0, 2).unwrap());
    for boundary in [BoundarySpec::AbsorbingExtrapolation, BoundarySpec::Zero] {
        for theta in [[1.0, 0.0], [0.0, -1.0]] {
            assert!(sino.max_abs() > 0.0);
            let once = advect_sinogram(&sino, theta, 15.0, 4.0, boundary);
            let half = advect_sinogram(&sino, theta, 7.5, 4.0, boundary);
            let twice = advect_sinogram(&half, theta, 7.5, 4.0, boundary);
            let diff = once
                .quadrants()
                .iter()
                .zip(twice.quadrants())
                .flat_map(|(a, b)| a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()))
                .fold(0.0, f64::max);
            assert!(diff <= 1e-12 * sino.max_abs(), "{diff}");
        }
    }
}

#[test]
fn fractional_steps_compose_within_interpolation_error() {
    let n = 32;
    let q0 = hump(n, [-1.0, 0.0]);
    let opts = SolveOptions::default();
    let theta = [0.6, 0.8];
    let full = solve_transport(&q0, theta, 1.3, &opts).unwrap().grid;
    let half = solve_transport(&q0, theta, 0.65, &opts).unwrap().grid;
    let split = solve_transport(&half, theta, 0.65, &opts).unwrap().grid;
    // Total variation of a unit hump along any line is 2.
    let bound = 2.0 * full.cell_width();
    let l1: f64 = full
        .data()
        .iter()
        .zip(split.data())
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        * full.cell_width().powi(2);
    assert!(l1 <= bound, "{l1} > {bound}");
    let [a, b] = [centroid(&full), centroid(&split)];
    assert!((a[0] - b[0]).hypot(a[1] - b[1]) < full.cell_width());
}

#[test]
fn slices_parallel_to_the_velocity_stay_put() {
    let n = 16;
    let sino = drt_forward(&hump(n, [0.3, 0.1]));
    let moved = advect_sinogram(&sino, [1.0, 0.0], 2.0, 4.0, BoundarySpec::default());
    for q in [Quadrant::A, Quadrant::D] {
        let normal = quadrant_normal(q, 0, n).normal;
        assert!(normal[0].abs() < 1e-15);
        assert_eq!(moved.quadrant(q).slice(0), sino.quadrant(q).slice(0));
    }
    assert_ne!(
        moved.quadrant(Quadrant::B).slice(0),
        sino.quadrant(Quadrant::B).slice(0)
    );
}

#[test]
fn fluid_at_rest_has_no_transverse_velocity() {
    let n = 16;
    let state = AcousticState::at_rest(hump(n / 2, [0.2, -0.4]));
    let sino = AcousticSinograms::from_state(&state, 2).unwrap();
    let ev = evolve_acoustic_sinograms(
        &sino,
        MaterialParams::new(2.0, 0.5).unwrap(),
        0.7,
        4.0,
        BoundarySpec::default(),
    );
    let scale = ev.u.max_abs().max(ev.v.max_abs());
    assert!(scale > 0.0);
    for q in Quadrant::ALL {
        for s in 0..n {
            let [w1, w2] = quadrant_normal(q, s, n).normal;
            let (u, v) = (ev.u.quadrant(q).slice(s), ev.v.quadrant(q).slice(s));
            for (a, b) in u.iter().zip(v) {
                assert!((-w2 * a + w1 * b).abs() <= 1e-13 * scale);
            }
        }
    }
}

#[test]
fn transport_moves_the_centroid() {
    let n = 32;
    let q0 = hump(n, [0.0, 0.0]);
    let theta = [-0.8, 0.6];
    let sols = solve_transport_at(&q0, theta, &[1.0, 2.0], &SolveOptions::default()).unwrap();
    for s in sols {
        let c = centroid(&s.grid);
        let err = (c[0] - s.time * theta[0]).hypot(c[1] - s.time * theta[1]);
        assert!(err < s.grid.cell_width(), "t={} centroid {c:?}", s.time);
    }
}

#[test]
fn pressure_only_path_matches_full_solve() {
    let q0 = AcousticState::at_rest(hump(16, [0.5, 0.5]));
    let params = MaterialParams::default();
    let opts = SolveOptions::default();
    let full = solve_acoustics(&q0, params, 1.0, &opts).unwrap();
    let p = solve_pressure_at(&q0, params, &[1.0], &opts).unwrap();
    assert_eq!(full.state.p, p[0].grid);
}

#[test]
fn mixed_sign_velocity_inverts_consistently() {
    // A moving initial state: the characteristic split must carry momentum.
    let n = 16;
    let p = hump(n, [0.0, 0.0]);
    let u = p.clone();
    let v = Grid2D::zeros(n, 4.0).unwrap();
    let state = AcousticState::new(p, u, v).unwrap();
    let sol = solve_acoustics(
        &state,
        MaterialParams::default(),
        1.0,
        &SolveOptions::default(),
    )
    .unwrap();
    // p + u moves right, p − u = 0 stays, so the mass drifts towards +x₁.
    assert!(centroid(&sol.state.p)[0] > 0.5);
}

#[test]
fn inversion_of_transport_sinogram_is_reported() {
    let q0 = hump(8, [0.0, 0.0]);
    let sino = drt_forward(&prolong(&q0, 4).unwrap());
    let moved = advect_sinogram(&sino, [1.0, 0.0], 0.5, 4.0, BoundarySpec::default());
    let r = invert_drt(&moved, 8, 4.0, &InvertOptions::default()).unwrap();
    assert!(r.converged && r.iterations > 0);
}

proptest! {
    #[test]
    fn same_sign_integer_shifts_compose(
        data in prop::collection::vec(-5.0f64..5.0, 1..24),
        a in 0i32..30,
        b in 0i32..30,
        negative in any::<bool>(),
        zero in any::<bool>(),
    ) {
        let sign = if negative { -1.0 } else { 1.0 };
        let bc = if zero { BoundarySpec::Zero } else { BoundarySpec::AbsorbingExtrapolation };
        let once = shift_slice(&data, sign * (a + b) as f64, bc);
        let twice = shift_slice(&shift_slice(&data, sign * a as f64, bc), sign * b as f64, bc);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn fractional_shift_preserves_constants(c in -3.0f64..3.0, dh in -40.0f64..40.0, len in 1usize..20) {
        let out = shift_slice(&vec![c; len], dh, BoundarySpec::AbsorbingExtrapolation);
        prop_assert!(out.iter().all(|x| (x - c).abs() <= 1e-14));
    }
}
