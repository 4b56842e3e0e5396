use ndarray::Array2;
use proptest::prelude::*;

use phasereg_core::fft;
use phasereg_core::filters::{filter_frame, filter_sinogram, smooth_frame, smooth_rows};
use phasereg_core::kernels::{deriv_kernel_hat, k_eps_hat, k_hat, t_hat};
use phasereg_core::select::{curvature, XiBundle};
use phasereg_core::tomo::{backproject_bst, backproject_direct};
use phasereg_core::{CutoffMask, Ell, Frame, Grid1D, Grid2D, Sinogram};

fn field(n: usize, lo: f64, hi: f64) -> impl Strategy<Value = Array2<f64>> {
    prop::collection::vec(lo..hi, n * n).prop_map(move |v| Array2::from_shape_vec((n, n), v).unwrap())
}

fn roll(x: &Array2<f64>, dr: usize, dc: usize) -> Array2<f64> {
    let (ny, nx) = x.dim();
    Array2::from_shape_fn((ny, nx), |(r, c)| x[[(r + ny - dr) % ny, (c + nx - dc) % nx]])
}

fn sup(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn ell_strategy() -> impl Strategy<Value = f64> {
    (-6.0f64..0.0).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mask_is_a_projection(x in field(16, -1.0, 1.0), m in 0.05f64..1.5, delta in 0.01f64..2.0) {
        let grid = Grid2D::square(16, delta).unwrap();
        let mask = CutoffMask::new(m).unwrap();
        let once = grid.apply_mask(&fft::fft2(x.view()), mask).unwrap();
        let twice = grid.apply_mask(&once, mask).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn round_trip_and_parseval(x in field(24, -5.0, 5.0)) {
        let spec = fft::fft2(x.view());
        let e_x: f64 = x.iter().map(|v| v * v).sum();
        let e_s: f64 = spec.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((e_x - e_s).abs() <= 1e-10 * e_x);
        let back = fft::ifft2(spec).mapv(|z| z.re);
        prop_assert!(sup(&back, &x) <= 1e-12 * (1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()))));
    }

    #[test]
    fn frame_filter_commutes_with_cyclic_shifts(
        x in field(16, 0.2, 1.0), l in ell_strategy(), dr in 0usize..16, dc in 0usize..16, m in 0.2f64..1.2,
    ) {
        let f = Frame::new(x.clone(), 0.1).unwrap();
        let fs = Frame::new(roll(&x, dr, dc), 0.1).unwrap();
        let mask = CutoffMask::new(m).unwrap();
        let Ok(p) = filter_frame(&f, Ell::new(l).unwrap(), mask, 1.0) else { return Ok(()) };
        let ps = filter_frame(&fs, Ell::new(l).unwrap(), mask, 1.0).unwrap();
        prop_assert!(sup(&roll(&p.data, dr, dc), &ps.data) <= 1e-10);
    }

    #[test]
    fn sinogram_filter_commutes_with_t_shifts(x in field(16, -1.0, 1.0), l in ell_strategy(), dc in 0usize..16) {
        let g = Sinogram::new(x.clone(), 0.1, Sinogram::uniform_angles(16)).unwrap();
        let gs = g.with_data(roll(&x, 0, dc)).unwrap();
        let p = filter_sinogram(&g, Ell::new(l).unwrap(), CutoffMask::full()).data;
        let ps = filter_sinogram(&gs, Ell::new(l).unwrap(), CutoffMask::full()).data;
        prop_assert!(sup(&roll(&p, 0, dc), &ps) <= 1e-10);
    }

    #[test]
    fn smoothing_preserves_the_mean(x in field(16, 0.1, 1.0), l in ell_strategy(), m in 0.05f64..1.5) {
        let f = Frame::new(x.clone(), 0.05).unwrap();
        let mask = CutoffMask::new(m).unwrap();
        let mean = x.mean().unwrap();
        let s = smooth_frame(&f, Ell::new(l).unwrap(), mask);
        prop_assert!((s.mean().unwrap() - mean).abs() <= 1e-10 * mean);
        let rows = smooth_rows(&x, &Grid1D::new(16, 0.05).unwrap(), Ell::new(l).unwrap(), mask);
        prop_assert!((rows.mean().unwrap() - mean).abs() <= 1e-10 * mean);
    }

    #[test]
    fn exponential_is_lipschitz_on_nonnegative_maps(p in field(12, 0.0, 3.0), q in field(12, 0.0, 3.0)) {
        let lhs: f64 = p.iter().zip(&q).map(|(a, b)| ((-a).exp() - (-b).exp()).powi(2)).sum();
        let rhs: f64 = p.iter().zip(&q).map(|(a, b)| (a - b).powi(2)).sum();
        prop_assert!(lhs.sqrt() <= rhs.sqrt() + 1e-15);
    }

    #[test]
    fn kernels_decrease_in_ell_and_frequency(q1 in -50.0f64..50.0, q2 in -50.0f64..50.0, l in ell_strategy(), s in 1.01f64..3.0) {
        prop_assume!(q1.hypot(q2) > 1e-3);
        let q = [q1, q2];
        let k = k_hat(q, Ell::new(l).unwrap());
        prop_assert!(k > 0.0 && k <= 1.0);
        prop_assert!(k_hat(q, Ell::new(l * s).unwrap()) < k);
        prop_assert!(k_hat([q1 * s, q2 * s], Ell::new(l).unwrap()) < k);
        prop_assert_eq!(t_hat(q1, Ell::new(l).unwrap()), k_hat([q1, 0.0], Ell::new(l).unwrap()));
        prop_assert_eq!(k_eps_hat(q, Ell::new(l).unwrap(), 1.0).unwrap(), k);
        prop_assert_eq!(k_eps_hat(q, Ell::new(l).unwrap(), 0.0).unwrap(), t_hat(q1, Ell::new(l).unwrap()));
    }

    #[test]
    fn zeroth_derivative_kernel_is_the_kernel(q1 in -50.0f64..50.0, q2 in -50.0f64..50.0, l in ell_strategy()) {
        let a = 4.0 * std::f64::consts::PI.powi(2) * (q1 * q1 + q2 * q2);
        let e = Ell::new(l).unwrap();
        prop_assert!((deriv_kernel_hat(a, e, 0).unwrap() - k_hat([q1, q2], e)).abs() <= 1e-15);
    }

    #[test]
    fn curvature_ignores_scaling_of_xi(xi in 0.1f64..10.0, d1 in -5.0f64..5.0, d2 in -5.0f64..5.0, c in 1e-3f64..1e3) {
        let b = XiBundle { ell: 0.3, xi, dxi: d1, d2xi: d2 };
        let s = XiBundle { ell: 0.3, xi: c * xi, dxi: c * d1, d2xi: c * d2 };
        let (k1, k2) = (curvature(&b).unwrap(), curvature(&s).unwrap());
        prop_assert!(k1 >= 0.0);
        prop_assert!((k1 - k2).abs() <= 1e-12 * (1.0 + k1));
    }

    #[test]
    fn row_smoothing_is_linear(x in field(8, -1.0, 1.0), y in field(8, -1.0, 1.0), a in -3.0f64..3.0, b in -3.0f64..3.0, l in ell_strategy()) {
        let t = Grid1D::new(8, 0.1).unwrap();
        let e = Ell::new(l).unwrap();
        let lhs = smooth_rows(&(&x * a + &y * b), &t, e, CutoffMask::full());
        let rhs = smooth_rows(&x, &t, e, CutoffMask::full()) * a + smooth_rows(&y, &t, e, CutoffMask::full()) * b;
        prop_assert!(sup(&lhs, &rhs) <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn backprojections_are_linear(x in field(16, -1.0, 1.0), y in field(16, -1.0, 1.0), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let angles = Sinogram::uniform_angles(16);
        let gx = Sinogram::new(x.clone(), 0.1, angles.clone()).unwrap();
        let gy = Sinogram::new(y.clone(), 0.1, angles.clone()).unwrap();
        let gc = Sinogram::new(&x * a + &y * b, 0.1, angles).unwrap();
        let out = Grid2D::square(16, 0.1).unwrap();
        for bp in [backproject_direct, backproject_bst] {
            let lhs = bp(&gc, out).into_data();
            let rhs = bp(&gx, out).into_data() * a + bp(&gy, out).into_data() * b;
            let scale = 1.0 + rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!(sup(&lhs, &rhs) <= 1e-9 * scale);
        }
    }
}
