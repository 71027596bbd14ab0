//! Central finite differences with replicate-edge (Neumann) ghost cells.

use super::{ScalarField, VectorField};

/// Regularizer added under every `|grad phi|` denominator.
pub const EPS_GRAD: f64 = 1e-8;

/// Central-difference gradient; border samples use replicated ghosts, so
/// the first column gets `(f[1] - f[0]) / 2`.
pub fn grad_central(f: &ScalarField) -> VectorField {
    let (w, h) = f.dims();
    let mut vx = ScalarField::zeros(w, h);
    let mut vy = ScalarField::zeros(w, h);
    for y in 0..h {
        let ym = y.saturating_sub(1);
        let yp = (y + 1).min(h - 1);
        for x in 0..w {
            let xm = x.saturating_sub(1);
            let xp = (x + 1).min(w - 1);
            vx[(x, y)] = 0.5 * (f.get(xp, y) - f.get(xm, y));
            vy[(x, y)] = 0.5 * (f.get(x, yp) - f.get(x, ym));
        }
    }
    VectorField { vx, vy }
}

pub fn grad_magnitude(g: &VectorField) -> ScalarField {
    g.vx.zip_map(&g.vy, f64::hypot)
}

/// `grad phi / sqrt(|grad phi|^2 + EPS_GRAD)`.
pub fn normalized_gradient(phi: &ScalarField) -> VectorField {
    let g = grad_central(phi);
    let inv =
        g.vx.zip_map(&g.vy, |a, b| 1.0 / (a * a + b * b + EPS_GRAD).sqrt());
    g.scaled_by(&inv)
}

/// Transpose of [`grad_central`]: for any `u`, `sum(grad(u) . v) = sum(u * grad_central_adjoint(v))`.
///
/// Away from the border this is `-div(v)`; on the border rows it follows
/// the replicated ghosts, so energy gradients built from it are exact
/// everywhere.
pub fn grad_central_adjoint(v: &VectorField) -> ScalarField {
    let (w, h) = v.dims();
    let mut out = ScalarField::zeros(w, h);
    for y in 0..h {
        let ym = y.saturating_sub(1);
        let yp = (y + 1).min(h - 1);
        for x in 0..w {
            let xm = x.saturating_sub(1);
            let xp = (x + 1).min(w - 1);
            let (ax, ay) = (0.5 * v.vx.get(x, y), 0.5 * v.vy.get(x, y));
            out[(xp, y)] += ax;
            out[(xm, y)] -= ax;
            out[(x, yp)] += ay;
            out[(x, ym)] -= ay;
        }
    }
    out
}

/// Central-difference divergence with replicate-edge ghosts.
pub fn div(v: &VectorField) -> ScalarField {
    let (w, h) = v.dims();
    let mut out = ScalarField::zeros(w, h);
    for y in 0..h {
        let ym = y.saturating_sub(1);
        let yp = (y + 1).min(h - 1);
        for x in 0..w {
            let xm = x.saturating_sub(1);
            let xp = (x + 1).min(w - 1);
            out[(x, y)] = 0.5 * (v.vx.get(xp, y) - v.vx.get(xm, y))
                + 0.5 * (v.vy.get(x, yp) - v.vy.get(x, ym));
        }
    }
    out
}

/// Five-point Laplacian with replicate-edge ghosts.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let (w, h) = f.dims();
    let mut out = ScalarField::zeros(w, h);
    for y in 0..h {
        let ym = y.saturating_sub(1);
        let yp = (y + 1).min(h - 1);
        for x in 0..w {
            let xm = x.saturating_sub(1);
            let xp = (x + 1).min(w - 1);
            out[(x, y)] =
                f.get(xp, y) + f.get(xm, y) + f.get(x, yp) + f.get(x, ym) - 4.0 * f.get(x, y);
        }
    }
    out
}

/// Mean curvature of the level curves of `u`,
/// `(u_y^2 u_xx - 2 u_x u_y u_xy + u_x^2 u_yy) / (u_x^2 + u_y^2 + eps_grad)^(3/2)`.
pub fn curvature(u: &ScalarField, eps_grad: f64) -> ScalarField {
    let (w, h) = u.dims();
    let mut out = ScalarField::zeros(w, h);
    for y in 0..h {
        let ym = y.saturating_sub(1);
        let yp = (y + 1).min(h - 1);
        for x in 0..w {
            let xm = x.saturating_sub(1);
            let xp = (x + 1).min(w - 1);
            let c = u.get(x, y);
            let ux = 0.5 * (u.get(xp, y) - u.get(xm, y));
            let uy = 0.5 * (u.get(x, yp) - u.get(x, ym));
            let uxx = u.get(xp, y) - 2.0 * c + u.get(xm, y);
            let uyy = u.get(x, yp) - 2.0 * c + u.get(x, ym);
            let uxy = 0.25 * (u.get(xp, yp) - u.get(xp, ym) - u.get(xm, yp) + u.get(xm, ym));
            let num = uy * uy * uxx - 2.0 * ux * uy * uxy + ux * ux * uyy;
            let den = (ux * ux + uy * uy + eps_grad).powf(1.5);
            out[(x, y)] = num / den;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn radial(n: usize, c: f64) -> ScalarField {
        ScalarField::from_fn(n, n, |x, y| {
            ((x as f64 - c).powi(2) + (y as f64 - c).powi(2)).sqrt()
        })
    }

    #[test]
    fn gradient_of_linear_field() {
        let f = ScalarField::from_fn(8, 8, |x, _| x as f64);
        let g = grad_central(&f);
        for y in 0..8 {
            for x in 1..7 {
                assert_eq!(g.vx[(x, y)], 1.0);
            }
            assert_eq!(g.vx[(0, y)], 0.5);
            assert_eq!(g.vx[(7, y)], 0.5);
        }
        assert!(g.vy.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let g = grad_central(&ScalarField::filled(5, 7, 3.3));
        assert_eq!(g.vx.max_abs(), 0.0);
        assert_eq!(g.vy.max_abs(), 0.0);
    }

    #[test]
    fn magnitude() {
        let g = VectorField {
            vx: ScalarField::filled(2, 2, 3.0),
            vy: ScalarField::filled(2, 2, 4.0),
        };
        assert!(grad_magnitude(&g).data().iter().all(|&m| m == 5.0));
        let z = VectorField {
            vx: ScalarField::zeros(2, 2),
            vy: ScalarField::zeros(2, 2),
        };
        assert_eq!(grad_magnitude(&z).max_abs(), 0.0);
    }

    #[test]
    fn disk_sdf_has_unit_gradient_off_center() {
        let f = radial(64, 31.5).map(|r| r - 12.0);
        let m = grad_magnitude(&grad_central(&f));
        for y in 2..62 {
            for x in 2..62 {
                let r = ((x as f64 - 31.5).powi(2) + (y as f64 - 31.5).powi(2)).sqrt();
                if r > 3.0 {
                    assert!(
                        (m[(x, y)] - 1.0).abs() < 0.05,
                        "at ({x},{y}): {}",
                        m[(x, y)]
                    );
                }
            }
        }
    }

    #[test]
    fn curvature_of_radial_distance_is_inverse_radius() {
        let u = radial(64, 32.0);
        let k = curvature(&u, EPS_GRAD);
        let mut checked = 0;
        for y in 0..64 {
            for x in 0..64 {
                let r = ((x as f64 - 32.0).powi(2) + (y as f64 - 32.0).powi(2)).sqrt();
                if (r - 5.0).abs() < 0.5 {
                    assert!((k[(x, y)] - 1.0 / r).abs() < 0.02, "r={r} k={}", k[(x, y)]);
                    checked += 1;
                }
            }
        }
        assert!(checked > 10);
        // on exactly r = 5 points the curvature is 1/5
        assert!((k[(37, 32)] - 0.2).abs() < 0.02);
        assert!((k[(32, 27)] - 0.2).abs() < 0.02);
    }

    #[test]
    fn curvature_of_flat_fields_is_zero() {
        assert_eq!(
            curvature(&ScalarField::filled(6, 6, 1.0), EPS_GRAD).max_abs(),
            0.0
        );
        let edge = ScalarField::from_fn(10, 10, |x, _| x as f64);
        assert!(curvature(&edge, EPS_GRAD).max_abs() < 1e-9);
    }

    #[test]
    fn divergence_examples() {
        let v = VectorField {
            vx: ScalarField::from_fn(8, 8, |x, _| x as f64),
            vy: ScalarField::from_fn(8, 8, |_, y| y as f64),
        };
        let d = div(&v);
        for y in 1..7 {
            for x in 1..7 {
                assert_eq!(d[(x, y)], 2.0);
            }
        }
        let c = VectorField {
            vx: ScalarField::filled(4, 4, 0.3),
            vy: ScalarField::filled(4, 4, -1.0),
        };
        assert_eq!(div(&c).max_abs(), 0.0);
    }

    #[test]
    fn laplacian_examples() {
        let sq = ScalarField::from_fn(8, 8, |x, _| (x * x) as f64);
        let harmonic = ScalarField::from_fn(8, 8, |x, y| (x + y) as f64);
        let (ls, lh) = (laplacian(&sq), laplacian(&harmonic));
        for y in 1..7 {
            for x in 1..7 {
                assert_eq!(ls[(x, y)], 2.0);
                assert!(lh[(x, y)].abs() < 1e-9);
            }
        }
        assert_eq!(laplacian(&ScalarField::filled(5, 5, 9.0)).max_abs(), 0.0);
    }

    /// Independent wide-stencil Laplacian: central difference applied twice.
    fn wide_laplacian(u: &ScalarField, x: usize, y: usize) -> f64 {
        (u.get(x + 2, y) - 2.0 * u.get(x, y) + u.get(x - 2, y)) / 4.0
            + (u.get(x, y + 2) - 2.0 * u.get(x, y) + u.get(x, y - 2)) / 4.0
    }

    proptest! {
        #[test]
        fn adjoint_is_the_transpose_of_the_gradient(
            u in proptest::collection::vec(-1.0f64..1.0, 63),
            a in proptest::collection::vec(-1.0f64..1.0, 63),
            b in proptest::collection::vec(-1.0f64..1.0, 63),
        ) {
            let u = ScalarField::from_vec(9, 7, u).unwrap();
            let v = VectorField {
                vx: ScalarField::from_vec(9, 7, a).unwrap(),
                vy: ScalarField::from_vec(9, 7, b).unwrap(),
            };
            let g = grad_central(&u);
            let lhs: f64 = (0..u.len())
                .map(|k| g.vx.data()[k] * v.vx.data()[k] + g.vy.data()[k] * v.vy.data()[k])
                .sum();
            let adj = grad_central_adjoint(&v);
            let rhs: f64 = u.data().iter().zip(adj.data()).map(|(p, q)| p * q).sum();
            prop_assert!((lhs - rhs).abs() < 1e-12);
            let d = div(&v);
            for y in 1..6 {
                for x in 1..8 {
                    prop_assert!((adj[(x, y)] + d[(x, y)]).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn div_of_grad_matches_laplacian_identity(seed in proptest::collection::vec(-1.0f64..1.0, 256)) {
            let u = ScalarField::from_vec(16, 16, seed).unwrap();
            let dg = div(&grad_central(&u));
            for y in 2..14 {
                for x in 2..14 {
                    prop_assert!((dg[(x, y)] - wide_laplacian(&u, x, y)).abs() < 1e-9);
                }
            }
            // on quadratics the compact and wide stencils agree exactly
            let q = ScalarField::from_fn(16, 16, |x, y| {
                let (x, y) = (x as f64, y as f64);
                u.data()[0] * x * x + u.data()[1] * x * y + u.data()[2] * y * y + u.data()[3] * x
            });
            let (dq, lq) = (div(&grad_central(&q)), laplacian(&q));
            for y in 2..14 {
                for x in 2..14 {
                    prop_assert!((dq[(x, y)] - lq[(x, y)]).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn curvature_is_scale_invariant(c in 1.0f64..20.0, cx in 5.0f64..11.0, cy in 5.0f64..11.0) {
            let u = ScalarField::from_fn(16, 16, |x, y| {
                let (x, y) = (x as f64, y as f64);
                ((x - cx).powi(2) + (y - cy).powi(2)).sqrt() + 0.05 * x * y
            });
            let k1 = curvature(&u, EPS_GRAD);
            let k2 = curvature(&u.map(|v| c * v), EPS_GRAD);
            let gm = grad_magnitude(&grad_central(&u));
            for i in 0..u.len() {
                // invariance is exact up to the EPS_GRAD regularizer, which
                // perturbs the result by a relative 1.5 * EPS_GRAD / |grad u|^2
                let g = gm.data()[i];
                if g > 0.1 {
                    let k = k1.data()[i];
                    let tol = (1e-6f64).max(1.5 * EPS_GRAD / (g * g) * k.abs() * 1.01);
                    prop_assert!((k - k2.data()[i]).abs() < tol);
                }
            }
        }

        #[test]
        fn operators_stay_finite(vals in proptest::collection::vec(-1e3f64..1e3, 144)) {
            let u = ScalarField::from_vec(12, 12, vals).unwrap();
            let g = grad_central(&u);
            prop_assert!(g.vx.all_finite() && g.vy.all_finite());
            prop_assert!(grad_magnitude(&g).all_finite());
            prop_assert!(curvature(&u, EPS_GRAD).all_finite());
            prop_assert!(div(&g).all_finite());
            prop_assert!(laplacian(&u).all_finite());
            prop_assert!(div(&normalized_gradient(&u)).all_finite());
            prop_assert!(super::super::gaussian_smooth(&u, 1.3).all_finite());
        }
    }
}
