//! Initial level sets from declarative shapes.
//!
//! Shapes use the textual syntax `circle:cx,cy,r` and `rect:x0,y0,x1,y1`.
//! Several shapes combine into the union of their interiors.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::{LevelSet, ScalarField};

/// Flat initialization height for `binary_step` mode.
pub const DEFAULT_STEP_HEIGHT: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    Circle { cx: f64, cy: f64, r: f64 },
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
}

impl Shape {
    /// Signed distance to the shape boundary, negative inside.
    pub fn signed_distance(&self, x: f64, y: f64) -> f64 {
        match *self {
            Shape::Circle { cx, cy, r } => ((x - cx).powi(2) + (y - cy).powi(2)).sqrt() - r,
            Shape::Rect { x0, y0, x1, y1 } => {
                let (hx, hy) = ((x1 - x0) / 2.0, (y1 - y0) / 2.0);
                let dx = (x - (x0 + x1) / 2.0).abs() - hx;
                let dy = (y - (y0 + y1) / 2.0).abs() - hy;
                let outside = dx.max(0.0).hypot(dy.max(0.0));
                outside + dx.max(dy).min(0.0)
            }
        }
    }

    fn validate(&self, width: usize, height: usize) -> Result<()> {
        let (wmax, hmax) = ((width - 1) as f64, (height - 1) as f64);
        let (bx0, by0, bx1, by1) = match *self {
            Shape::Circle { cx, cy, r } => {
                if !(r > 1.0) {
                    return Err(Error::spec(format!("circle radius {r} must exceed 1")));
                }
                (cx - r, cy - r, cx + r, cy + r)
            }
            Shape::Rect { x0, y0, x1, y1 } => {
                if !(x0 < x1 && y0 < y1) {
                    return Err(Error::spec(format!(
                        "rect corners ({x0},{y0})-({x1},{y1}) are not ordered"
                    )));
                }
                (x0, y0, x1, y1)
            }
        };
        if bx1 < 0.0 || by1 < 0.0 || bx0 > wmax || by0 > hmax {
            return Err(Error::spec(format!(
                "{self} lies outside the {width}x{height} grid"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Shape::Circle { cx, cy, r } => write!(f, "circle:{cx},{cy},{r}"),
            Shape::Rect { x0, y0, x1, y1 } => write!(f, "rect:{x0},{y0},{x1},{y1}"),
        }
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| Error::spec(format!("shape '{s}' lacks a 'kind:' prefix")))?;
        let nums = args
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::spec(format!("shape '{s}': {e}")))?;
        if nums.iter().any(|v| !v.is_finite()) {
            return Err(Error::spec(format!("shape '{s}' has non-finite values")));
        }
        match (kind, nums.as_slice()) {
            ("circle", &[cx, cy, r]) => Ok(Shape::Circle { cx, cy, r }),
            ("rect", &[x0, y0, x1, y1]) => Ok(Shape::Rect { x0, y0, x1, y1 }),
            ("circle", _) => Err(Error::spec("circle takes cx,cy,r")),
            ("rect", _) => Err(Error::spec("rect takes x0,y0,x1,y1")),
            _ => Err(Error::spec(format!("unknown shape kind '{kind}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitMode {
    /// Exact signed distance to the union boundary.
    Sdf,
    /// `-c0` inside the union, `+c0` outside.
    BinaryStep(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitSpec {
    pub shape: Shape,
    pub mode: InitMode,
}

impl InitSpec {
    pub fn sdf(shape: Shape) -> Self {
        InitSpec {
            shape,
            mode: InitMode::Sdf,
        }
    }

    pub fn binary_step(shape: Shape, c0: f64) -> Self {
        InitSpec {
            shape,
            mode: InitMode::BinaryStep(c0),
        }
    }
}

/// Centered rectangle covering the middle 60% of each axis.
pub fn default_shape(width: usize, height: usize) -> Shape {
    let (w, h) = (width as f64, height as f64);
    Shape::Rect {
        x0: 0.2 * w,
        y0: 0.2 * h,
        x1: 0.8 * w,
        y1: 0.8 * h,
    }
}

pub fn init_levelset(specs: &[InitSpec], width: usize, height: usize) -> Result<LevelSet> {
    let first = specs
        .first()
        .ok_or_else(|| Error::spec("at least one initial shape is required"))?;
    if width < 2 || height < 2 {
        return Err(Error::spec("grid must be at least 2x2"));
    }
    for s in specs {
        if s.mode != first.mode {
            return Err(Error::spec("all initial shapes must share one mode"));
        }
        if let InitMode::BinaryStep(c0) = s.mode {
            if !(c0 > 0.0) {
                return Err(Error::spec(format!("step height {c0} must be positive")));
            }
        }
        s.shape.validate(width, height)?;
    }
    let sdf = ScalarField::from_fn(width, height, |x, y| {
        specs
            .iter()
            .map(|s| s.shape.signed_distance(x as f64, y as f64))
            .fold(f64::INFINITY, f64::min)
    });
    Ok(match first.mode {
        InitMode::Sdf => sdf,
        InitMode::BinaryStep(c0) => sdf.map(|d| if d < 0.0 { -c0 } else { c0 }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{grad_central, grad_magnitude};
    use proptest::prelude::*;

    fn circle(cx: f64, cy: f64, r: f64) -> Shape {
        Shape::Circle { cx, cy, r }
    }

    #[test]
    fn circle_sdf_values() {
        let phi = init_levelset(&[InitSpec::sdf(circle(32.0, 32.0, 10.0))], 64, 64).unwrap();
        assert_eq!(phi[(32, 32)], -10.0);
        assert_eq!(phi[(32, 42)], 0.0);
        assert_eq!(phi[(32, 52)], 10.0);
    }

    #[test]
    fn rect_binary_step() {
        let r = Shape::Rect {
            x0: 10.0,
            y0: 10.0,
            x1: 20.0,
            y1: 20.0,
        };
        let phi = init_levelset(&[InitSpec::binary_step(r, 2.0)], 32, 32).unwrap();
        assert_eq!(phi[(15, 15)], -2.0);
        assert_eq!(phi[(0, 0)], 2.0);
    }

    #[test]
    fn rect_sdf_values() {
        let r = Shape::Rect {
            x0: 10.0,
            y0: 10.0,
            x1: 20.0,
            y1: 20.0,
        };
        assert_eq!(r.signed_distance(15.0, 15.0), -5.0);
        assert_eq!(r.signed_distance(12.0, 15.0), -2.0);
        assert_eq!(r.signed_distance(25.0, 15.0), 5.0);
        assert_eq!(r.signed_distance(23.0, 24.0), 5.0);
    }

    #[test]
    fn union_of_disjoint_circles() {
        let specs = [
            InitSpec::sdf(circle(15.0, 15.0, 6.0)),
            InitSpec::sdf(circle(45.0, 40.0, 8.0)),
        ];
        let phi = init_levelset(&specs, 64, 64).unwrap();
        assert!(phi[(15, 15)] < 0.0 && phi[(45, 40)] < 0.0);
        assert!(phi[(30, 28)] > 0.0);
        // each value is the min of the per-shape distances
        let d1 = specs[0].shape.signed_distance(30.0, 28.0);
        let d2 = specs[1].shape.signed_distance(30.0, 28.0);
        assert_eq!(phi[(30, 28)], d1.min(d2));
    }

    #[test]
    fn invalid_specs() {
        assert!(init_levelset(&[], 10, 10).is_err());
        assert!(init_levelset(&[InitSpec::sdf(circle(100.0, 100.0, 5.0))], 64, 64).is_err());
        assert!(init_levelset(&[InitSpec::sdf(circle(10.0, 10.0, 0.5))], 64, 64).is_err());
        let mixed = [
            InitSpec::sdf(circle(10.0, 10.0, 3.0)),
            InitSpec::binary_step(circle(30.0, 30.0, 3.0), 2.0),
        ];
        assert!(init_levelset(&mixed, 64, 64).is_err());
        let bad_rect = Shape::Rect {
            x0: 5.0,
            y0: 5.0,
            x1: 5.0,
            y1: 9.0,
        };
        assert!(init_levelset(&[InitSpec::sdf(bad_rect)], 64, 64).is_err());
    }

    #[test]
    fn shape_syntax() {
        assert_eq!(
            "circle:32,32,20".parse::<Shape>().unwrap(),
            circle(32.0, 32.0, 20.0)
        );
        assert_eq!(
            "rect:1,2,3.5,4".parse::<Shape>().unwrap(),
            Shape::Rect {
                x0: 1.0,
                y0: 2.0,
                x1: 3.5,
                y1: 4.0
            }
        );
        for bad in [
            "circle:1,2",
            "rect:1,2,3",
            "blob:1,2,3",
            "circle",
            "circle:a,b,c",
        ] {
            assert!(bad.parse::<Shape>().is_err(), "{bad}");
        }
        let s = circle(1.5, 2.0, 3.25);
        assert_eq!(s.to_string().parse::<Shape>().unwrap(), s);
    }

    #[test]
    fn default_shape_is_middle_sixty_percent() {
        assert_eq!(
            default_shape(100, 50),
            Shape::Rect {
                x0: 20.0,
                y0: 10.0,
                x1: 80.0,
                y1: 40.0
            }
        );
    }

    #[test]
    fn sdf_mode_has_unit_gradient_near_contour() {
        let phi = init_levelset(&[InitSpec::sdf(circle(31.3, 30.8, 14.0))], 64, 64).unwrap();
        let m = grad_magnitude(&grad_central(&phi));
        for i in 0..phi.len() {
            if phi.data()[i].abs() < 5.0 {
                assert!((m.data()[i] - 1.0).abs() < 0.05);
            }
        }
    }

    proptest! {
        #[test]
        fn binary_step_sign_matches_sdf(cx in 5.0f64..40.0, cy in 5.0f64..40.0, r in 2.0f64..15.0,
                                        x0 in 0.0f64..30.0, y0 in 0.0f64..30.0, w in 1.0f64..20.0) {
            let shapes = [circle(cx, cy, r), Shape::Rect { x0, y0, x1: x0 + w, y1: y0 + w }];
            let sdf: Vec<_> = shapes.iter().map(|&s| InitSpec::sdf(s)).collect();
            let step: Vec<_> = shapes.iter().map(|&s| InitSpec::binary_step(s, 2.0)).collect();
            let a = init_levelset(&sdf, 48, 48).unwrap();
            let b = init_levelset(&step, 48, 48).unwrap();
            prop_assert_eq!(a.interior_mask(), b.interior_mask());
        }
    }
}
