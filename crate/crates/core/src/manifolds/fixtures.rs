//! Reference curves in ℝ² used by tests and convergence studies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{generate, parallel_copies, DiscretizedSubmanifold, GeneratorSpec};
use crate::geometry::GrassPlane;

/// Segment of extent 3 through `basepoint` in direction angle `theta`.
pub fn line_through(basepoint: [f64; 2], theta: f64, count: usize) -> DiscretizedSubmanifold {
    let (s, c) = theta.sin_cos();
    generate(&GeneratorSpec::AffinePlane {
        ambient: 2,
        basepoint: basepoint.to_vec(),
        plane: GrassPlane::span(&[&[c, s]]).expect("unit direction"),
        extent: 3.0,
        count,
        seed: 0,
    })
    .expect("valid line")
}

/// Named curves in ℝ², `count` samples per connected piece.
pub fn standard_fixtures(count: usize) -> Vec<(&'static str, DiscretizedSubmanifold)> {
    let circle = |r: f64, center: [f64; 2]| {
        generate(&GeneratorSpec::Circle {
            radius: r,
            center,
            count,
        })
        .expect("valid circle")
    };
    let unit = circle(1.0, [0.0, 0.0]);
    vec![
        ("unit circle", unit.clone()),
        ("circle r=2", circle(2.0, [0.0, 0.0])),
        ("small offset circle", circle(0.5, [0.3, 0.0])),
        ("x-axis", line_through([0.0, 0.0], 0.0, count)),
        ("line y=0.5", line_through([0.0, 0.5], 0.0, count)),
        ("diagonal", line_through([0.0, 0.0], std::f64::consts::FRAC_PI_4, count)),
        (
            "parabola",
            generate(&GeneratorSpec::GraphOfFunction {
                ambient: 2,
                dim: 1,
                coefficients: vec![vec![0.0, 0.0, 0.5]],
                extent: 2.0,
                count,
            })
            .expect("valid graph"),
        ),
        ("two circles", parallel_copies(&unit, 0.1).expect("inside the tube")),
        ("empty", DiscretizedSubmanifold::empty(2, 1).expect("valid dimensions")),
    ]
}

/// A small random curve in ℝ²: a circle, a line, a pair of parallel circles or,
/// rarely, the empty curve.
pub fn random_curve(seed: u64) -> DiscretizedSubmanifold {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.gen_range(24..72);
    match rng.gen_range(0..10) {
        0 => DiscretizedSubmanifold::empty(2, 1).expect("valid dimensions"),
        1..=4 => generate(&GeneratorSpec::Circle {
            radius: rng.gen_range(0.3..2.0),
            center: [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
            count,
        })
        .expect("valid circle"),
        5..=7 => line_through(
            [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
            rng.gen_range(0.0..std::f64::consts::PI),
            count,
        ),
        _ => {
            let radius = rng.gen_range(0.5..2.0);
            let base = generate(&GeneratorSpec::circle(radius, count)).expect("valid circle");
            parallel_copies(&base, rng.gen_range(0.01..0.4) * radius).expect("inside the tube")
        }
    }
}
