use nalgebra::DMatrix;
use proptest::prelude::*;
use psimetric::geometry::{compactified_distance, CompactifiedPoint, GrassPlane};
use psimetric::manifolds::fixtures::{random_curve, standard_fixtures};
use psimetric::manifolds::{
    generate, parallel_copies, perturb_normal, BumpMode, CompactRegion, DiscretizedSubmanifold, GeneratorSpec,
};
use psimetric::neighborhoods::{
    displacement, in_gs_neighborhood, in_ls_neighborhood, tubular_projection, NeighborhoodSpec,
};

fn circle(count: usize) -> DiscretizedSubmanifold {
    generate(&GeneratorSpec::circle(1.0, count)).unwrap()
}

/// Nearby pairs drawn from the fixture families.
fn fixture_pairs() -> Vec<(DiscretizedSubmanifold, DiscretizedSubmanifold)> {
    let c = circle(256);
    let line = generate(&GeneratorSpec::line(3.0, 301)).unwrap();
    let bump = BumpMode::SmoothBump {
        center: vec![1.0, 0.0],
        width: 0.4,
    };
    let mut pairs = vec![(c.clone(), c.clone()), (line.clone(), line.clone())];
    for delta in [0.005, 0.02, 0.05, 0.1, 0.2] {
        pairs.push((c.clone(), perturb_normal(&c, delta, &BumpMode::ConstantShift).unwrap()));
        pairs.push((c.clone(), perturb_normal(&c, delta, &bump).unwrap()));
        pairs.push((c.clone(), parallel_copies(&c, delta).unwrap()));
        pairs.push((line.clone(), parallel_copies(&line, delta).unwrap()));
        let shear = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, delta, 1.0]);
        pairs.push((line.clone(), line.linear_image(&shear).unwrap()));
    }
    let (_, a) = &standard_fixtures(256)[0];
    let (_, b) = &standard_fixtures(256)[2];
    pairs.push((a.clone(), b.clone()));
    pairs
}

fn regions() -> Vec<CompactRegion> {
    vec![
        CompactRegion::cube(2, 1.0).unwrap(),
        CompactRegion::ball(vec![0.0, 0.0], 2.0).unwrap(),
        CompactRegion::ball(vec![1.0, 0.0], 0.5).unwrap(),
        CompactRegion::boxed(vec![-0.5, -2.0], vec![0.5, 2.0]).unwrap(),
    ]
}

const EPSILONS: [f64; 5] = [0.01, 0.05, 0.1, 0.3, 0.5];

#[test]
fn gs_membership_implies_ls_membership() {
    for (w, wp) in fixture_pairs() {
        for k in regions() {
            for eps in EPSILONS {
                let spec = NeighborhoodSpec::new(k.clone(), eps).unwrap();
                if in_gs_neighborhood(&w, &wp, &spec).unwrap().is_member() {
                    assert!(in_ls_neighborhood(&w, &wp, &spec).unwrap().is_member());
                }
            }
        }
    }
}

#[test]
fn membership_is_monotone_in_eps() {
    for (w, wp) in fixture_pairs() {
        for k in regions() {
            let flags: Vec<(bool, bool)> = EPSILONS
                .iter()
                .map(|&eps| {
                    let spec = NeighborhoodSpec::new(k.clone(), eps).unwrap();
                    (
                        in_gs_neighborhood(&w, &wp, &spec).unwrap().is_member(),
                        in_ls_neighborhood(&w, &wp, &spec).unwrap().is_member(),
                    )
                })
                .collect();
            for f in flags.windows(2) {
                assert!(!f[0].0 || f[1].0, "gs lost membership as eps grew");
                assert!(!f[0].1 || f[1].1, "ls lost membership as eps grew");
            }
        }
    }
}

#[test]
fn membership_is_antitone_in_k() {
    let nested = [
        CompactRegion::ball(vec![0.0, 0.0], 2.0).unwrap(),
        CompactRegion::ball(vec![0.8, 0.0], 1.0).unwrap(),
        CompactRegion::ball(vec![1.0, 0.0], 0.5).unwrap(),
        CompactRegion::ball(vec![1.0, 0.0], 0.1).unwrap(),
    ];
    for pair in nested.windows(2) {
        assert!(pair[0].includes(&pair[1]));
    }
    for (w, wp) in fixture_pairs() {
        for eps in EPSILONS {
            let flags: Vec<(bool, bool)> = nested
                .iter()
                .map(|k| {
                    let spec = NeighborhoodSpec::new(k.clone(), eps).unwrap();
                    (
                        in_gs_neighborhood(&w, &wp, &spec).unwrap().is_member(),
                        in_ls_neighborhood(&w, &wp, &spec).unwrap().is_member(),
                    )
                })
                .collect();
            for f in flags.windows(2) {
                assert!(!f[0].0 || f[1].0, "gs lost membership as K shrank");
                assert!(!f[0].1 || f[1].1, "ls lost membership as K shrank");
            }
        }
    }
}

fn affine(ambient: usize, plane: GrassPlane, count: usize) -> DiscretizedSubmanifold {
    generate(&GeneratorSpec::AffinePlane {
        ambient,
        basepoint: vec![0.0; ambient],
        plane,
        extent: 1.5,
        count,
        seed: 5,
    })
    .unwrap()
}

#[test]
fn constant_sections_of_affine_planes() {
    for (n, d) in [(2, 1), (3, 1), (3, 2)] {
        let w = affine(n, GrassPlane::coordinate(n, d).unwrap(), 200);
        let a = 0.07;
        let wp = perturb_normal(&w, a, &BumpMode::ConstantShift).unwrap();
        let k = CompactRegion::cube(n, 1.0).unwrap();
        let sd = tubular_projection(&w, &wp, &k, 0.5).unwrap();
        assert!(!sd.pairs.is_empty());
        for p in &sd.pairs {
            assert!((p.norm - a).abs() < 1e-9 && p.slope.abs() < 1e-9, "{p:?}");
            let (x, y) = (&w.samples()[p.target].point, &wp.samples()[p.source].point);
            let (norm, slope) = displacement(x, y).unwrap();
            assert_eq!((norm, slope), (p.norm, p.slope));
        }
    }
}

#[test]
fn linear_sections_of_affine_planes() {
    // W = span(e₁) in ℝ³, f(t·e₁) = m·t·e₂: ‖f‖ = m|t| and ‖τ∘Df‖ = m.
    let w = affine(3, GrassPlane::coordinate(3, 1).unwrap(), 301);
    for m in [0.01, 0.1, 0.3] {
        let mut shear = DMatrix::identity(3, 3);
        shear[(1, 0)] = m;
        let wp = w.linear_image(&shear).unwrap();
        for (x, y) in w.samples().iter().zip(wp.samples()) {
            let (norm, slope) = displacement(&x.point, &y.point).unwrap();
            let t = x.position()[0];
            assert!((norm - m * t.abs()).abs() < 1e-9);
            assert!((slope - m).abs() < 1e-9);
        }
    }
}

#[test]
fn ls_membership_bounds_the_gauss_distance() {
    for (w, wp) in fixture_pairs() {
        for k in regions() {
            for eps in EPSILONS {
                let spec = NeighborhoodSpec::new(k.clone(), eps).unwrap();
                if !in_ls_neighborhood(&w, &wp, &spec).unwrap().is_member() {
                    continue;
                }
                for y in wp.samples().iter().filter(|y| k.contains(y.position())) {
                    let y = CompactifiedPoint::Finite(y.point.clone());
                    let nearest = w
                        .samples()
                        .iter()
                        .map(|x| compactified_distance(&CompactifiedPoint::Finite(x.point.clone()), &y))
                        .fold(f64::INFINITY, f64::min);
                    assert!(nearest < eps);
                }
            }
        }
    }
}

#[test]
fn volume_ratio_tracks_the_sheet_count() {
    let c = circle(512);
    let line = generate(&GeneratorSpec::line(3.0, 601)).unwrap();
    // Every curve crosses the boundary of K transversally.
    let k = CompactRegion::ball(vec![0.0, 0.0], 1.5).unwrap();
    for eps in [0.02, 0.05] {
        let delta = eps / 2.0;
        let cases = [
            (&c, perturb_normal(&c, delta, &BumpMode::ConstantShift).unwrap(), 1),
            (&c, parallel_copies(&c, delta).unwrap(), 2),
            (
                &line,
                perturb_normal(&line, delta, &BumpMode::ConstantShift).unwrap(),
                1,
            ),
            (&line, parallel_copies(&line, delta).unwrap(), 2),
        ];
        for (w, wp, sheets) in cases {
            let spec = NeighborhoodSpec::new(k.clone(), eps).unwrap();
            let sd = in_ls_neighborhood(w, &wp, &spec).unwrap().decomposition;
            assert_eq!(sd.constant_sheet_count(), Some(sheets));
            let ratio = sd.volume_ratio(w, &wp, &k);
            assert!(
                (ratio - sheets as f64).abs() < 0.1 * sheets as f64,
                "{ratio} vs {sheets}"
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_manifold_is_its_own_neighbour(seed in any::<u64>(), eps in 1e-4f64..1.0, r in 0.1f64..3.0) {
        let w = random_curve(seed);
        let spec = NeighborhoodSpec::new(CompactRegion::ball(vec![0.2, -0.1], r).unwrap(), eps).unwrap();
        prop_assert!(in_gs_neighborhood(&w, &w, &spec).unwrap().is_member());
        prop_assert!(in_ls_neighborhood(&w, &w, &spec).unwrap().is_member());
    }

    #[test]
    fn pairs_respect_the_tube(s1 in any::<u64>(), s2 in any::<u64>(), rho in 0.05f64..1.0) {
        let (w, wp) = (random_curve(s1), random_curve(s2));
        let k = CompactRegion::cube(2, 1.5).unwrap();
        let sd = tubular_projection(&w, &wp, &k, rho).unwrap();
        prop_assert!(sd.pairs.iter().all(|p| p.norm <= rho));
        let mut sources: Vec<usize> = sd.pairs.iter().map(|p| p.source).collect();
        sources.dedup();
        prop_assert_eq!(sources.len(), sd.pairs.len());
        prop_assert_eq!(sd.sheet_count.iter().sum::<usize>(), sd.pairs.len());
        if sd.coverage_ok {
            prop_assert!(sd.base_in_k.iter().all(|&i| sd.sheet_count[i] >= 1));
        }
    }
}
