mod common;

use common::*;
use textseg::raster::{BinaryMask, Point};
use textseg::stroke::{
    dominant_width, sobel, stroke_width, symmetry_verify, RayMode, StrokeParams, StrokeSample,
};

const ORIENTATIONS: [u32; 4] = [0, 45, 90, 135];

fn check_against_oracle(mask: &BinaryMask, label: &str) -> Vec<StrokeSample> {
    let img = mask_image(mask);
    let grad = sobel(&img).unwrap();
    let oracle = oracle_sobel(&img);
    for (k, &(gx, gy)) in oracle.iter().enumerate() {
        assert_eq!(grad.gx()[k] as f64, gx, "{label}: gx at {k}");
        assert_eq!(grad.gy()[k] as f64, gy, "{label}: gy at {k}");
    }
    let max_ray = StrokeParams::default().max_ray_for(mask.width(), mask.height());
    let mut samples = Vec::new();
    for p in mask.foreground() {
        let got = stroke_width(p, &grad, mask, max_ray, RayMode::AlongGradient);
        let want = oracle_width(p, &oracle, mask, max_ray);
        assert_eq!(got.map(|s| (s.width, s.reached)), want, "{label}: ray from {p:?}");
        samples.extend(got);
    }
    let widths: Vec<u32> = samples.iter().map(|s| s.width).collect();
    assert_eq!(
        dominant_width(&samples).ok().map(|h| h.dominant),
        oracle_mode(&widths),
        "{label}: dominant width"
    );
    samples
}

#[test]
fn bars_match_oracle_and_pass_symmetry() {
    for width in 2..=7 {
        for o in ORIENTATIONS {
            let label = format!("bar w={width} o={o}");
            let m = bar(width, o);
            check_against_oracle(&m, &label);
            let grad = sobel(&mask_image(&m)).unwrap();
            let v = symmetry_verify(&single_component(&m), &grad, &m, &StrokeParams::default());
            assert!(v.passed, "{label}: d1={:?} d2={:?}", v.d1, v.d2);
        }
    }
}

#[test]
fn rings_match_oracle_and_pass_symmetry() {
    for width in 2..=7 {
        for o in ORIENTATIONS {
            let label = format!("ring w={width} o={o}");
            let m = ring(width, o);
            check_against_oracle(&m, &label);
            let grad = sobel(&mask_image(&m)).unwrap();
            let v = symmetry_verify(&single_component(&m), &grad, &m, &StrokeParams::default());
            assert!(v.passed, "{label}: d1={:?} d2={:?}", v.d1, v.d2);
        }
    }
}

#[test]
fn axis_bar_width_is_exact() {
    for width in 2..=7u32 {
        for o in [0, 90] {
            let m = bar(width as i64, o);
            let grad = sobel(&mask_image(&m)).unwrap();
            let c = single_component(&m);
            let v = symmetry_verify(&c, &grad, &m, &StrokeParams::default());
            assert_eq!(v.d1, Some(width), "o={o}");
            assert_eq!(v.d2, Some(width), "o={o}");
        }
    }
}

#[test]
fn wedge_is_rejected() {
    let m = wedge();
    let samples = check_against_oracle(&m, "wedge");
    assert!(!samples.is_empty());
    let grad = sobel(&mask_image(&m)).unwrap();
    let v = symmetry_verify(&single_component(&m), &grad, &m, &StrokeParams::default());
    assert!(!v.starved());
    assert!(!v.passed, "d1={:?} d2={:?}", v.d1, v.d2);
}

#[test]
fn origin_and_reached_sides_pair_up() {
    let m = ring(4, 0);
    let grad = sobel(&mask_image(&m)).unwrap();
    let v = symmetry_verify(&single_component(&m), &grad, &m, &StrokeParams::default());
    for s in &v.origin_samples {
        assert!(m.get(s.reached.x, s.reached.y));
        let back = Point::new(s.reached.x, s.reached.y);
        assert!(v.reached_samples.iter().any(|r| r.origin == back) || grad.magnitude(back) == 0.0);
    }
}

#[test]
fn ring_survives_and_wedge_drops() {
    let shapes = [("ring", ring(3, 0)), ("wedge", wedge())];
    let kept: Vec<&str> = shapes
        .iter()
        .filter(|(_, m)| {
            let grad = sobel(&mask_image(m)).unwrap();
            symmetry_verify(&single_component(m), &grad, m, &StrokeParams::default()).passed
        })
        .map(|(name, _)| *name)
        .collect();
    assert_eq!(kept, vec!["ring"]);
}

#[test]
fn tolerance_is_monotone() {
    let mut shapes = vec![wedge()];
    for w in 2..=7 {
        shapes.push(ring(w, 45));
        shapes.push(bar(w, 135));
    }
    for m in &shapes {
        let grad = sobel(&mask_image(m)).unwrap();
        let c = single_component(m);
        let mut before = false;
        for tol in [0, 1, 2, 4, 8, 16, u32::MAX] {
            let p = StrokeParams { tol, ..StrokeParams::default() };
            let v = symmetry_verify(&c, &grad, m, &p);
            assert!(v.passed || !before, "tol {tol}");
            before = v.passed;
            if tol == u32::MAX {
                assert_eq!(v.passed, !v.starved());
            }
        }
    }
}

#[test]
fn rays_end_at_the_stroke_boundary() {
    for w in 2..=7 {
        let m = ring(w, 0);
        let grad = sobel(&mask_image(&m)).unwrap();
        for p in m.foreground() {
            let Some(s) = stroke_width(p, &grad, &m, 64, RayMode::AlongGradient) else {
                continue;
            };
            let (dx, dy) = oracle_step(grad.gx()[p.y * m.width() + p.x] as f64, grad.gy()[p.y * m.width() + p.x] as f64);
            let nx = s.reached.x as i64 + dx;
            let ny = s.reached.y as i64 + dy;
            assert!(m.get(s.reached.x, s.reached.y));
            assert!(nx < 0 || ny < 0 || !m.get_signed(nx as isize, ny as isize));
        }
    }
}
