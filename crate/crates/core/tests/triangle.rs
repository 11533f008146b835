use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use theta_rough::jacobi::{theta2_direct, GroupElement};
use theta_rough::triangle::*;
use theta_rough::weyl::WeylParams;

fn on_convention_set(w1: f64, w2: f64) -> bool {
    w1 == 0.5 || w2 == 0.5 || w2 - w1 == 0.5 || w2 == 1.0
}

#[test]
fn f0_is_a_smooth_partition_ramp() {
    assert_eq!(f0_default(0.5), 0.5);
    assert_eq!(f0_default(-1.0), 0.0);
    assert_eq!(f0_default(2.0), 1.0);
    for i in 1..1000 {
        let x = i as f64 / 1000.0;
        assert!((f0_default(x) + f0_default(1.0 - x) - 1.0).abs() < 1e-12);
        assert!(f0_default(x) >= f0_default(x - 1e-3));
    }
}

#[test]
fn bump_and_stacked_values() {
    for triple in [CORNER, LINE, DELTA] {
        assert_eq!(triple.bump(triple.c2), 1.0);
        assert_eq!(triple.bump(triple.c1), 0.0);
        assert_eq!(triple.bump(triple.c3), 0.0);
        assert!(triple.p() > 1.0);
        // single jump at 0
        assert_eq!(triple.stacked(0.0), 0.0);
        assert_eq!(triple.stacked(-1e-9), 0.0);
        assert_eq!(triple.stacked(1e-9), 1.0);
    }
    assert!((CORNER.bump(0.25) - 0.5).abs() < 1e-15);
    assert_eq!(CORNER.stacked(0.1), 1.0);
    assert!((CORNER.stacked(0.25) - 0.5).abs() < 1e-15);
    assert!(BumpSpec::new(0.2, 0.1, 0.3).is_err());
    assert!(BumpSpec::new(0.1, 0.3, 0.4).is_err());
    assert!(BumpSpec::new(0.1, 0.2, 0.5).is_ok());
}

#[test]
fn closed_form_stack_matches_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let skew = BumpSpec::new(0.1, 0.2, 0.5).unwrap();
    assert!(!skew.is_geometric() && CORNER.is_geometric() && LINE.is_geometric() && DELTA.is_geometric());
    for triple in [CORNER, LINE, DELTA, skew] {
        for _ in 0..2000 {
            let x: f64 = rng.gen_range(1e-6..1.0);
            assert!((triple.stacked(x) - triple.stacked_series(x, 200)).abs() < 1e-12, "{triple:?} at {x}");
        }
    }
}

#[test]
fn template_examples() {
    assert_eq!(t_line(0.5, 0.05), 1.0);
    assert_eq!(t_segm(0.5, 0.05), 1.0);
    assert_eq!(t_line_rect(0.5, 0.05), 0.0);
    assert_eq!(piece_eval(Tag::C01, 0.1, 0.9), 1.0);
    for t in Tag::ALL {
        assert_eq!(piece_eval(t, 2.0, 3.0), 0.0);
        assert_eq!(Tag::parse(t.name()).unwrap(), t);
    }
    assert!(Tag::parse("bogus").is_err());
}

#[test]
fn partition_identity_off_convention_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut n = 0;
    while n < 10_000 {
        let (w1, w2) = (rng.gen_range(-0.5..1.5), rng.gen_range(-0.5..1.5));
        if on_convention_set(w1, w2) {
            continue;
        }
        n += 1;
        assert!(partition_defect(w1, w2).abs() < 1e-12);
    }
    assert_eq!(partition_defect(0.9, 0.1), 0.0);
    assert!(partition_defect(0.5, 0.9).abs() < 1e-15);
}

#[test]
fn partition_identity_on_segments() {
    for k in 1..64 {
        let u = k as f64 / 64.0;
        for (w1, w2) in [(0.5, 0.5 + u / 2.0), (u / 2.0, 0.5), (u / 2.0, u / 2.0 + 0.5), (u, 1.0)] {
            assert!(partition_defect(w1, w2).abs() < 1e-12, "({w1},{w2})");
        }
    }
}

#[test]
fn pieces_are_bounded_and_supported() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let corners = [Tag::C00, Tag::C01, Tag::C11];
    for _ in 0..50_000 {
        let (w1, w2) = (rng.gen_range(-0.5..1.5), rng.gen_range(-0.5..1.5));
        let inside = 0.0 < w1 && w1 < w2 && w2 <= 1.0;
        for t in Tag::ALL {
            let v = piece_eval(t, w1, w2);
            assert!((0.0..=1.0).contains(&v) || t == Tag::Smooth, "{t:?} = {v}");
            if !inside {
                assert_eq!(v, 0.0, "{t:?} outside at ({w1},{w2})");
            }
        }
        let live_corners = corners.iter().filter(|&&t| piece_eval(t, w1, w2) != 0.0).count();
        assert!(live_corners <= 1);
        for (a, b) in [(Tag::Lh, Tag::Lv), (Tag::Lv, Tag::Ld)] {
            assert!(piece_eval(a, w1, w2) == 0.0 || piece_eval(b, w1, w2) == 0.0, "{a:?} and {b:?} overlap");
        }
    }
    // Lh and Ld do overlap, near the top right corner
    let (w1, w2) = (0.8, 0.9);
    assert!(piece_eval(Tag::Lh, w1, w2) > 0.0 && piece_eval(Tag::Ld, w1, w2) > 0.0);
}

/// The six-piece sum tends to 1 at the perimeter, linearly in the distance:
/// the corner and line maps evaluate their ramps at coordinates that differ
/// by the distance itself.
#[test]
fn six_piece_sum_near_perimeter_is_one_to_first_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let mut worst = Vec::new();
    for d in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6] {
        let mut w = 0.0f64;
        let mut n = 0;
        while n < 2000 {
            // pick an edge and a point at distance in (d/2, d)
            let u: f64 = rng.gen_range(0.02..0.98);
            let r: f64 = rng.gen_range(0.5 * d..d);
            let (w1, w2) = match rng.gen_range(0..3) {
                0 => (r, u),
                1 => (u, 1.0 - r),
                _ => (u - r / 2f64.sqrt(), u + r / 2f64.sqrt()),
            };
            if !(0.0 < w1 && w1 < w2 && w2 < 1.0) || on_convention_set(w1, w2) {
                continue;
            }
            n += 1;
            w = w.max((six_piece_sum(w1, w2) - 1.0).abs());
        }
        assert!(w <= 20.0 * d, "collar {d}: defect {w}");
        worst.push(w);
    }
    assert!(worst[4] < 1e-4 * worst[0] + 1e-12, "{worst:?}");
}

#[test]
fn smooth_remainder_examples() {
    assert_eq!(piece_eval(Tag::Smooth, 0.9, 0.1), 0.0);
    assert_eq!(piece_eval(Tag::Smooth, 0.5, 1.2), 0.0);
    let b = piece_eval(Tag::Smooth, 1.0 / 3.0, 2.0 / 3.0);
    assert!((b - (1.0 - six_piece_sum(1.0 / 3.0, 2.0 / 3.0))).abs() < 1e-15);
    let r = smooth_remainder_regularity(200, 1e-3, 1e-4);
    assert_eq!(r.non_finite, 0);
    assert!(r.points > 10_000);
    assert!(r.max_abs.is_finite() && r.max_gradient.is_finite() && r.max_hessian.is_finite());
    // bounds stable under a finer difference step
    let r2 = smooth_remainder_regularity(200, 1e-3, 5e-5);
    assert!((r2.max_gradient - r.max_gradient).abs() < 1e-2 * r.max_gradient.max(1.0));
    assert!(r2.max_hessian < 2.0 * r.max_hessian + 1.0);
}

#[test]
fn piece_thetas_add_up_to_triangle_theta() {
    let n = 256usize;
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..3 {
        let p = WeylParams::new(rng.gen_range(0.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let y = 1.0 / (n * n) as f64;
        let c = p.linear_coeff();
        let g1 = GroupElement::horocycle_lift(-p.x, y, -c);
        let g2 = GroupElement::horocycle_lift(p.x, y, c);
        let bbox = [(0.0, 1.0), (0.0, 1.0)];
        let whole = theta2_direct(&|a, b| triangle_indicator(0.0, 1.0, a, b), bbox, &g1, &g2).unwrap();
        let mut sum = Complex64::new(0.0, 0.0);
        for t in Tag::ALL {
            sum += theta2_direct(&move |a, b| piece_eval(t, a, b), bbox, &g1, &g2).unwrap();
        }
        assert!((sum - whole).norm() < 1e-10, "{sum} vs {whole}");
    }
}

#[test]
fn dump_grid_shape() {
    let rows = dump_grid(4, -0.5, 1.5);
    assert_eq!(rows.len(), 25 * Tag::ALL.len());
    assert_eq!(rows[0].0, -0.5);
    assert_eq!(rows[rows.len() - 1].1, 1.5);
}
