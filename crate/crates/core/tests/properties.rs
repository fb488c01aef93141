use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tiling_frames::calderon::calderon_sum;
use tiling_frames::group::{iwasawa_decompose, iwasawa_recompose, random_orthogonal, GroupElement, IwasawaFactors};
use tiling_frames::overlap::{count_integer_hits, overlap_bound, pointwise_overlap};
use tiling_frames::tiling::{
    membership, membership_translate, tile_assign, tile_point, Membership, RegionKind, TileCoords, TileIndex,
};
use tiling_frames::window::{window_eval, Window, WindowSpec};
use tiling_frames::Error;

const ETA: f64 = 1e-9;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn upper(n: usize) -> usize {
    n * (n - 1) / 2
}

prop_compose! {
    fn invertible(n: usize)(v in prop::collection::vec(-2.0f64..2.0, n * n)) -> Option<GroupElement> {
        GroupElement::from_row_slice(n, &v).ok().filter(|g| g.det().abs() >= 1e-3)
    }
}

prop_compose! {
    fn factors(n: usize)(
        s in 0.1f64..10.0,
        w in prop::collection::vec(0.1f64..10.0, n - 1),
        y in prop::collection::vec(-5.0f64..5.0, upper(n)),
        seed in any::<u64>(),
    ) -> IwasawaFactors {
        IwasawaFactors { s, k: random_orthogonal(n, &mut rng(seed)), w, y }
    }
}

// interior of F, away from the half-open box endpoints
prop_compose! {
    fn interior_coords(n: usize)(
        s in 1.001f64..1.999,
        w in prop::collection::vec(1.001f64..1.999, n - 1),
        y in prop::collection::vec(0.001f64..0.999, upper(n)),
        seed in any::<u64>(),
    ) -> TileCoords {
        TileCoords { s, w, y, k: random_orthogonal(n, &mut rng(seed)) }
    }
}

prop_compose! {
    fn index(n: usize, bound: i64)(
        lambda in -bound..=bound,
        kappa in prop::collection::vec(-bound..=bound, n - 1),
        mu in prop::collection::vec(-bound..=bound, upper(n)),
    ) -> TileIndex {
        TileIndex { lambda, kappa, mu }
    }
}

fn relative(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

fn coords_close(a: &TileCoords, b: &TileCoords, tol: f64) -> bool {
    a.max_diff(b) <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn recompose_inverts_decompose(n in 2usize..=4, seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = tiling_frames::tiling::sample_uniform_matrix(n, &mut r);
        let f = iwasawa_decompose(&a).unwrap();
        let back = iwasawa_recompose(&f).unwrap();
        prop_assert!(relative(back.matrix(), a.matrix()) < 1e-10);
        prop_assert!(f.s > 0.0 && f.w.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn decompose_inverts_recompose_n3(f in factors(3)) {
        let g = iwasawa_recompose(&f).unwrap();
        let h = iwasawa_decompose(&g).unwrap();
        prop_assert!((h.s - f.s).abs() <= 1e-9 * f.s);
        for (a, b) in h.w.iter().zip(&f.w) {
            prop_assert!((a - b).abs() <= 1e-9 * b.max(1.0));
        }
        for (a, b) in h.y.iter().zip(&f.y) {
            prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
        }
        prop_assert!((&h.k - &f.k).abs().max() <= 1e-9);
    }

    #[test]
    fn decompose_is_deterministic(a in invertible(2)) {
        if let Some(a) = a {
            prop_assert_eq!(iwasawa_decompose(&a).unwrap(), iwasawa_decompose(&a).unwrap());
        }
    }

    #[test]
    fn tile_assignment_is_equivariant_n2(c in interior_coords(2), p in index(2, 3)) {
        let a = tile_point(&p, &c).unwrap();
        let t = tile_assign(&a).unwrap();
        prop_assert!(!t.boundary);
        prop_assert_eq!(&t.index, &p);
        prop_assert!(coords_close(&t.coords, &c, 1e-9));
    }

    #[test]
    fn tile_assignment_is_equivariant_n3(c in interior_coords(3), p in index(3, 3)) {
        let a = tile_point(&p, &c).unwrap();
        let t = tile_assign(&a).unwrap();
        prop_assert_eq!(&t.index, &p);
        prop_assert!(coords_close(&t.coords, &c, 1e-9));
    }

    #[test]
    fn determinant_tracks_scale(c2 in interior_coords(2), p2 in index(2, 3), c3 in interior_coords(3), p3 in index(3, 3)) {
        for (c, p) in [(c2, p2), (c3, p3)] {
            let a = tile_point(&p, &c).unwrap();
            let expected = (c.s * 2f64.powi(p.lambda as i32)).powi(c.n() as i32);
            prop_assert!((a.det().abs() - expected).abs() <= 1e-10 * expected);
        }
    }

    #[test]
    fn exactly_one_tile_contains_a_point(a in invertible(2)) {
        let Some(a) = a else { return Ok(()) };
        let t = tile_assign(&a).unwrap();
        if t.boundary {
            return Ok(());
        }
        prop_assert_eq!(membership_translate(&a, &t.index, RegionKind::Fundamental, ETA).unwrap(), Membership::Inside);
        let p = &t.index;
        for dl in -1..=1 {
            for dk in -1..=1 {
                for dm in -2..=2 {
                    if (dl, dk, dm) == (0, 0, 0) {
                        continue;
                    }
                    let q = TileIndex { lambda: p.lambda + dl, kappa: vec![p.kappa[0] + dk], mu: vec![p.mu[0] + dm] };
                    prop_assert_ne!(membership_translate(&a, &q, RegionKind::Fundamental, ETA).unwrap(), Membership::Inside);
                }
            }
        }
    }

    #[test]
    fn regions_are_nested(a in invertible(3), eps in 0.01f64..=0.5) {
        let Some(a) = a else { return Ok(()) };
        if membership(&a, RegionKind::Fundamental, ETA).unwrap() == Membership::Inside {
            prop_assert_eq!(membership(&a, RegionKind::Closure, ETA).unwrap(), Membership::Inside);
        }
        if membership(&a, RegionKind::Closure, ETA).unwrap() == Membership::Inside {
            prop_assert_eq!(membership(&a, RegionKind::Open { eps }, ETA).unwrap(), Membership::Inside);
        }
    }

    #[test]
    fn window_lies_between_indicators(f in factors(2), eps in 0.01f64..=0.5) {
        let g = WindowSpec::smooth(eps).unwrap().eval_coords(&f);
        let closed = tiling_frames::tiling::membership_coords(&f, RegionKind::Closure, 0.0);
        let open = tiling_frames::tiling::membership_coords(&f, RegionKind::Open { eps }, 0.0);
        prop_assert!((0.0..=1.0).contains(&g));
        if closed == Membership::Inside {
            prop_assert_eq!(g, 1.0);
        }
        if open == Membership::Outside {
            prop_assert_eq!(g, 0.0);
        }
    }

    #[test]
    fn window_ignores_orthogonal_factor(a in invertible(2), seed in any::<u64>()) {
        let Some(a) = a else { return Ok(()) };
        let w = WindowSpec::smooth(0.3).unwrap();
        let k = random_orthogonal(2, &mut rng(seed));
        let ka = GroupElement::from_matrix(k * a.matrix()).unwrap();
        let (x, y) = (window_eval(&w, &a).unwrap(), window_eval(&w, &ka).unwrap());
        prop_assert!((x - y).abs() <= 1e-10);
    }

    #[test]
    fn integer_hits_are_bounded(alpha in -50.0f64..50.0, len in 0.0f64..8.0, eps in 0.0f64..=0.5) {
        let hits = count_integer_hits(alpha, len, eps);
        prop_assert!(hits.len() as f64 <= (len + 2.0 * eps).floor() + 2.0);
        let brute: Vec<i64> = ((alpha - 10.0).floor() as i64..=(alpha + len + 10.0).ceil() as i64)
            .filter(|&b| {
                let b = b as f64;
                alpha < b + 1.0 + eps && alpha + len > b - eps
            })
            .collect();
        prop_assert_eq!(hits, brute);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn overlaps_are_sound_and_bounded(seed in any::<u64>(), eps in 0.05f64..=0.5) {
        let b = tiling_frames::tiling::sample_scan_point(2, &mut rng(seed));
        match pointwise_overlap(&b, eps, ETA) {
            Ok(r) => {
                prop_assert!(r.count >= 1);
                prop_assert!(r.count as u128 <= overlap_bound(2, eps));
                for p in &r.tiles {
                    prop_assert_eq!(membership_translate(&b, p, RegionKind::Open { eps }, ETA).unwrap(), Membership::Inside);
                }
            }
            Err(Error::Boundary) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn calderon_sum_bounds_and_monotonicity(seed in any::<u64>()) {
        let b = tiling_frames::tiling::sample_scan_point(2, &mut rng(seed));
        let eps = 0.2;
        let ind = calderon_sum(&b, &WindowSpec::indicator(eps).unwrap(), eps, ETA);
        let smooth = calderon_sum(&b, &WindowSpec::smooth(eps).unwrap(), eps, ETA);
        let (Ok(ind), Ok(smooth)) = (ind, smooth) else { return Ok(()) };
        prop_assert!((ind - 1.0).abs() <= 1e-12);
        prop_assert!(smooth >= 1.0 - 1e-12);
        prop_assert!(ind <= smooth + 1e-12);
        let n = pointwise_overlap(&b, eps, ETA).unwrap().count;
        prop_assert!(smooth <= n as f64 + 1e-12);
    }

    #[test]
    fn calderon_sum_is_periodic_under_diagonal_tiles(seed in any::<u64>(), lambda in -3i64..=3, kappa in -3i64..=3) {
        let b = tiling_frames::tiling::sample_scan_point(2, &mut rng(seed));
        let p = TileIndex { lambda, kappa: vec![kappa], mu: vec![0] };
        let bp = GroupElement::from_matrix(b.matrix() * p.to_matrix()).unwrap();
        let w = WindowSpec::smooth(0.2).unwrap();
        let (Ok(x), Ok(y)) = (calderon_sum(&b, &w, 0.2, ETA), calderon_sum(&bp, &w, 0.2, ETA)) else {
            return Ok(());
        };
        prop_assert!((x - y).abs() <= 1e-12 * x.max(1.0), "{} vs {}", x, y);
    }
}
