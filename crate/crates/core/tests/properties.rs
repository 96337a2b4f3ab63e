use proptest::prelude::*;

use tancov::bench::{q_measure, robustness, NoiseLadder};
use tancov::glp::{line_feasible, separating_circle, separating_line, Witness};
use tancov::igrid::{e_adjacent, ve_adjacent, IntervalAxis, IntervalConstraint};
use tancov::mindss::{min_cycle, ArcGraph, Span};
use tancov::mscale::{Cell, Q};
use tancov::raster::{parse_netpbm, BinaryImage};

fn cell() -> impl Strategy<Value = Cell> {
    (-8i64..8, -8i64..8, 1i64..4, 1i64..4)
        .prop_map(|(x, y, sx, sy)| Cell::new((Q::new(x, 2), Q::new(y, 2)), (Q::from_integer(sx), Q::from_integer(sy))))
}

fn point() -> impl Strategy<Value = [f64; 2]> {
    (-10i32..=10, -10i32..=10).prop_map(|(x, y)| [x as f64, y as f64])
}

proptest! {
    #[test]
    fn adjacency_is_symmetric(a in cell(), b in cell()) {
        prop_assert_eq!(ve_adjacent(&a, &b), ve_adjacent(&b, &a));
        prop_assert_eq!(e_adjacent(&a, &b), e_adjacent(&b, &a));
        prop_assert!(!e_adjacent(&a, &b) || ve_adjacent(&a, &b));
    }

    #[test]
    fn q_measure_scale_free(counts in prop::collection::vec(1usize..20, 5), p in 1usize..10, c in 1usize..5) {
        let scaled: Vec<usize> = counts.iter().map(|x| x * c).collect();
        let a = q_measure(&counts, p).unwrap();
        let b = q_measure(&scaled, p * c).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn robustness_shift_invariant(q in prop::collection::vec(0.5f64..3.0, 5), shift in -1.0f64..1.0) {
        let ladder = NoiseLadder::default();
        let moved: Vec<f64> = q.iter().map(|v| v + shift).collect();
        let (a, _) = robustness(&q, &ladder, false).unwrap();
        let (b, _) = robustness(&moved, &ladder, false).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn witnesses_separate(int in prop::collection::vec(point(), 1..6), ext in prop::collection::vec(point(), 1..6)) {
        if let Some(l) = separating_line(&int, &ext) {
            prop_assert!(Witness::Line(l).separates(&int, &ext, 1e-9));
        }
        if let Some(w) = separating_circle(&int, &ext) {
            prop_assert!(w.separates(&int, &ext, 1e-9));
        }
        // a line separator is also a degenerate circle
        if separating_line(&int, &ext).is_some() {
            prop_assert!(separating_circle(&int, &ext).is_some());
        }
    }

    #[test]
    fn horizontal_strip_is_line_feasible(xs in prop::collection::vec(-20i32..20, 1..12), y in -5i32..5) {
        let cs: Vec<IntervalConstraint> = xs
            .iter()
            .enumerate()
            .map(|(k, &x)| IntervalConstraint {
                axis: IntervalAxis::Vertical,
                internal: [x as f64, y as f64],
                external: [x as f64, y as f64 + 1.0],
                abscissa: k as f64,
                source: (k, k + 1),
                degenerate: false,
                cell_size: 1.0,
            })
            .collect();
        prop_assert!(line_feasible(&cs).is_some());
    }

    #[test]
    fn min_cycle_is_valid(n in 4usize..40, cuts in prop::collection::btree_set(0usize..40, 2..10), over in 0usize..3) {
        let starts: Vec<usize> = cuts.into_iter().filter(|&c| c < n).collect();
        prop_assume!(starts.len() >= 2);
        let m = starts.len();
        let arcs: Vec<Span> = (0..m)
            .map(|k| {
                let next = if k + 1 < m { starts[k + 1] } else { starts[0] + n };
                Span { start: starts[k], len: next - starts[k] + over }
            })
            .collect();
        if let Ok(g) = ArcGraph::new(n, arcs) {
            let c = min_cycle(&g).unwrap();
            prop_assert!(c.is_valid_for(&g));
            prop_assert!(c.length <= m);
        }
    }

    #[test]
    fn pbm_round_trip(w in 1usize..20, h in 1usize..20, bits in prop::collection::vec(any::<bool>(), 400)) {
        let img = BinaryImage::from_fn(w, h, |x, y| bits[y * 20 + x]).unwrap();
        let back = parse_netpbm(&img.to_pbm_bytes()).unwrap();
        prop_assert_eq!(back, img);
    }
}

#[test]
fn span_from_ij_wraps() {
    let n = 10;
    assert_eq!(Span::from_ij(3, 5, n).len, 3);
    assert_eq!(Span::from_ij(8, 1, n).len, 4);
    assert_eq!(Span::from_ij(4, 3, n).len, n);
    assert!(Span::from_ij(8, 1, n).contains(0, n));
    assert!(!Span::from_ij(8, 1, n).contains(2, n));
}
