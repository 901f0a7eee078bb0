//! Property tests over random small systems, vectors and instances.

use proptest::prelude::*;

use elicit_core::aggregate::{aggregate_addition, aggregate_intersection};
use elicit_core::document::InstanceDocument;
use elicit_core::elicit::decide_elicitable;
use elicit_core::linsys::{
    decide_feasible, project, verify_certificate, FeasibilityResult, LinearSystem, StrictRelation,
    WeakRelation,
};
use elicit_core::model::OutputVector;
use elicit_core::oracle::{random_instance, verdict_certificates_hold, Dims, InstanceGenerator};
use elicit_core::rational::{dot, format_rational, int, parse_rational, ratio, Rational};

type RawRow = (Vec<i64>, u8);

fn push(system: &mut LinearSystem, coeffs: Vec<Rational>, relation: u8) {
    match relation {
        0 => system.push_weak(coeffs, WeakRelation::Le),
        1 => system.push_weak(coeffs, WeakRelation::Ge),
        2 => system.push_weak(coeffs, WeakRelation::Eq),
        3 => system.push_strict(coeffs, StrictRelation::Lt),
        _ => system.push_strict(coeffs, StrictRelation::Gt),
    }
}

fn build(n: usize, rows: &[RawRow]) -> LinearSystem {
    let mut s = LinearSystem::new(n);
    for (c, r) in rows {
        push(&mut s, c.iter().map(|&v| int(v)).collect(), *r);
    }
    s
}

fn system_strategy() -> impl Strategy<Value = (usize, Vec<RawRow>)> {
    (1usize..=4).prop_flat_map(|n| {
        let row = (prop::collection::vec(-3i64..=3, n), 0u8..5);
        (Just(n), prop::collection::vec(row, 1..=5))
    })
}

fn grid_points(n: usize, r: i64) -> Vec<Vec<Rational>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (-r..=r).map(move |v| {
                    let mut q = p.clone();
                    q.push(int(v));
                    q
                })
            })
            .collect();
    }
    out
}

/// `y` lies in the projection of `s` onto its first `y.len()` variables
/// iff the homogenized system in the remaining variables is feasible.
fn lifts(s: &LinearSystem, y: &[Rational]) -> bool {
    let k = y.len();
    let free = s.dim() - k;
    let mut lifted = LinearSystem::new(free + 1);
    let split = |coeffs: &[Rational]| {
        let mut c = coeffs[k..].to_vec();
        c.push(dot(&coeffs[..k], y));
        c
    };
    for r in s.weak_rows() {
        lifted.push_weak(split(&r.coeffs), r.relation);
    }
    for r in s.strict_rows() {
        lifted.push_strict(split(&r.coeffs), r.relation);
    }
    let mut t = vec![int(0); free + 1];
    t[free] = int(1);
    lifted.push_strict(t, StrictRelation::Gt);
    decide_feasible(&lifted).is_feasible()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rational_text_round_trips(n in -10_000i64..10_000, d in 1i64..500) {
        let q = ratio(n, d);
        let text = format_rational(&q);
        prop_assert_eq!(parse_rational(&text).unwrap(), q.clone());
        prop_assert_eq!(parse_rational(&format!("{n}/{d}")).unwrap(), q);
    }

    #[test]
    fn feasibility_results_are_checkable((n, rows) in system_strategy()) {
        let s = build(n, &rows);
        match decide_feasible(&s) {
            FeasibilityResult::Witness(w) => prop_assert!(s.contains(&w)),
            FeasibilityResult::Certificate(c) => {
                prop_assert!(verify_certificate(&s, &c));
                for p in grid_points(n, 2) {
                    prop_assert!(!s.contains(&p), "grid point {:?} satisfies a refuted system", p);
                }
            }
        }
    }

    #[test]
    fn projection_matches_lifting(
        (n, rows) in (2usize..=4).prop_flat_map(|n| {
            let row = (prop::collection::vec(-3i64..=3, n), 0u8..5);
            (Just(n), prop::collection::vec(row, 1..=5))
        }),
        drop_two in any::<bool>(),
        y in prop::collection::vec(-2i64..=2, 3),
    ) {
        let s = build(n, &rows);
        let eliminate: Vec<usize> = if drop_two && n > 2 { vec![n - 2, n - 1] } else { vec![n - 1] };
        let kept = n - eliminate.len();
        let projected = project(&s, &eliminate);
        prop_assert_eq!(projected.dim(), kept);
        let y: Vec<Rational> = y[..kept].iter().map(|&v| int(v)).collect();
        prop_assert_eq!(projected.contains(&y), lifts(&s, &y));
    }

    #[test]
    fn intersection_is_idempotent_and_commutative(
        a in prop::collection::vec((0i64..6, 1i64..4), 4),
        b in prop::collection::vec((0i64..6, 1i64..4), 4),
    ) {
        let x = OutputVector::new(a.iter().map(|&(n, d)| ratio(n, d)).collect()).unwrap();
        let z = OutputVector::new(b.iter().map(|&(n, d)| ratio(n, d)).collect()).unwrap();
        prop_assert_eq!(aggregate_intersection(&[x.clone(), x.clone()]).unwrap(), x.clone());
        prop_assert_eq!(
            aggregate_intersection(&[x.clone(), z.clone()]).unwrap(),
            aggregate_intersection(&[z.clone(), x.clone()]).unwrap()
        );
        let w = [ratio(1, 2), int(2)];
        prop_assert_eq!(
            aggregate_addition(&[x.clone(), z.clone()], &w).unwrap(),
            aggregate_addition(&[z, x], &[w[1].clone(), w[0].clone()]).unwrap()
        );
    }

    #[test]
    fn documents_round_trip(seed in any::<u64>()) {
        let dims = Dims { m: 3, n: 2, l: 2, k: 2 };
        if let Ok((inst, op)) = random_instance(seed, dims) {
            let doc = InstanceDocument::from_instance(&inst).with_operation(&op, None, None);
            let back = InstanceDocument::parse(&doc.to_json()).unwrap();
            prop_assert_eq!(&back, &doc);
            let inst2 = back.instance().unwrap();
            prop_assert_eq!(back.operation(&inst2).unwrap(), op);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn verdicts_are_scale_invariant(seed in any::<u64>(), n in 1i64..9, d in 1i64..9) {
        let mut g = InstanceGenerator::new(seed, Dims { m: 3, n: 2, l: 2, k: 2 }).unwrap();
        let inst = g.instance().unwrap();
        let vertices = g.slice_vertices(&inst);
        let x = g.feasible_vector(&vertices);
        let v = decide_elicitable(&x, &inst).unwrap();
        prop_assert!(verdict_certificates_hold(&x, &inst, &v));
        let y = x.scaled(&ratio(n, d)).unwrap();
        let w = decide_elicitable(&y, &inst).unwrap();
        prop_assert_eq!(v.is_elicitable(), w.is_elicitable());
        prop_assert!(verdict_certificates_hold(&y, &inst, &w));
    }
}
