mod support;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use simcontract::assertion::{AssertionSet, Atom, Value};
use simcontract::contract::{compose, quotient};
use simcontract::dsl::{parse_assertion, render_assertion};
use simcontract::monitor::{
    check_trace, monitors_for, Monitor, MonitorOptions, MonitorSpec, Trace, TraceRow, TraceValue,
    Violation, ViolationKind,
};

use support::*;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn set_operations_match_the_grid(seed in any::<u64>()) {
        let mut r = rng(seed);
        let pool = Pool::random(&mut r, 4);
        let vars = all_vars(&pool);
        let (t1, t2) = (random_expr(&mut r, &pool, &vars, 2), random_expr(&mut r, &pool, &vars, 2));
        let (e1, e2) = (t1.build(&pool, &pool.alphabet), t2.build(&pool, &pool.alphabet));
        let (g1, g2) = (pool.grid(&t1), pool.grid(&t2));
        prop_assert!(pool.mismatch(&e1.union(&e2).unwrap(), &g1.or(&g2)).is_none());
        prop_assert!(pool.mismatch(&e1.intersect(&e2).unwrap(), &g1.and(&g2)).is_none());
        prop_assert!(pool.mismatch(&e1.complement(), &g1.not()).is_none());
        prop_assert_eq!(e1.is_subset(&e2).unwrap(), g1.subset(&g2));
        prop_assert_eq!(e1.is_universe(), g1.is_full());
    }

    #[test]
    fn boolean_algebra_laws(seed in any::<u64>()) {
        let mut r = rng(seed);
        let pool = Pool::random(&mut r, 4);
        let vars = all_vars(&pool);
        let e1 = random_boxes(&mut r, &pool, &vars, 4).build(&pool, &pool.alphabet);
        let e2 = random_boxes(&mut r, &pool, &vars, 4).build(&pool, &pool.alphabet);
        let (n1, n2) = (e1.complement(), e2.complement());
        prop_assert!(e1.union(&e2).unwrap().complement().equals(&n1.intersect(&n2).unwrap()).unwrap());
        prop_assert!(n1.complement().equals(&e1).unwrap());
        prop_assert!(e1.union(&n1).unwrap().is_universe());
        prop_assert!(e1.intersect(&n1).unwrap().is_empty());
        // absorption and distributivity
        prop_assert!(e1.union(&e1.intersect(&e2).unwrap()).unwrap().equals(&e1).unwrap());
        let e3 = random_boxes(&mut r, &pool, &vars, 2).build(&pool, &pool.alphabet);
        let lhs = e1.intersect(&e2.union(&e3).unwrap()).unwrap();
        let rhs = e1.intersect(&e2).unwrap().union(&e1.intersect(&e3).unwrap()).unwrap();
        prop_assert!(lhs.equals(&rhs).unwrap());
    }

    #[test]
    fn render_then_parse_is_identity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let pool = Pool::random(&mut r, 4);
        let vars = all_vars(&pool);
        let set = random_expr(&mut r, &pool, &vars, 2).build(&pool, &pool.alphabet);
        let text = render_assertion(&set);
        let back = parse_assertion(&text, &pool.alphabet).unwrap();
        prop_assert!(back.equals(&set).unwrap(), "{}", text);
        prop_assert_eq!(render_assertion(&back), text);
    }

    #[test]
    fn parser_never_panics(input in "\\PC{0,60}") {
        let pool = Pool::new(vec![Kind::Real, Kind::Enumeration, Kind::Boolean, Kind::Integer]);
        if let Err(e) = parse_assertion(&input, &pool.alphabet) {
            prop_assert!(e.line >= 1 && e.column >= 1);
        }
    }

    #[test]
    fn saturation_and_composition_laws(seed in any::<u64>()) {
        let mut r = rng(seed);
        let pool = Pool::random(&mut r, 3);
        let vars = all_vars(&pool);
        let raw = random_pair(&mut r, &pool, &vars, false).contract("a", &pool, &pool.alphabet);
        let sat = raw.saturate();
        prop_assert!(sat.is_saturated());
        prop_assert!(sat.saturate().guarantee().equals(sat.guarantee()).unwrap());
        prop_assert_eq!(raw.refines(&raw).unwrap(), true);
        // saturation does not change which implementations satisfy a contract
        let b = random_pair(&mut r, &pool, &vars, false).contract("b", &pool, &pool.alphabet);
        prop_assert_eq!(raw.refines(&b).unwrap(), sat.refines_literal(&b.saturate()).unwrap());
        let ab = compose(&sat, &b.saturate()).unwrap();
        prop_assert!(ab.is_saturated());
    }

    #[test]
    fn quotient_is_the_largest_completion(seed in any::<u64>()) {
        let mut r = rng(seed);
        let pool = Pool::random(&mut r, 3);
        let vars = all_vars(&pool);
        let top = random_pair(&mut r, &pool, &vars, true).contract("t", &pool, &pool.alphabet);
        let c1 = random_pair(&mut r, &pool, &vars, true).contract("c1", &pool, &pool.alphabet);
        let q = quotient(&top, &c1).unwrap().contract;
        prop_assert!(compose(&c1, &q).unwrap().refines(&top).unwrap());
        for _ in 0..8 {
            let c2 = random_pair(&mut r, &pool, &vars, true).contract("c2", &pool, &pool.alphabet);
            if compose(&c1, &c2).unwrap().refines(&top).unwrap() {
                prop_assert!(c2.refines(&q).unwrap());
            }
        }
    }
}

/// A random row: mostly grid points, sometimes values outside the domain.
fn random_row<R: Rng>(r: &mut R, pool: &Pool, time: f64) -> (TraceRow, Vec<bool>, Vec<P>) {
    let mut values = Vec::new();
    let mut outside = Vec::new();
    let mut point = Vec::new();
    for (i, kind) in pool.kinds.iter().enumerate() {
        let p = pool.axes[i][r.gen_range(0..pool.axes[i].len())];
        point.push(p);
        let out = r.gen_bool(0.05);
        outside.push(out);
        values.push(match (kind, p, out) {
            (Kind::Real | Kind::Integer, _, true) => TraceValue::Number(f64::from(LATTICE) + 1.0),
            (Kind::Enumeration | Kind::Boolean, _, true) => TraceValue::Label("zz".into()),
            (Kind::Real | Kind::Integer, P::Num(x), false) => TraceValue::Number(x),
            (Kind::Enumeration, P::Label(l), false) => TraceValue::Label(LABELS[l as usize].into()),
            (Kind::Boolean, P::Label(l), false) => TraceValue::Bool(l == 1),
            _ => unreachable!(),
        });
    }
    let row = TraceRow { time, values };
    (row, outside, point)
}

fn point_index(pool: &Pool, point: &[P]) -> usize {
    pool.points.iter().position(|p| p == point).unwrap()
}

/// Set with the atoms of `vars` dropped from every box.
fn relaxed(set: &AssertionSet, vars: &[String]) -> AssertionSet {
    let names: Vec<&str> = set.alphabet().names().collect();
    let boxes = set
        .boxes()
        .iter()
        .map(|b| {
            b.atoms()
                .iter()
                .zip(&names)
                .filter(|(_, n)| !vars.iter().any(|v| v == *n))
                .map(|(a, n)| (n.to_string(), *a))
                .collect::<BTreeMap<String, Atom>>()
        })
        .collect();
    AssertionSet::from_boxes(set.alphabet().clone(), boxes).unwrap()
}

fn random_spec<R: Rng>(r: &mut R, pool: &Pool) -> (MonitorSpec, Vec<GridContract>) {
    let vars = all_vars(pool);
    let pairs: Vec<Pair> = (0..r.gen_range(1..=3))
        .map(|_| random_pair(r, pool, &vars, false))
        .collect();
    let contracts: Vec<_> = pairs
        .iter()
        .enumerate()
        .map(|(i, p)| p.contract(&format!("C{i}"), pool, &pool.alphabet))
        .collect();
    let refs: Vec<_> = contracts.iter().map(|c| (c, None)).collect();
    (
        monitors_for(&refs).unwrap(),
        pairs.iter().map(|p| p.grid(pool)).collect(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn monitor_matches_pointwise_membership(seed in any::<u64>()) {
        let mut r = rng(seed);
        let pool = Pool::random(&mut r, 3);
        let (spec, grids) = random_spec(&mut r, &pool);
        let rows: Vec<_> = (0..40).map(|i| random_row(&mut r, &pool, f64::from(i))).collect();
        let trace = Trace { alphabet: pool.alphabet.clone(), rows: rows.iter().map(|x| x.0.clone()).collect() };
        let report = check_trace(&trace, &spec, MonitorOptions::default()).unwrap();

        for (ci, (findings, g)) in report.contracts.iter().zip(&grids).enumerate() {
            // a variable matters when the assumption or guarantee depends on it
            let relevant: Vec<usize> = (0..pool.len())
                .filter(|&v| !pool.receptive(&g.a, &[v]) || !pool.receptive(&g.g, &[v]))
                .collect();
            let mut expected = Vec::new();
            for (i, (_, outside, point)) in rows.iter().enumerate() {
                if relevant.iter().any(|&v| outside[v]) {
                    expected.push((i, ViolationKind::DomainExit));
                    continue;
                }
                // irrelevant out-of-domain values do not affect membership
                let ix = point_index(&pool, point);
                if !g.a.0[ix] {
                    expected.push((i, ViolationKind::AssumptionExit));
                } else if !g.g.0[ix] {
                    expected.push((i, ViolationKind::GuaranteeBreach));
                }
            }
            let got: Vec<_> = findings.violations.iter().map(|v| (v.row, v.kind)).collect();
            prop_assert_eq!(got, expected, "contract {}", ci);
        }

        // attribution: dropping the named atoms admits the row
        for (findings, monitor) in report.contracts.iter().zip(&spec.monitors) {
            for v in &findings.violations {
                let set = match v.kind {
                    ViolationKind::AssumptionExit => &monitor.assumption,
                    ViolationKind::GuaranteeBreach => &monitor.guarantee,
                    ViolationKind::DomainExit => continue,
                };
                // an empty assertion has no variable to blame
                prop_assert!(!v.variables.is_empty() || v.whole_assertion);
                // the grid point stands in for irrelevant out-of-domain values
                let val = &pool.valuations[point_index(&pool, &rows[v.row].2)];
                let passes = relaxed(set, &v.variables).member(val).unwrap();
                prop_assert!(passes || v.whole_assertion, "{:?}", v);
            }
        }
    }

    #[test]
    fn chunked_feeding_gives_the_same_report(seed in any::<u64>(), chunk in 1usize..50) {
        let mut r = rng(seed);
        let pool = Pool::random(&mut r, 3);
        let (spec, _) = random_spec(&mut r, &pool);
        let rows: Vec<TraceRow> = (0..60).map(|i| random_row(&mut r, &pool, f64::from(i) * 0.5).0).collect();
        let trace = Trace { alphabet: pool.alphabet.clone(), rows };
        let whole = check_trace(&trace, &spec, MonitorOptions::default()).unwrap();
        let mut m = Monitor::new(&spec, &pool.alphabet, MonitorOptions::default()).unwrap();
        for part in trace.rows.chunks(chunk) {
            m.feed_all(part).unwrap();
        }
        prop_assert_eq!(m.finish(), whole);
    }

    #[test]
    fn rows_inside_every_contract_are_clean(seed in any::<u64>()) {
        let mut r = rng(seed);
        let pool = Pool::random(&mut r, 3);
        let (spec, grids) = random_spec(&mut r, &pool);
        let inside: Vec<usize> = (0..pool.points.len())
            .filter(|&i| grids.iter().all(|g| g.a.0[i] && g.g.0[i]))
            .collect();
        prop_assume!(!inside.is_empty());
        let rows: Vec<TraceRow> = (0..30)
            .map(|t| {
                let val = &pool.valuations[inside[r.gen_range(0..inside.len())]];
                TraceRow {
                    time: f64::from(t),
                    values: val
                        .values()
                        .map(|v| match v {
                            Value::Number(x) => TraceValue::Number(*x),
                            Value::Bool(b) => TraceValue::Bool(*b),
                            Value::Label(l) => TraceValue::Label(l.clone()),
                        })
                        .collect(),
                }
            })
            .collect();
        let report = check_trace(&Trace { alphabet: pool.alphabet.clone(), rows }, &spec, MonitorOptions::default()).unwrap();
        let all: Vec<&Violation> = report.violations().collect();
        prop_assert!(all.is_empty(), "{:?}", all);
    }
}
