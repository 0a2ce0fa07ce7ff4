//! Independent oracle for the set and contract algebra.
//!
//! Random assertions are expression trees whose interval endpoints lie on the
//! integer lattice `0..=LATTICE`. For such sets membership is constant on every
//! lattice point and on every open cell between neighbours, so the grid made of
//! the endpoints, endpoints ± 0.5 and the midpoints (which coincide) plus every
//! label decides all questions exactly. The oracle evaluates trees pointwise on
//! that grid and implements the contract operators as plain bitset formulas.

#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use simcontract::assertion::{
    Alphabet, AssertionSet, Atom, Interval, LabelSet, Valuation, Value, VariableDecl,
};
use simcontract::contract::Contract;

pub const LATTICE: i32 = 4;
pub const LABELS: [&str; 3] = ["a", "b", "c"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Real,
    Integer,
    Enumeration,
    Boolean,
}

/// A grid coordinate: a number or a label index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum P {
    Num(f64),
    Label(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    True,
    False,
    Range { var: usize, iv: Interval },
    Labels { var: usize, set: u64 },
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
}

impl Expr {
    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    pub fn eval(&self, point: &[P]) -> bool {
        match self {
            Expr::True => true,
            Expr::False => false,
            Expr::Range { var, iv } => match point[*var] {
                P::Num(x) => {
                    let above = iv.lo < x || (iv.lo_closed && iv.lo == x);
                    let below = x < iv.hi || (iv.hi_closed && x == iv.hi);
                    above && below
                }
                P::Label(_) => panic!("range on a label variable"),
            },
            Expr::Labels { var, set } => match point[*var] {
                P::Label(i) => set >> i & 1 == 1,
                P::Num(_) => panic!("labels on a numeric variable"),
            },
            Expr::Not(e) => !e.eval(point),
            Expr::And(es) => es.iter().all(|e| e.eval(point)),
            Expr::Or(es) => es.iter().any(|e| e.eval(point)),
        }
    }

    /// The same set built with the library's operations over `alphabet`,
    /// which must declare every mentioned pool variable.
    pub fn build(&self, pool: &Pool, alphabet: &Arc<Alphabet>) -> AssertionSet {
        match self {
            Expr::True => AssertionSet::universe(alphabet.clone()),
            Expr::False => AssertionSet::empty(alphabet.clone()),
            Expr::Range { var, iv } => {
                AssertionSet::interval(alphabet.clone(), &pool.decls[*var].name, *iv).unwrap()
            }
            Expr::Labels { var, set } => AssertionSet::from_atom(
                alphabet.clone(),
                &pool.decls[*var].name,
                Atom::Labels(LabelSet(*set)),
            )
            .unwrap(),
            Expr::Not(e) => e.build(pool, alphabet).complement(),
            Expr::And(es) => es
                .iter()
                .fold(AssertionSet::universe(alphabet.clone()), |acc, e| {
                    acc.intersect(&e.build(pool, alphabet)).unwrap()
                }),
            Expr::Or(es) => es
                .iter()
                .fold(AssertionSet::empty(alphabet.clone()), |acc, e| {
                    acc.union(&e.build(pool, alphabet)).unwrap()
                }),
        }
    }
}

/// A set of variables together with its decision grid.
pub struct Pool {
    pub decls: Vec<VariableDecl>,
    pub kinds: Vec<Kind>,
    pub alphabet: Arc<Alphabet>,
    /// Grid coordinates per pool variable.
    pub axes: Vec<Vec<P>>,
    /// Every grid point, in pool variable order; last variable fastest.
    pub points: Vec<Vec<P>>,
    /// The same points as valuations over the full pool alphabet.
    pub valuations: Vec<Valuation>,
}

fn decl(name: &str, kind: Kind) -> VariableDecl {
    let l = LATTICE;
    match kind {
        Kind::Real => VariableDecl::real(name, "u", 0.0, f64::from(l)).unwrap(),
        Kind::Integer => VariableDecl::integer(name, "", 0, i64::from(l)).unwrap(),
        Kind::Enumeration => VariableDecl::enumeration(name, &LABELS).unwrap(),
        Kind::Boolean => VariableDecl::boolean(name).unwrap(),
    }
}

fn axis(kind: Kind) -> Vec<P> {
    match kind {
        Kind::Real => (0..=2 * LATTICE)
            .map(|k| P::Num(f64::from(k) / 2.0))
            .collect(),
        Kind::Integer => (0..=LATTICE).map(|k| P::Num(f64::from(k))).collect(),
        Kind::Enumeration => (0..LABELS.len() as u32).map(P::Label).collect(),
        Kind::Boolean => vec![P::Label(0), P::Label(1)],
    }
}

fn value(kind: Kind, p: P) -> Value {
    match (kind, p) {
        (Kind::Real | Kind::Integer, P::Num(x)) => Value::Number(x),
        (Kind::Enumeration, P::Label(i)) => Value::Label(LABELS[i as usize].to_string()),
        (Kind::Boolean, P::Label(i)) => Value::Bool(i == 1),
        _ => unreachable!(),
    }
}

impl Pool {
    pub fn new(kinds: Vec<Kind>) -> Pool {
        // names sort in pool order so alphabet order matches pool order
        let decls: Vec<_> = kinds
            .iter()
            .enumerate()
            .map(|(i, k)| decl(&format!("v{i}"), *k))
            .collect();
        let alphabet = Arc::new(Alphabet::new(decls.clone()).unwrap());
        let axes: Vec<Vec<P>> = kinds.iter().map(|k| axis(*k)).collect();
        let mut points = vec![Vec::new()];
        for ax in &axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    ax.iter().map(move |c| {
                        let mut q = p.clone();
                        q.push(*c);
                        q
                    })
                })
                .collect();
        }
        let valuations = points
            .iter()
            .map(|p| {
                decls
                    .iter()
                    .zip(&kinds)
                    .zip(p)
                    .map(|((d, k), c)| (d.name.clone(), value(*k, *c)))
                    .collect()
            })
            .collect();
        Pool {
            decls,
            kinds,
            alphabet,
            axes,
            points,
            valuations,
        }
    }

    pub fn random<R: Rng>(rng: &mut R, max_vars: usize) -> Pool {
        let n = rng.gen_range(1..=max_vars);
        let kinds = (0..n)
            .map(|_| {
                *[
                    Kind::Real,
                    Kind::Real,
                    Kind::Integer,
                    Kind::Enumeration,
                    Kind::Boolean,
                ]
                .choose(rng)
                .unwrap()
            })
            .collect();
        Pool::new(kinds)
    }

    pub fn len(&self) -> usize {
        self.decls.len()
    }

    pub fn grid(&self, e: &Expr) -> Grid {
        Grid(self.points.iter().map(|p| e.eval(p)).collect())
    }

    /// First grid point where the library set (over the full pool alphabet)
    /// disagrees with the oracle.
    pub fn mismatch(&self, set: &AssertionSet, oracle: &Grid) -> Option<Valuation> {
        let set = if set.alphabet().len() == self.len() {
            set.clone()
        } else {
            set.extend_alphabet(self.alphabet.clone()).unwrap()
        };
        self.valuations
            .iter()
            .zip(&oracle.0)
            .find(|(v, &want)| set.member(v).unwrap() != want)
            .map(|(v, _)| v.clone())
    }

    /// `set` keeps the value on every axis in `vars` irrelevant.
    pub fn receptive(&self, set: &Grid, vars: &[usize]) -> bool {
        let mut seen: HashMap<Vec<u64>, bool> = HashMap::new();
        for (p, &inside) in self.points.iter().zip(&set.0) {
            let key: Vec<u64> = p
                .iter()
                .enumerate()
                .map(|(i, c)| match (vars.contains(&i), c) {
                    (true, _) => u64::MAX,
                    (false, P::Num(x)) => x.to_bits(),
                    (false, P::Label(l)) => u64::from(*l),
                })
                .collect();
            if *seen.entry(key).or_insert(inside) != inside {
                return false;
            }
        }
        true
    }

    /// Existential projection onto `keep`, as a grid over the full pool.
    pub fn project(&self, set: &Grid, keep: &[usize]) -> Grid {
        let key = |p: &[P]| -> Vec<u64> {
            p.iter()
                .enumerate()
                .map(|(i, c)| match (keep.contains(&i), c) {
                    (false, _) => u64::MAX,
                    (true, P::Num(x)) => x.to_bits(),
                    (true, P::Label(l)) => u64::from(*l),
                })
                .collect()
        };
        let mut any: HashMap<Vec<u64>, bool> = HashMap::new();
        for (p, &inside) in self.points.iter().zip(&set.0) {
            *any.entry(key(p)).or_default() |= inside;
        }
        Grid(self.points.iter().map(|p| any[&key(p)]).collect())
    }
}

/// A set as the indicator of the grid points it contains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid(pub Vec<bool>);

impl Grid {
    pub fn not(&self) -> Grid {
        Grid(self.0.iter().map(|b| !b).collect())
    }
    pub fn and(&self, o: &Grid) -> Grid {
        Grid(self.0.iter().zip(&o.0).map(|(a, b)| *a && *b).collect())
    }
    pub fn or(&self, o: &Grid) -> Grid {
        Grid(self.0.iter().zip(&o.0).map(|(a, b)| *a || *b).collect())
    }
    pub fn subset(&self, o: &Grid) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| !*a || *b)
    }
    pub fn is_empty(&self) -> bool {
        !self.0.iter().any(|b| *b)
    }
    pub fn is_full(&self) -> bool {
        self.0.iter().all(|b| *b)
    }
}

/// Oracle contract `(A, G)` on the grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridContract {
    pub a: Grid,
    pub g: Grid,
}

impl GridContract {
    pub fn saturate(&self) -> GridContract {
        GridContract {
            a: self.a.clone(),
            g: self.g.or(&self.a.not()),
        }
    }
    pub fn compose(&self, o: &GridContract) -> GridContract {
        let g = self.g.and(&o.g);
        GridContract {
            a: self.a.and(&o.a).or(&g.not()),
            g,
        }
    }
    pub fn quotient(&self, divisor: &GridContract) -> GridContract {
        let (t, d) = (self.saturate(), divisor.saturate());
        let a = t.a.and(&d.g);
        GridContract {
            g: d.a.and(&t.g).or(&a.not()),
            a,
        }
    }
    pub fn conjoin(&self, o: &GridContract) -> GridContract {
        GridContract {
            a: self.a.or(&o.a),
            g: self.g.and(&o.g),
        }
    }
    pub fn refines_literal(&self, o: &GridContract) -> bool {
        o.a.subset(&self.a) && self.g.subset(&o.g)
    }
    pub fn refines(&self, o: &GridContract) -> bool {
        self.saturate().refines_literal(&o.saturate())
    }
}

/// A contract as a pair of trees, with its library twin.
#[derive(Debug, Clone)]
pub struct Pair {
    pub a: Expr,
    pub g: Expr,
}

impl Pair {
    pub fn saturated(self) -> Pair {
        Pair {
            g: Expr::Or(vec![self.g, Expr::not(self.a.clone())]),
            a: self.a,
        }
    }

    pub fn contract(&self, id: &str, pool: &Pool, alphabet: &Arc<Alphabet>) -> Contract {
        Contract::new(
            id,
            self.a.build(pool, alphabet),
            self.g.build(pool, alphabet),
        )
        .unwrap()
    }

    pub fn grid(&self, pool: &Pool) -> GridContract {
        GridContract {
            a: pool.grid(&self.a),
            g: pool.grid(&self.g),
        }
    }
}

pub fn random_interval<R: Rng>(rng: &mut R) -> Interval {
    let mut lo = rng.gen_range(0..=LATTICE);
    let mut hi = rng.gen_range(0..=LATTICE);
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    let (lo_closed, hi_closed) = if lo == hi {
        (true, true)
    } else {
        (rng.gen(), rng.gen())
    };
    Interval {
        lo: f64::from(lo),
        lo_closed,
        hi: f64::from(hi),
        hi_closed,
    }
}

pub fn random_atom<R: Rng>(rng: &mut R, pool: &Pool, var: usize) -> Expr {
    match pool.kinds[var] {
        Kind::Real | Kind::Integer => Expr::Range {
            var,
            iv: random_interval(rng),
        },
        Kind::Enumeration => Expr::Labels {
            var,
            set: rng.gen_range(1..(1 << LABELS.len())),
        },
        Kind::Boolean => Expr::Labels {
            var,
            set: rng.gen_range(1..=2),
        },
    }
}

/// Conjunction of atoms over a random subset of `vars`.
pub fn random_box<R: Rng>(rng: &mut R, pool: &Pool, vars: &[usize]) -> Expr {
    let n = rng.gen_range(1..=vars.len());
    let chosen: Vec<usize> = vars.choose_multiple(rng, n).copied().collect();
    Expr::And(
        chosen
            .into_iter()
            .map(|v| random_atom(rng, pool, v))
            .collect(),
    )
}

/// Union of at most `max_boxes` random boxes over `vars`.
pub fn random_boxes<R: Rng>(rng: &mut R, pool: &Pool, vars: &[usize], max_boxes: usize) -> Expr {
    if vars.is_empty() {
        return if rng.gen() { Expr::True } else { Expr::False };
    }
    let n = rng.gen_range(0..=max_boxes);
    Expr::Or((0..n).map(|_| random_box(rng, pool, vars)).collect())
}

/// Arbitrary boolean combination of boxes.
pub fn random_expr<R: Rng>(rng: &mut R, pool: &Pool, vars: &[usize], depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.3) {
        return random_boxes(rng, pool, vars, 3);
    }
    match rng.gen_range(0..3) {
        0 => Expr::not(random_expr(rng, pool, vars, depth - 1)),
        1 => Expr::And(
            (0..rng.gen_range(2..=3))
                .map(|_| random_expr(rng, pool, vars, depth - 1))
                .collect(),
        ),
        _ => Expr::Or(
            (0..rng.gen_range(2..=3))
                .map(|_| random_expr(rng, pool, vars, depth - 1))
                .collect(),
        ),
    }
}

pub fn all_vars(pool: &Pool) -> Vec<usize> {
    (0..pool.len()).collect()
}

/// Random contract over `vars`; saturated when `saturate` is set.
pub fn random_pair<R: Rng>(rng: &mut R, pool: &Pool, vars: &[usize], saturate: bool) -> Pair {
    let p = Pair {
        a: random_boxes(rng, pool, vars, 3),
        g: random_boxes(rng, pool, vars, 3),
    };
    if saturate {
        p.saturated()
    } else {
        p
    }
}

/// A contract refining `c`: `sat(A ∪ X, G ∩ Y)` refines any saturated `(A, G)`.
pub fn refining<R: Rng>(rng: &mut R, pool: &Pool, c: &Pair) -> Pair {
    let vars = all_vars(pool);
    Pair {
        a: Expr::Or(vec![c.a.clone(), random_boxes(rng, pool, &vars, 2)]),
        g: Expr::And(vec![
            c.g.clone(),
            Expr::not(random_boxes(rng, pool, &vars, 1)),
        ]),
    }
    .saturated()
}
