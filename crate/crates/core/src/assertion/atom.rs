//! Per-variable constraints: intervals for numeric variables, label sets for
//! boolean and enumeration variables.
//!
//! Real endpoints are only ever copied and compared. Integer intervals are
//! kept in closed form `[lo, hi]` over integral values, which is the one place
//! where endpoints get rounded.

use std::cmp::Ordering;

use super::variable::{Coord, Domain, VariableDecl};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub lo_closed: bool,
    pub hi: f64,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            lo_closed: true,
            hi,
            hi_closed: true,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed {
            x >= self.lo
        } else {
            x > self.lo
        };
        let below = if self.hi_closed {
            x <= self.hi
        } else {
            x < self.hi
        };
        above && below
    }

    fn intersect(&self, other: &Interval) -> Interval {
        let (lo, lo_closed) = match self.lo.partial_cmp(&other.lo) {
            Some(Ordering::Greater) => (self.lo, self.lo_closed),
            Some(Ordering::Less) => (other.lo, other.lo_closed),
            _ => (self.lo, self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Less) => (self.hi, self.hi_closed),
            Some(Ordering::Greater) => (other.hi, other.hi_closed),
            _ => (self.hi, self.hi_closed && other.hi_closed),
        };
        Interval {
            lo,
            lo_closed,
            hi,
            hi_closed,
        }
    }

    /// `self ⊆ other`, assuming `self` is non-empty.
    fn within(&self, other: &Interval) -> bool {
        let lo_ok =
            self.lo > other.lo || (self.lo == other.lo && (other.lo_closed || !self.lo_closed));
        let hi_ok =
            self.hi < other.hi || (self.hi == other.hi && (other.hi_closed || !self.hi_closed));
        lo_ok && hi_ok
    }

    /// Rounds to the closed integral interval holding the same integers.
    fn to_integer(self) -> Interval {
        let lo = if self.lo_closed || self.lo.fract() != 0.0 {
            self.lo.ceil()
        } else {
            self.lo + 1.0
        };
        let hi = if self.hi_closed || self.hi.fract() != 0.0 {
            self.hi.floor()
        } else {
            self.hi - 1.0
        };
        Interval::closed(lo, hi)
    }

    fn total_cmp(&self, other: &Interval) -> Ordering {
        self.lo
            .total_cmp(&other.lo)
            .then((!self.lo_closed).cmp(&!other.lo_closed))
            .then(self.hi.total_cmp(&other.hi))
            .then(self.hi_closed.cmp(&other.hi_closed))
    }
}

/// Bit set of label indices into a variable's declared label list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelSet(pub u64);

impl LabelSet {
    pub fn full(count: usize) -> Self {
        if count >= 64 {
            LabelSet(u64::MAX)
        } else {
            LabelSet((1u64 << count) - 1)
        }
    }

    pub fn single(index: u32) -> Self {
        LabelSet(1u64 << index)
    }

    pub fn contains(&self, index: u32) -> bool {
        self.0 & (1u64 << index) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn indices(&self) -> impl Iterator<Item = u32> + '_ {
        (0..64u32).filter(move |i| self.contains(*i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Atom {
    Range(Interval),
    Labels(LabelSet),
}

impl Atom {
    /// The whole declared domain of `decl`.
    pub fn full(decl: &VariableDecl) -> Atom {
        match &decl.domain {
            Domain::Real { lo, hi } => Atom::Range(Interval::closed(*lo, *hi)),
            Domain::Integer { lo, hi } => Atom::Range(Interval::closed(*lo as f64, *hi as f64)),
            Domain::Boolean | Domain::Enumeration(_) => {
                Atom::Labels(LabelSet::full(decl.label_count()))
            }
        }
    }

    /// Clips an interval to the domain of `decl`; `None` when nothing remains.
    pub fn range(decl: &VariableDecl, interval: Interval) -> Option<Atom> {
        Atom::Range(interval).intersect(&Atom::full(decl), decl)
    }

    pub fn labels(decl: &VariableDecl, set: LabelSet) -> Option<Atom> {
        Atom::Labels(set).intersect(&Atom::full(decl), decl)
    }

    fn normalized(self, decl: &VariableDecl) -> Option<Atom> {
        match self {
            Atom::Range(i) => {
                let i = if matches!(decl.domain, Domain::Integer { .. }) {
                    i.to_integer()
                } else {
                    i
                };
                (!i.is_empty()).then_some(Atom::Range(i))
            }
            Atom::Labels(l) => (!l.is_empty()).then_some(Atom::Labels(l)),
        }
    }

    pub fn intersect(&self, other: &Atom, decl: &VariableDecl) -> Option<Atom> {
        match (self, other) {
            (Atom::Range(a), Atom::Range(b)) => Atom::Range(a.intersect(b)).normalized(decl),
            (Atom::Labels(a), Atom::Labels(b)) => {
                Atom::Labels(LabelSet(a.0 & b.0)).normalized(decl)
            }
            _ => unreachable!("atom kinds disagree for `{}`", decl.name),
        }
    }

    pub fn is_subset(&self, other: &Atom) -> bool {
        match (self, other) {
            (Atom::Range(a), Atom::Range(b)) => a.within(b),
            (Atom::Labels(a), Atom::Labels(b)) => a.0 & !b.0 == 0,
            _ => false,
        }
    }

    pub fn is_full(&self, decl: &VariableDecl) -> bool {
        Atom::full(decl).is_subset(self)
    }

    /// Pieces of `self ∖ other`, at most two. Both atoms lie inside the domain.
    pub fn minus(&self, other: &Atom, decl: &VariableDecl) -> Vec<Atom> {
        match (self, other) {
            (Atom::Range(a), Atom::Range(b)) => {
                let left = Interval {
                    lo: a.lo,
                    lo_closed: a.lo_closed,
                    hi: b.lo,
                    hi_closed: !b.lo_closed,
                };
                let right = Interval {
                    lo: b.hi,
                    lo_closed: !b.hi_closed,
                    hi: a.hi,
                    hi_closed: a.hi_closed,
                };
                [left, right]
                    .into_iter()
                    .filter_map(|piece| Atom::Range(piece.intersect(a)).normalized(decl))
                    .collect()
            }
            (Atom::Labels(a), Atom::Labels(b)) => Atom::Labels(LabelSet(a.0 & !b.0))
                .normalized(decl)
                .into_iter()
                .collect(),
            _ => unreachable!("atom kinds disagree for `{}`", decl.name),
        }
    }

    /// Single atom covering `self ∪ other`, if the union is connected.
    pub fn merge(&self, other: &Atom, decl: &VariableDecl) -> Option<Atom> {
        match (self, other) {
            (Atom::Range(a), Atom::Range(b)) => {
                let (first, second) = if a.total_cmp(b) == Ordering::Greater {
                    (b, a)
                } else {
                    (a, b)
                };
                let integer = matches!(decl.domain, Domain::Integer { .. });
                let touches = if integer {
                    second.lo <= first.hi + 1.0
                } else {
                    second.lo < first.hi
                        || (second.lo == first.hi && (first.hi_closed || second.lo_closed))
                };
                if !touches {
                    return None;
                }
                let (hi, hi_closed) = match first.hi.partial_cmp(&second.hi) {
                    Some(Ordering::Greater) => (first.hi, first.hi_closed),
                    Some(Ordering::Less) => (second.hi, second.hi_closed),
                    _ => (first.hi, first.hi_closed || second.hi_closed),
                };
                let lo_closed = if first.lo == second.lo {
                    first.lo_closed || second.lo_closed
                } else {
                    first.lo_closed
                };
                Some(Atom::Range(Interval {
                    lo: first.lo,
                    lo_closed,
                    hi,
                    hi_closed,
                }))
            }
            (Atom::Labels(a), Atom::Labels(b)) => Some(Atom::Labels(LabelSet(a.0 | b.0))),
            _ => None,
        }
    }

    pub(crate) fn contains(&self, coord: Coord) -> bool {
        match (self, coord) {
            (Atom::Range(i), Coord::Num(x)) => i.contains(x),
            (Atom::Labels(l), Coord::Label(ix)) => l.contains(ix),
            _ => false,
        }
    }

    /// A point inside the atom: interval midpoint (or a closed endpoint when
    /// the midpoint is not representable inside), or the first label.
    pub(crate) fn representative(&self, decl: &VariableDecl) -> Coord {
        match self {
            Atom::Range(i) => {
                if matches!(decl.domain, Domain::Integer { .. }) {
                    return Coord::Num(i.lo + ((i.hi - i.lo) / 2.0).floor());
                }
                let mid = i.lo / 2.0 + i.hi / 2.0;
                if i.contains(mid) {
                    Coord::Num(mid)
                } else if i.lo_closed {
                    Coord::Num(i.lo)
                } else {
                    Coord::Num(i.hi)
                }
            }
            Atom::Labels(l) => Coord::Label(l.indices().next().unwrap_or(0)),
        }
    }

    pub(crate) fn total_cmp(&self, other: &Atom) -> Ordering {
        match (self, other) {
            (Atom::Range(a), Atom::Range(b)) => a.total_cmp(b),
            (Atom::Labels(a), Atom::Labels(b)) => a.cmp(b),
            (Atom::Range(_), Atom::Labels(_)) => Ordering::Less,
            (Atom::Labels(_), Atom::Range(_)) => Ordering::Greater,
        }
    }
}
