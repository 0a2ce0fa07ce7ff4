use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::atom::{Atom, Interval, LabelSet};
use super::variable::{Alphabet, Coord, Valuation, VariableDecl};
use super::AlgebraError;

/// Cartesian product of one atom per alphabet variable.
///
/// Unconstrained variables carry their full-domain atom, so a box is always
/// aligned with the alphabet it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperbox {
    atoms: Vec<Atom>,
}

impl Hyperbox {
    fn universe(alphabet: &Alphabet) -> Self {
        Self {
            atoms: alphabet.iter().map(Atom::full).collect(),
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    fn intersect(&self, other: &Hyperbox, alphabet: &Alphabet) -> Option<Hyperbox> {
        let atoms = self
            .atoms
            .iter()
            .zip(&other.atoms)
            .zip(alphabet.iter())
            .map(|((a, b), decl)| a.intersect(b, decl))
            .collect::<Option<Vec<_>>>()?;
        Some(Hyperbox { atoms })
    }

    fn is_subset(&self, other: &Hyperbox) -> bool {
        self.atoms
            .iter()
            .zip(&other.atoms)
            .all(|(a, b)| a.is_subset(b))
    }

    /// Disjoint pieces of `self ∖ other`: at most two per variable.
    fn minus(&self, other: &Hyperbox, alphabet: &Alphabet) -> Vec<Hyperbox> {
        if self.intersect(other, alphabet).is_none() {
            return vec![self.clone()];
        }
        let mut out = Vec::new();
        let mut rest = self.clone();
        for (k, decl) in alphabet.iter().enumerate() {
            let (mine, theirs) = (rest.atoms[k], other.atoms[k]);
            if mine.is_subset(&theirs) {
                continue;
            }
            for piece in mine.minus(&theirs, decl) {
                let mut b = rest.clone();
                b.atoms[k] = piece;
                out.push(b);
            }
            rest.atoms[k] = mine
                .intersect(&theirs, decl)
                .expect("boxes overlap, so every atom pair overlaps");
        }
        out
    }

    pub(crate) fn contains(&self, coords: &[Coord]) -> bool {
        self.atoms.iter().zip(coords).all(|(a, c)| a.contains(*c))
    }

    /// Indices of variables whose atom rejects the coordinates.
    pub(crate) fn failing(&self, coords: &[Coord]) -> Vec<usize> {
        self.atoms
            .iter()
            .zip(coords)
            .enumerate()
            .filter(|(_, (a, c))| !a.contains(**c))
            .map(|(i, _)| i)
            .collect()
    }

    /// Atoms that differ from the full domain, keyed by variable index.
    pub fn constrained<'a>(
        &'a self,
        alphabet: &'a Alphabet,
    ) -> impl Iterator<Item = (usize, &'a Atom)> + 'a {
        self.atoms
            .iter()
            .zip(alphabet.iter())
            .enumerate()
            .filter(|(_, (a, decl))| !a.is_full(decl))
            .map(|(i, (a, _))| (i, a))
    }

    fn total_cmp(&self, other: &Hyperbox) -> Ordering {
        for (a, b) in self.atoms.iter().zip(&other.atoms) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

/// A set of valuations over an alphabet, stored as a finite union of boxes.
///
/// Equality is semantic: two sets are equal when they contain the same
/// valuations, whatever their box decomposition.
#[derive(Debug, Clone)]
pub struct AssertionSet {
    alphabet: Arc<Alphabet>,
    boxes: Vec<Hyperbox>,
}

impl PartialEq for AssertionSet {
    fn eq(&self, other: &Self) -> bool {
        self.equals(other).unwrap_or(false)
    }
}

impl AssertionSet {
    pub fn universe(alphabet: Arc<Alphabet>) -> Self {
        let boxes = vec![Hyperbox::universe(&alphabet)];
        Self { alphabet, boxes }
    }

    pub fn empty(alphabet: Arc<Alphabet>) -> Self {
        Self {
            alphabet,
            boxes: Vec::new(),
        }
    }

    /// Box constraining a single variable to `atom` (clipped to its domain).
    pub fn from_atom(
        alphabet: Arc<Alphabet>,
        variable: &str,
        atom: Atom,
    ) -> Result<Self, AlgebraError> {
        let index = alphabet
            .index_of(variable)
            .ok_or_else(|| AlgebraError::UnknownVariable(variable.to_string()))?;
        let decl = &alphabet.vars()[index];
        let full = Atom::full(decl);
        let kinds_agree = matches!(
            (&atom, &full),
            (Atom::Range(_), Atom::Range(_)) | (Atom::Labels(_), Atom::Labels(_))
        );
        if !kinds_agree {
            return Err(AlgebraError::KindMismatch {
                variable: variable.to_string(),
                kind: decl.kind(),
            });
        }
        let mut b = Hyperbox::universe(&alphabet);
        match atom.intersect(&full, decl) {
            Some(a) => {
                b.atoms[index] = a;
                Ok(Self {
                    alphabet,
                    boxes: vec![b],
                })
            }
            None => Ok(Self::empty(alphabet)),
        }
    }

    /// `variable ∈ interval`, clipped to the declared domain.
    pub fn interval(
        alphabet: Arc<Alphabet>,
        variable: &str,
        interval: Interval,
    ) -> Result<Self, AlgebraError> {
        Self::from_atom(alphabet, variable, Atom::Range(interval))
    }

    /// `variable ∈ {labels}`; every label must be declared.
    pub fn labels(
        alphabet: Arc<Alphabet>,
        variable: &str,
        labels: &[&str],
    ) -> Result<Self, AlgebraError> {
        let decl = alphabet
            .get(variable)
            .ok_or_else(|| AlgebraError::UnknownVariable(variable.to_string()))?;
        let mut set = 0u64;
        for l in labels {
            let ix = decl
                .label_index(l)
                .ok_or_else(|| AlgebraError::DomainViolation {
                    variable: variable.to_string(),
                    value: l.to_string(),
                    domain: format!("{:?}", decl.domain.labels().unwrap_or_default()),
                })?;
            set |= 1 << ix;
        }
        Self::from_atom(alphabet, variable, Atom::Labels(LabelSet(set)))
    }

    /// Builds a set from explicit boxes given as per-variable atoms; variables
    /// missing from a box are unconstrained.
    pub fn from_boxes(
        alphabet: Arc<Alphabet>,
        boxes: Vec<BTreeMap<String, Atom>>,
    ) -> Result<Self, AlgebraError> {
        let mut out = Self::empty(alphabet.clone());
        for spec in boxes {
            let mut b = Self::universe(alphabet.clone());
            for (name, atom) in spec {
                b = b.intersect(&Self::from_atom(alphabet.clone(), &name, atom)?)?;
            }
            out.boxes.extend(b.boxes);
        }
        out.normalize();
        Ok(out)
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn boxes(&self) -> &[Hyperbox] {
        &self.boxes
    }

    fn same_alphabet(&self, other: &AssertionSet) -> Result<(), AlgebraError> {
        if Arc::ptr_eq(&self.alphabet, &other.alphabet) || self.alphabet == other.alphabet {
            Ok(())
        } else {
            Err(AlgebraError::AlphabetMismatch)
        }
    }

    fn with_boxes(&self, boxes: Vec<Hyperbox>) -> Self {
        let mut out = Self {
            alphabet: self.alphabet.clone(),
            boxes,
        };
        out.normalize();
        out
    }

    /// Prunes subsumed boxes, merges boxes differing in one connected atom,
    /// and sorts into canonical order. Never changes the denoted set.
    fn normalize(&mut self) {
        let alphabet = self.alphabet.clone();
        let mut boxes = std::mem::take(&mut self.boxes);
        loop {
            prune_subsumed(&mut boxes);
            if !merge_one_pass(&mut boxes, &alphabet) {
                break;
            }
        }
        boxes.sort_by(Hyperbox::total_cmp);
        self.boxes = boxes;
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn is_universe(&self) -> bool {
        self.complement().is_empty()
    }

    pub fn union(&self, other: &AssertionSet) -> Result<Self, AlgebraError> {
        self.same_alphabet(other)?;
        let boxes = self.boxes.iter().chain(&other.boxes).cloned().collect();
        Ok(self.with_boxes(boxes))
    }

    pub fn intersect(&self, other: &AssertionSet) -> Result<Self, AlgebraError> {
        self.same_alphabet(other)?;
        let mut boxes = Vec::new();
        for a in &self.boxes {
            for b in &other.boxes {
                if let Some(c) = a.intersect(b, &self.alphabet) {
                    boxes.push(c);
                }
            }
        }
        Ok(self.with_boxes(boxes))
    }

    /// Complement relative to the declared-domain universe.
    pub fn complement(&self) -> Self {
        self.with_boxes(subtract_all(
            vec![Hyperbox::universe(&self.alphabet)],
            &self.boxes,
            &self.alphabet,
        ))
    }

    /// `self ∖ other`; same set as `self ∩ ¬other`.
    pub fn difference(&self, other: &AssertionSet) -> Result<Self, AlgebraError> {
        self.same_alphabet(other)?;
        Ok(self.with_boxes(subtract_all(
            self.boxes.clone(),
            &other.boxes,
            &self.alphabet,
        )))
    }

    pub fn is_subset(&self, other: &AssertionSet) -> Result<bool, AlgebraError> {
        self.same_alphabet(other)?;
        Ok(self
            .boxes
            .iter()
            .all(|b| subtract_all(vec![b.clone()], &other.boxes, &self.alphabet).is_empty()))
    }

    pub fn equals(&self, other: &AssertionSet) -> Result<bool, AlgebraError> {
        Ok(self.is_subset(other)? && other.is_subset(self)?)
    }

    pub fn member(&self, v: &Valuation) -> Result<bool, AlgebraError> {
        let coords = self.alphabet.coordinates(v)?;
        Ok(self.contains_coords(&coords))
    }

    pub(crate) fn contains_coords(&self, coords: &[Coord]) -> bool {
        self.boxes.iter().any(|b| b.contains(coords))
    }

    /// Existential projection onto the named variables.
    pub fn project<'a, I>(&self, keep: I) -> Result<Self, AlgebraError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let target = Arc::new(self.alphabet.restrict(keep)?);
        let positions: Vec<usize> = target
            .names()
            .map(|n| {
                self.alphabet
                    .index_of(n)
                    .expect("restricted from this alphabet")
            })
            .collect();
        let boxes = self
            .boxes
            .iter()
            .map(|b| Hyperbox {
                atoms: positions.iter().map(|&i| b.atoms[i]).collect(),
            })
            .collect();
        let mut out = Self {
            alphabet: target,
            boxes,
        };
        out.normalize();
        Ok(out)
    }

    /// Inverse projection: re-homes the set over a larger alphabet, leaving the
    /// new variables unconstrained.
    pub fn extend_alphabet(&self, target: Arc<Alphabet>) -> Result<Self, AlgebraError> {
        if Arc::ptr_eq(&self.alphabet, &target) || *self.alphabet == *target {
            return Ok(Self {
                alphabet: target,
                boxes: self.boxes.clone(),
            });
        }
        for v in self.alphabet.iter() {
            match target.get(&v.name) {
                None => return Err(AlgebraError::NotASuperAlphabet(v.name.clone())),
                Some(t) => {
                    if let Some(reason) = v.conflict_with(t) {
                        return Err(AlgebraError::VariableDeclConflict {
                            variable: v.name.clone(),
                            reason,
                        });
                    }
                }
            }
        }
        let sources: Vec<Option<usize>> =
            target.names().map(|n| self.alphabet.index_of(n)).collect();
        let boxes = self
            .boxes
            .iter()
            .map(|b| Hyperbox {
                atoms: sources
                    .iter()
                    .zip(target.iter())
                    .map(|(src, decl)| match src {
                        Some(i) => b.atoms[*i],
                        None => Atom::full(decl),
                    })
                    .collect(),
            })
            .collect();
        Ok(Self {
            alphabet: target,
            boxes,
        })
    }

    /// True when the set does not constrain any of the named variables.
    pub fn is_receptive<'a, I>(&self, vars: I) -> Result<bool, AlgebraError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let free: BTreeSet<&str> = vars.into_iter().collect();
        if let Some(unknown) = free.iter().find(|n| !self.alphabet.contains(n)) {
            return Err(AlgebraError::UnknownVariable(unknown.to_string()));
        }
        let keep: Vec<&str> = self
            .alphabet
            .names()
            .filter(|n| !free.contains(n))
            .collect();
        let cylinder = self.project(keep)?.extend_alphabet(self.alphabet.clone())?;
        cylinder.is_subset(self)
    }

    /// Variables the set actually constrains.
    pub fn constrained_variables(&self) -> BTreeSet<String> {
        self.alphabet
            .names()
            .filter(|n| !self.is_receptive([*n]).unwrap_or(false))
            .map(str::to_string)
            .collect()
    }

    /// One valuation inside the set: atom representatives of the first box.
    pub fn witness(&self) -> Option<Valuation> {
        let first = self.boxes.first()?;
        Some(
            first
                .atoms
                .iter()
                .zip(self.alphabet.iter())
                .map(|(atom, decl)| {
                    (
                        decl.name.clone(),
                        coord_value(decl, atom.representative(decl)),
                    )
                })
                .collect(),
        )
    }
}

pub(crate) fn coord_value(decl: &VariableDecl, c: Coord) -> super::Value {
    match c {
        Coord::Num(x) => super::Value::Number(x),
        Coord::Label(ix) => decl.label_at(ix),
    }
}

fn subtract_all(
    mut pieces: Vec<Hyperbox>,
    holes: &[Hyperbox],
    alphabet: &Alphabet,
) -> Vec<Hyperbox> {
    for hole in holes {
        if pieces.is_empty() {
            break;
        }
        pieces = pieces
            .iter()
            .flat_map(|p| p.minus(hole, alphabet))
            .collect();
        if pieces.len() > 64 {
            prune_subsumed(&mut pieces);
        }
    }
    pieces
}

fn prune_subsumed(boxes: &mut Vec<Hyperbox>) {
    let mut keep = vec![true; boxes.len()];
    for i in 0..boxes.len() {
        for j in 0..boxes.len() {
            if i != j && keep[j] && boxes[i].is_subset(&boxes[j]) {
                keep[i] = false;
                break;
            }
        }
    }
    let mut it = keep.into_iter();
    boxes.retain(|_| it.next().unwrap_or(true));
}

/// Merges the first pair of boxes that differ in exactly one atom whose union
/// is a single atom. Returns whether anything changed.
fn merge_one_pass(boxes: &mut Vec<Hyperbox>, alphabet: &Alphabet) -> bool {
    let mut changed = false;
    let mut i = 0;
    while i < boxes.len() {
        let mut j = i + 1;
        while j < boxes.len() {
            if let Some(m) = try_merge(&boxes[i], &boxes[j], alphabet) {
                boxes[i] = m;
                boxes.swap_remove(j);
                changed = true;
                j = i + 1;
                continue;
            }
            j += 1;
        }
        i += 1;
    }
    changed
}

fn try_merge(a: &Hyperbox, b: &Hyperbox, alphabet: &Alphabet) -> Option<Hyperbox> {
    let mut diff = None;
    for (k, (x, y)) in a.atoms.iter().zip(&b.atoms).enumerate() {
        if x != y {
            if diff.is_some() {
                return None;
            }
            diff = Some(k);
        }
    }
    let k = diff?;
    let atom = a.atoms[k].merge(&b.atoms[k], &alphabet.vars()[k])?;
    let mut out = a.clone();
    out.atoms[k] = atom;
    Some(out)
}
