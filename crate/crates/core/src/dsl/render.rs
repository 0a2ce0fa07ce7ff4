use std::fmt::Write;

use crate::assertion::{AssertionSet, Atom, Domain};

/// Canonical text for an assertion: boxes in canonical order joined by `|`,
/// constrained atoms in variable-name order joined by `&`. The empty set
/// renders as `false`, the universe as `true`.
pub fn render_assertion(set: &AssertionSet) -> String {
    let alphabet = set.alphabet();
    let mut boxes = Vec::new();
    for b in set.boxes() {
        let atoms: Vec<String> = b
            .constrained(alphabet)
            .map(|(i, atom)| {
                render_atom(&alphabet.vars()[i].name, &alphabet.vars()[i].domain, atom)
            })
            .collect();
        if atoms.is_empty() {
            return "true".to_string();
        }
        boxes.push(atoms.join(" & "));
    }
    if boxes.is_empty() {
        "false".to_string()
    } else {
        boxes.join(" | ")
    }
}

fn render_atom(name: &str, domain: &Domain, atom: &Atom) -> String {
    let mut out = String::new();
    match atom {
        Atom::Range(i) => {
            let _ = write!(
                out,
                "{name} in {}{}, {}{}",
                if i.lo_closed { '[' } else { '(' },
                i.lo,
                i.hi,
                if i.hi_closed { ']' } else { ')' }
            );
        }
        Atom::Labels(set) => {
            let labels = domain.labels().unwrap_or_default();
            let chosen: Vec<&str> = set.indices().map(|ix| labels[ix as usize]).collect();
            let _ = write!(out, "{name} in {{{}}}", chosen.join(", "));
        }
    }
    out
}
