//! The Geiger-Paz-Pearl axioms for independence atoms, derived in
//! `CPL⁺` extended with independence by strong elimination over the atoms
//! followed by atom introduction.

use std::fmt;

use serde::Serialize;

use super::build::{and_e_l, close, ex_falso, zero_i, Gen};
use super::{Derivation, ExtraAtom, Params, ProofSystem, Rule, D};
use crate::error::Result;
use crate::limits::Limits;
use crate::semantics::{satisfying_teams, EvalMode};
use crate::synthesis::theta_star;
use crate::syntax::{parse, replace_at, subformula_at, Formula, Path, Step};
use crate::teams::{Domain, Team};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GppAxiom {
    Symmetry,
    Weakening,
    Permutation,
    Mixing,
}

impl GppAxiom {
    pub const ALL: [GppAxiom; 4] = [GppAxiom::Symmetry, GppAxiom::Weakening, GppAxiom::Permutation, GppAxiom::Mixing];

    /// Premise, conclusion and the index set the case splits range over.
    pub fn instance(self) -> (Formula, Formula, Domain) {
        let (p, c, n): (&str, &str, &[usize]) = match self {
            GppAxiom::Symmetry => ("ind(p0 ; p1)", "ind(p1 ; p0)", &[0, 1]),
            GppAxiom::Weakening => ("ind(p0 p2 ; p1)", "ind(p0 ; p1)", &[0, 1, 2]),
            GppAxiom::Permutation => ("ind(p0 p1 ; p2)", "ind(p1 p0 ; p2)", &[0, 1, 2]),
            GppAxiom::Mixing => ("ind(p0 ; p1) & ind(p0 p1 ; p2)", "ind(p0 ; p1 p2)", &[0, 1, 2]),
        };
        (parse(p).expect("fixed premise"), parse(c).expect("fixed conclusion"), Domain::new(n.iter().copied()))
    }
}

impl fmt::Display for GppAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GppAxiom::Symmetry => "symmetry",
            GppAxiom::Weakening => "weakening",
            GppAxiom::Permutation => "permutation",
            GppAxiom::Mixing => "mixing",
        };
        f.write_str(s)
    }
}

pub fn gpp_system() -> ProofSystem {
    ProofSystem::with_atoms([ExtraAtom::Indep])
}

/// Case split on the atom at `path` of `major`: one case per team on `n`
/// satisfying it, with `Θ*_Y` in place of the atom.
fn se_atom(
    g: &mut Gen,
    major: D,
    path: Path,
    n: &Domain,
    limits: &Limits,
    conclusion: &Formula,
    branch: &mut dyn FnMut(&mut Gen, &Team, D) -> Result<D>,
) -> Result<D> {
    let atom = subformula_at(&major.conclusion, &path)?.clone();
    let teams = satisfying_teams(&atom, n, EvalMode::Lax, limits)?;
    let mut premises = vec![major.clone()];
    let mut labels = Vec::new();
    for y in teams.teams() {
        let (l, h) = g.hyp(replace_at(&major.conclusion, &path, theta_star(y))?);
        premises.push(close(h.clone(), branch(g, y, h)?));
        labels.push(l);
    }
    let params = Params { domain: Some(n.clone()), path: Some(path), ..Params::default() };
    Ok(Derivation::node(Rule::SeAtom, conclusion.clone(), premises, labels, params))
}

fn atom_i(d: D, y: &Team, conclusion: &Formula) -> D {
    let params = Params { domain: Some(y.domain().clone()), team: Some(y.bit_rows()), ..Params::default() };
    Derivation::node(Rule::AtomI, conclusion.clone(), vec![d], Vec::new(), params)
}

pub fn gpp_derivation(axiom: GppAxiom, limits: &Limits) -> Result<D> {
    let (premise, conclusion, n) = axiom.instance();
    let mut g = Gen::new("h");
    let major = Derivation::assume("a", premise);
    if axiom != GppAxiom::Mixing {
        return se_atom(&mut g, major, Vec::new(), &n, limits, &conclusion, &mut |_, y, h| {
            Ok(atom_i(h, y, &conclusion))
        });
    }
    // Split on both conjuncts; matching teams give the conclusion by atom
    // introduction, different ones are contradictory.
    se_atom(&mut g, major, vec![Step::Left], &n, limits, &conclusion, &mut |g, y, h| {
        se_atom(g, h, vec![Step::Right], &n, limits, &conclusion, &mut |_, z, h2| {
            Ok(if y == z {
                atom_i(and_e_l(h2), y, &conclusion)
            } else {
                ex_falso(zero_i(h2, &n), conclusion.clone())
            })
        })
    })
}

pub fn gpp_derivations(limits: &Limits) -> Result<Vec<(GppAxiom, D)>> {
    GppAxiom::ALL.iter().map(|&a| Ok((a, gpp_derivation(a, limits)?))).collect()
}
