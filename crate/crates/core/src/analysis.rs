//! Closure properties of team properties, semantic equivalence, and classical
//! substitutions together with the induced team transform `X ↦ X_σ`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::semantics::{entailment_core, truth_table, valuation_satisfies, Bits, EvalMode};
use crate::syntax::{parse, variables, Formula};
use crate::teams::{row_from_bits, team_masks, Domain, Team, TeamFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Profile {
    pub flat: bool,
    pub downward_closed: bool,
    pub union_closed: bool,
    pub empty_team: bool,
}

/// A failed closure condition, with the teams that witness it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `x` is in the property but `y ⊆ x` is not.
    Downward { x: Team, y: Team },
    /// `x` and `y` are in the property but `x ∪ y` is not.
    Union { x: Team, y: Team },
    /// `x` is in the property iff its singletons are not all in it.
    Flat { x: Team, member: bool },
    EmptyTeam,
    NotEmpty,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Downward { x, y } => write!(f, "{x} is a member but its subteam {y} is not"),
            Violation::Union { x, y } => write!(f, "{x} and {y} are members but their union is not"),
            Violation::Flat { x, member: true } => write!(f, "{x} is a member but one of its singletons is not"),
            Violation::Flat { x, member: false } => write!(f, "every singleton of {x} is a member but {x} is not"),
            Violation::EmptyTeam => write!(f, "the empty team is not a member"),
            Violation::NotEmpty => write!(f, "the property is not empty"),
        }
    }
}

/// A team property on `domain` as one bit per team mask.
#[derive(Debug, Clone)]
pub struct Property {
    pub domain: Domain,
    pub bits: Bits,
}

impl Property {
    pub fn of_family(p: &TeamFamily) -> Result<Property> {
        if p.domain().len() > 4 {
            return Err(Error::Guard(format!("team properties on {} variables", p.domain().len())));
        }
        let mut bits = Bits::empty(1 << p.domain().len());
        for t in p.teams() {
            bits.set(t.mask().expect("small domain") as usize);
        }
        Ok(Property { domain: p.domain().clone(), bits })
    }

    pub fn of_formula(f: &Formula, n: &Domain, mode: EvalMode, limits: &Limits) -> Result<Property> {
        let t = truth_table(f, n, mode, limits)?;
        Ok(Property { domain: t.domain, bits: t.bits })
    }

    fn rows(&self) -> usize {
        1 << self.domain.len()
    }

    fn team(&self, mask: usize) -> Team {
        Team::from_mask(self.domain.clone(), mask as u64)
    }

    fn has(&self, mask: usize) -> bool {
        self.bits.get(mask)
    }

    pub fn empty_violation(&self) -> Option<Violation> {
        (!self.has(0)).then_some(Violation::EmptyTeam)
    }

    pub fn downward_violation(&self) -> Option<Violation> {
        for s in self.canonical() {
            if !self.has(s) {
                continue;
            }
            for r in 0..self.rows() {
                if s >> r & 1 == 1 && !self.has(s & !(1 << r)) {
                    return Some(Violation::Downward { x: self.team(s), y: self.team(s & !(1 << r)) });
                }
            }
        }
        None
    }

    /// Closure under unions of nonempty subfamilies.
    pub fn union_violation(&self) -> Option<Violation> {
        let n = 1usize << self.rows();
        // below[s]: union of the members contained in s, and whether there is one.
        let mut below: Vec<(usize, bool)> = (0..n).map(|s| if self.has(s) { (s, true) } else { (0, false) }).collect();
        for i in 0..self.rows() {
            for s in 0..n {
                if s >> i & 1 == 1 {
                    let (u, h) = below[s ^ (1 << i)];
                    below[s].0 |= u;
                    below[s].1 |= h;
                }
            }
        }
        let s = self.canonical().find(|&s| below[s] == (s, true) && !self.has(s))?;
        // Fold the members below s; some binary union along the way must leave the property.
        let mut parts = (0..n).filter(|&t| t & !s == 0 && self.has(t));
        let mut acc = parts.next()?;
        for t in parts {
            if !self.has(acc | t) {
                return Some(Violation::Union { x: self.team(acc), y: self.team(t) });
            }
            acc |= t;
        }
        unreachable!("a union of members outside the property has a failing binary step")
    }

    pub fn flat_violation(&self) -> Option<Violation> {
        let singles: usize = (0..self.rows()).filter(|r| self.has(1 << r)).map(|r| 1 << r).sum();
        self.canonical().find_map(|s| {
            let all_singles = s & !singles == 0;
            (self.has(s) != all_singles).then(|| Violation::Flat { x: self.team(s), member: self.has(s) })
        })
    }

    pub fn profile(&self) -> Profile {
        Profile {
            flat: self.flat_violation().is_none(),
            downward_closed: self.downward_violation().is_none(),
            union_closed: self.union_violation().is_none(),
            empty_team: self.empty_violation().is_none(),
        }
    }

    /// Masks in canonical team order.
    fn canonical(&self) -> impl Iterator<Item = usize> {
        team_masks(self.rows() as u32).map(|m| m as usize)
    }
}

/// Flatness, downward closure, union closure and the empty team property of `⟦f⟧` on `n`.
pub fn property_profile(f: &Formula, n: &Domain, mode: EvalMode, limits: &Limits) -> Result<Profile> {
    Ok(Property::of_formula(f, n, mode, limits)?.profile())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    /// The first team in canonical order on which exactly one side holds.
    Differs { team: Team, left: bool, right: bool },
}

impl Equivalence {
    pub fn holds(&self) -> bool {
        matches!(self, Equivalence::Equivalent)
    }
}

pub fn equivalent(f: &Formula, g: &Formula, n: &Domain, mode: EvalMode, limits: &Limits) -> Result<Equivalence> {
    let a = truth_table(f, n, mode, limits)?;
    let b = truth_table(g, n, mode, limits)?;
    Ok(match team_masks(1 << n.len()).find(|m| a.holds_mask(*m) != b.holds_mask(*m)) {
        None => Equivalence::Equivalent,
        Some(m) => Equivalence::Differs {
            team: Team::from_mask(n.clone(), m),
            left: a.holds_mask(m),
            right: b.holds_mask(m),
        },
    })
}

/// A map from variable indices to classical formulas, identity elsewhere.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClassicalSubstitution {
    map: BTreeMap<usize, Formula>,
}

impl ClassicalSubstitution {
    pub fn new(map: impl IntoIterator<Item = (usize, Formula)>) -> Result<ClassicalSubstitution> {
        let map: BTreeMap<usize, Formula> = map.into_iter().collect();
        if let Some((i, f)) = map.iter().find(|(_, f)| !f.is_ext_classical()) {
            return Err(Error::NotClassical(format!("image of p{i} is `{f}`")));
        }
        Ok(ClassicalSubstitution { map })
    }

    pub fn identity() -> ClassicalSubstitution {
        ClassicalSubstitution::default()
    }

    /// Reads `{"2": "p0 & p1", ...}`.
    pub fn from_json(text: &str) -> Result<ClassicalSubstitution> {
        let raw: BTreeMap<String, String> =
            serde_json::from_str(text).map_err(|e| Error::input(format!("substitution JSON: {e}")))?;
        let mut map = Vec::new();
        for (k, v) in raw {
            let i = k
                .trim_start_matches('p')
                .parse::<usize>()
                .map_err(|_| Error::input(format!("substitution key `{k}` is not a variable index")))?;
            map.push((i, parse(&v)?));
        }
        ClassicalSubstitution::new(map)
    }

    pub fn image(&self, i: usize) -> Formula {
        self.map.get(&i).cloned().unwrap_or(Formula::Var(i))
    }

    pub fn maps(&self, i: usize) -> bool {
        self.map.contains_key(&i)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&usize, &Formula)> {
        self.map.iter()
    }
}

/// `σ(φ)`: homomorphic replacement. Negated variables and atoms whose
/// arguments are touched by `σ` move to their extended forms.
pub fn apply_substitution(sigma: &ClassicalSubstitution, f: &Formula) -> Formula {
    use Formula::*;
    let touched = |vs: &[usize]| vs.iter().any(|v| sigma.maps(*v));
    let images = |vs: &[usize]| vs.iter().map(|v| sigma.image(*v)).collect::<Vec<_>>();
    let sub = |g: &Formula| apply_substitution(sigma, g);
    let subs = |gs: &[Formula]| gs.iter().map(sub).collect::<Vec<_>>();
    match f {
        Var(i) => sigma.image(*i),
        NegVar(i) if sigma.maps(*i) => Formula::ext_neg(sigma.image(*i)),
        NegVar(_) | Bot | Top | Ne => f.clone(),
        Dep(xs, y) if touched(xs) || sigma.maps(*y) => ExtDep(images(xs), sigma.image(*y).into()),
        Indep(xs, ys) if touched(xs) || touched(ys) => ExtIndep(images(xs), images(ys)),
        Incl(xs, ys) if touched(xs) || touched(ys) => ExtIncl(images(xs), images(ys)),
        CondIndep(zs, xs, ys) if touched(zs) || touched(xs) || touched(ys) => {
            ExtCondIndep(images(zs), images(xs), images(ys))
        }
        Dep(..) | Indep(..) | Incl(..) | CondIndep(..) => f.clone(),
        ExtNeg(a) => Formula::ext_neg(sub(a)),
        ExtDep(xs, y) => ExtDep(subs(xs), sub(y).into()),
        ExtIndep(xs, ys) => ExtIndep(subs(xs), subs(ys)),
        ExtIncl(xs, ys) => ExtIncl(subs(xs), subs(ys)),
        ExtCondIndep(zs, xs, ys) => ExtCondIndep(subs(zs), subs(xs), subs(ys)),
        And(a, b) => Formula::and(sub(a), sub(b)),
        Tensor(a, b) => Formula::tensor(sub(a), sub(b)),
        NeOr(a, b) => Formula::ne_or(sub(a), sub(b)),
        BoolOr(a, b) => Formula::bor(sub(a), sub(b)),
        LinImp(a, b) => Formula::lin_imp(sub(a), sub(b)),
        Might(a) => Formula::might(sub(a)),
        BoolNeg(a) => Formula::bool_neg(sub(a)),
    }
}

/// `X_σ = { s_σ : s ∈ X }` on `n_out`, where `s_σ(i) = 1` iff `{s} ⊨ σ(p_i)`.
pub fn team_transform(x: &Team, sigma: &ClassicalSubstitution, n_out: &Domain) -> Result<Team> {
    for &i in n_out.indices() {
        let img = sigma.image(i);
        if let Some(v) = variables(&img).into_iter().find(|v| !x.domain().contains(*v)) {
            return Err(Error::Domain(format!("σ(p{i}) = `{img}` uses p{v}, outside the team domain {}", x.domain())));
        }
    }
    let images: Vec<Formula> = n_out.indices().iter().map(|&i| sigma.image(i)).collect();
    let mut rows = Vec::with_capacity(x.len());
    for &r in x.rows() {
        let value = |v: usize| x.value(r, v).unwrap_or(false);
        let bits = images.iter().map(|a| valuation_satisfies(a, &value)).collect::<Result<Vec<bool>>>()?;
        rows.push(row_from_bits(&bits));
    }
    Team::new(n_out.clone(), rows)
}

/// An entailment that holds on `n` but fails once `σ` is applied to every formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstitutionFailure {
    pub premises: Vec<Formula>,
    pub conclusion: Formula,
    pub counterexample: Team,
}

/// Checks `Γ ⊨ ψ` and `σ(Γ) ⊨ σ(ψ)` on `n`; returns the failure when only the first holds.
pub fn substitution_failure(
    gamma: &[Formula],
    psi: &Formula,
    sigma: &ClassicalSubstitution,
    n: &Domain,
    limits: &Limits,
) -> Result<Option<SubstitutionFailure>> {
    if !entailment_core(gamma, psi, n, EvalMode::Lax, limits)?.holds() {
        return Ok(None);
    }
    let premises: Vec<Formula> = gamma.iter().map(|g| apply_substitution(sigma, g)).collect();
    let conclusion = apply_substitution(sigma, psi);
    Ok(entailment_core(&premises, &conclusion, n, EvalMode::Lax, limits)?
        .counterexample()
        .map(|t| SubstitutionFailure { premises, conclusion, counterexample: t.clone() }))
}
