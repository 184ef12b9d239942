//! Defining formulas for team properties: the `Θ` family, synthesis per
//! closure class, normal forms, and translations between atoms.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::analysis::{Property, Violation};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::semantics::{satisfying_teams, EvalMode};
use crate::syntax::{variables, Formula, Fragment};
use crate::teams::{row_value, Domain, Team, TeamFamily};

/// `p_{i1}^{s(i1)} ∧ … ∧ p_{in}^{s(in)}` in domain order; `⊤` on the empty domain.
pub fn literal_conj(domain: &Domain, row: u64) -> Formula {
    let m = domain.len();
    Formula::big_and(domain.indices().iter().enumerate().map(|(k, &v)| Formula::literal(v, row_value(m, row, k))))
}

/// The literal conjunction of `row` with `NE` appended.
pub fn row_conj_ne(domain: &Domain, row: u64) -> Formula {
    let m = domain.len();
    let lits = domain.indices().iter().enumerate().map(|(k, &v)| Formula::literal(v, row_value(m, row, k)));
    Formula::big_and(lits.chain([Formula::Ne]))
}

/// `Θ_X`: true exactly on the subteams of `X`.
pub fn theta(x: &Team) -> Formula {
    Formula::big_tensor(x.rows().iter().map(|&r| literal_conj(x.domain(), r)))
}

/// `Θ*_X`: true exactly on `X`.
pub fn theta_star(x: &Team) -> Formula {
    Formula::big_tensor(x.rows().iter().map(|&r| row_conj_ne(x.domain(), r)))
}

/// `Θ**_X`: true exactly on `X` and `∅`.
pub fn theta_star_star(x: &Team) -> Formula {
    Formula::big_ne_or(x.rows().iter().map(|&r| literal_conj(x.domain(), r)))
}

/// `⋁_{X∈F} Θ*_X`, the disjunctive normal form of a property.
pub fn strong_disjunction(p: &TeamFamily) -> Formula {
    Formula::big_or(p.teams().iter().map(theta_star))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SynthesisTarget {
    /// Flat properties, by a classical formula.
    Cpl,
    /// Any property.
    PtPlus,
    /// Properties containing `∅`.
    Pt,
    /// Union closed properties containing `∅`.
    Pu,
    /// Union closed properties.
    PuPlus,
    /// Downward closed properties containing `∅`.
    Pd,
    /// Downward closed properties, the empty one included.
    PdPlus,
}

impl SynthesisTarget {
    pub const ALL: [SynthesisTarget; 7] = [
        SynthesisTarget::Cpl,
        SynthesisTarget::PtPlus,
        SynthesisTarget::Pt,
        SynthesisTarget::Pu,
        SynthesisTarget::PuPlus,
        SynthesisTarget::Pd,
        SynthesisTarget::PdPlus,
    ];

    pub fn fragment(self) -> Fragment {
        match self {
            SynthesisTarget::Cpl => Fragment::Cpl,
            SynthesisTarget::PtPlus => Fragment::PtPlus,
            SynthesisTarget::Pt => Fragment::Pt,
            SynthesisTarget::Pu => Fragment::Pu,
            SynthesisTarget::PuPlus => Fragment::PuPlus,
            SynthesisTarget::Pd => Fragment::Pd,
            SynthesisTarget::PdPlus => Fragment::PdPlus,
        }
    }

    /// The target whose normal form serves `frag`, if there is one.
    pub fn for_fragment(frag: Fragment) -> Option<SynthesisTarget> {
        Some(match frag {
            Fragment::Cpl => SynthesisTarget::Cpl,
            Fragment::PtPlus | Fragment::Fpt => SynthesisTarget::PtPlus,
            Fragment::Pt => SynthesisTarget::Pt,
            Fragment::Pu => SynthesisTarget::Pu,
            Fragment::PuPlus => SynthesisTarget::PuPlus,
            Fragment::Pd => SynthesisTarget::Pd,
            Fragment::PdPlus => SynthesisTarget::PdPlus,
            _ => return None,
        })
    }

    /// The first closure condition `p` fails for this target.
    pub fn violation(self, p: &Property) -> Option<Violation> {
        match self {
            SynthesisTarget::Cpl => p.flat_violation(),
            SynthesisTarget::PtPlus => None,
            SynthesisTarget::Pt => p.empty_violation(),
            SynthesisTarget::Pu => p.empty_violation().or_else(|| p.union_violation()),
            SynthesisTarget::PuPlus => p.union_violation(),
            SynthesisTarget::Pd => p.empty_violation().or_else(|| p.downward_violation()),
            SynthesisTarget::PdPlus => p.downward_violation(),
        }
    }
}

impl fmt::Display for SynthesisTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.fragment().name())
    }
}

impl FromStr for SynthesisTarget {
    type Err = Error;
    fn from_str(s: &str) -> Result<SynthesisTarget> {
        Fragment::from_name(s)
            .and_then(|f| SynthesisTarget::ALL.into_iter().find(|t| t.fragment() == f))
            .ok_or_else(|| Error::input(format!("unknown synthesis target `{s}`")))
    }
}

/// Members of `p` not strictly below another member.
fn maximal(p: &TeamFamily) -> Vec<&Team> {
    p.teams()
        .iter()
        .filter(|x| !p.teams().iter().any(|y| y != *x && x.is_subteam_of(y)))
        .collect()
}

/// A formula of the target's fragment defining exactly `p`.
pub fn synthesize(p: &TeamFamily, target: SynthesisTarget) -> Result<Formula> {
    if let Some(v) = target.violation(&Property::of_family(p)?) {
        return Err(Error::Closure(format!("not a {target} property: {v}")));
    }
    let d = p.domain();
    let pu = || Formula::big_tensor(p.teams().iter().map(theta_star_star));
    let pd = || Formula::big_or(maximal(p).into_iter().map(theta));
    Ok(match target {
        SynthesisTarget::Cpl => {
            let rows = p.teams().iter().filter(|t| t.len() == 1).map(|t| t.rows()[0]);
            theta(&Team::new(d.clone(), rows)?)
        }
        SynthesisTarget::PtPlus => strong_disjunction(p),
        SynthesisTarget::Pt => Formula::big_or(p.teams().iter().map(theta_star_star)),
        SynthesisTarget::Pu => pu(),
        SynthesisTarget::PuPlus if p.contains_empty() => pu(),
        SynthesisTarget::PuPlus => Formula::and(Formula::Ne, pu()),
        SynthesisTarget::Pd => pd(),
        SynthesisTarget::PdPlus if p.is_empty() => Formula::lin_imp(Formula::Top, Formula::Bot),
        SynthesisTarget::PdPlus => pd(),
    })
}

/// Recomputes `⟦f⟧` on the family's domain and compares it with the family.
pub fn certify(f: &Formula, p: &TeamFamily, limits: &Limits) -> Result<bool> {
    Ok(&satisfying_teams(f, p.domain(), EvalMode::Lax, limits)? == p)
}

/// The normal form of `f` in the language of `frag`, computed from `⟦f⟧` on `n`.
pub fn normal_form(f: &Formula, frag: Fragment, n: &Domain, limits: &Limits) -> Result<Formula> {
    let target = SynthesisTarget::for_fragment(frag)
        .ok_or_else(|| Error::Unsupported(format!("no normal form is defined for {frag}")))?;
    if !frag.admits(f) {
        return Err(Error::input(format!("`{f}` is not in the language of {frag}")));
    }
    let p = satisfying_teams(f, n, EvalMode::Lax, limits)?;
    let g = synthesize(&p, target)?;
    debug_assert!(frag.admits(&g));
    Ok(g)
}

/// `ind(I;J)` as the strong disjunction of its satisfying teams on `I ∪ J`.
pub fn indep_to_pt(atom: &Formula, limits: &Limits) -> Result<Formula> {
    let Formula::Indep(..) = atom else {
        return Err(Error::input(format!("`{atom}` is not an independence atom")));
    };
    let n = Domain::new(variables(atom));
    Ok(strong_disjunction(&satisfying_teams(atom, &n, EvalMode::Lax, limits)?))
}

/// `cind(z̄ ; x̄ ; ȳ)` as `⨂_{s∈2^I} (z̄^s ∧ ind(x̄ ; ȳ))`, patterns in binary counting order.
pub fn cond_indep_to_uncond(atom: &Formula, limits: &Limits) -> Result<Formula> {
    let Formula::CondIndep(zs, xs, ys) = atom else {
        return Err(Error::input(format!("`{atom}` is not a conditional independence atom")));
    };
    let mut cond: Vec<usize> = Vec::new();
    for z in zs {
        if !cond.contains(z) {
            cond.push(*z);
        }
    }
    limits.check_eval(cond.len())?;
    let a = cond.len();
    let ind = Formula::Indep(xs.clone(), ys.clone());
    Ok(Formula::big_tensor((0..1u64 << a).map(|s| {
        let lits = cond.iter().enumerate().map(|(k, &v)| Formula::literal(v, s >> (a - 1 - k) & 1 == 1));
        Formula::big_and(lits.chain([ind.clone()]))
    })))
}

/// `=(x̄, p) ↦ cind(x̄ ; p ; p)`.
pub fn dep_to_cond_indep(atom: &Formula) -> Result<Formula> {
    match atom {
        Formula::Dep(xs, y) => Ok(Formula::CondIndep(xs.clone(), vec![*y], vec![*y])),
        _ => Err(Error::input(format!("`{atom}` is not a dependence atom"))),
    }
}
