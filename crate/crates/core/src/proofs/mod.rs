//! Natural deduction for the team calculi: derivation trees, a rule checker
//! for `PT⁺`, `CPL⁺` and its atom extensions, derived-rule macros, and
//! generators that build derivations constructively.
//!
//! Assumption labels are positional: a node discharges the labels listed in
//! `discharge`, one per hypothesis-taking premise, in premise order.

mod build;
mod check;
mod gpp;
mod json;
mod macros;
mod nf;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::syntax::{Formula, Fragment, Path};
use crate::teams::Domain;

pub use check::{check, check_with, CheckOptions, CheckReport, Checked, NodeStatus, Reason, Rejection, Status};
pub use gpp::{gpp_derivation, gpp_derivations, gpp_system, GppAxiom};
pub use json::{from_json, parse_derivation, to_json};
pub use macros::{expand_all, expand_macro};
pub use nf::{derive_entailment, derive_normal_form, EntailmentProof, NormalFormProof};

pub type D = Arc<Derivation>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Assume,
    Em0,
    NeI,
    AndI,
    AndEL,
    AndER,
    BorIL,
    BorIR,
    BorE,
    TensorIMinus,
    TensorW,
    TensorEMinus,
    TensorSubMinus,
    ComTensor,
    AssTensor,
    BotI,
    BotE,
    ExFalsoPlus,
    ZeroCtr,
    ZeroI,
    DstrTensorBor,
    DstrNeAndTensor,
    DstrStarAndTensor,
    Se1,
    Se2,
    AtomI,
    SeAtom,
    ExFalsoMinus,
    DstrTensorAnd,
    DstrBorTensor,
    DstrTensorBorTensor,
    DstrStarAndTensorAnd,
    ZeroE,
    DstrAndBor,
    AndCom,
    BorCom,
    AndAss,
    BorAss,
}

const RULE_NAMES: [(Rule, &str); 38] = [
    (Rule::Assume, "Assume"),
    (Rule::Em0, "EM0"),
    (Rule::NeI, "NEI"),
    (Rule::AndI, "AndI"),
    (Rule::AndEL, "AndE_L"),
    (Rule::AndER, "AndE_R"),
    (Rule::BorIL, "BorI_L"),
    (Rule::BorIR, "BorI_R"),
    (Rule::BorE, "BorE"),
    (Rule::TensorIMinus, "TensorI_minus"),
    (Rule::TensorW, "TensorW"),
    (Rule::TensorEMinus, "TensorE_minus"),
    (Rule::TensorSubMinus, "TensorSub_minus"),
    (Rule::ComTensor, "ComTensor"),
    (Rule::AssTensor, "AssTensor"),
    (Rule::BotI, "BotI"),
    (Rule::BotE, "BotE"),
    (Rule::ExFalsoPlus, "ExFalsoPlus"),
    (Rule::ZeroCtr, "ZeroCtr"),
    (Rule::ZeroI, "ZeroI"),
    (Rule::DstrTensorBor, "DstrTensorBor"),
    (Rule::DstrNeAndTensor, "DstrNEandTensor"),
    (Rule::DstrStarAndTensor, "DstrStarAndTensor"),
    (Rule::Se1, "SE1"),
    (Rule::Se2, "SE2"),
    (Rule::AtomI, "AtomI"),
    (Rule::SeAtom, "SEAtom"),
    (Rule::ExFalsoMinus, "ExFalsoMinus"),
    (Rule::DstrTensorAnd, "DstrTensorAnd"),
    (Rule::DstrBorTensor, "DstrBorTensor"),
    (Rule::DstrTensorBorTensor, "DstrTensorBorTensor"),
    (Rule::DstrStarAndTensorAnd, "DstrStarAndTensorAnd"),
    (Rule::ZeroE, "ZeroE"),
    (Rule::DstrAndBor, "DstrAndBor"),
    (Rule::AndCom, "AndCom"),
    (Rule::BorCom, "BorCom"),
    (Rule::AndAss, "AndAss"),
    (Rule::BorAss, "BorAss"),
];

impl Rule {
    pub fn name(self) -> &'static str {
        RULE_NAMES.iter().find(|(r, _)| *r == self).map(|(_, n)| *n).expect("every rule is named")
    }

    pub fn from_name(s: &str) -> Option<Rule> {
        RULE_NAMES.iter().find(|(_, n)| *n == s).map(|(r, _)| *r)
    }

    pub fn all() -> impl Iterator<Item = Rule> {
        RULE_NAMES.iter().map(|(r, _)| *r)
    }

    /// Rules that are always shorthand for a fixed primitive derivation.
    /// `DstrStarAndTensor` is additionally a macro in `PT⁺`.
    pub fn is_derived(self) -> bool {
        self >= Rule::ExFalsoMinus
    }

    /// Derived rules whose expansion needs `∨`.
    fn needs_bor(self) -> bool {
        matches!(
            self,
            Rule::DstrBorTensor
                | Rule::DstrTensorBorTensor
                | Rule::ZeroE
                | Rule::DstrAndBor
                | Rule::BorCom
                | Rule::BorAss
                | Rule::DstrStarAndTensor
        )
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Rule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Atoms that may be added to `CPL⁺` together with their introduction and
/// strong elimination rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ExtraAtom {
    Indep,
    Incl,
    Dep,
    CondIndep,
}

impl ExtraAtom {
    pub const ALL: [ExtraAtom; 4] = [ExtraAtom::Indep, ExtraAtom::Incl, ExtraAtom::Dep, ExtraAtom::CondIndep];

    pub fn name(self) -> &'static str {
        match self {
            ExtraAtom::Indep => "ind",
            ExtraAtom::Incl => "inc",
            ExtraAtom::Dep => "dep",
            ExtraAtom::CondIndep => "cind",
        }
    }

    pub fn of(f: &Formula) -> Option<ExtraAtom> {
        match f {
            Formula::Indep(..) => Some(ExtraAtom::Indep),
            Formula::Incl(..) => Some(ExtraAtom::Incl),
            Formula::Dep(..) => Some(ExtraAtom::Dep),
            Formula::CondIndep(..) => Some(ExtraAtom::CondIndep),
            _ => None,
        }
    }

    fn from_name(s: &str) -> Option<ExtraAtom> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ind" | "indep" => Some(ExtraAtom::Indep),
            "inc" | "incl" => Some(ExtraAtom::Incl),
            "dep" => Some(ExtraAtom::Dep),
            "cind" | "condindep" => Some(ExtraAtom::CondIndep),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ProofSystem {
    PtPlus,
    CplPlus,
    CplPlusAtoms(BTreeSet<ExtraAtom>),
}

const PT_PLUS_PRIMITIVES: [Rule; 21] = [
    Rule::Em0,
    Rule::NeI,
    Rule::AndI,
    Rule::AndEL,
    Rule::AndER,
    Rule::BorIL,
    Rule::BorIR,
    Rule::BorE,
    Rule::TensorIMinus,
    Rule::TensorW,
    Rule::TensorEMinus,
    Rule::TensorSubMinus,
    Rule::ComTensor,
    Rule::AssTensor,
    Rule::BotI,
    Rule::BotE,
    Rule::ExFalsoPlus,
    Rule::ZeroCtr,
    Rule::ZeroI,
    Rule::DstrTensorBor,
    Rule::DstrNeAndTensor,
];

const CPL_PLUS_PRIMITIVES: [Rule; 18] = [
    Rule::Em0,
    Rule::AndI,
    Rule::AndEL,
    Rule::AndER,
    Rule::TensorIMinus,
    Rule::TensorW,
    Rule::TensorEMinus,
    Rule::TensorSubMinus,
    Rule::ComTensor,
    Rule::AssTensor,
    Rule::BotI,
    Rule::BotE,
    Rule::ExFalsoPlus,
    Rule::ZeroCtr,
    Rule::ZeroI,
    Rule::DstrStarAndTensor,
    Rule::Se1,
    Rule::Se2,
];

impl ProofSystem {
    pub fn name(&self) -> String {
        match self {
            ProofSystem::PtPlus => "PTplus".into(),
            ProofSystem::CplPlus => "CPLplus".into(),
            ProofSystem::CplPlusAtoms(s) => {
                format!("CPLplus+{}", s.iter().map(|a| a.name()).collect::<Vec<_>>().join(","))
            }
        }
    }

    pub fn with_atoms(atoms: impl IntoIterator<Item = ExtraAtom>) -> ProofSystem {
        ProofSystem::CplPlusAtoms(atoms.into_iter().collect())
    }

    fn atoms(&self) -> Option<&BTreeSet<ExtraAtom>> {
        match self {
            ProofSystem::CplPlusAtoms(s) => Some(s),
            _ => None,
        }
    }

    pub fn allows_atom(&self, a: ExtraAtom) -> bool {
        self.atoms().is_some_and(|s| s.contains(&a))
    }

    /// Rules checked directly against their defining shape.
    pub fn is_primitive(&self, r: Rule) -> bool {
        match self {
            ProofSystem::PtPlus => PT_PLUS_PRIMITIVES.contains(&r),
            ProofSystem::CplPlus | ProofSystem::CplPlusAtoms(_) => {
                CPL_PLUS_PRIMITIVES.contains(&r)
                    || (self.atoms().is_some() && matches!(r, Rule::AtomI | Rule::SeAtom))
            }
        }
    }

    /// Rules accepted through their expansion into primitives.
    pub fn has_macro(&self, r: Rule) -> bool {
        match self {
            ProofSystem::PtPlus => r.is_derived() || r == Rule::DstrStarAndTensor,
            _ => r.is_derived() && !r.needs_bor(),
        }
    }

    /// Whether `f` belongs to the object language of the system. `⊤` is
    /// admitted everywhere, as in fragment classification.
    pub fn admits(&self, f: &Formula) -> bool {
        match self {
            ProofSystem::PtPlus => Fragment::PtPlus.admits(f),
            ProofSystem::CplPlus => Fragment::CplPlus.admits(f),
            ProofSystem::CplPlusAtoms(s) => admits_extended(f, s),
        }
    }
}

fn admits_extended(f: &Formula, s: &BTreeSet<ExtraAtom>) -> bool {
    match f {
        Formula::Var(_) | Formula::NegVar(_) | Formula::Bot | Formula::Top | Formula::Ne => true,
        Formula::And(a, b) | Formula::Tensor(a, b) => admits_extended(a, s) && admits_extended(b, s),
        other => ExtraAtom::of(other).is_some_and(|a| s.contains(&a)),
    }
}

impl fmt::Display for ProofSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for ProofSystem {
    type Err = Error;
    /// `PTplus`, `CPLplus`, or `CPLplus+ind,inc,…`.
    fn from_str(s: &str) -> Result<ProofSystem> {
        let t = s.trim();
        let lower = t.to_ascii_lowercase();
        match lower.as_str() {
            "ptplus" | "pt+" => return Ok(ProofSystem::PtPlus),
            "cplplus" | "cpl+" => return Ok(ProofSystem::CplPlus),
            _ => {}
        }
        let rest = lower
            .strip_prefix("cplplus+")
            .or_else(|| lower.strip_prefix("cpl++"))
            .ok_or_else(|| Error::input(format!("unknown proof system {t:?}")))?;
        let atoms = rest
            .split(',')
            .map(|a| ExtraAtom::from_name(a).ok_or_else(|| Error::input(format!("unknown atom {a:?} in {t:?}"))))
            .collect::<Result<BTreeSet<_>>>()?;
        Ok(ProofSystem::CplPlusAtoms(atoms))
    }
}

/// Rule-specific data carried by a node.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Params {
    /// Index set `N` of `ZeroI`, `SE1`, `AtomI` and `SEAtom`.
    pub domain: Option<Domain>,
    /// Occurrence in the major premise for `SE1`, `SE2` and `SEAtom`.
    pub path: Option<Path>,
    /// 1-based symbol position, an alternative way to give `path`.
    pub position: Option<usize>,
    /// The team `Y` of `AtomI`, as bit rows over `domain`.
    pub team: Option<Vec<Vec<u8>>>,
    /// Number of tensor components split by `DstrNEandTensor`.
    pub arity: Option<usize>,
}

impl Params {
    pub fn is_empty(&self) -> bool {
        *self == Params::default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub rule: Rule,
    pub conclusion: Formula,
    pub premises: Vec<D>,
    pub discharge: Vec<String>,
    pub params: Params,
    /// Set on assumption leaves only.
    pub label: Option<String>,
}

impl Derivation {
    pub fn assume(label: impl Into<String>, f: Formula) -> D {
        Arc::new(Derivation {
            rule: Rule::Assume,
            conclusion: f,
            premises: Vec::new(),
            discharge: Vec::new(),
            params: Params::default(),
            label: Some(label.into()),
        })
    }

    pub fn node(rule: Rule, conclusion: Formula, premises: Vec<D>, discharge: Vec<String>, params: Params) -> D {
        Arc::new(Derivation { rule, conclusion, premises, discharge, params, label: None })
    }

    /// Number of nodes of the tree, counting shared subtrees once per use.
    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(|p| p.size()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.premises.iter().map(|p| p.depth()).max().unwrap_or(0)
    }

    /// Rules used anywhere in the tree.
    pub fn rules(&self) -> BTreeSet<Rule> {
        let mut out = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(d) = stack.pop() {
            out.insert(d.rule);
            stack.extend(d.premises.iter().map(|p| p.as_ref()));
        }
        out
    }
}
