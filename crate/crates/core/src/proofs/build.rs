//! Node constructors that compute conclusions from premises. Shapes are
//! trusted here: callers either construct them or validate them first.

use std::sync::Arc;

use super::{Derivation, Params, Rule, D};
use crate::syntax::{Formula, F};
use crate::teams::Domain;

/// Source of fresh assumption labels.
pub(crate) struct Gen {
    next: usize,
    prefix: &'static str,
}

/// Anything that can hand out fresh labels; generators embed a [`Gen`].
pub(crate) trait Fresh {
    fn gen(&mut self) -> &mut Gen;
}

impl Fresh for Gen {
    fn gen(&mut self) -> &mut Gen {
        self
    }
}

impl Gen {
    pub fn new(prefix: &'static str) -> Gen {
        Gen { next: 0, prefix }
    }

    pub fn hyp(&mut self, f: Formula) -> (String, D) {
        self.next += 1;
        let label = format!("{}{}", self.prefix, self.next);
        (label.clone(), Derivation::assume(label, f))
    }
}

pub(crate) fn and_parts(f: &Formula) -> Option<(&F, &F)> {
    match f {
        Formula::And(a, b) => Some((a, b)),
        _ => None,
    }
}

pub(crate) fn tensor_parts(f: &Formula) -> Option<(&F, &F)> {
    match f {
        Formula::Tensor(a, b) => Some((a, b)),
        _ => None,
    }
}

pub(crate) fn bor_parts(f: &Formula) -> Option<(&F, &F)> {
    match f {
        Formula::BoolOr(a, b) => Some((a, b)),
        _ => None,
    }
}

fn shape<'a>(p: Option<(&'a F, &'a F)>, rule: &str, f: &Formula) -> (&'a F, &'a F) {
    p.unwrap_or_else(|| panic!("{rule} applied to {f}"))
}

fn node(rule: Rule, conclusion: Formula, premises: Vec<D>) -> D {
    Derivation::node(rule, conclusion, premises, Vec::new(), Params::default())
}

fn bin(make: fn(F, F) -> Formula, a: &F, b: &F) -> Formula {
    make(a.clone(), b.clone())
}

pub(crate) fn em0(i: usize) -> D {
    node(Rule::Em0, Formula::tensor(Formula::var(i), Formula::neg_var(i)), Vec::new())
}

pub(crate) fn nei() -> D {
    node(Rule::NeI, Formula::bor(Formula::Bot, Formula::Ne), Vec::new())
}

pub(crate) fn and_i(a: D, b: D) -> D {
    let c = Formula::and(a.conclusion.clone(), b.conclusion.clone());
    node(Rule::AndI, c, vec![a, b])
}

pub(crate) fn and_e_l(d: D) -> D {
    let (a, _) = shape(and_parts(&d.conclusion), "AndE_L", &d.conclusion);
    let c = (**a).clone();
    node(Rule::AndEL, c, vec![d])
}

pub(crate) fn and_e_r(d: D) -> D {
    let (_, b) = shape(and_parts(&d.conclusion), "AndE_R", &d.conclusion);
    let c = (**b).clone();
    node(Rule::AndER, c, vec![d])
}

pub(crate) fn bor_i_l(d: D, right: Formula) -> D {
    let c = Formula::bor(d.conclusion.clone(), right);
    node(Rule::BorIL, c, vec![d])
}

pub(crate) fn bor_i_r(left: Formula, d: D) -> D {
    let c = Formula::bor(left, d.conclusion.clone());
    node(Rule::BorIR, c, vec![d])
}

/// `out`, derived under the fresh hypothesis leaf `hyp`, made to use it.
/// A subderivation that ignores its hypothesis would leave a vacuous
/// discharge, so the hypothesis is then threaded through ∧I/∧E. Labels are
/// fresh, so the leaf is used iff `out` holds another reference to it.
pub(crate) fn close(hyp: D, out: D) -> D {
    if Arc::strong_count(&hyp) == 1 {
        and_e_l(and_i(out, hyp))
    } else {
        out
    }
}

fn run_body<G>(g: &mut G, leaf: D, body: impl FnOnce(&mut G, D) -> D) -> D {
    let kept = leaf.clone();
    let out = body(g, leaf);
    close(kept, out)
}

type Body<'a, G> = Box<dyn FnOnce(&mut G, D) -> D + 'a>;

/// A rule with a major premise and hypothesis-discharging minor premises.
fn discharging<G: Fresh>(g: &mut G, rule: Rule, major: D, hyps: Vec<(Formula, Body<'_, G>)>, conclusion: Option<Formula>) -> D {
    let mut premises = vec![major];
    let mut labels = Vec::new();
    for (h, body) in hyps {
        let (l, leaf) = g.gen().hyp(h);
        premises.push(run_body(g, leaf, body));
        labels.push(l);
    }
    let c = conclusion.unwrap_or_else(|| premises[1].conclusion.clone());
    Derivation::node(rule, c, premises, labels, Params::default())
}

pub(crate) fn bor_e<'a, G: Fresh>(
    g: &mut G,
    d: D,
    left: impl FnOnce(&mut G, D) -> D + 'a,
    right: impl FnOnce(&mut G, D) -> D + 'a,
) -> D {
    let (a, b) = shape(bor_parts(&d.conclusion), "BorE", &d.conclusion);
    let (a, b) = ((**a).clone(), (**b).clone());
    discharging(g, Rule::BorE, d, vec![(a, Box::new(left)), (b, Box::new(right))], None)
}

pub(crate) fn tensor_i(d: D, psi: Formula) -> D {
    let c = Formula::tensor(d.conclusion.clone(), psi);
    node(Rule::TensorIMinus, c, vec![d])
}

pub(crate) fn tensor_w(d: D) -> D {
    let c = Formula::tensor(d.conclusion.clone(), d.conclusion.clone());
    node(Rule::TensorW, c, vec![d])
}

pub(crate) fn tensor_e<'a, G: Fresh>(
    g: &mut G,
    d: D,
    left: impl FnOnce(&mut G, D) -> D + 'a,
    right: impl FnOnce(&mut G, D) -> D + 'a,
) -> D {
    let (a, b) = shape(tensor_parts(&d.conclusion), "TensorE_minus", &d.conclusion);
    let (a, b) = ((**a).clone(), (**b).clone());
    discharging(g, Rule::TensorEMinus, d, vec![(a, Box::new(left)), (b, Box::new(right))], None)
}

/// `φ⊗ψ` and `[ψ] ⋯ χ` give `φ⊗χ`.
pub(crate) fn sub_right<'a, G: Fresh>(g: &mut G, d: D, body: impl FnOnce(&mut G, D) -> D + 'a) -> D {
    let (a, b) = shape(tensor_parts(&d.conclusion), "TensorSub_minus", &d.conclusion);
    let (a, b) = (a.clone(), (**b).clone());
    let (l, leaf) = g.gen().hyp(b);
    let e = run_body(g, leaf, body);
    let c = Formula::Tensor(a, Arc::new(e.conclusion.clone()));
    Derivation::node(Rule::TensorSubMinus, c, vec![d, e], vec![l], Params::default())
}

/// `φ⊗ψ` and `[φ] ⋯ χ` give `χ⊗ψ`, by commuting around a right substitution.
pub(crate) fn sub_left<'a, G: Fresh>(g: &mut G, d: D, body: impl FnOnce(&mut G, D) -> D + 'a) -> D {
    com(sub_right(g, com(d), body))
}

pub(crate) fn com(d: D) -> D {
    let (a, b) = shape(tensor_parts(&d.conclusion), "ComTensor", &d.conclusion);
    let c = bin(Formula::Tensor, b, a);
    node(Rule::ComTensor, c, vec![d])
}

/// `φ⊗(ψ⊗χ) ⊢ (φ⊗ψ)⊗χ`.
pub(crate) fn ass(d: D) -> D {
    let (a, bc) = shape(tensor_parts(&d.conclusion), "AssTensor", &d.conclusion);
    let (b, c) = shape(tensor_parts(bc), "AssTensor", &d.conclusion);
    let f = Formula::Tensor(Arc::new(bin(Formula::Tensor, a, b)), c.clone());
    node(Rule::AssTensor, f, vec![d])
}

/// `(φ⊗ψ)⊗χ ⊢ φ⊗(ψ⊗χ)` by three commutations and two associations.
pub(crate) fn ass_rev(d: D) -> D {
    com(ass(com(ass(com(d)))))
}

#[cfg(test)]
pub(crate) fn bot_i(d: D) -> D {
    node(Rule::BotI, Formula::Bot, vec![d])
}

/// `φ⊗⊥ ⊢ φ`.
pub(crate) fn bot_e(d: D) -> D {
    let (a, _) = shape(tensor_parts(&d.conclusion), "BotE", &d.conclusion);
    let c = (**a).clone();
    node(Rule::BotE, c, vec![d])
}

pub(crate) fn ex_falso(d: D, target: Formula) -> D {
    node(Rule::ExFalsoPlus, target, vec![d])
}

pub(crate) fn zero_ctr(d: D) -> D {
    node(Rule::ZeroCtr, Formula::falsum(), vec![d])
}

pub(crate) fn zero_i(d: D, domain: &Domain) -> D {
    let params = Params { domain: Some(domain.clone()), ..Params::default() };
    Derivation::node(Rule::ZeroI, Formula::falsum(), vec![d], Vec::new(), params)
}

/// `φ⊗(ψ∨χ) ⊢ (φ⊗ψ)∨(φ⊗χ)`.
pub(crate) fn dstr_tensor_bor(d: D) -> D {
    let (a, bc) = shape(tensor_parts(&d.conclusion), "DstrTensorBor", &d.conclusion);
    let (b, c) = shape(bor_parts(bc), "DstrTensorBor", &d.conclusion);
    let f = Formula::bor(bin(Formula::Tensor, a, b), bin(Formula::Tensor, a, c));
    node(Rule::DstrTensorBor, f, vec![d])
}

/// The first `arity` components of the left spine of a tensor.
pub(crate) fn tensor_spine(f: &Formula, arity: usize) -> Option<Vec<Formula>> {
    if arity == 0 {
        return None;
    }
    let mut out = Vec::with_capacity(arity);
    let mut cur = f;
    for _ in 1..arity {
        let (a, b) = tensor_parts(cur)?;
        out.push((**b).clone());
        cur = a;
    }
    out.push(cur.clone());
    out.reverse();
    Some(out)
}

/// `⋁_{∅≠J} ⨂_{i∈J} (NE∧φ_i)`, with `J` ordered by size and then by bit
/// mask, bit 0 standing for the first component.
pub(crate) fn dstr_ne_conclusion(parts: &[Formula]) -> Formula {
    let k = parts.len();
    let mut masks: Vec<u64> = (1..1u64 << k).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    Formula::big_or(masks.into_iter().map(|m| {
        Formula::big_tensor(
            (0..k).filter(|i| m >> i & 1 == 1).map(|i| Formula::and(Formula::Ne, parts[i].clone())),
        )
    }))
}

/// `NE∧(φ_1⊗⋯⊗φ_k)` split into its nonempty sub-tensors.
pub(crate) fn dstr_ne(d: D, arity: usize) -> D {
    let (_, t) = shape(and_parts(&d.conclusion), "DstrNEandTensor", &d.conclusion);
    let parts = tensor_spine(t, arity).unwrap_or_else(|| panic!("DstrNEandTensor arity {arity} on {t}"));
    let params = Params { arity: Some(arity), ..Params::default() };
    Derivation::node(Rule::DstrNeAndTensor, dstr_ne_conclusion(&parts), vec![d], Vec::new(), params)
}

/// `α∧(ψ⊗χ) ⊢ (α∧ψ)⊗(α∧χ)` for classical `α`.
pub(crate) fn dstr_star(d: D) -> D {
    let (a, t) = shape(and_parts(&d.conclusion), "DstrStarAndTensor", &d.conclusion);
    let (b, c) = shape(tensor_parts(t), "DstrStarAndTensor", &d.conclusion);
    let f = Formula::tensor(bin(Formula::And, a, b), bin(Formula::And, a, c));
    node(Rule::DstrStarAndTensor, f, vec![d])
}

/// Node of a derived rule with a single premise.
pub(crate) fn derived(rule: Rule, d: D, conclusion: Formula) -> D {
    node(rule, conclusion, vec![d])
}

/// Uses `d` through a hypothesis so that `body` may refer to it many times:
/// `φ ⊢ φ⊗⊥ ⊢ ⊥⊗φ`, substitute, then commute and drop `⊥`. The body may
/// only rely on classical assumptions besides its hypothesis.
pub(crate) fn cut<'a, G: Fresh>(g: &mut G, d: D, body: impl FnOnce(&mut G, D) -> D + 'a) -> D {
    let t = com(tensor_i(d, Formula::Bot));
    bot_e(com(sub_right(g, t, body)))
}

/// Like [`cut`], but passes assumption leaves through unchanged.
pub(crate) fn share<'a, G: Fresh>(g: &mut G, d: D, body: impl FnOnce(&mut G, D) -> D + 'a) -> D {
    if d.rule == Rule::Assume {
        body(g, d)
    } else {
        cut(g, d, body)
    }
}
