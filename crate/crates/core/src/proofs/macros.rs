//! Derived rules as fixed derivations over primitive rules.

use std::collections::HashMap;
use std::sync::Arc;

use super::build::*;
use super::check::Reason;
use super::{Derivation, ProofSystem, Rule, D};
use crate::error::{Error, Result};
use crate::syntax::Formula;

type Fail = (Reason, String);

fn mismatch(rule: Rule, expected: &str, got: &Formula) -> Fail {
    (Reason::Shape, format!("{rule} expects a premise of the form {expected}, got {got}"))
}

/// The expansion of a derived rule applied to `p`, checked against the
/// stated `conclusion`. `classical` decides the side condition on `α`.
pub(crate) fn expand(
    rule: Rule,
    p: D,
    conclusion: &Formula,
    classical: &dyn Fn(&Formula) -> bool,
    g: &mut Gen,
) -> std::result::Result<D, Fail> {
    use Formula::*;
    let pf = p.conclusion.clone();
    let out = match rule {
        Rule::ExFalsoMinus => {
            if pf != Bot {
                return Err(mismatch(rule, "⊥", &pf));
            }
            if conclusion.contains_ne() {
                return Err((Reason::ContainsNe, format!("{conclusion} contains NE")));
            }
            bot_e(com(tensor_i(p, conclusion.clone())))
        }
        Rule::DstrTensorAnd => {
            let Tensor(_, r) = &pf else { return Err(mismatch(rule, "φ⊗(ψ∧χ)", &pf)) };
            if and_parts(r).is_none() {
                return Err(mismatch(rule, "φ⊗(ψ∧χ)", &pf));
            }
            let left = sub_right(g, p.clone(), |_, h| and_e_l(h));
            let right = sub_right(g, p, |_, h| and_e_r(h));
            and_i(left, right)
        }
        Rule::DstrBorTensor => {
            let BoolOr(phi, r) = &pf else { return Err(mismatch(rule, "φ∨(ψ⊗χ)", &pf)) };
            let Some((psi, chi)) = tensor_parts(r) else { return Err(mismatch(rule, "φ∨(ψ⊗χ)", &pf)) };
            let (phi, psi, chi) = ((**phi).clone(), (**psi).clone(), (**chi).clone());
            let phi2 = phi.clone();
            bor_e(
                g,
                p,
                move |g, h| {
                    let t = sub_right(g, tensor_w(h), move |_, h| bor_i_l(h, chi));
                    sub_left(g, t, move |_, h| bor_i_l(h, psi))
                },
                move |g, h| {
                    let t = sub_right(g, h, |_, h| bor_i_r(phi.clone(), h));
                    sub_left(g, t, move |_, h| bor_i_r(phi2, h))
                },
            )
        }
        Rule::DstrTensorBorTensor => {
            let bad = || mismatch(rule, "(φ⊗ψ)∨(φ⊗χ)", &pf);
            let BoolOr(l, r) = &pf else { return Err(bad()) };
            let (Some((a, psi)), Some((b, chi))) = (tensor_parts(l), tensor_parts(r)) else { return Err(bad()) };
            if a != b {
                return Err(bad());
            }
            let (psi, chi) = ((**psi).clone(), (**chi).clone());
            bor_e(
                g,
                p,
                move |g, h| sub_right(g, h, move |_, h| bor_i_l(h, chi)),
                move |g, h| sub_right(g, h, move |_, h| bor_i_r(psi, h)),
            )
        }
        Rule::DstrStarAndTensorAnd => {
            let bad = || mismatch(rule, "(α∧ψ)⊗(α∧χ)", &pf);
            let Tensor(l, r) = &pf else { return Err(bad()) };
            let (Some((a, _)), Some((b, _))) = (and_parts(l), and_parts(r)) else { return Err(bad()) };
            if a != b {
                return Err(bad());
            }
            if !classical(a) {
                return Err((Reason::NotClassical, format!("{a} is not classical")));
            }
            let alpha = tensor_e(g, p.clone(), |_, h| and_e_l(h), |_, h| and_e_l(h));
            let t = sub_right(g, p, |_, h| and_e_r(h));
            let t = sub_left(g, t, |_, h| and_e_r(h));
            and_i(alpha, t)
        }
        Rule::DstrStarAndTensor => {
            let bad = || mismatch(rule, "α∧(ψ⊗χ)", &pf);
            let And(a, t) = &pf else { return Err(bad()) };
            if tensor_parts(t).is_none() {
                return Err(bad());
            }
            if !classical(a) {
                return Err((Reason::NotClassical, format!("{a} is not classical")));
            }
            // The copy of α used inside the substitutions must be a classical
            // hypothesis, so it is introduced by a case split on α∨α.
            let twice = bor_i_l(and_e_l(p.clone()), (**a).clone());
            let branch = |g: &mut Gen, hyp: D, p: D| {
                let h2 = hyp.clone();
                let t = sub_right(g, and_e_r(p), move |_, h| and_i(h2, h));
                sub_left(g, t, move |_, h| and_i(hyp, h))
            };
            let p2 = p.clone();
            bor_e(g, twice, move |g, h| branch(g, h, p), move |g, h| branch(g, h, p2))
        }
        Rule::ZeroE => {
            let bad = || mismatch(rule, "(⊥∧NE)∨χ", &pf);
            let BoolOr(l, r) = &pf else { return Err(bad()) };
            if **l != Formula::falsum() {
                return Err(bad());
            }
            let chi = (**r).clone();
            bor_e(g, p, move |_, h| ex_falso(h, chi), |_, h| h)
        }
        Rule::DstrAndBor => {
            let bad = || mismatch(rule, "φ∧(ψ∨χ)", &pf);
            let And(phi, r) = &pf else { return Err(bad()) };
            let Some((psi, chi)) = bor_parts(r) else { return Err(bad()) };
            let left_alt = Formula::And(phi.clone(), chi.clone());
            let right_alt = Formula::And(phi.clone(), psi.clone());
            let (p1, p2) = (p.clone(), p.clone());
            bor_e(
                g,
                and_e_r(p),
                move |_, h| bor_i_l(and_i(and_e_l(p1), h), left_alt),
                move |_, h| bor_i_r(right_alt, and_i(and_e_l(p2), h)),
            )
        }
        Rule::AndCom => {
            if and_parts(&pf).is_none() {
                return Err(mismatch(rule, "φ∧ψ", &pf));
            }
            and_i(and_e_r(p.clone()), and_e_l(p))
        }
        Rule::BorCom => {
            let Some((a, b)) = bor_parts(&pf) else { return Err(mismatch(rule, "φ∨ψ", &pf)) };
            let (a, b) = ((**a).clone(), (**b).clone());
            bor_e(g, p, move |_, h| bor_i_r(b, h), move |_, h| bor_i_l(h, a))
        }
        Rule::AndAss => {
            let bad = || mismatch(rule, "φ∧(ψ∧χ)", &pf);
            let Some((_, r)) = and_parts(&pf) else { return Err(bad()) };
            if and_parts(r).is_none() {
                return Err(bad());
            }
            let left = and_i(and_e_l(p.clone()), and_e_l(and_e_r(p.clone())));
            and_i(left, and_e_r(and_e_r(p)))
        }
        Rule::BorAss => {
            let bad = || mismatch(rule, "φ∨(ψ∨χ)", &pf);
            let Some((a, r)) = bor_parts(&pf) else { return Err(bad()) };
            let Some((b, c)) = bor_parts(r) else { return Err(bad()) };
            let (a, b, c) = ((**a).clone(), (**b).clone(), (**c).clone());
            let ab = Formula::bor(a.clone(), b.clone());
            let (b2, c2, a2) = (b.clone(), c.clone(), a.clone());
            bor_e(
                g,
                p,
                move |_, h| bor_i_l(bor_i_l(h, b2), c2),
                move |g, h| {
                    let c3 = c.clone();
                    bor_e(g, h, move |_, h| bor_i_l(bor_i_r(a2, h), c3), move |_, h| bor_i_r(ab, h))
                },
            )
        }
        other => return Err((Reason::Shape, format!("{other} is not a derived rule"))),
    };
    if &out.conclusion != conclusion {
        return Err((
            Reason::Shape,
            format!("{rule} applied to {pf} yields {}, not {conclusion}", out.conclusion),
        ));
    }
    Ok(out)
}

/// Instantiates the derived `rule` with premise derivations `inputs`.
pub fn expand_macro(rule: Rule, inputs: Vec<D>, conclusion: &Formula, sys: &ProofSystem) -> Result<D> {
    if !sys.has_macro(rule) {
        return Err(Error::Unsupported(format!("{rule} is not available as a macro in {sys}")));
    }
    let [p] = <[D; 1]>::try_from(inputs)
        .map_err(|v| Error::input(format!("{rule} takes one premise, got {}", v.len())))?;
    let mut g = Gen::new("x");
    expand(rule, p, conclusion, &|f| f.is_classical(), &mut g).map_err(|(_, m)| Error::input(m))
}

/// Replaces every macro node by its expansion, bottom-up, so that only
/// primitive rules of `sys` remain.
pub fn expand_all(d: &D, sys: &ProofSystem) -> Result<D> {
    fn go(d: &D, sys: &ProofSystem, memo: &mut HashMap<*const Derivation, D>) -> Result<D> {
        if let Some(e) = memo.get(&Arc::as_ptr(d)) {
            return Ok(e.clone());
        }
        let premises = d.premises.iter().map(|p| go(p, sys, memo)).collect::<Result<Vec<_>>>()?;
        let out = if sys.has_macro(d.rule) && !sys.is_primitive(d.rule) {
            // Expansions are built from primitive rules only.
            expand_macro(d.rule, premises, &d.conclusion, sys)?
        } else {
            Arc::new(Derivation { premises, ..(**d).clone() })
        };
        memo.insert(Arc::as_ptr(d), out.clone());
        Ok(out)
    }
    go(d, sys, &mut HashMap::new())
}
