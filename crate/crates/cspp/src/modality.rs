//! Transition modalities: how one transition step accumulates weight.
//!
//! A transition is a payload plus an ordered list of successor slots. The
//! modality maps the payload and the per-slot weights to a single weight. The
//! modality is evaluated positionally: a transition `(a, y, y)` has support
//! `{y}` but two slot values.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::domain::{DomainError, WeightDomain, WeightValue};
use crate::StateId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModalityError {
    #[error("arity mismatch: expected {expected} slot(s), got {got}")]
    ArityMismatch { expected: String, got: usize },
    #[error("payload does not match the {modality} schema: {reason}")]
    PayloadSchema { modality: String, reason: String },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("slot sets for the distribution law must be non-empty")]
    EmptySlotSet,
}

/// Instance-specific transition data, aligned with the slot list by index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Payload {
    Empty,
    Weight(WeightValue),
    WeightRate {
        weight: WeightValue,
        rate: WeightValue,
    },
    Capacity(WeightValue),
    Prob(WeightValue),
    Weights(Vec<WeightValue>),
    Probs(Vec<WeightValue>),
}

impl Payload {
    pub fn scalars(&self) -> Vec<&WeightValue> {
        match self {
            Payload::Empty => vec![],
            Payload::Weight(w) | Payload::Capacity(w) | Payload::Prob(w) => vec![w],
            Payload::WeightRate { weight, rate } => vec![weight, rate],
            Payload::Weights(ws) | Payload::Probs(ws) => ws.iter().collect(),
        }
    }
}

/// One element `t` of `G X`: payload plus ordered successor slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub payload: Payload,
    pub slots: Vec<StateId>,
}

impl Transition {
    pub fn new(payload: Payload, slots: Vec<StateId>) -> Self {
        Transition { payload, slots }
    }

    /// The finite support: the set of distinct slot states.
    pub fn support(&self) -> BTreeSet<StateId> {
        self.slots.iter().copied().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModalityId {
    Identity,
    Successor,
    Add,
    Rate,
    Cap,
    Mult,
    TreeAdd,
    PairJoin,
    SetJoin,
    GameMax,
    DiscountedGame,
    Expectation,
}

impl fmt::Display for ModalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ModalityId::Identity => "identity",
            ModalityId::Successor => "successor",
            ModalityId::Add => "add",
            ModalityId::Rate => "rate",
            ModalityId::Cap => "cap",
            ModalityId::Mult => "mult",
            ModalityId::TreeAdd => "tree-add",
            ModalityId::PairJoin => "pair-join",
            ModalityId::SetJoin => "set-join",
            ModalityId::GameMax => "game-max",
            ModalityId::DiscountedGame => "discounted-game",
            ModalityId::Expectation => "expectation",
        };
        f.write_str(name)
    }
}

/// How many slots a transition of this modality carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArityPolicy {
    Fixed(usize),
    /// Slot count equals the payload vector length; at least `min`.
    FromPayload {
        min: usize,
    },
    /// Any slot count of at least `min`.
    Variable {
        min: usize,
    },
}

/// The algebra `σ: GΩ → Ω` as "payload + slot values → weight".
#[derive(Debug, Clone, PartialEq)]
pub struct Modality {
    pub id: ModalityId,
    pub arity: ArityPolicy,
    /// Discount rate `r` for the discounted game family.
    pub discount: Option<WeightValue>,
}

impl Modality {
    pub fn new(id: ModalityId) -> Modality {
        let arity = match id {
            ModalityId::Identity
            | ModalityId::Successor
            | ModalityId::Add
            | ModalityId::Rate
            | ModalityId::Cap
            | ModalityId::Mult => ArityPolicy::Fixed(1),
            ModalityId::TreeAdd => ArityPolicy::Fixed(2),
            ModalityId::PairJoin => ArityPolicy::Fixed(2),
            ModalityId::SetJoin => ArityPolicy::Variable { min: 1 },
            ModalityId::GameMax | ModalityId::DiscountedGame | ModalityId::Expectation => {
                ArityPolicy::FromPayload { min: 1 }
            }
        };
        Modality {
            id,
            arity,
            discount: None,
        }
    }

    pub fn tree_add(arity: usize) -> Modality {
        Modality {
            id: ModalityId::TreeAdd,
            arity: ArityPolicy::Fixed(arity),
            discount: None,
        }
    }

    pub fn discounted_game(rate: WeightValue) -> Modality {
        Modality {
            id: ModalityId::DiscountedGame,
            arity: ArityPolicy::FromPayload { min: 1 },
            discount: Some(rate),
        }
    }

    /// Checks payload shape and slot count against the schema. Value-level
    /// range checks (weight signs, probability sums) belong to the instance.
    pub fn validate_payload(
        &self,
        payload: &Payload,
        slot_count: usize,
    ) -> Result<(), ModalityError> {
        let schema_err = |reason: &str| ModalityError::PayloadSchema {
            modality: self.id.to_string(),
            reason: reason.to_string(),
        };
        let shape_ok = match self.id {
            ModalityId::Identity
            | ModalityId::Successor
            | ModalityId::PairJoin
            | ModalityId::SetJoin => {
                matches!(payload, Payload::Empty)
            }
            ModalityId::Add | ModalityId::TreeAdd => matches!(payload, Payload::Weight(_)),
            ModalityId::Rate => matches!(payload, Payload::WeightRate { .. }),
            ModalityId::Cap => matches!(payload, Payload::Capacity(_)),
            ModalityId::Mult => matches!(payload, Payload::Prob(_)),
            ModalityId::GameMax | ModalityId::DiscountedGame => {
                matches!(payload, Payload::Weights(_))
            }
            ModalityId::Expectation => matches!(payload, Payload::Probs(_)),
        };
        if !shape_ok {
            return Err(schema_err("wrong payload variant"));
        }
        for scalar in payload.scalars() {
            if !scalar.is_finite() {
                return Err(schema_err("payload scalars must be finite"));
            }
        }
        match self.arity {
            ArityPolicy::Fixed(n) => {
                if slot_count != n {
                    return Err(ModalityError::ArityMismatch {
                        expected: n.to_string(),
                        got: slot_count,
                    });
                }
            }
            ArityPolicy::FromPayload { min } => {
                let len = payload.scalars().len();
                if slot_count != len {
                    return Err(ModalityError::ArityMismatch {
                        expected: format!("{len} (payload length)"),
                        got: slot_count,
                    });
                }
                if slot_count < min {
                    return Err(ModalityError::ArityMismatch {
                        expected: format!(">= {min}"),
                        got: slot_count,
                    });
                }
            }
            ArityPolicy::Variable { min } => {
                if slot_count < min {
                    return Err(ModalityError::ArityMismatch {
                        expected: format!(">= {min}"),
                        got: slot_count,
                    });
                }
            }
        }
        Ok(())
    }

    /// Evaluates `σ` on one payload and its slot values.
    pub fn apply(
        &self,
        dom: &WeightDomain,
        payload: &Payload,
        slot_values: &[WeightValue],
    ) -> Result<WeightValue, ModalityError> {
        self.validate_payload(payload, slot_values.len())?;
        for v in slot_values {
            dom.check_carrier(v)?;
        }
        Ok(self.apply_raw(dom, payload, slot_values))
    }

    /// `apply` without validation; solvers call this on validated graphs.
    pub fn apply_raw(
        &self,
        dom: &WeightDomain,
        payload: &Payload,
        slot_values: &[WeightValue],
    ) -> WeightValue {
        match (self.id, payload) {
            (ModalityId::Identity, Payload::Empty) => slot_values[0].clone(),
            (ModalityId::Successor, Payload::Empty) => {
                let one = match &slot_values[0] {
                    WeightValue::Float(_) => WeightValue::float(1.0),
                    _ => WeightValue::int(1),
                };
                one.add(&slot_values[0])
            }
            (ModalityId::Add, Payload::Weight(w)) => w.add(&slot_values[0]),
            (ModalityId::Rate, Payload::WeightRate { weight, rate }) => {
                weight.add(&rate.mul_absorbing_inf(&slot_values[0]))
            }
            (ModalityId::Cap, Payload::Capacity(c)) => c.numeric_min(&slot_values[0]),
            (ModalityId::Mult, Payload::Prob(p)) => p.mul_finite(&slot_values[0]),
            (ModalityId::TreeAdd, Payload::Weight(w)) => {
                slot_values.iter().fold(w.clone(), |acc, b| acc.add(b))
            }
            (ModalityId::PairJoin, Payload::Empty) | (ModalityId::SetJoin, Payload::Empty) => {
                let mut acc = slot_values[0].clone();
                for b in &slot_values[1..] {
                    acc = join2(dom, &acc, b);
                }
                acc
            }
            (ModalityId::GameMax, Payload::Weights(ws)) => {
                let mut acc: Option<WeightValue> = None;
                for (a, b) in ws.iter().zip(slot_values) {
                    let v = a.add(b);
                    acc = Some(match acc {
                        None => v,
                        Some(cur) => join2(dom, &cur, &v),
                    });
                }
                acc.expect("non-empty weights")
            }
            (ModalityId::DiscountedGame, Payload::Weights(ws)) => {
                let r = self.discount.as_ref().expect("discount rate set");
                let mut acc: Option<WeightValue> = None;
                for (a, b) in ws.iter().zip(slot_values) {
                    let v = a.add(&r.mul_absorbing_inf(b));
                    acc = Some(match acc {
                        None => v,
                        Some(cur) => join2(dom, &cur, &v),
                    });
                }
                acc.expect("non-empty weights")
            }
            (ModalityId::Expectation, Payload::Probs(ps)) => {
                let mut acc: Option<WeightValue> = None;
                for (p, b) in ps.iter().zip(slot_values) {
                    let v = p.mul_finite(b);
                    acc = Some(match acc {
                        None => v,
                        Some(cur) => cur.add(&v),
                    });
                }
                acc.expect("non-empty probs")
            }
            _ => unreachable!("payload validated against schema"),
        }
    }
}

/// Join (`⊔`): the `⊑`-larger of the two.
fn join2(dom: &WeightDomain, a: &WeightValue, b: &WeightValue) -> WeightValue {
    match dom.cmp_raw(a, b) {
        Ordering::Less => b.clone(),
        _ => a.clone(),
    }
}

/// Result of checking `b ⊑ σ(t)` for every slot value `b` of one application.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExpansiveCheck {
    Ok,
    Witness(ExpansivenessWitness),
}

/// A failed slot of one `σ` application: `slot_value ⊐ sigma_value`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansivenessWitness {
    pub payload: Payload,
    pub slot_values: Vec<WeightValue>,
    pub offending_slot: usize,
    pub slot_value: WeightValue,
    pub sigma_value: WeightValue,
}

/// Checks expansiveness of a single application: every slot value must be
/// `⊑` the result. The first offending slot is reported.
pub fn check_expansive_on(
    modality: &Modality,
    dom: &WeightDomain,
    payload: &Payload,
    slot_values: &[WeightValue],
) -> Result<ExpansiveCheck, ModalityError> {
    let sigma = modality.apply(dom, payload, slot_values)?;
    for (i, b) in slot_values.iter().enumerate() {
        if !dom.le(b, &sigma) {
            return Ok(ExpansiveCheck::Witness(ExpansivenessWitness {
                payload: payload.clone(),
                slot_values: slot_values.to_vec(),
                offending_slot: i,
                slot_value: b.clone(),
                sigma_value: sigma,
            }));
        }
    }
    Ok(ExpansiveCheck::Ok)
}

/// Slot-independent infimum distribution:
/// `σ(a, ⊓B_0, …, ⊓B_{k-1}) = ⊓ σ(a, b_0, …, b_{k-1})` over the product of
/// the `B_i`. This is the exact law the run-tree argument folds one step with.
pub fn check_inf_distribution(
    modality: &Modality,
    dom: &WeightDomain,
    payload: &Payload,
    slot_sets: &[Vec<WeightValue>],
) -> Result<bool, ModalityError> {
    if slot_sets.iter().any(|s| s.is_empty()) {
        return Err(ModalityError::EmptySlotSet);
    }
    let mut meets = Vec::with_capacity(slot_sets.len());
    for set in slot_sets {
        meets.push(dom.meet(set.iter())?);
    }
    let lhs = modality.apply(dom, payload, &meets)?;

    let mut rhs: Option<WeightValue> = None;
    let mut tuple: Vec<WeightValue> = slot_sets.iter().map(|s| s[0].clone()).collect();
    let mut idx = vec![0usize; slot_sets.len()];
    loop {
        let v = modality.apply(dom, payload, &tuple)?;
        rhs = Some(match rhs {
            None => v,
            Some(cur) => dom.meet2(&cur, &v),
        });
        // advance the mixed-radix counter over the product
        let mut pos = 0;
        loop {
            if pos == slot_sets.len() {
                return Ok(lhs == rhs.expect("at least one tuple"));
            }
            idx[pos] += 1;
            if idx[pos] < slot_sets[pos].len() {
                tuple[pos] = slot_sets[pos][idx[pos]].clone();
                break;
            }
            idx[pos] = 0;
            tuple[pos] = slot_sets[pos][0].clone();
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainId;

    fn nonneg() -> WeightDomain {
        WeightDomain::builtin(DomainId::NonnegRealsAsc)
    }

    #[test]
    fn apply_add() {
        let m = Modality::new(ModalityId::Add);
        let v = m
            .apply(
                &nonneg(),
                &Payload::Weight(WeightValue::int(2)),
                &[WeightValue::int(1)],
            )
            .unwrap();
        assert_eq!(v, WeightValue::int(3));
    }

    #[test]
    fn apply_tree_add() {
        let m = Modality::tree_add(2);
        let v = m
            .apply(
                &nonneg(),
                &Payload::Weight(WeightValue::int(3)),
                &[WeightValue::int(0), WeightValue::int(0)],
            )
            .unwrap();
        assert_eq!(v, WeightValue::int(3));
    }

    #[test]
    fn apply_expectation() {
        let dom = WeightDomain::builtin(DomainId::UnitIntervalDesc);
        let m = Modality::new(ModalityId::Expectation);
        let payload = Payload::Probs(vec![WeightValue::ratio(1, 2), WeightValue::ratio(1, 2)]);
        let v = m
            .apply(&dom, &payload, &[WeightValue::int(0), WeightValue::int(1)])
            .unwrap();
        assert_eq!(v, WeightValue::ratio(1, 2));
    }

    #[test]
    fn apply_rate_with_zero_rate_absorbs_infinity() {
        let m = Modality::new(ModalityId::Rate);
        let payload = Payload::WeightRate {
            weight: WeightValue::int(5),
            rate: WeightValue::int(0),
        };
        let v = m
            .apply(&nonneg(), &payload, &[WeightValue::PlusInf])
            .unwrap();
        assert_eq!(v, WeightValue::PlusInf);
        let v = m
            .apply(&nonneg(), &payload, &[WeightValue::int(7)])
            .unwrap();
        assert_eq!(v, WeightValue::int(5));
    }

    #[test]
    fn arity_and_schema_errors() {
        let m = Modality::new(ModalityId::Add);
        let err = m.apply(
            &nonneg(),
            &Payload::Weight(WeightValue::int(2)),
            &[WeightValue::int(1), WeightValue::int(2)],
        );
        assert!(matches!(err, Err(ModalityError::ArityMismatch { .. })));
        let err = m.apply(&nonneg(), &Payload::Empty, &[WeightValue::int(1)]);
        assert!(matches!(err, Err(ModalityError::PayloadSchema { .. })));
        let err = m.apply(
            &nonneg(),
            &Payload::Weight(WeightValue::int(2)),
            &[WeightValue::MinusInf],
        );
        assert!(matches!(err, Err(ModalityError::Domain(_))));
    }

    #[test]
    fn support_collapses_duplicates() {
        let t = Transition::new(Payload::Empty, vec![0, 3]);
        assert_eq!(t.support().into_iter().collect::<Vec<_>>(), vec![0, 3]);
        let t = Transition::new(Payload::Empty, vec![2, 2]);
        assert_eq!(t.support().into_iter().collect::<Vec<_>>(), vec![2]);
        let t = Transition::new(Payload::Weight(WeightValue::int(1)), vec![]);
        assert!(t.support().is_empty());
    }

    #[test]
    fn inf_distribution_add_unary() {
        let m = Modality::new(ModalityId::Add);
        let sets = vec![vec![WeightValue::int(1), WeightValue::int(4)]];
        let ok =
            check_inf_distribution(&m, &nonneg(), &Payload::Weight(WeightValue::int(2)), &sets)
                .unwrap();
        assert!(ok);
    }

    #[test]
    fn inf_distribution_expectation_product_form() {
        // Descending order makes the meet the numeric maximum on both sides:
        // lhs = sigma(1, 1) = 1 and rhs = max{0, 1/2, 1/2, 1} = 1.
        let dom = WeightDomain::builtin(DomainId::UnitIntervalDesc);
        let m = Modality::new(ModalityId::Expectation);
        let payload = Payload::Probs(vec![WeightValue::ratio(1, 2), WeightValue::ratio(1, 2)]);
        let b = vec![WeightValue::int(0), WeightValue::int(1)];
        let sets = vec![b.clone(), b];
        let lhs = m
            .apply(&dom, &payload, &[WeightValue::int(1), WeightValue::int(1)])
            .unwrap();
        assert_eq!(lhs, WeightValue::int(1));
        assert!(check_inf_distribution(&m, &dom, &payload, &sets).unwrap());
    }

    #[test]
    fn inf_distribution_singletons() {
        let dom = WeightDomain::builtin(DomainId::ZeroInf);
        let m = Modality::new(ModalityId::SetJoin);
        let sets = vec![vec![WeightValue::int(0)], vec![WeightValue::PlusInf]];
        assert!(check_inf_distribution(&m, &dom, &Payload::Empty, &sets).unwrap());
    }

    #[test]
    fn expansiveness_single_applications() {
        let signed = WeightDomain::builtin(DomainId::SignedReals);
        let m = Modality::new(ModalityId::Add);
        let res = check_expansive_on(
            &m,
            &signed,
            &Payload::Weight(WeightValue::int(-1)),
            &[WeightValue::int(1)],
        )
        .unwrap();
        match res {
            ExpansiveCheck::Witness(w) => {
                assert_eq!(w.offending_slot, 0);
                assert_eq!(w.sigma_value, WeightValue::int(0));
            }
            ExpansiveCheck::Ok => panic!("expected a witness"),
        }

        let m = Modality::new(ModalityId::Rate);
        let payload = Payload::WeightRate {
            weight: WeightValue::int(0),
            rate: WeightValue::int(0),
        };
        let res = check_expansive_on(&m, &nonneg(), &payload, &[WeightValue::int(1)]).unwrap();
        assert!(matches!(res, ExpansiveCheck::Witness(w) if w.sigma_value == WeightValue::int(0)));

        let m = Modality::new(ModalityId::Add);
        let res = check_expansive_on(
            &m,
            &nonneg(),
            &Payload::Weight(WeightValue::int(1)),
            &[WeightValue::int(3)],
        )
        .unwrap();
        assert_eq!(res, ExpansiveCheck::Ok);
    }

    #[test]
    fn all_top_slots_give_top() {
        let cases: Vec<(Modality, WeightDomain, Payload)> = vec![
            (
                Modality::new(ModalityId::Identity),
                WeightDomain::builtin(DomainId::ZeroInf),
                Payload::Empty,
            ),
            (
                Modality::new(ModalityId::Successor),
                WeightDomain::builtin(DomainId::NaturalsAsc),
                Payload::Empty,
            ),
            (
                Modality::new(ModalityId::Add),
                nonneg(),
                Payload::Weight(WeightValue::int(2)),
            ),
            (
                Modality::new(ModalityId::Rate),
                nonneg(),
                Payload::WeightRate {
                    weight: WeightValue::int(2),
                    rate: WeightValue::int(0),
                },
            ),
            (
                Modality::new(ModalityId::Cap),
                WeightDomain::builtin(DomainId::NonnegRealsDesc),
                Payload::Capacity(WeightValue::int(4)),
            ),
            (
                Modality::new(ModalityId::Mult),
                WeightDomain::builtin(DomainId::UnitIntervalDesc),
                Payload::Prob(WeightValue::ratio(1, 2)),
            ),
            (
                Modality::tree_add(2),
                nonneg(),
                Payload::Weight(WeightValue::int(3)),
            ),
            (
                Modality::new(ModalityId::PairJoin),
                WeightDomain::builtin(DomainId::ZeroInf),
                Payload::Empty,
            ),
            (
                Modality::new(ModalityId::SetJoin),
                WeightDomain::builtin(DomainId::ZeroInf),
                Payload::Empty,
            ),
            (
                Modality::new(ModalityId::GameMax),
                nonneg(),
                Payload::Weights(vec![WeightValue::int(1), WeightValue::int(2)]),
            ),
            (
                Modality::discounted_game(WeightValue::ratio(1, 2)),
                nonneg(),
                Payload::Weights(vec![WeightValue::int(1)]),
            ),
            (
                Modality::new(ModalityId::Expectation),
                WeightDomain::builtin(DomainId::UnitIntervalDesc),
                Payload::Probs(vec![WeightValue::ratio(1, 3), WeightValue::ratio(2, 3)]),
            ),
        ];
        for (m, dom, payload) in cases {
            let k = match m.arity {
                ArityPolicy::Fixed(n) => n,
                ArityPolicy::FromPayload { .. } => payload.scalars().len(),
                ArityPolicy::Variable { .. } => 2,
            };
            let tops = vec![dom.top.clone(); k];
            let v = m.apply(&dom, &payload, &tops).unwrap();
            assert_eq!(v, dom.top, "{} must map all-top slots to top", m.id);
        }
    }
}
