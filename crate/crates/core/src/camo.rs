//! Gate selection, CAMO substitution and the candidate-function space.
//!
//! A [`CamoAssignment`] lists one choice per CAMO cell, ordered by ascending
//! gate id. As an integer pattern, bit `i` set means cell `i` resolves to OR.

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::{GateId, GateKind, Netlist, NetlistError};
use crate::signature::{signature_over, InputSpace, SignatureError, SignatureMode, TruthSignature};
use crate::synth::{check_domino_compatible, flavor_for};

pub const PLAN_SCHEMA: &str = "camoforge-plan-v1";
/// Largest CAMO count for full candidate enumeration.
pub const ENUMERATION_CAP: usize = 16;

#[derive(Debug, Error, PartialEq)]
pub enum CamoError {
    #[error("fraction {0} is outside [0, 1]")]
    Fraction(f64),
    #[error("netlist is not domino-compatible ({0} violations)")]
    NotDomino(usize),
    #[error("{0} is not an AND2/OR2 gate")]
    NotSelectable(GateId),
    #[error("{0} does not exist")]
    UnknownGate(GateId),
    #[error("plan gate ids must be strictly ascending")]
    UnsortedPlan,
    #[error("true assignment disagrees with the kind of {0}")]
    TruthMismatch(GateId),
    #[error("assignment has {found} choices for {expected} CAMO cells")]
    AssignmentLength { expected: usize, found: usize },
    #[error("{k} CAMO cells exceed the enumeration cap of {cap}; use the attack workflow")]
    EnumerationCap { k: usize, cap: usize },
    #[error("unsupported plan schema `{0}`")]
    Schema(String),
    #[error("malformed plan JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Signature(#[from] SignatureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CamoChoice {
    And,
    Or,
}

impl CamoChoice {
    pub fn kind(self) -> GateKind {
        match self {
            CamoChoice::And => GateKind::And2,
            CamoChoice::Or => GateKind::Or2,
        }
    }

    pub fn from_kind(kind: GateKind) -> Option<Self> {
        match kind {
            GateKind::And2 => Some(CamoChoice::And),
            GateKind::Or2 => Some(CamoChoice::Or),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CamoAssignment(pub Vec<CamoChoice>);

impl CamoAssignment {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn all(k: usize, choice: CamoChoice) -> Self {
        CamoAssignment(vec![choice; k])
    }

    /// Decodes a bit pattern (bit `i` = OR for cell `i`). `k` must be <= 64.
    pub fn from_pattern(k: usize, pattern: u64) -> Self {
        CamoAssignment(
            (0..k)
                .map(|i| {
                    if (pattern >> i) & 1 == 1 {
                        CamoChoice::Or
                    } else {
                        CamoChoice::And
                    }
                })
                .collect(),
        )
    }

    pub fn pattern(&self) -> u64 {
        assert!(self.0.len() <= 64, "pattern needs k <= 64");
        self.0
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == CamoChoice::Or)
            .fold(0u64, |p, (i, _)| p | (1 << i))
    }

    pub fn is_or_mask(&self) -> Vec<bool> {
        self.0.iter().map(|c| *c == CamoChoice::Or).collect()
    }
}

impl fmt::Display for CamoAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.0 {
            f.write_str(match c {
                CamoChoice::And => "A",
                CamoChoice::Or => "O",
            })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CamoPlan {
    pub selected_gate_ids: Vec<GateId>,
    pub true_assignment: CamoAssignment,
    pub selection_seed: u64,
    pub fraction: f64,
}

#[derive(Serialize, Deserialize)]
struct PlanDoc {
    schema: String,
    #[serde(flatten)]
    plan: CamoPlan,
}

impl CamoPlan {
    pub fn empty() -> Self {
        CamoPlan {
            selected_gate_ids: Vec::new(),
            true_assignment: CamoAssignment(Vec::new()),
            selection_seed: 0,
            fraction: 0.0,
        }
    }

    /// Plan camouflaging exactly `ids` of `netlist`, recording their kinds.
    pub fn for_gates(netlist: &Netlist, mut ids: Vec<GateId>) -> Result<Self, CamoError> {
        ids.sort_unstable();
        ids.dedup();
        let true_assignment = ids
            .iter()
            .map(|&id| selectable_choice(netlist, id))
            .collect::<Result<Vec<_>, _>>()?;
        let eligible = eligible_gates(netlist).len();
        Ok(CamoPlan {
            fraction: if eligible == 0 { 0.0 } else { ids.len() as f64 / eligible as f64 },
            selected_gate_ids: ids,
            true_assignment: CamoAssignment(true_assignment),
            selection_seed: 0,
        })
    }

    pub fn to_json(&self) -> String {
        let doc = PlanDoc {
            schema: PLAN_SCHEMA.to_owned(),
            plan: self.clone(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("plan serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CamoError> {
        let doc: PlanDoc = serde_json::from_str(text).map_err(|e| CamoError::Json(e.to_string()))?;
        if doc.schema != PLAN_SCHEMA {
            return Err(CamoError::Schema(doc.schema));
        }
        Ok(doc.plan)
    }
}

fn selectable_choice(netlist: &Netlist, id: GateId) -> Result<CamoChoice, CamoError> {
    let gate = netlist
        .gates()
        .get(id.index())
        .ok_or(CamoError::UnknownGate(id))?;
    CamoChoice::from_kind(gate.kind).ok_or(CamoError::NotSelectable(id))
}

/// AND2/OR2 gates in id order.
pub fn eligible_gates(netlist: &Netlist) -> Vec<GateId> {
    netlist
        .gates()
        .iter()
        .filter(|g| matches!(g.kind, GateKind::And2 | GateKind::Or2))
        .map(|g| g.id)
        .collect()
}

/// `round(fraction * count)` with halves rounded up.
pub fn selection_count(fraction: f64, eligible: usize) -> usize {
    ((fraction * eligible as f64) + 0.5).floor() as usize
}

/// Seeded uniform selection without replacement.
///
/// The generator is ChaCha8 (`seed_from_u64`) driving a partial Fisher-Yates
/// shuffle of the eligible gates in id order. The shuffle prefix does not
/// depend on the count, so for a fixed seed a larger fraction always selects
/// a superset of a smaller one.
pub fn select_random(netlist: &Netlist, fraction: f64, seed: u64) -> Result<CamoPlan, CamoError> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(CamoError::Fraction(fraction));
    }
    let report = check_domino_compatible(netlist);
    if !report.pass {
        return Err(CamoError::NotDomino(report.violations.len()));
    }
    let mut pool = eligible_gates(netlist);
    let count = selection_count(fraction, pool.len()).min(pool.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..count {
        let j = rng.gen_range(i..pool.len());
        pool.swap(i, j);
    }
    let mut selected = pool[..count].to_vec();
    selected.sort_unstable();
    let mut plan = CamoPlan::for_gates(netlist, selected)?;
    plan.selection_seed = seed;
    plan.fraction = fraction;
    Ok(plan)
}

fn check_plan(netlist: &Netlist, plan: &CamoPlan) -> Result<(), CamoError> {
    if plan.selected_gate_ids.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CamoError::UnsortedPlan);
    }
    if plan.true_assignment.len() != plan.selected_gate_ids.len() {
        return Err(CamoError::AssignmentLength {
            expected: plan.selected_gate_ids.len(),
            found: plan.true_assignment.len(),
        });
    }
    for (&id, &choice) in plan.selected_gate_ids.iter().zip(&plan.true_assignment.0) {
        if selectable_choice(netlist, id)? != choice {
            return Err(CamoError::TruthMismatch(id));
        }
    }
    Ok(())
}

/// Replaces the planned gates with CAMO cells. Fan-ins are kept in order.
pub fn apply_camouflage(netlist: &Netlist, plan: &CamoPlan) -> Result<Netlist, CamoError> {
    check_plan(netlist, plan)?;
    let mut gates = netlist.gates().to_vec();
    for id in &plan.selected_gate_ids {
        let g = &mut gates[id.index()];
        g.kind = GateKind::Camo;
        g.vth_flavor = crate::netlist::VthFlavor::Na;
    }
    Ok(netlist.with_gates(gates)?)
}

/// Turns every CAMO cell into the chosen AND2/OR2, with the matching flavor.
pub fn resolve(netlist: &Netlist, assignment: &CamoAssignment) -> Result<Netlist, CamoError> {
    let camo = netlist.camo_gates();
    if camo.len() != assignment.len() {
        return Err(CamoError::AssignmentLength {
            expected: camo.len(),
            found: assignment.len(),
        });
    }
    let mut gates = netlist.gates().to_vec();
    for (id, choice) in camo.iter().zip(&assignment.0) {
        let g = &mut gates[id.index()];
        g.kind = choice.kind();
        g.vth_flavor = flavor_for(g.kind);
    }
    Ok(netlist.with_gates(gates)?)
}

/// Signature of a CAMO netlist under one assignment.
pub fn candidate_signature(
    netlist: &Netlist,
    assignment: &CamoAssignment,
    space: &InputSpace,
) -> Result<TruthSignature, CamoError> {
    if netlist.camo_count() != assignment.len() {
        return Err(CamoError::AssignmentLength {
            expected: netlist.camo_count(),
            found: assignment.len(),
        });
    }
    Ok(signature_over(netlist, space, &assignment.is_or_mask())?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateClass {
    /// Numerically smallest member pattern.
    pub representative: CamoAssignment,
    pub signature: TruthSignature,
    pub members: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateSpace {
    pub camo_count: usize,
    pub total_assignments: u64,
    pub exact: bool,
    pub classes: Vec<CandidateClass>,
    /// Class index for every assignment pattern.
    #[serde(skip)]
    pub assignment_class: Vec<u32>,
}

impl CandidateSpace {
    pub fn class_of(&self, assignment: &CamoAssignment) -> usize {
        self.assignment_class[assignment.pattern() as usize] as usize
    }

    pub fn members(&self, class: usize) -> Vec<u64> {
        self.assignment_class
            .iter()
            .enumerate()
            .filter(|(_, &c)| c as usize == class)
            .map(|(p, _)| p as u64)
            .collect()
    }
}

/// Evaluates all `2^k` assignments and groups them by signature. Classes are
/// numbered in order of their smallest pattern.
pub fn enumerate_candidates(
    netlist: &Netlist,
    mode: SignatureMode,
    seed: u64,
) -> Result<CandidateSpace, CamoError> {
    let k = netlist.camo_count();
    if k > ENUMERATION_CAP {
        return Err(CamoError::EnumerationCap {
            k,
            cap: ENUMERATION_CAP,
        });
    }
    let space = InputSpace::for_mode(netlist.num_inputs(), mode, seed)?;
    let total = 1u64 << k;
    let mut index: HashMap<Vec<Vec<u64>>, u32> = HashMap::new();
    let mut classes: Vec<CandidateClass> = Vec::new();
    let mut assignment_class = Vec::with_capacity(total as usize);

    const CHUNK: u64 = 256;
    let mut start = 0u64;
    while start < total {
        let end = (start + CHUNK).min(total);
        let sigs: Vec<TruthSignature> = (start..end)
            .into_par_iter()
            .map(|p| {
                let mask = CamoAssignment::from_pattern(k, p).is_or_mask();
                signature_over(netlist, &space, &mask)
            })
            .collect::<Result<_, _>>()?;
        for (p, sig) in (start..end).zip(sigs) {
            let next = classes.len() as u32;
            let class = *index.entry(sig.words.clone()).or_insert(next);
            if class == next {
                classes.push(CandidateClass {
                    representative: CamoAssignment::from_pattern(k, p),
                    signature: sig,
                    members: 0,
                });
            }
            classes[class as usize].members += 1;
            assignment_class.push(class);
        }
        start = end;
    }
    Ok(CandidateSpace {
        camo_count: k,
        total_assignments: total,
        exact: matches!(mode, SignatureMode::Exhaustive),
        classes,
        assignment_class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::NetlistBuilder;
    use crate::signature::signature;

    fn ten_gate() -> Netlist {
        let mut b = NetlistBuilder::new();
        let ins: Vec<_> = (0..6).map(|i| b.add_input(format!("x{i}"))).collect();
        let mut acc = b.and2(ins[0], ins[1]);
        for i in 0..9 {
            let leaf = ins[(i + 2) % 6];
            acc = if i % 2 == 0 { b.or2(acc, leaf) } else { b.and2(acc, leaf) };
        }
        b.finish_unlabeled(vec![acc]).unwrap()
    }

    #[test]
    fn fraction_bounds() {
        let n = ten_gate();
        assert!(select_random(&n, 0.0, 1).unwrap().selected_gate_ids.is_empty());
        assert_eq!(select_random(&n, 1.0, 1).unwrap().selected_gate_ids.len(), 10);
        assert_eq!(select_random(&n, 1.5, 1).unwrap_err(), CamoError::Fraction(1.5));
        assert_eq!(select_random(&n, -0.1, 1).unwrap_err(), CamoError::Fraction(-0.1));
    }

    #[test]
    fn forty_percent_is_four_and_stable() {
        let n = ten_gate();
        let a = select_random(&n, 0.4, 7).unwrap();
        let b = select_random(&n, 0.4, 7).unwrap();
        assert_eq!(a.selected_gate_ids.len(), 4);
        assert_eq!(a, b);
    }

    #[test]
    fn rounding_half_up() {
        assert_eq!(selection_count(0.25, 10), 3);
        assert_eq!(selection_count(0.4, 10), 4);
        assert_eq!(selection_count(0.05, 10), 1);
        assert_eq!(selection_count(0.04, 10), 0);
    }

    #[test]
    fn larger_fraction_selects_superset() {
        let n = ten_gate();
        for seed in 0..20 {
            let small = select_random(&n, 0.2, seed).unwrap();
            let big = select_random(&n, 0.6, seed).unwrap();
            assert!(small
                .selected_gate_ids
                .iter()
                .all(|g| big.selected_gate_ids.contains(g)));
        }
    }

    #[test]
    fn empty_plan_is_identity() {
        let n = ten_gate();
        assert_eq!(apply_camouflage(&n, &CamoPlan::empty()).unwrap(), n);
        assert_eq!(resolve(&n, &CamoAssignment(vec![])).unwrap(), n);
    }

    #[test]
    fn single_and_round_trip() {
        let mut b = NetlistBuilder::new();
        let x = b.add_input("x");
        let y = b.add_input("y");
        let f = b.and2(x, y);
        let n = b.finish_unlabeled(vec![f]).unwrap();
        let plan = CamoPlan::for_gates(&n, vec![GateId(0)]).unwrap();
        let camo = apply_camouflage(&n, &plan).unwrap();
        assert_eq!(camo.camo_count(), 1);
        let back = resolve(&camo, &plan.true_assignment).unwrap();
        assert_eq!(
            signature(&back, SignatureMode::Exhaustive, 0).unwrap(),
            signature(&n, SignatureMode::Exhaustive, 0).unwrap()
        );
    }

    #[test]
    fn two_of_three_camouflaged() {
        let mut b = NetlistBuilder::new();
        let x = b.add_input("x");
        let y = b.add_input("y");
        let z = b.add_input("z");
        let g0 = b.and2(x, y);
        let g1 = b.or2(g0, z);
        let g2 = b.and2(g1, x);
        let n = b.finish_unlabeled(vec![g2]).unwrap();
        let plan = CamoPlan::for_gates(&n, vec![GateId(2), GateId(0)]).unwrap();
        let camo = apply_camouflage(&n, &plan).unwrap();
        assert_eq!(camo.count_kind(GateKind::Camo), 2);
        assert_eq!(camo.count_kind(GateKind::Or2), 1);
    }

    #[test]
    fn plan_errors() {
        let pla = crate::pla::parse_pla(".i 2\n.o 1\n10 1\n.e\n").unwrap();
        let (n, _) = crate::synth::synthesize(&pla, Default::default());
        // gate 0 is the input inverter
        assert_eq!(
            CamoPlan::for_gates(&n, vec![GateId(0)]).unwrap_err(),
            CamoError::NotSelectable(GateId(0))
        );
        let mut lie = CamoPlan::for_gates(&n, vec![GateId(1)]).unwrap();
        lie.true_assignment = CamoAssignment(vec![CamoChoice::Or]);
        assert_eq!(apply_camouflage(&n, &lie).unwrap_err(), CamoError::TruthMismatch(GateId(1)));
        let camo = apply_camouflage(&n, &CamoPlan::for_gates(&n, vec![GateId(1)]).unwrap()).unwrap();
        assert_eq!(
            resolve(&camo, &CamoAssignment(vec![])).unwrap_err(),
            CamoError::AssignmentLength { expected: 1, found: 0 }
        );
    }

    #[test]
    fn pattern_round_trip() {
        for p in 0..64u64 {
            assert_eq!(CamoAssignment::from_pattern(6, p).pattern(), p);
        }
    }

    #[test]
    fn zero_camo_one_class() {
        let n = ten_gate();
        let s = enumerate_candidates(&n, SignatureMode::Exhaustive, 0).unwrap();
        assert_eq!(s.total_assignments, 1);
        assert_eq!(s.classes.len(), 1);
        assert_eq!(s.classes[0].members, 1);
    }

    #[test]
    fn enumeration_cap() {
        let mut b = NetlistBuilder::new();
        let x = b.add_input("x");
        let mut acc = x;
        for _ in 0..17 {
            acc = b.add_gate(GateKind::Camo, &[acc, x]);
        }
        let n = b.finish_unlabeled(vec![acc]).unwrap();
        assert_eq!(
            enumerate_candidates(&n, SignatureMode::Exhaustive, 0).unwrap_err(),
            CamoError::EnumerationCap { k: 17, cap: 16 }
        );
    }

    #[test]
    fn plan_json_round_trip() {
        let n = ten_gate();
        let plan = select_random(&n, 0.5, 3).unwrap();
        let text = plan.to_json();
        assert!(text.contains("camoforge-plan-v1"));
        assert_eq!(CamoPlan::from_json(&text).unwrap(), plan);
    }
}
