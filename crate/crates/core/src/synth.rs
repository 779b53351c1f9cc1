//! Two-level tables to monotone AND2/OR2 netlists.
//!
//! Every complemented literal is read from a fresh rail driven by a static
//! inverter on the primary input, so the remaining logic uses true literals
//! only. Each output is an OR tree over per-cube AND trees; product terms are
//! not shared between outputs.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::netlist::{GateId, GateKind, NetId, Netlist, NetlistBuilder, VthFlavor};
use crate::pla::{Literal, PlaTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeShape {
    /// Pairwise reduction, depth `ceil(log2 m)` for `m` leaves.
    #[default]
    Balanced,
    /// Left fold, depth `m - 1`.
    Chain,
}

impl std::str::FromStr for TreeShape {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "balanced" => Ok(TreeShape::Balanced),
            "chain" => Ok(TreeShape::Chain),
            other => Err(format!("unknown tree shape `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RailPair {
    pub true_net: NetId,
    pub complement_net: Option<NetId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DualRailMap {
    pub original_inputs: Vec<String>,
    pub rail_pairs: BTreeMap<String, RailPair>,
    /// Inputs whose complemented literal appears in an asserting cube.
    pub complement_used: Vec<String>,
}

fn reduce_tree(
    b: &mut NetlistBuilder,
    leaves: Vec<NetId>,
    shape: TreeShape,
    kind: GateKind,
) -> NetId {
    debug_assert!(!leaves.is_empty());
    match shape {
        TreeShape::Chain => {
            let mut it = leaves.into_iter();
            let first = it.next().expect("non-empty");
            it.fold(first, |acc, n| b.add_gate(kind, &[acc, n]))
        }
        TreeShape::Balanced => {
            let mut level = leaves;
            while level.len() > 1 {
                let mut next = Vec::with_capacity(level.len().div_ceil(2));
                for pair in level.chunks(2) {
                    match pair {
                        [a, c] => next.push(b.add_gate(kind, &[*a, *c])),
                        [a] => next.push(*a),
                        _ => unreachable!(),
                    }
                }
                level = next;
            }
            level[0]
        }
    }
}

/// Builds the dual-rail AND/OR netlist for `pla`. Gate flavors are left as
/// `NA`; see [`assign_vth_flavors`].
pub fn synthesize(pla: &PlaTable, shape: TreeShape) -> (Netlist, DualRailMap) {
    let mut b = NetlistBuilder::new();
    let true_rails: Vec<NetId> = pla
        .input_labels
        .iter()
        .map(|l| b.add_input(l.clone()))
        .collect();

    let mut needs_complement = vec![false; pla.num_inputs];
    for cube in pla.cubes.iter().filter(|c| c.asserts_any()) {
        for (i, lit) in cube.inputs.iter().enumerate() {
            if *lit == Literal::Negative {
                needs_complement[i] = true;
            }
        }
    }
    let complement_rails: Vec<Option<NetId>> = needs_complement
        .iter()
        .zip(&true_rails)
        .map(|(&need, &t)| need.then(|| b.inv(t)))
        .collect();

    let mut const0 = None;
    let mut const1 = None;
    let mut outputs = Vec::with_capacity(pla.num_outputs);
    for out in 0..pla.num_outputs {
        let mut terms = Vec::new();
        for cube in pla.cubes.iter().filter(|c| c.outputs[out]) {
            let literals: Vec<NetId> = cube
                .inputs
                .iter()
                .enumerate()
                .filter_map(|(i, lit)| match lit {
                    Literal::Positive => Some(true_rails[i]),
                    Literal::Negative => Some(complement_rails[i].expect("rail created")),
                    Literal::DontCare => None,
                })
                .collect();
            let term = if literals.is_empty() {
                *const1.get_or_insert_with(|| b.add_gate(GateKind::Const1, &[]))
            } else {
                reduce_tree(&mut b, literals, shape, GateKind::And2)
            };
            terms.push(term);
        }
        let net = if terms.is_empty() {
            *const0.get_or_insert_with(|| b.add_gate(GateKind::Const0, &[]))
        } else {
            reduce_tree(&mut b, terms, shape, GateKind::Or2)
        };
        outputs.push(net);
    }

    let netlist = b
        .finish(outputs, pla.output_labels.clone())
        .expect("synthesized netlist is structurally valid");
    let rail_pairs = pla
        .input_labels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            (
                l.clone(),
                RailPair {
                    true_net: true_rails[i],
                    complement_net: complement_rails[i],
                },
            )
        })
        .collect();
    let complement_used = pla
        .input_labels
        .iter()
        .zip(&needs_complement)
        .filter(|(_, &n)| n)
        .map(|(l, _)| l.clone())
        .collect();
    (
        netlist,
        DualRailMap {
            original_inputs: pla.input_labels.clone(),
            rail_pairs,
            complement_used,
        },
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DominoViolation {
    pub gate: GateId,
    pub kind: GateKind,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DominoReport {
    pub pass: bool,
    pub violations: Vec<DominoViolation>,
}

/// Inverters may only sit directly on primary inputs; everything else must be
/// a monotone cell. 1 -> 0 transitions then occur only at PI inverters,
/// before evaluation starts.
pub fn check_domino_compatible(netlist: &Netlist) -> DominoReport {
    use crate::netlist::Driver;
    let mut violations = Vec::new();
    for g in netlist.gates() {
        if g.kind == GateKind::Inv {
            let src = g.fanin[0];
            if let Driver::Gate(d) = netlist.driver(src) {
                violations.push(DominoViolation {
                    gate: g.id,
                    kind: g.kind,
                    reason: format!("inverter fed by {} ({}), not a primary input", d, netlist.gate(d).kind),
                });
            }
        } else if !g.kind.is_monotone() {
            violations.push(DominoViolation {
                gate: g.id,
                kind: g.kind,
                reason: "non-monotone cell".into(),
            });
        }
    }
    DominoReport {
        pass: violations.is_empty(),
        violations,
    }
}

/// The flavor convention used for overhead studies: AND2 cells high-Vth, OR2
/// cells low-Vth, everything else unflavored.
pub fn flavor_for(kind: GateKind) -> VthFlavor {
    match kind {
        GateKind::And2 => VthFlavor::High,
        GateKind::Or2 => VthFlavor::Low,
        _ => VthFlavor::Na,
    }
}

pub fn assign_vth_flavors(netlist: &Netlist) -> Netlist {
    let gates = netlist
        .gates()
        .iter()
        .cloned()
        .map(|mut g| {
            g.vth_flavor = flavor_for(g.kind);
            g
        })
        .collect();
    netlist
        .with_gates(gates)
        .expect("flavor change keeps structure valid")
}

/// Depth of the deepest gate (a primary input has depth 0).
pub fn logic_depth(netlist: &Netlist) -> usize {
    let mut depth = vec![0usize; netlist.num_nets()];
    for &gi in netlist.topological_order() {
        let g = &netlist.gates()[gi];
        let d = g.fanin.iter().map(|n| depth[n.index()]).max().map_or(0, |m| m + 1);
        depth[g.output.index()] = if g.kind.arity() == 0 { 0 } else { d };
    }
    netlist
        .outputs()
        .iter()
        .map(|n| depth[n.index()])
        .max()
        .unwrap_or(0)
}
