//! Combinational gate graph shared by every pass.
//!
//! Nets are dense integers. Primary inputs and gate outputs each drive exactly
//! one net, and gate ids equal their index in [`Netlist::gates`]. The gate list
//! does not have to be topologically ordered; an evaluation order is computed
//! when the netlist is validated.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const NETLIST_SCHEMA: &str = "camoforge-netlist-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NetId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GateId(pub u32);

impl NetId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl GateId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl fmt::Display for GateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GateKind {
    And2,
    Or2,
    Inv,
    Camo,
    Const0,
    Const1,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::And2 | GateKind::Or2 | GateKind::Camo => 2,
            GateKind::Inv => 1,
            GateKind::Const0 | GateKind::Const1 => 0,
        }
    }

    /// Non-inverting kinds that may sit in a domino evaluation network.
    pub fn is_monotone(self) -> bool {
        !matches!(self, GateKind::Inv)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::And2 => "AND2",
            GateKind::Or2 => "OR2",
            GateKind::Inv => "INV",
            GateKind::Camo => "CAMO",
            GateKind::Const0 => "CONST0",
            GateKind::Const1 => "CONST1",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VthFlavor {
    Low,
    High,
    Na,
}

impl fmt::Display for VthFlavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VthFlavor::Low => "LOW",
            VthFlavor::High => "HIGH",
            VthFlavor::Na => "NA",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub id: GateId,
    pub kind: GateKind,
    pub fanin: Vec<NetId>,
    pub output: NetId,
    pub vth_flavor: VthFlavor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Driver {
    Input(usize),
    Gate(GateId),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NetlistError {
    #[error("gate at index {index} carries id {id}; ids must be dense and ordered")]
    GateIdOrder { index: usize, id: GateId },
    #[error("{gate} ({kind}) has {found} fan-ins, expected {expected}")]
    Arity {
        gate: GateId,
        kind: GateKind,
        expected: usize,
        found: usize,
    },
    #[error("{0} is outside the net range")]
    UnknownNet(NetId),
    #[error("{0} has more than one driver")]
    MultipleDrivers(NetId),
    #[error("{0} has no driver")]
    Undriven(NetId),
    #[error("combinational cycle through {0}")]
    Cycle(GateId),
    #[error("{0} is an unresolved CAMO cell")]
    UnresolvedCamo(GateId),
    #[error("expected {expected} input bits, got {found}")]
    InputWidth { expected: usize, found: usize },
    #[error("{what} label count {found} does not match {expected}")]
    LabelCount {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("unsupported netlist schema `{0}`")]
    Schema(String),
    #[error("malformed netlist JSON: {0}")]
    Json(String),
}

/// A validated combinational netlist.
#[derive(Debug, Clone)]
pub struct Netlist {
    inputs: Vec<NetId>,
    outputs: Vec<NetId>,
    gates: Vec<Gate>,
    input_labels: Vec<String>,
    output_labels: Vec<String>,
    drivers: Vec<Driver>,
    topo: Vec<usize>,
    camo_ordinal: Vec<Option<usize>>,
    camo_count: usize,
}

impl PartialEq for Netlist {
    fn eq(&self, other: &Self) -> bool {
        self.inputs == other.inputs
            && self.outputs == other.outputs
            && self.gates == other.gates
            && self.input_labels == other.input_labels
            && self.output_labels == other.output_labels
    }
}

impl Eq for Netlist {}

#[derive(Serialize, Deserialize)]
struct NetlistDoc {
    schema: String,
    input_labels: Vec<String>,
    output_labels: Vec<String>,
    inputs: Vec<NetId>,
    outputs: Vec<NetId>,
    gates: Vec<Gate>,
}

impl Netlist {
    pub fn new(
        inputs: Vec<NetId>,
        outputs: Vec<NetId>,
        gates: Vec<Gate>,
        input_labels: Vec<String>,
        output_labels: Vec<String>,
    ) -> Result<Self, NetlistError> {
        if input_labels.len() != inputs.len() {
            return Err(NetlistError::LabelCount {
                what: "input",
                expected: inputs.len(),
                found: input_labels.len(),
            });
        }
        if output_labels.len() != outputs.len() {
            return Err(NetlistError::LabelCount {
                what: "output",
                expected: outputs.len(),
                found: output_labels.len(),
            });
        }
        let num_nets = inputs.len() + gates.len();
        let mut drivers: Vec<Option<Driver>> = vec![None; num_nets];
        let mut claim = |net: NetId, d: Driver| -> Result<(), NetlistError> {
            let slot = drivers
                .get_mut(net.index())
                .ok_or(NetlistError::UnknownNet(net))?;
            if slot.is_some() {
                return Err(NetlistError::MultipleDrivers(net));
            }
            *slot = Some(d);
            Ok(())
        };
        for (i, &net) in inputs.iter().enumerate() {
            claim(net, Driver::Input(i))?;
        }
        for (index, gate) in gates.iter().enumerate() {
            if gate.id.index() != index {
                return Err(NetlistError::GateIdOrder { index, id: gate.id });
            }
            if gate.fanin.len() != gate.kind.arity() {
                return Err(NetlistError::Arity {
                    gate: gate.id,
                    kind: gate.kind,
                    expected: gate.kind.arity(),
                    found: gate.fanin.len(),
                });
            }
            claim(gate.output, Driver::Gate(gate.id))?;
        }
        let drivers: Vec<Driver> = drivers
            .into_iter()
            .enumerate()
            .map(|(i, d)| d.ok_or(NetlistError::Undriven(NetId(i as u32))))
            .collect::<Result<_, _>>()?;
        for gate in &gates {
            if let Some(&bad) = gate.fanin.iter().find(|n| n.index() >= num_nets) {
                return Err(NetlistError::UnknownNet(bad));
            }
        }
        if let Some(&bad) = outputs.iter().find(|n| n.index() >= num_nets) {
            return Err(NetlistError::UnknownNet(bad));
        }

        let topo = topological_order(&gates, &drivers)?;
        let mut camo_ordinal = vec![None; gates.len()];
        let mut camo_count = 0;
        for gate in gates.iter().filter(|g| g.kind == GateKind::Camo) {
            camo_ordinal[gate.id.index()] = Some(camo_count);
            camo_count += 1;
        }
        Ok(Netlist {
            inputs,
            outputs,
            gates,
            input_labels,
            output_labels,
            drivers,
            topo,
            camo_ordinal,
            camo_count,
        })
    }

    pub fn inputs(&self) -> &[NetId] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[NetId] {
        &self.outputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, id: GateId) -> &Gate {
        &self.gates[id.index()]
    }

    pub fn input_labels(&self) -> &[String] {
        &self.input_labels
    }

    pub fn output_labels(&self) -> &[String] {
        &self.output_labels
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn num_nets(&self) -> usize {
        self.drivers.len()
    }

    pub fn driver(&self, net: NetId) -> Driver {
        self.drivers[net.index()]
    }

    /// Gate indices in an order where every gate follows its fan-in drivers.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// Number of CAMO cells. Assignments are indexed by CAMO cells in
    /// ascending gate-id order.
    pub fn camo_count(&self) -> usize {
        self.camo_count
    }

    pub fn camo_gates(&self) -> Vec<GateId> {
        self.gates
            .iter()
            .filter(|g| g.kind == GateKind::Camo)
            .map(|g| g.id)
            .collect()
    }

    pub fn count_kind(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind == kind).count()
    }

    /// Gates reading each net, indexed by net id.
    pub fn fanouts(&self) -> Vec<Vec<GateId>> {
        let mut fo = vec![Vec::new(); self.num_nets()];
        for gate in &self.gates {
            for net in &gate.fanin {
                fo[net.index()].push(gate.id);
            }
        }
        fo
    }

    /// Rebuilds the netlist with a transformed gate list, keeping ports.
    pub fn with_gates(&self, gates: Vec<Gate>) -> Result<Self, NetlistError> {
        Netlist::new(
            self.inputs.clone(),
            self.outputs.clone(),
            gates,
            self.input_labels.clone(),
            self.output_labels.clone(),
        )
    }

    /// Evaluates one input vector. Fails on unresolved CAMO cells.
    pub fn evaluate(&self, input: &[bool]) -> Result<Vec<bool>, NetlistError> {
        let words: Vec<u64> = input.iter().map(|&b| if b { 1 } else { 0 }).collect();
        let out = self.evaluate_words(&words)?;
        Ok(out.into_iter().map(|w| w & 1 == 1).collect())
    }

    /// Bit-parallel evaluation: each word carries 64 independent vectors.
    pub fn evaluate_words(&self, inputs: &[u64]) -> Result<Vec<u64>, NetlistError> {
        if let Some(g) = self.gates.iter().find(|g| g.kind == GateKind::Camo) {
            return Err(NetlistError::UnresolvedCamo(g.id));
        }
        let mut values = vec![0u64; self.num_nets()];
        self.simulate(inputs, &[], &mut values)?;
        Ok(self.outputs.iter().map(|n| values[n.index()]).collect())
    }

    /// Core simulator. `camo_is_or[i]` resolves the i-th CAMO cell to OR2
    /// (true) or AND2 (false). `values` must hold `num_nets()` words; on
    /// return it contains every net value.
    pub(crate) fn simulate(
        &self,
        inputs: &[u64],
        camo_is_or: &[bool],
        values: &mut [u64],
    ) -> Result<(), NetlistError> {
        if inputs.len() != self.inputs.len() {
            return Err(NetlistError::InputWidth {
                expected: self.inputs.len(),
                found: inputs.len(),
            });
        }
        debug_assert_eq!(values.len(), self.num_nets());
        for (net, &w) in self.inputs.iter().zip(inputs) {
            values[net.index()] = w;
        }
        for &gi in &self.topo {
            let g = &self.gates[gi];
            let v = match g.kind {
                GateKind::And2 => values[g.fanin[0].index()] & values[g.fanin[1].index()],
                GateKind::Or2 => values[g.fanin[0].index()] | values[g.fanin[1].index()],
                GateKind::Inv => !values[g.fanin[0].index()],
                GateKind::Const0 => 0,
                GateKind::Const1 => !0,
                GateKind::Camo => {
                    let ord = self.camo_ordinal[gi].expect("camo ordinal");
                    let is_or = *camo_is_or
                        .get(ord)
                        .ok_or(NetlistError::UnresolvedCamo(g.id))?;
                    let (a, b) = (values[g.fanin[0].index()], values[g.fanin[1].index()]);
                    if is_or {
                        a | b
                    } else {
                        a & b
                    }
                }
            };
            values[g.output.index()] = v;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let doc = NetlistDoc {
            schema: NETLIST_SCHEMA.to_owned(),
            input_labels: self.input_labels.clone(),
            output_labels: self.output_labels.clone(),
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            gates: self.gates.clone(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("netlist serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, NetlistError> {
        let doc: NetlistDoc =
            serde_json::from_str(text).map_err(|e| NetlistError::Json(e.to_string()))?;
        if doc.schema != NETLIST_SCHEMA {
            return Err(NetlistError::Schema(doc.schema));
        }
        Netlist::new(
            doc.inputs,
            doc.outputs,
            doc.gates,
            doc.input_labels,
            doc.output_labels,
        )
    }
}

fn topological_order(gates: &[Gate], drivers: &[Driver]) -> Result<Vec<usize>, NetlistError> {
    // Kahn's algorithm; the ready queue is a min-heap so the order is
    // deterministic and equals id order when the list is already sorted.
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let mut pending = vec![0usize; gates.len()];
    let mut readers: Vec<Vec<usize>> = vec![Vec::new(); gates.len()];
    for (gi, gate) in gates.iter().enumerate() {
        for net in &gate.fanin {
            if let Driver::Gate(src) = drivers[net.index()] {
                pending[gi] += 1;
                readers[src.index()].push(gi);
            }
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> = pending
        .iter()
        .enumerate()
        .filter(|(_, &p)| p == 0)
        .map(|(i, _)| Reverse(i))
        .collect();
    let mut order = Vec::with_capacity(gates.len());
    while let Some(Reverse(gi)) = ready.pop() {
        order.push(gi);
        for &r in &readers[gi] {
            pending[r] -= 1;
            if pending[r] == 0 {
                ready.push(Reverse(r));
            }
        }
    }
    if order.len() != gates.len() {
        let stuck = pending.iter().position(|&p| p > 0).unwrap_or(0);
        return Err(NetlistError::Cycle(GateId(stuck as u32)));
    }
    Ok(order)
}

/// Incremental construction in creation order, which is always topological.
#[derive(Debug, Default)]
pub struct NetlistBuilder {
    inputs: Vec<NetId>,
    input_labels: Vec<String>,
    gates: Vec<Gate>,
    next_net: u32,
}

impl NetlistBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_input(&mut self, label: impl Into<String>) -> NetId {
        let net = NetId(self.next_net);
        self.next_net += 1;
        self.inputs.push(net);
        self.input_labels.push(label.into());
        net
    }

    pub fn add_gate(&mut self, kind: GateKind, fanin: &[NetId]) -> NetId {
        let net = NetId(self.next_net);
        self.next_net += 1;
        self.gates.push(Gate {
            id: GateId(self.gates.len() as u32),
            kind,
            fanin: fanin.to_vec(),
            output: net,
            vth_flavor: VthFlavor::Na,
        });
        net
    }

    pub fn and2(&mut self, a: NetId, b: NetId) -> NetId {
        self.add_gate(GateKind::And2, &[a, b])
    }

    pub fn or2(&mut self, a: NetId, b: NetId) -> NetId {
        self.add_gate(GateKind::Or2, &[a, b])
    }

    pub fn inv(&mut self, a: NetId) -> NetId {
        self.add_gate(GateKind::Inv, &[a])
    }

    pub fn num_gates(&self) -> usize {
        self.gates.len()
    }

    pub fn finish(
        self,
        outputs: Vec<NetId>,
        output_labels: Vec<String>,
    ) -> Result<Netlist, NetlistError> {
        Netlist::new(
            self.inputs,
            outputs,
            self.gates,
            self.input_labels,
            output_labels,
        )
    }

    /// Like [`finish`](Self::finish) with generated output labels `f0, f1, ..`.
    pub fn finish_unlabeled(self, outputs: Vec<NetId>) -> Result<Netlist, NetlistError> {
        let labels = (0..outputs.len()).map(|i| format!("f{i}")).collect();
        self.finish(outputs, labels)
    }
}
