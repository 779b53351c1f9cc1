//! Fixture generators and brute-force oracles shared by the integration
//! tests. Oracles read only the public netlist structure and never call the
//! library's simulators.

#![allow(dead_code)]

use camoforge::camo::CamoChoice;
use camoforge::netlist::{Driver, GateKind, NetId, Netlist};
use camoforge::pla::{parse_pla, PlaTable};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random ON-set PLA text. Roughly 30% dashes, at least one output per cube.
pub fn random_pla_text(rng: &mut impl Rng, ni: usize, no: usize, cubes: usize) -> String {
    let mut s = format!(".i {ni}\n.o {no}\n.p {cubes}\n");
    for _ in 0..cubes {
        for _ in 0..ni {
            let r: f64 = rng.gen();
            s.push(if r < 0.3 { '-' } else if r < 0.65 { '0' } else { '1' });
        }
        s.push(' ');
        let forced = rng.gen_range(0..no);
        for j in 0..no {
            s.push(if j == forced || rng.gen_bool(0.4) { '1' } else { '0' });
        }
        s.push('\n');
    }
    s.push_str(".e\n");
    s
}

pub fn random_pla(seed: u64, max_in: usize, max_out: usize, max_cubes: usize) -> PlaTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ni = rng.gen_range(1..=max_in);
    let no = rng.gen_range(1..=max_out);
    let nc = rng.gen_range(1..=max_cubes);
    parse_pla(&random_pla_text(&mut rng, ni, no, nc)).expect("generated PLA parses")
}

/// Corpus used by several criteria: `count` PLAs with at most 12 inputs,
/// 4 outputs and 30 cubes.
pub fn corpus(count: usize) -> Vec<PlaTable> {
    (0..count as u64).map(|s| random_pla(1000 + s, 12, 4, 30)).collect()
}

/// Bits of vector `v`: bit `i` drives input `i`.
pub fn vector(n: usize, v: u64) -> Vec<bool> {
    (0..n).map(|i| (v >> i) & 1 == 1).collect()
}

/// Recursive per-net evaluation. `camo` gives the function of each CAMO
/// cell in ascending gate-id order.
pub fn eval_ref(netlist: &Netlist, camo: &[CamoChoice], input: &[bool]) -> Vec<bool> {
    let camo_ids = netlist.camo_gates();
    let mut memo: Vec<Option<bool>> = vec![None; netlist.num_nets()];
    fn net_value(
        n: &Netlist,
        camo_ids: &[camoforge::netlist::GateId],
        camo: &[CamoChoice],
        input: &[bool],
        memo: &mut Vec<Option<bool>>,
        net: NetId,
    ) -> bool {
        if let Some(v) = memo[net.index()] {
            return v;
        }
        let v = match n.driver(net) {
            Driver::Input(i) => input[i],
            Driver::Gate(g) => {
                let gate = n.gate(g);
                let mut f = |k: usize| net_value(n, camo_ids, camo, input, memo, gate.fanin[k]);
                let kind = match gate.kind {
                    GateKind::Camo => {
                        let pos = camo_ids.iter().position(|&c| c == g).unwrap();
                        match camo[pos] {
                            CamoChoice::And => GateKind::And2,
                            CamoChoice::Or => GateKind::Or2,
                        }
                    }
                    k => k,
                };
                match kind {
                    GateKind::And2 => f(0) & f(1),
                    GateKind::Or2 => f(0) | f(1),
                    GateKind::Inv => !f(0),
                    GateKind::Const0 => false,
                    GateKind::Const1 => true,
                    GateKind::Camo => unreachable!(),
                }
            }
        };
        memo[net.index()] = Some(v);
        v
    }
    netlist
        .outputs()
        .iter()
        .map(|&o| net_value(netlist, &camo_ids, camo, input, &mut memo, o))
        .collect()
}

/// Full truth table, one output vector per input vector.
pub fn table_ref(netlist: &Netlist, camo: &[CamoChoice]) -> Vec<Vec<bool>> {
    let n = netlist.num_inputs();
    (0..1u64 << n)
        .map(|v| eval_ref(netlist, camo, &vector(n, v)))
        .collect()
}

/// Independent cube-cover evaluation of a PLA.
pub fn cube_eval(pla: &PlaTable, input: &[bool]) -> Vec<bool> {
    (0..pla.num_outputs)
        .map(|j| {
            pla.cubes.iter().any(|c| {
                c.outputs[j]
                    && c.inputs.iter().zip(input).all(|(l, &b)| match l {
                        camoforge::pla::Literal::Negative => !b,
                        camoforge::pla::Literal::Positive => b,
                        camoforge::pla::Literal::DontCare => true,
                    })
            })
        })
        .collect()
}

pub fn choices(k: usize, pattern: u64) -> Vec<CamoChoice> {
    (0..k)
        .map(|i| if (pattern >> i) & 1 == 1 { CamoChoice::Or } else { CamoChoice::And })
        .collect()
}

/// `k` distinct AND2/OR2 gate ids drawn with a test-side generator.
pub fn pick_gates(netlist: &Netlist, k: usize, seed: u64) -> Vec<camoforge::netlist::GateId> {
    let mut ids: Vec<_> = netlist
        .gates()
        .iter()
        .filter(|g| matches!(g.kind, GateKind::And2 | GateKind::Or2))
        .map(|g| g.id)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    ids.truncate(k);
    ids
}

/// Chain of `len` two-input gates of one kind, flavored.
pub fn chain(kind: GateKind, len: usize) -> Netlist {
    let mut b = camoforge::netlist::NetlistBuilder::new();
    let ins: Vec<_> = (0..=len).map(|i| b.add_input(format!("x{i}"))).collect();
    let mut acc = ins[0];
    for leaf in &ins[1..] {
        acc = b.add_gate(kind, &[acc, *leaf]);
    }
    camoforge::synth::assign_vth_flavors(&b.finish_unlabeled(vec![acc]).unwrap())
}
