//! Oracle-guided de-camouflaging by explicit enumeration.
//!
//! The attacker holds the CAMO netlist and black-box access to the working
//! chip. The live set starts as all `2^k` assignments; each round finds an
//! input on which two live assignments disagree, asks the oracle, and drops
//! every assignment that contradicts the answer. The true assignment always
//! agrees with the oracle and is never dropped.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::camo::CamoAssignment;
use crate::netlist::{Netlist, NetlistError};
use crate::signature::{exhaustive_block, EXHAUSTIVE_INPUT_CAP};

/// Largest CAMO count the enumerating attack accepts.
pub const ATTACK_CAMO_CAP: usize = 20;
pub const DEFAULT_MAX_VECTORS: u64 = 1_000_000;
pub const DEFAULT_MAX_QUERIES: usize = 1 << 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AttackError {
    #[error("discriminating-input search needs at least two live assignments, got {0}")]
    TooFewLive(usize),
    #[error("{k} CAMO cells exceed the attack cap of {cap}")]
    CamoCap { k: usize, cap: usize },
    #[error("exhaustive search needs at most {cap} inputs, netlist has {inputs}")]
    InputCap { inputs: usize, cap: usize },
    #[error("oracle answer contradicts every live assignment")]
    OracleInconsistent,
    #[error("oracle returned {found} bits, expected {expected}")]
    OracleWidth { expected: usize, found: usize },
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum AttackMode {
    /// Counting order over all `2^n` vectors.
    Exhaustive,
    /// Uniform vectors from ChaCha8 seeded with `seed`.
    Sampled { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AttackBudget {
    pub max_queries: usize,
    /// Vectors examined in sampled mode before giving up.
    pub max_vectors: u64,
}

impl Default for AttackBudget {
    fn default() -> Self {
        AttackBudget {
            max_queries: DEFAULT_MAX_QUERIES,
            max_vectors: DEFAULT_MAX_VECTORS,
        }
    }
}

pub trait Oracle {
    fn query(&mut self, input: &[bool]) -> Vec<bool>;
}

impl<F: FnMut(&[bool]) -> Vec<bool>> Oracle for F {
    fn query(&mut self, input: &[bool]) -> Vec<bool> {
        self(input)
    }
}

/// Answers queries by simulating a CAMO-free reference netlist.
pub struct NetlistOracle<'a> {
    netlist: &'a Netlist,
    pub calls: usize,
}

impl<'a> NetlistOracle<'a> {
    pub fn new(netlist: &'a Netlist) -> Result<Self, AttackError> {
        if let Some(g) = netlist.camo_gates().first() {
            return Err(NetlistError::UnresolvedCamo(*g).into());
        }
        Ok(NetlistOracle { netlist, calls: 0 })
    }
}

impl Oracle for NetlistOracle<'_> {
    fn query(&mut self, input: &[bool]) -> Vec<bool> {
        self.calls += 1;
        self.netlist.evaluate(input).expect("oracle netlist evaluates")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AttackStatus {
    Running,
    Resolved,
    Ambiguous,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Query {
    pub input: Vec<bool>,
    pub output: Vec<bool>,
    pub live_before: usize,
    pub live_after: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttackState {
    pub camo_count: usize,
    /// Live assignments as bit patterns (bit `i` = OR), ascending.
    pub live: Vec<u64>,
    pub queries: Vec<Query>,
    pub status: AttackStatus,
    pub vectors_examined: u64,
    pub diagnostics: Option<String>,
}

impl AttackState {
    pub fn live_assignments(&self) -> Vec<CamoAssignment> {
        self.live
            .iter()
            .map(|&p| CamoAssignment::from_pattern(self.camo_count, p))
            .collect()
    }
}

fn lane_bits(words: &[u64], lane: u32) -> Vec<bool> {
    words.iter().map(|w| (w >> lane) & 1 == 1).collect()
}

fn or_mask(k: usize, pattern: u64) -> Vec<bool> {
    (0..k).map(|i| (pattern >> i) & 1 == 1).collect()
}

/// Resumable vector stream. Resuming is sound because a vector on which all
/// live assignments agree stays non-discriminating as the live set shrinks.
struct VectorSearch {
    mode: AttackMode,
    num_inputs: usize,
    block: usize,
    lane: u32,
    current: Option<Vec<u64>>,
    rng: Option<ChaCha8Rng>,
    examined: u64,
    max_vectors: u64,
}

impl VectorSearch {
    fn new(netlist: &Netlist, mode: AttackMode, max_vectors: u64) -> Result<Self, AttackError> {
        let n = netlist.num_inputs();
        let rng = match mode {
            AttackMode::Exhaustive => {
                if n > EXHAUSTIVE_INPUT_CAP {
                    return Err(AttackError::InputCap {
                        inputs: n,
                        cap: EXHAUSTIVE_INPUT_CAP,
                    });
                }
                None
            }
            AttackMode::Sampled { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        };
        Ok(VectorSearch {
            mode,
            num_inputs: n,
            block: 0,
            lane: 0,
            current: None,
            rng,
            examined: 0,
            max_vectors,
        })
    }

    fn limit(&self) -> u64 {
        match self.mode {
            AttackMode::Exhaustive => 1u64 << self.num_inputs,
            AttackMode::Sampled { .. } => self.max_vectors,
        }
    }

    fn load_block(&mut self) -> Vec<u64> {
        if let Some(b) = &self.current {
            return b.clone();
        }
        let words = match &mut self.rng {
            None => exhaustive_block(self.num_inputs, self.block),
            Some(rng) => (0..self.num_inputs).map(|_| rng.next_u64()).collect(),
        };
        self.current = Some(words.clone());
        words
    }

    fn next(&mut self, netlist: &Netlist, live: &[u64], k: usize) -> Result<Option<Vec<bool>>, AttackError> {
        let limit = self.limit();
        let masks: Vec<Vec<bool>> = live.iter().map(|&p| or_mask(k, p)).collect();
        let mut values = vec![0u64; netlist.num_nets()];
        let mut reference = vec![0u64; netlist.num_outputs()];
        loop {
            let start = self.block as u64 * 64;
            if start >= limit {
                return Ok(None);
            }
            let words = self.load_block();
            let valid = (limit - start).min(64);
            let mut lanes = if valid == 64 { !0u64 } else { (1u64 << valid) - 1 };
            lanes &= !0u64 << self.lane;

            let mut diff = 0u64;
            for (i, mask) in masks.iter().enumerate() {
                netlist.simulate(&words, mask, &mut values)?;
                for (j, net) in netlist.outputs().iter().enumerate() {
                    let v = values[net.index()];
                    if i == 0 {
                        reference[j] = v;
                    } else {
                        diff |= v ^ reference[j];
                    }
                }
            }
            let hit = diff & lanes;
            if hit != 0 {
                let lane = hit.trailing_zeros();
                self.examined = start + lane as u64 + 1;
                self.lane = lane + 1;
                if self.lane == 64 {
                    self.block += 1;
                    self.lane = 0;
                    self.current = None;
                }
                return Ok(Some(lane_bits(&words, lane)));
            }
            self.examined = start + valid;
            self.block += 1;
            self.lane = 0;
            self.current = None;
        }
    }
}

fn check_k(netlist: &Netlist) -> Result<usize, AttackError> {
    let k = netlist.camo_count();
    if k > ATTACK_CAMO_CAP {
        return Err(AttackError::CamoCap {
            k,
            cap: ATTACK_CAMO_CAP,
        });
    }
    Ok(k)
}

/// First vector (in the mode's search order) on which two live assignments
/// produce different outputs. `None` in exhaustive mode means the live set is
/// a single functional class; in sampled mode it only means no such vector
/// appeared within `max_vectors`.
pub fn find_discriminating_input(
    camo_netlist: &Netlist,
    live: &[CamoAssignment],
    mode: AttackMode,
    max_vectors: u64,
) -> Result<Option<Vec<bool>>, AttackError> {
    if live.len() < 2 {
        return Err(AttackError::TooFewLive(live.len()));
    }
    let k = check_k(camo_netlist)?;
    for a in live {
        if a.len() != k {
            return Err(NetlistError::UnresolvedCamo(
                camo_netlist.camo_gates().get(a.len()).copied().unwrap_or(crate::netlist::GateId(0)),
            )
            .into());
        }
    }
    let patterns: Vec<u64> = live.iter().map(CamoAssignment::pattern).collect();
    let mut search = VectorSearch::new(camo_netlist, mode, max_vectors)?;
    search.next(camo_netlist, &patterns, k)
}

/// Output of the CAMO netlist for one vector under assignment `pattern`.
fn eval_pattern(netlist: &Netlist, k: usize, pattern: u64, input: &[bool], values: &mut [u64]) -> Result<Vec<bool>, AttackError> {
    let words: Vec<u64> = input.iter().map(|&b| b as u64).collect();
    netlist.simulate(&words, &or_mask(k, pattern), values)?;
    Ok(netlist
        .outputs()
        .iter()
        .map(|n| values[n.index()] & 1 == 1)
        .collect())
}

/// Runs the query loop to completion.
pub fn run_attack(
    camo_netlist: &Netlist,
    oracle: &mut dyn Oracle,
    mode: AttackMode,
    budget: AttackBudget,
) -> Result<AttackState, AttackError> {
    let k = check_k(camo_netlist)?;
    let mut search = VectorSearch::new(camo_netlist, mode, budget.max_vectors)?;
    let mut state = AttackState {
        camo_count: k,
        live: (0..(1u64 << k)).collect(),
        queries: Vec::new(),
        status: AttackStatus::Running,
        vectors_examined: 0,
        diagnostics: None,
    };
    let mut values = vec![0u64; camo_netlist.num_nets()];

    while state.status == AttackStatus::Running {
        if state.live.len() == 1 {
            state.status = AttackStatus::Resolved;
            break;
        }
        if state.queries.len() >= budget.max_queries {
            state.status = AttackStatus::Ambiguous;
            state.diagnostics = Some(format!(
                "query budget of {} exhausted with {} live assignments",
                budget.max_queries,
                state.live.len()
            ));
            break;
        }
        let found = search.next(camo_netlist, &state.live, k)?;
        state.vectors_examined = search.examined;
        let Some(input) = found else {
            match mode {
                AttackMode::Exhaustive => state.status = AttackStatus::Resolved,
                AttackMode::Sampled { .. } => {
                    state.status = AttackStatus::Ambiguous;
                    state.diagnostics = Some(format!(
                        "no discriminating input within {} sampled vectors; {} live assignments remain",
                        budget.max_vectors,
                        state.live.len()
                    ));
                }
            }
            break;
        };
        let output = oracle.query(&input);
        if output.len() != camo_netlist.num_outputs() {
            return Err(AttackError::OracleWidth {
                expected: camo_netlist.num_outputs(),
                found: output.len(),
            });
        }
        let before = state.live.len();
        let mut kept = Vec::with_capacity(before);
        for &p in &state.live {
            if eval_pattern(camo_netlist, k, p, &input, &mut values)? == output {
                kept.push(p);
            }
        }
        if kept.is_empty() {
            return Err(AttackError::OracleInconsistent);
        }
        debug_assert!(kept.len() < before, "discriminating query must prune");
        state.live = kept;
        state.queries.push(Query {
            input,
            output,
            live_before: before,
            live_after: state.live.len(),
        });
    }
    Ok(state)
}
