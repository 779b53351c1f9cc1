//! Functional fingerprints of multi-output netlists.
//!
//! Vector `v` of an exhaustive space assigns bit `i` of `v` to primary input
//! `i`. Vectors are packed 64 per word, lane `j` of block `b` being vector
//! `64 * b + j`. Unused lanes of a partial final block are zero.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::netlist::{Netlist, NetlistError};

/// Largest input count accepted for exhaustive signatures.
pub const EXHAUSTIVE_INPUT_CAP: usize = 20;
pub const DEFAULT_SAMPLE_VECTORS: usize = 4096;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SignatureError {
    #[error("exhaustive signature needs at most {cap} inputs, netlist has {inputs}")]
    CapExceeded { inputs: usize, cap: usize },
    #[error("sampled signature needs at least one vector")]
    NoSamples,
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignatureMode {
    Exhaustive,
    Sampled { vectors: usize },
}

impl SignatureMode {
    pub fn sampled() -> Self {
        SignatureMode::Sampled {
            vectors: DEFAULT_SAMPLE_VECTORS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SignatureKind {
    Exhaustive,
    Sampled,
}

/// One word vector per output. Equal `Exhaustive` signatures mean identical
/// functions; equal `Sampled` signatures only mean agreement on the sample.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TruthSignature {
    pub mode: SignatureKind,
    pub num_inputs: usize,
    pub vectors: u64,
    pub sample_seed: Option<u64>,
    pub words: Vec<Vec<u64>>,
}

impl TruthSignature {
    pub fn is_exact(&self) -> bool {
        self.mode == SignatureKind::Exhaustive
    }

    /// Hex SHA-256 over the packed words, for compact reporting.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for out in &self.words {
            for w in out {
                h.update(w.to_le_bytes());
            }
            h.update(b"|");
        }
        hex::encode(h.finalize())
    }

    /// Output bits of vector `index` of the underlying space.
    pub fn bits_of(&self, index: u64) -> Vec<bool> {
        let (b, lane) = ((index / 64) as usize, index % 64);
        self.words.iter().map(|w| (w[b] >> lane) & 1 == 1).collect()
    }
}

/// The set of input vectors a signature is taken over.
#[derive(Debug, Clone)]
pub enum InputSpace {
    Exhaustive { num_inputs: usize },
    Sampled {
        num_inputs: usize,
        vectors: usize,
        seed: u64,
        /// `blocks[b][i]` is the word for input `i` in block `b`.
        blocks: Vec<Vec<u64>>,
    },
}

impl InputSpace {
    pub fn exhaustive(num_inputs: usize) -> Result<Self, SignatureError> {
        if num_inputs > EXHAUSTIVE_INPUT_CAP {
            return Err(SignatureError::CapExceeded {
                inputs: num_inputs,
                cap: EXHAUSTIVE_INPUT_CAP,
            });
        }
        Ok(InputSpace::Exhaustive { num_inputs })
    }

    /// Uniform vectors from ChaCha8 seeded with `seed` (`seed_from_u64`).
    /// Words are drawn block by block, input by input.
    pub fn sampled(num_inputs: usize, vectors: usize, seed: u64) -> Result<Self, SignatureError> {
        if vectors == 0 {
            return Err(SignatureError::NoSamples);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nblocks = vectors.div_ceil(64);
        let blocks = (0..nblocks)
            .map(|_| (0..num_inputs).map(|_| rng.next_u64()).collect())
            .collect();
        Ok(InputSpace::Sampled {
            num_inputs,
            vectors,
            seed,
            blocks,
        })
    }

    pub fn for_mode(num_inputs: usize, mode: SignatureMode, seed: u64) -> Result<Self, SignatureError> {
        match mode {
            SignatureMode::Exhaustive => Self::exhaustive(num_inputs),
            SignatureMode::Sampled { vectors } => Self::sampled(num_inputs, vectors, seed),
        }
    }

    pub fn num_inputs(&self) -> usize {
        match self {
            InputSpace::Exhaustive { num_inputs } | InputSpace::Sampled { num_inputs, .. } => {
                *num_inputs
            }
        }
    }

    pub fn num_vectors(&self) -> u64 {
        match self {
            InputSpace::Exhaustive { num_inputs } => 1u64 << num_inputs,
            InputSpace::Sampled { vectors, .. } => *vectors as u64,
        }
    }

    pub fn num_blocks(&self) -> usize {
        self.num_vectors().div_ceil(64) as usize
    }

    /// Mask of lanes that carry real vectors in block `b`.
    pub fn lane_mask(&self, b: usize) -> u64 {
        let total = self.num_vectors();
        let start = b as u64 * 64;
        let live = (total - start).min(64);
        if live == 64 {
            !0
        } else {
            (1u64 << live) - 1
        }
    }

    /// Input words for block `b`.
    pub fn block(&self, b: usize) -> Vec<u64> {
        match self {
            InputSpace::Exhaustive { num_inputs } => exhaustive_block(*num_inputs, b),
            InputSpace::Sampled { blocks, .. } => blocks[b].clone(),
        }
    }

    /// The input vector carried by `lane` of block `b`.
    pub fn vector(&self, b: usize, lane: u32) -> Vec<bool> {
        self.block(b).iter().map(|w| (w >> lane) & 1 == 1).collect()
    }

    fn kind(&self) -> (SignatureKind, Option<u64>) {
        match self {
            InputSpace::Exhaustive { .. } => (SignatureKind::Exhaustive, None),
            InputSpace::Sampled { seed, .. } => (SignatureKind::Sampled, Some(*seed)),
        }
    }
}

const LOW_PATTERNS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

pub(crate) fn exhaustive_block(num_inputs: usize, b: usize) -> Vec<u64> {
    (0..num_inputs)
        .map(|i| {
            if i < 6 {
                LOW_PATTERNS[i]
            } else if (b >> (i - 6)) & 1 == 1 {
                !0
            } else {
                0
            }
        })
        .collect()
}

/// Signature of `netlist` with CAMO cells resolved by `camo_is_or`.
pub(crate) fn signature_over(
    netlist: &Netlist,
    space: &InputSpace,
    camo_is_or: &[bool],
) -> Result<TruthSignature, SignatureError> {
    let nblocks = space.num_blocks();
    let per_block: Vec<Vec<u64>> = (0..nblocks)
        .into_par_iter()
        .map_init(
            || vec![0u64; netlist.num_nets()],
            |values, b| {
                netlist.simulate(&space.block(b), camo_is_or, values)?;
                let mask = space.lane_mask(b);
                Ok(netlist
                    .outputs()
                    .iter()
                    .map(|n| values[n.index()] & mask)
                    .collect())
            },
        )
        .collect::<Result<_, NetlistError>>()?;
    let mut words = vec![Vec::with_capacity(nblocks); netlist.num_outputs()];
    for block in per_block {
        for (out, w) in words.iter_mut().zip(block) {
            out.push(w);
        }
    }
    let (mode, sample_seed) = space.kind();
    Ok(TruthSignature {
        mode,
        num_inputs: space.num_inputs(),
        vectors: space.num_vectors(),
        sample_seed,
        words,
    })
}

/// Fingerprint of a CAMO-free netlist.
pub fn signature(
    netlist: &Netlist,
    mode: SignatureMode,
    seed: u64,
) -> Result<TruthSignature, SignatureError> {
    if let Some(g) = netlist.camo_gates().first() {
        return Err(NetlistError::UnresolvedCamo(*g).into());
    }
    let space = InputSpace::for_mode(netlist.num_inputs(), mode, seed)?;
    signature_over(netlist, &space, &[])
}
