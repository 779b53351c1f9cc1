//! Additive gate-delay timing and per-gate power accounting.
//!
//! This is a first-order estimator: no wire load, slew, or switching
//! activity. CAMO cells are costed by the camouflaged entry matching the
//! function they resolve to.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::camo::{apply_camouflage, select_random, CamoAssignment, CamoChoice, CamoError, CamoPlan};
use crate::netlist::{Driver, GateId, GateKind, Netlist, VthFlavor};
use crate::scalar::Scalar;

pub const CHARS_SCHEMA: &str = "camoforge-chars-v1";

/// Delay ratio of a camouflaged OR cell over a low-Vth domino OR.
pub const CAMO_OR_DELAY_RATIO: f64 = 5.16;
/// Delay ratio of a camouflaged AND cell over a high-Vth domino AND.
pub const CAMO_AND_DELAY_RATIO: f64 = 4.08;
pub const CAMO_AND_POWER_RATIO: f64 = 1.39;
pub const CAMO_OR_POWER_RATIO: f64 = 1.04;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("no characterization entry `{key}` for {gate}")]
    MissingCost { gate: GateId, key: String },
    #[error("{gate} ({kind}) has no Vth flavor assigned")]
    Unflavored { gate: GateId, kind: GateKind },
    #[error("assignment has {found} choices for {expected} CAMO cells")]
    AssignmentLength { expected: usize, found: usize },
    #[error("characterization entry `{0}` is negative or not finite")]
    InvalidCost(String),
    #[error("CONST entry must have zero delay and power")]
    ConstCost,
    #[error("camouflaged netlist does not derive from the baseline via the plan")]
    Mismatch,
    #[error("unsupported characterization schema `{0}`")]
    Schema(String),
    #[error("malformed characterization JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Camo(#[from] CamoError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CellKey {
    #[serde(rename = "AND2@HIGH")]
    And2High,
    #[serde(rename = "AND2@LOW")]
    And2Low,
    #[serde(rename = "OR2@LOW")]
    Or2Low,
    #[serde(rename = "OR2@HIGH")]
    Or2High,
    #[serde(rename = "CAMO_AND@HIGH")]
    CamoAnd,
    #[serde(rename = "CAMO_OR@LOW")]
    CamoOr,
    #[serde(rename = "INV")]
    Inv,
    #[serde(rename = "CONST")]
    Const,
}

impl CellKey {
    pub fn name(self) -> &'static str {
        match self {
            CellKey::And2High => "AND2@HIGH",
            CellKey::And2Low => "AND2@LOW",
            CellKey::Or2Low => "OR2@LOW",
            CellKey::Or2High => "OR2@HIGH",
            CellKey::CamoAnd => "CAMO_AND@HIGH",
            CellKey::CamoOr => "CAMO_OR@LOW",
            CellKey::Inv => "INV",
            CellKey::Const => "CONST",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CellCost<T: Scalar> {
    pub delay: T,
    pub power: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CellCharacterization<T: Scalar> {
    pub cells: BTreeMap<CellKey, CellCost<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct CharsDoc<T: Scalar> {
    schema: String,
    cells: BTreeMap<CellKey, CellCost<T>>,
}

impl<T: Scalar> Default for CellCharacterization<T> {
    /// Unit baseline AND2/OR2 cells, 0.2-unit PI inverters, and camouflaged
    /// cells scaled by the measured delay and power ratios.
    fn default() -> Self {
        let c = |d: f64, p: f64| CellCost {
            delay: T::lit(d),
            power: T::lit(p),
        };
        let cells = BTreeMap::from([
            (CellKey::And2High, c(1.0, 1.0)),
            (CellKey::Or2Low, c(1.0, 1.0)),
            (CellKey::CamoAnd, c(CAMO_AND_DELAY_RATIO, CAMO_AND_POWER_RATIO)),
            (CellKey::CamoOr, c(CAMO_OR_DELAY_RATIO, CAMO_OR_POWER_RATIO)),
            (CellKey::Inv, c(0.2, 0.2)),
            (CellKey::Const, c(0.0, 0.0)),
        ]);
        CellCharacterization { cells }
    }
}

impl<T: Scalar> CellCharacterization<T> {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        for (key, cost) in &self.cells {
            let ok = |v: T| v.is_finite() && v >= T::zero();
            if !ok(cost.delay) || !ok(cost.power) {
                return Err(AnalysisError::InvalidCost(key.name().into()));
            }
        }
        if let Some(c) = self.cells.get(&CellKey::Const) {
            if c.delay != T::zero() || c.power != T::zero() {
                return Err(AnalysisError::ConstCost);
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let doc = CharsDoc {
            schema: CHARS_SCHEMA.to_owned(),
            cells: self.cells.clone(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("chars serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, AnalysisError> {
        let doc: CharsDoc<T> =
            serde_json::from_str(text).map_err(|e| AnalysisError::Json(e.to_string()))?;
        if doc.schema != CHARS_SCHEMA {
            return Err(AnalysisError::Schema(doc.schema));
        }
        let chars = CellCharacterization { cells: doc.cells };
        chars.validate()?;
        Ok(chars)
    }

    /// Largest camouflaged-over-baseline delay ratio in the table.
    pub fn max_delay_ratio(&self) -> Option<T> {
        let pairs = [
            (CellKey::CamoOr, CellKey::Or2Low),
            (CellKey::CamoAnd, CellKey::And2High),
        ];
        pairs
            .iter()
            .filter_map(|(c, b)| Some(self.cells.get(c)?.delay / self.cells.get(b)?.delay))
            .fold(None, |acc: Option<T>, r| Some(acc.map_or(r, |a| a.max(r))))
    }
}

fn cell_key(netlist: &Netlist, gate: GateId, choice: Option<CamoChoice>) -> Result<CellKey, AnalysisError> {
    let g = netlist.gate(gate);
    let unflavored = || AnalysisError::Unflavored {
        gate,
        kind: g.kind,
    };
    Ok(match (g.kind, g.vth_flavor) {
        (GateKind::And2, VthFlavor::High) => CellKey::And2High,
        (GateKind::And2, VthFlavor::Low) => CellKey::And2Low,
        (GateKind::Or2, VthFlavor::Low) => CellKey::Or2Low,
        (GateKind::Or2, VthFlavor::High) => CellKey::Or2High,
        (GateKind::And2 | GateKind::Or2, VthFlavor::Na) => return Err(unflavored()),
        (GateKind::Camo, _) => match choice.expect("camo choice supplied") {
            CamoChoice::And => CellKey::CamoAnd,
            CamoChoice::Or => CellKey::CamoOr,
        },
        (GateKind::Inv, _) => CellKey::Inv,
        (GateKind::Const0 | GateKind::Const1, _) => CellKey::Const,
    })
}

/// Per-gate cost, indexed by gate id.
pub fn gate_costs<T: Scalar>(
    netlist: &Netlist,
    assignment: &CamoAssignment,
    chars: &CellCharacterization<T>,
) -> Result<Vec<CellCost<T>>, AnalysisError> {
    if assignment.len() != netlist.camo_count() {
        return Err(AnalysisError::AssignmentLength {
            expected: netlist.camo_count(),
            found: assignment.len(),
        });
    }
    let mut camo_iter = assignment.0.iter();
    netlist
        .gates()
        .iter()
        .map(|g| {
            let choice = (g.kind == GateKind::Camo).then(|| *camo_iter.next().expect("length checked"));
            let key = cell_key(netlist, g.id, choice)?;
            chars
                .cells
                .get(&key)
                .copied()
                .ok_or_else(|| AnalysisError::MissingCost {
                    gate: g.id,
                    key: key.name().into(),
                })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct CriticalPath<T: Scalar> {
    pub delay: T,
    /// Gates from the input side to the output.
    pub path: Vec<GateId>,
}

/// Longest path by dynamic programming over the topological order. Ties
/// prefer the fan-in (or output) driven by the smallest gate id; gate-driven
/// nets win over primary inputs at equal arrival.
pub fn longest_path<T: Scalar>(netlist: &Netlist, delays: &[T]) -> CriticalPath<T> {
    let mut arrival = vec![T::zero(); netlist.num_nets()];
    let mut via: Vec<Option<GateId>> = vec![None; netlist.gates().len()];
    let rank = |net: crate::netlist::NetId| match netlist.driver(net) {
        Driver::Gate(g) => g.0 as u64,
        Driver::Input(_) => u64::MAX,
    };
    let pick = |nets: &mut dyn Iterator<Item = crate::netlist::NetId>, arrival: &[T]| {
        let mut best: Option<crate::netlist::NetId> = None;
        for n in nets {
            best = match best {
                None => Some(n),
                Some(b) => {
                    let (an, ab) = (arrival[n.index()], arrival[b.index()]);
                    if an > ab || (an == ab && rank(n) < rank(b)) {
                        Some(n)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        best
    };
    for &gi in netlist.topological_order() {
        let g = &netlist.gates()[gi];
        let start = match pick(&mut g.fanin.iter().copied(), &arrival) {
            Some(n) => {
                if let Driver::Gate(src) = netlist.driver(n) {
                    via[gi] = Some(src);
                }
                arrival[n.index()]
            }
            None => T::zero(),
        };
        arrival[g.output.index()] = start + delays[gi];
    }
    let Some(end) = pick(&mut netlist.outputs().iter().copied(), &arrival) else {
        return CriticalPath {
            delay: T::zero(),
            path: Vec::new(),
        };
    };
    let mut path = Vec::new();
    let mut cursor = match netlist.driver(end) {
        Driver::Gate(g) => Some(g),
        Driver::Input(_) => None,
    };
    while let Some(g) = cursor {
        path.push(g);
        cursor = via[g.index()];
    }
    path.reverse();
    CriticalPath {
        delay: arrival[end.index()],
        path,
    }
}

pub fn critical_path_delay<T: Scalar>(
    netlist: &Netlist,
    assignment: &CamoAssignment,
    chars: &CellCharacterization<T>,
) -> Result<CriticalPath<T>, AnalysisError> {
    let delays: Vec<T> = gate_costs(netlist, assignment, chars)?
        .iter()
        .map(|c| c.delay)
        .collect();
    Ok(longest_path(netlist, &delays))
}

pub fn total_power<T: Scalar>(
    netlist: &Netlist,
    assignment: &CamoAssignment,
    chars: &CellCharacterization<T>,
) -> Result<T, AnalysisError> {
    Ok(gate_costs(netlist, assignment, chars)?
        .iter()
        .fold(T::zero(), |acc, c| acc + c.power))
}

/// Clock constraint: PI inverters must settle within half a period, and the
/// evaluation network (inverter delays excluded) must settle within the
/// evaluate phase.
pub fn min_clock_constraint<T: Scalar>(netlist: &Netlist, costs: &[CellCost<T>]) -> T {
    let two = T::lit(2.0);
    let mut max_inv = T::zero();
    let eval: Vec<T> = netlist
        .gates()
        .iter()
        .zip(costs)
        .map(|(g, c)| {
            if g.kind == GateKind::Inv {
                max_inv = max_inv.max(c.delay);
                T::zero()
            } else {
                c.delay
            }
        })
        .collect();
    let eval_delay = longest_path(netlist, &eval).delay;
    (two * max_inv).max(eval_delay)
}

/// `(camo / baseline - 1) * 100`; zero when both are zero.
pub fn overhead_pct<T: Scalar>(baseline: T, camo: T) -> T {
    if baseline == T::zero() && camo == T::zero() {
        return T::zero();
    }
    (camo / baseline - T::one()) * T::lit(100.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct OverheadReport<T: Scalar> {
    pub baseline_delay: T,
    pub camo_delay: T,
    pub delay_overhead_pct: T,
    pub baseline_power: T,
    pub camo_power: T,
    pub power_overhead_pct: T,
    pub critical_path: Vec<GateId>,
    pub baseline_critical_path: Vec<GateId>,
    pub min_clock_constraint: T,
    pub camouflaged_gates: usize,
}

pub fn overhead_report<T: Scalar>(
    baseline: &Netlist,
    camo: &Netlist,
    plan: &CamoPlan,
    chars: &CellCharacterization<T>,
) -> Result<OverheadReport<T>, AnalysisError> {
    if &apply_camouflage(baseline, plan)? != camo {
        return Err(AnalysisError::Mismatch);
    }
    let base_costs = gate_costs(baseline, &CamoAssignment(Vec::new()), chars)?;
    let camo_costs = gate_costs(camo, &plan.true_assignment, chars)?;
    let delays = |c: &[CellCost<T>]| c.iter().map(|x| x.delay).collect::<Vec<_>>();
    let power = |c: &[CellCost<T>]| c.iter().fold(T::zero(), |a, x| a + x.power);
    let base_path = longest_path(baseline, &delays(&base_costs));
    let camo_path = longest_path(camo, &delays(&camo_costs));
    let (bp, cp) = (power(&base_costs), power(&camo_costs));
    Ok(OverheadReport {
        baseline_delay: base_path.delay,
        camo_delay: camo_path.delay,
        delay_overhead_pct: overhead_pct(base_path.delay, camo_path.delay),
        baseline_power: bp,
        camo_power: cp,
        power_overhead_pct: overhead_pct(bp, cp),
        critical_path: camo_path.path,
        baseline_critical_path: base_path.path,
        min_clock_constraint: min_clock_constraint(camo, &camo_costs),
        camouflaged_gates: plan.selected_gate_ids.len(),
    })
}

impl<T: Scalar> OverheadReport<T> {
    /// Aligned two-column text view.
    pub fn to_text(&self) -> String {
        let rows = [
            ("metric", "baseline".to_string(), "camouflaged".to_string(), "overhead".to_string()),
            (
                "delay",
                format!("{:.4}", self.baseline_delay.as_f64()),
                format!("{:.4}", self.camo_delay.as_f64()),
                format!("{:.2}%", self.delay_overhead_pct.as_f64()),
            ),
            (
                "power",
                format!("{:.4}", self.baseline_power.as_f64()),
                format!("{:.4}", self.camo_power.as_f64()),
                format!("{:.2}%", self.power_overhead_pct.as_f64()),
            ),
        ];
        let mut s = String::new();
        for (m, b, c, o) in rows {
            let _ = writeln!(s, "{m:<8} {b:>12} {c:>12} {o:>10}");
        }
        let _ = writeln!(s, "camouflaged gates: {}", self.camouflaged_gates);
        let _ = writeln!(s, "critical path: {} gates", self.critical_path.len());
        let _ = writeln!(
            s,
            "min clock constraint: {:.4} (additive gate-delay estimate)",
            self.min_clock_constraint.as_f64()
        );
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct SweepPoint<T: Scalar> {
    pub fraction: f64,
    pub seed: u64,
    pub camouflaged_gates: usize,
    pub delay_overhead_pct: T,
    pub power_overhead_pct: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct SweepSummary<T: Scalar> {
    pub fraction: f64,
    pub mean_delay_overhead_pct: T,
    pub min_delay_overhead_pct: T,
    pub max_delay_overhead_pct: T,
    pub mean_power_overhead_pct: T,
    pub min_power_overhead_pct: T,
    pub max_power_overhead_pct: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct SweepReport<T: Scalar> {
    pub points: Vec<SweepPoint<T>>,
    pub summary: Vec<SweepSummary<T>>,
}

/// Camouflage + analyze for every `(fraction, seed)` pair. Points are ordered
/// by fraction then seed regardless of scheduling.
pub fn overhead_sweep<T: Scalar>(
    baseline: &Netlist,
    fractions: &[f64],
    seeds: &[u64],
    chars: &CellCharacterization<T>,
) -> Result<SweepReport<T>, AnalysisError> {
    let pairs: Vec<(f64, u64)> = fractions
        .iter()
        .flat_map(|&f| seeds.iter().map(move |&s| (f, s)))
        .collect();
    let points: Vec<SweepPoint<T>> = pairs
        .par_iter()
        .map(|&(fraction, seed)| {
            let plan = select_random(baseline, fraction, seed)?;
            let camo = apply_camouflage(baseline, &plan)?;
            let r = overhead_report(baseline, &camo, &plan, chars)?;
            Ok(SweepPoint {
                fraction,
                seed,
                camouflaged_gates: r.camouflaged_gates,
                delay_overhead_pct: r.delay_overhead_pct,
                power_overhead_pct: r.power_overhead_pct,
            })
        })
        .collect::<Result<_, AnalysisError>>()?;
    let summary = fractions
        .iter()
        .map(|&fraction| {
            let pts: Vec<&SweepPoint<T>> = points.iter().filter(|p| p.fraction == fraction).collect();
            let n = T::lit(pts.len().max(1) as f64);
            let stat = |sel: &dyn Fn(&SweepPoint<T>) -> T| {
                let vals: Vec<T> = pts.iter().map(|p| sel(p)).collect();
                let sum = vals.iter().fold(T::zero(), |a, &v| a + v);
                let min = vals.iter().copied().fold(T::infinity(), T::min);
                let max = vals.iter().copied().fold(T::neg_infinity(), T::max);
                (sum / n, min, max)
            };
            let (md, lo_d, hi_d) = stat(&|p| p.delay_overhead_pct);
            let (mp, lo_p, hi_p) = stat(&|p| p.power_overhead_pct);
            SweepSummary {
                fraction,
                mean_delay_overhead_pct: md,
                min_delay_overhead_pct: lo_d,
                max_delay_overhead_pct: hi_d,
                mean_power_overhead_pct: mp,
                min_power_overhead_pct: lo_p,
                max_power_overhead_pct: hi_p,
            }
        })
        .collect();
    Ok(SweepReport { points, summary })
}
