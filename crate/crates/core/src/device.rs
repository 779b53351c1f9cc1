//! Threshold-voltage cell model: pass-gate cascades, INV1 trip point, the
//! AND/OR separability window and PVT corner sweeps.
//!
//! Units are volts, kelvin and nanometers throughout. The default threshold
//! voltages are placeholders for a 22 nm dual-Vth process and should be
//! overridden with characterized values when available.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub const DEVICE_SCHEMA: &str = "camoforge-device-v1";
/// Reference temperature of the nominal threshold voltages.
pub const NOMINAL_TEMPERATURE: f64 = 300.0;

#[derive(Debug, Error, PartialEq)]
pub enum DeviceError {
    #[error("invalid device parameters: {0}")]
    Params(String),
    #[error("stage count must be at least 1")]
    NoStages,
    #[error("subthreshold offset {offset} V must be below vth {vth} V")]
    OffsetTooLarge { offset: f64, vth: f64 },
    #[error("transistor widths must be positive")]
    Width,
    #[error("width range must satisfy 0 < lo <= hi with a positive step")]
    WidthRange,
    #[error("unsupported device schema `{0}`")]
    Schema(String),
    #[error("malformed device JSON: {0}")]
    Json(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Flavor {
    Low,
    High,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::Low => "LOW",
            Flavor::High => "HIGH",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DeviceParams<T: Scalar> {
    pub vdd: T,
    pub vth_low: T,
    pub vth_high: T,
    /// Absolute 3-sigma threshold spread.
    pub delta_vth: T,
    /// Relative threshold spread, as a fraction of the nominal vth.
    pub vth_process_pct: T,
    pub temp_range: (T, T),
    pub vdd_range: (T, T),
    /// Threshold drop per kelvin above 300 K.
    pub temp_coeff: T,
    /// Extra voltage retained per cascade stage by subthreshold conduction.
    pub subthreshold_offset: T,
    /// Node X level for the low-Vth (logic 1) cell.
    pub node_x_high: T,
    /// Node X level for the high-Vth (logic 0) cell.
    pub node_x_low: T,
}

impl<T: Scalar> Default for DeviceParams<T> {
    fn default() -> Self {
        let l = T::lit;
        DeviceParams {
            vdd: l(1.0),
            vth_low: l(0.25),
            vth_high: l(0.50),
            delta_vth: l(0.09),
            vth_process_pct: l(0.15),
            temp_range: (l(273.0), l(373.0)),
            vdd_range: (l(0.85), l(1.15)),
            temp_coeff: l(0.0008),
            subthreshold_offset: l(0.05),
            node_x_high: l(0.45),
            node_x_low: l(0.11),
        }
    }
}

impl<T: Scalar> DeviceParams<T> {
    // negated comparisons so that NaN fields fail
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), DeviceError> {
        let bad = |m: &str| Err(DeviceError::Params(m.into()));
        let z = T::zero();
        if !(z < self.vth_low && self.vth_low < self.vth_high && self.vth_high < self.vdd) {
            return bad("require 0 < vth_low < vth_high < vdd");
        }
        if !(self.node_x_low < self.node_x_high) {
            return bad("require node_x_low < node_x_high");
        }
        if !(self.temp_range.0 <= self.temp_range.1) || !(self.vdd_range.0 <= self.vdd_range.1) {
            return bad("ranges must be non-empty");
        }
        if !(self.vdd_range.0 > z) {
            return bad("vdd range must be positive");
        }
        if !(self.delta_vth >= z && self.vth_process_pct >= z && self.subthreshold_offset >= z) {
            return bad("spreads and offsets must be non-negative");
        }
        Ok(())
    }

    pub fn vth(&self, flavor: Flavor) -> T {
        match flavor {
            Flavor::Low => self.vth_low,
            Flavor::High => self.vth_high,
        }
    }
}

/// INV1 sizing. Strengths scale as width times per-width transconductance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct InverterGeometry<T: Scalar> {
    pub wn: T,
    pub wp: T,
    /// NMOS over PMOS transconductance per unit width.
    pub kn_over_kp_per_width: T,
    pub nmos_flavor: Flavor,
    pub pmos_flavor: Flavor,
}

impl<T: Scalar> Default for InverterGeometry<T> {
    fn default() -> Self {
        InverterGeometry {
            wn: T::lit(80.0),
            wp: T::lit(300.0),
            kn_over_kp_per_width: T::lit(2.0),
            nmos_flavor: Flavor::Low,
            pmos_flavor: Flavor::High,
        }
    }
}

impl<T: Scalar> InverterGeometry<T> {
    /// NMOS drive over PMOS drive.
    pub fn beta_ratio(&self) -> T {
        self.wn * self.kn_over_kp_per_width / self.wp
    }

    pub fn with_wn(mut self, wn: T) -> Self {
        self.wn = wn;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DeviceConfig<T: Scalar> {
    pub params: DeviceParams<T>,
    pub geometry: InverterGeometry<T>,
}

impl<T: Scalar> Default for DeviceConfig<T> {
    fn default() -> Self {
        DeviceConfig {
            params: DeviceParams::default(),
            geometry: InverterGeometry::default(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct DeviceDoc<T: Scalar> {
    schema: String,
    params: DeviceParams<T>,
    geometry: InverterGeometry<T>,
}

impl<T: Scalar> DeviceConfig<T> {
    pub fn to_json(&self) -> String {
        let doc = DeviceDoc {
            schema: DEVICE_SCHEMA.to_owned(),
            params: self.params,
            geometry: self.geometry,
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("device serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, DeviceError> {
        let doc: DeviceDoc<T> =
            serde_json::from_str(text).map_err(|e| DeviceError::Json(e.to_string()))?;
        if doc.schema != DEVICE_SCHEMA {
            return Err(DeviceError::Schema(doc.schema));
        }
        doc.params.validate()?;
        Ok(DeviceConfig {
            params: doc.params,
            geometry: doc.geometry,
        })
    }
}

fn cascade_with<T: Scalar>(vdd: T, vth: T, n: usize) -> Vec<T> {
    (1..=n)
        .map(|i| (vdd - T::lit(i as f64) * vth).max(T::zero()))
        .collect()
}

/// Ideal output of `n` stacked pass gates: `max(0, vdd - i * vth)`.
pub fn cascade_ideal<T: Scalar>(params: &DeviceParams<T>, n: usize, flavor: Flavor) -> Result<Vec<T>, DeviceError> {
    if n == 0 {
        return Err(DeviceError::NoStages);
    }
    Ok(cascade_with(params.vdd, params.vth(flavor), n))
}

fn corrected_stages<T: Scalar>(vdd: T, vth: T, offset: T, n: usize) -> Result<Vec<T>, DeviceError> {
    if n == 0 {
        return Err(DeviceError::NoStages);
    }
    if offset >= vth {
        return Err(DeviceError::OffsetTooLarge {
            offset: offset.as_f64(),
            vth: vth.as_f64(),
        });
    }
    Ok((1..=n)
        .map(|i| {
            let v = vdd - T::lit(i as f64) * (vth - offset);
            v.max(T::zero()).min(vdd)
        })
        .collect())
}

/// Cascade with each stage retaining `subthreshold_offset` more than the
/// ideal law, clamped to `[0, vdd]`.
pub fn cascade_corrected<T: Scalar>(
    params: &DeviceParams<T>,
    n: usize,
    flavor: Flavor,
) -> Result<Vec<T>, DeviceError> {
    corrected_stages(params.vdd, params.vth(flavor), params.subthreshold_offset, n)
}

fn trip_point<T: Scalar>(vdd: T, vtn: T, vtp_abs: T, geom: &InverterGeometry<T>) -> T {
    let r = (geom.wp / (geom.wn * geom.kn_over_kp_per_width)).sqrt();
    (vtn + r * (vdd - vtp_abs)) / (T::one() + r)
}

/// Square-law switching threshold of INV1 with both devices saturated.
pub fn inverter_trip_point<T: Scalar>(params: &DeviceParams<T>, geom: &InverterGeometry<T>) -> Result<T, DeviceError> {
    check_geometry(geom)?;
    Ok(trip_point(
        params.vdd,
        params.vth(geom.nmos_flavor),
        params.vth(geom.pmos_flavor),
        geom,
    ))
}

fn check_geometry<T: Scalar>(geom: &InverterGeometry<T>) -> Result<(), DeviceError> {
    let z = T::zero();
    if geom.wn > z && geom.wp > z && geom.kn_over_kp_per_width > z {
        Ok(())
    } else {
        Err(DeviceError::Width)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct RobustnessVerdict<T: Scalar> {
    pub holds: bool,
    /// Worst-case low threshold, `vth_low + delta_vth`.
    pub low_bound: T,
    /// Worst-case high threshold, `vth_high - delta_vth`.
    pub high_bound: T,
    pub margin: T,
}

/// Whether the shifted low and high thresholds stay separated.
pub fn robustness_condition<T: Scalar>(params: &DeviceParams<T>) -> RobustnessVerdict<T> {
    let low_bound = params.vth_low + params.delta_vth;
    let high_bound = params.vth_high - params.delta_vth;
    RobustnessVerdict {
        holds: low_bound < high_bound,
        low_bound,
        high_bound,
        margin: high_bound - low_bound,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessSpread {
    /// `vth_process_pct * vth`.
    #[default]
    Relative,
    /// `delta_vth`.
    Absolute,
}

impl std::str::FromStr for ProcessSpread {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "relative" | "pct" => Ok(ProcessSpread::Relative),
            "absolute" | "delta" => Ok(ProcessSpread::Absolute),
            _ => Err(format!("unknown spread convention `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct Corner<T: Scalar> {
    pub vdd: T,
    pub temperature: T,
    /// Process shift sign: -1 fast, 0 typical, +1 slow.
    pub process: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct CornerGrid<T: Scalar> {
    pub corners: Vec<Corner<T>>,
}

impl<T: Scalar> CornerGrid<T> {
    /// `{min, nominal, max}` supply by `{min, 300 K, max}` temperature by
    /// `{-1, 0, +1}` process shift.
    pub fn from_params(params: &DeviceParams<T>) -> Self {
        let vdds = [params.vdd_range.0, params.vdd, params.vdd_range.1];
        let temps = [params.temp_range.0, T::lit(NOMINAL_TEMPERATURE), params.temp_range.1];
        let mut corners = Vec::with_capacity(27);
        for &vdd in &vdds {
            for &temperature in &temps {
                for process in [-1i8, 0, 1] {
                    corners.push(Corner {
                        vdd,
                        temperature,
                        process,
                    });
                }
            }
        }
        CornerGrid { corners }
    }
}

/// Threshold voltage of `flavor` at `corner`.
pub fn corner_vth<T: Scalar>(params: &DeviceParams<T>, flavor: Flavor, corner: &Corner<T>, spread: ProcessSpread) -> T {
    let nominal = params.vth(flavor);
    let delta = match spread {
        ProcessSpread::Relative => params.vth_process_pct * nominal,
        ProcessSpread::Absolute => params.delta_vth,
    };
    nominal + T::lit(f64::from(corner.process)) * delta
        - params.temp_coeff * (corner.temperature - T::lit(NOMINAL_TEMPERATURE))
}

fn stage_one<T: Scalar>(vdd: T, vth: T, offset: T) -> T {
    let v = vdd - (vth - offset);
    v.max(T::zero()).min(vdd)
}

/// Node X levels `(logic0, logic1)` at a corner. The nominal levels are scaled
/// by the ratio of the corner's first-stage voltage to the nominal one.
pub fn node_levels<T: Scalar>(params: &DeviceParams<T>, corner: &Corner<T>, spread: ProcessSpread) -> (T, T) {
    let off = params.subthreshold_offset;
    let scaled = |flavor: Flavor, nominal_level: T| {
        let base = stage_one(params.vdd, params.vth(flavor), off);
        let here = stage_one(corner.vdd, corner_vth(params, flavor, corner, spread), off);
        if base > T::zero() {
            nominal_level * here / base
        } else {
            nominal_level
        }
    };
    (
        scaled(Flavor::High, params.node_x_low),
        scaled(Flavor::Low, params.node_x_high),
    )
}

/// Trip point at a corner.
pub fn corner_trip_point<T: Scalar>(
    params: &DeviceParams<T>,
    geom: &InverterGeometry<T>,
    corner: &Corner<T>,
    spread: ProcessSpread,
) -> T {
    trip_point(
        corner.vdd,
        corner_vth(params, geom.nmos_flavor, corner, spread),
        corner_vth(params, geom.pmos_flavor, corner, spread),
        geom,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct WidthRange<T: Scalar> {
    pub lo: T,
    pub hi: T,
    pub step: T,
}

impl<T: Scalar> Default for WidthRange<T> {
    fn default() -> Self {
        WidthRange {
            lo: T::lit(10.0),
            hi: T::lit(500.0),
            step: T::lit(5.0),
        }
    }
}

impl<T: Scalar> WidthRange<T> {
    pub fn widths(&self) -> Result<Vec<T>, DeviceError> {
        let z = T::zero();
        if !(self.lo > z && self.lo <= self.hi && self.step > z) {
            return Err(DeviceError::WidthRange);
        }
        let n = ((self.hi - self.lo) / self.step + T::lit(1e-6))
            .floor()
            .to_usize()
            .ok_or(DeviceError::WidthRange)?;
        Ok((0..=n).map(|i| self.lo + T::lit(i as f64) * self.step).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct SweepRow<T: Scalar> {
    pub width_nm: T,
    pub corner: usize,
    pub vdd_v: T,
    pub temperature_k: T,
    pub process: i8,
    pub vm_v: T,
    pub logic0_level_v: T,
    pub logic1_level_v: T,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct SweepResult<T: Scalar> {
    pub spread: ProcessSpread,
    pub robustness: RobustnessVerdict<T>,
    pub corners: Vec<Corner<T>>,
    pub rows: Vec<SweepRow<T>>,
    /// Widths that pass at every corner, ascending.
    pub feasible_widths: Vec<T>,
    /// Longest run of consecutive feasible grid widths, as `(lo, hi)`.
    pub feasible_interval: Option<(T, T)>,
    /// Whether the feasible widths form a single run.
    pub contiguous: bool,
}

impl<T: Scalar> SweepResult<T> {
    pub fn contains(&self, width: T) -> bool {
        self.feasible_interval
            .is_some_and(|(lo, hi)| lo <= width && width <= hi)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "width_nm",
            "corner",
            "vdd_v",
            "temperature_k",
            "process",
            "vm_v",
            "logic0_level_v",
            "logic1_level_v",
            "feasible",
        ])
        .expect("csv header");
        for r in &self.rows {
            w.write_record([
                format!("{}", r.width_nm),
                r.corner.to_string(),
                format!("{}", r.vdd_v),
                format!("{}", r.temperature_k),
                r.process.to_string(),
                format!("{:.6}", r.vm_v.as_f64()),
                format!("{:.6}", r.logic0_level_v.as_f64()),
                format!("{:.6}", r.logic1_level_v.as_f64()),
                r.feasible.to_string(),
            ])
            .expect("csv row");
        }
        String::from_utf8(w.into_inner().expect("csv flush")).expect("csv utf8")
    }
}

/// Evaluates INV1 at every width and corner. A width is feasible when the
/// separability condition holds and, at every corner, the trip point lies
/// strictly between the logic-0 and logic-1 node levels.
pub fn corner_sweep<T: Scalar>(
    params: &DeviceParams<T>,
    geom: &InverterGeometry<T>,
    range: &WidthRange<T>,
    grid: &CornerGrid<T>,
    spread: ProcessSpread,
) -> Result<SweepResult<T>, DeviceError> {
    params.validate()?;
    let widths = range.widths()?;
    check_geometry(&geom.with_wn(widths[0]))?;
    let robustness = robustness_condition(params);
    let levels: Vec<(T, T)> = grid
        .corners
        .iter()
        .map(|c| node_levels(params, c, spread))
        .collect();
    let per_width: Vec<(Vec<SweepRow<T>>, bool)> = widths
        .par_iter()
        .map(|&w| {
            let g = geom.with_wn(w);
            let rows: Vec<SweepRow<T>> = grid
                .corners
                .iter()
                .zip(&levels)
                .enumerate()
                .map(|(i, (c, &(l0, l1)))| {
                    let vm = corner_trip_point(params, &g, c, spread);
                    SweepRow {
                        width_nm: w,
                        corner: i,
                        vdd_v: c.vdd,
                        temperature_k: c.temperature,
                        process: c.process,
                        vm_v: vm,
                        logic0_level_v: l0,
                        logic1_level_v: l1,
                        feasible: robustness.holds && l0 < vm && vm < l1,
                    }
                })
                .collect();
            let ok = rows.iter().all(|r| r.feasible);
            (rows, ok)
        })
        .collect();

    let mut rows = Vec::with_capacity(widths.len() * grid.corners.len());
    let mut feasible_widths = Vec::new();
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (i, (r, ok)) in per_width.into_iter().enumerate() {
        rows.extend(r);
        if ok {
            feasible_widths.push(widths[i]);
            match runs.last_mut() {
                Some(run) if run.1 + 1 == i => run.1 = i,
                _ => runs.push((i, i)),
            }
        }
    }
    let best = runs
        .iter()
        .copied()
        .reduce(|a, b| if b.1 - b.0 > a.1 - a.0 { b } else { a });
    Ok(SweepResult {
        spread,
        robustness,
        corners: grid.corners.clone(),
        rows,
        feasible_widths,
        feasible_interval: best.map(|(a, b)| (widths[a], widths[b])),
        contiguous: runs.len() <= 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> DeviceParams<f64> {
        DeviceParams::default()
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn ideal_cascade() {
        let v = cascade_ideal(&p(), 4, Flavor::Low).unwrap();
        assert!(close(&v, &[0.75, 0.5, 0.25, 0.0]));
        assert_eq!(cascade_ideal(&p(), 0, Flavor::Low), Err(DeviceError::NoStages));
    }

    #[test]
    fn flavor_ordering() {
        let params = DeviceParams {
            vth_low: 0.2,
            vth_high: 0.3,
            ..p()
        };
        let hi = cascade_ideal(&params, 2, Flavor::High).unwrap();
        let lo = cascade_ideal(&params, 2, Flavor::Low).unwrap();
        assert!(close(&hi, &[0.7, 0.4]));
        assert!(close(&lo, &[0.8, 0.6]));
    }

    #[test]
    fn corrected_cascade() {
        let v = cascade_corrected(&p(), 2, Flavor::Low).unwrap();
        assert!(close(&v, &[0.8, 0.6]));
        let zero = DeviceParams {
            subthreshold_offset: 0.0,
            ..p()
        };
        assert_eq!(
            cascade_corrected(&zero, 5, Flavor::High).unwrap(),
            cascade_ideal(&zero, 5, Flavor::High).unwrap()
        );
        let big = DeviceParams {
            subthreshold_offset: 0.25,
            ..p()
        };
        assert!(matches!(
            cascade_corrected(&big, 2, Flavor::Low),
            Err(DeviceError::OffsetTooLarge { .. })
        ));
    }

    #[test]
    fn symmetric_trip_point() {
        let params = DeviceParams {
            vth_low: 0.3,
            vth_high: 0.3 + 1e-9,
            ..p()
        };
        let geom = InverterGeometry {
            wn: 100.0,
            wp: 100.0,
            kn_over_kp_per_width: 1.0,
            nmos_flavor: Flavor::Low,
            pmos_flavor: Flavor::Low,
        };
        assert!((inverter_trip_point(&params, &geom).unwrap() - 0.5).abs() < 1e-12);
        let wider = geom.with_wn(200.0);
        assert!(inverter_trip_point(&params, &wider).unwrap() < 0.5);
        assert_eq!(
            inverter_trip_point(&params, &geom.with_wn(0.0)),
            Err(DeviceError::Width)
        );
    }

    #[test]
    fn default_trip_point_in_window() {
        let vm = inverter_trip_point(&p(), &InverterGeometry::default()).unwrap();
        assert!(0.11 < vm && vm < 0.45, "vm={vm}");
    }

    #[test]
    fn robustness_examples() {
        let base = DeviceParams {
            vth_low: 0.2,
            vth_high: 0.5,
            ..p()
        };
        let v = robustness_condition(&DeviceParams { delta_vth: 0.09, ..base });
        assert!(v.holds);
        assert!((v.low_bound - 0.29).abs() < 1e-12 && (v.high_bound - 0.41).abs() < 1e-12);
        assert!(!robustness_condition(&DeviceParams { delta_vth: 0.16, ..base }).holds);
    }

    #[test]
    fn default_grid_has_27_corners() {
        let g = CornerGrid::from_params(&p());
        assert_eq!(g.corners.len(), 27);
        let typical = g
            .corners
            .iter()
            .filter(|c| c.process == 0 && c.vdd == 1.0 && c.temperature == 300.0)
            .count();
        assert_eq!(typical, 1);
    }

    #[test]
    fn nominal_corner_reproduces_node_levels() {
        let c = Corner {
            vdd: 1.0,
            temperature: 300.0,
            process: 0,
        };
        let (l0, l1) = node_levels(&p(), &c, ProcessSpread::Relative);
        assert!((l0 - 0.11).abs() < 1e-12 && (l1 - 0.45).abs() < 1e-12);
    }

    #[test]
    fn default_sweep_contains_nominal_width() {
        let params = p();
        let grid = CornerGrid::from_params(&params);
        for spread in [ProcessSpread::Relative, ProcessSpread::Absolute] {
            let r = corner_sweep(&params, &InverterGeometry::default(), &WidthRange::default(), &grid, spread)
                .unwrap();
            assert!(r.contiguous, "{spread:?}");
            assert!(r.contains(80.0), "{spread:?} {:?}", r.feasible_interval);
            assert_eq!(r.rows.len(), 99 * 27);
        }
    }

    #[test]
    fn failing_separability_empties_sweep() {
        let params = DeviceParams { delta_vth: 0.2, ..p() };
        let grid = CornerGrid::from_params(&params);
        let r = corner_sweep(
            &params,
            &InverterGeometry::default(),
            &WidthRange::default(),
            &grid,
            ProcessSpread::Absolute,
        )
        .unwrap();
        assert!(!r.robustness.holds);
        assert_eq!(r.feasible_interval, None);
        assert!(r.feasible_widths.is_empty());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let params = p();
        let grid = CornerGrid::from_params(&params);
        let range = WidthRange {
            lo: 50.0,
            hi: 60.0,
            step: 5.0,
        };
        let r = corner_sweep(&params, &InverterGeometry::default(), &range, &grid, ProcessSpread::Relative).unwrap();
        let csv = r.to_csv();
        assert!(csv.starts_with("width_nm,corner,"));
        assert_eq!(csv.lines().count(), 1 + 3 * 27);
    }

    #[test]
    fn device_json_round_trip() {
        let cfg = DeviceConfig::<f64>::default();
        let back = DeviceConfig::<f64>::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        assert!(matches!(
            DeviceConfig::<f64>::from_json("{\"schema\":\"nope\"}"),
            Err(DeviceError::Json(_))
        ));
    }

    #[test]
    fn f32_sweep_runs() {
        let params = DeviceParams::<f32>::default();
        let grid = CornerGrid::from_params(&params);
        let r = corner_sweep(
            &params,
            &InverterGeometry::default(),
            &WidthRange::default(),
            &grid,
            ProcessSpread::Relative,
        )
        .unwrap();
        assert!(r.contains(80.0));
    }
}
