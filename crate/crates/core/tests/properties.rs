mod common;

use camoforge::camo::{apply_camouflage, enumerate_candidates, resolve, select_random, CamoPlan};
use camoforge::device::{
    cascade_corrected, cascade_ideal, inverter_trip_point, robustness_condition, DeviceParams, Flavor,
    InverterGeometry,
};
use camoforge::netlist::{Driver, GateKind, Netlist};
use camoforge::overhead::{critical_path_delay, gate_costs, overhead_report, CellCharacterization};
use camoforge::pla::parse_pla;
use camoforge::signature::{signature, SignatureMode};
use camoforge::synth::{assign_vth_flavors, check_domino_compatible, synthesize, TreeShape};
use common::*;
use proptest::prelude::*;

fn small_netlist(seed: u64, ni: usize, no: usize, nc: usize) -> Netlist {
    assign_vth_flavors(&synthesize(&random_pla(seed, ni, no, nc), TreeShape::Balanced).0)
}

/// Longest path by enumerating every path backward from each output.
fn brute_longest(n: &Netlist, delays: &[f64]) -> f64 {
    fn from(n: &Netlist, delays: &[f64], g: usize) -> f64 {
        let inner = n.gates()[g]
            .fanin
            .iter()
            .filter_map(|&net| match n.driver(net) {
                Driver::Gate(src) => Some(from(n, delays, src.index())),
                Driver::Input(_) => None,
            })
            .fold(0.0, f64::max);
        delays[g] + inner
    }
    n.outputs()
        .iter()
        .filter_map(|&o| match n.driver(o) {
            Driver::Gate(g) => Some(from(n, delays, g.index())),
            Driver::Input(_) => None,
        })
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pla_round_trip(seed in any::<u64>()) {
        let pla = random_pla(seed, 10, 4, 20);
        let back = parse_pla(&pla.to_pla_string()).unwrap();
        prop_assert_eq!(back, pla);
    }

    #[test]
    fn synthesis_matches_cube_cover(seed in any::<u64>(), chain_tree in any::<bool>()) {
        let pla = random_pla(seed, 8, 3, 12);
        let shape = if chain_tree { TreeShape::Chain } else { TreeShape::Balanced };
        let (n, _) = synthesize(&pla, shape);
        prop_assert!(check_domino_compatible(&n).pass);
        for v in 0..1u64 << pla.num_inputs {
            let x = vector(pla.num_inputs, v);
            prop_assert_eq!(n.evaluate(&x).unwrap(), cube_eval(&pla, &x));
        }
    }

    #[test]
    fn resolve_round_trip(seed in any::<u64>(), fraction in 0.0f64..=1.0, sel in any::<u64>()) {
        let base = small_netlist(seed, 8, 3, 10);
        let plan = select_random(&base, fraction, sel).unwrap();
        let camo = apply_camouflage(&base, &plan).unwrap();
        let back = resolve(&camo, &plan.true_assignment).unwrap();
        prop_assert!(check_domino_compatible(&back).pass);
        prop_assert_eq!(
            signature(&back, SignatureMode::Exhaustive, 0).unwrap(),
            signature(&base, SignatureMode::Exhaustive, 0).unwrap()
        );
        prop_assert_eq!(table_ref(&camo, &plan.true_assignment.0), table_ref(&base, &[]));
    }

    #[test]
    fn selection_is_deterministic_and_nested(seed in any::<u64>(), sel in any::<u64>()) {
        let base = small_netlist(seed, 8, 3, 10);
        let small = select_random(&base, 0.3, sel).unwrap();
        let large = select_random(&base, 0.7, sel).unwrap();
        prop_assert_eq!(&small, &select_random(&base, 0.3, sel).unwrap());
        prop_assert!(small.selected_gate_ids.iter().all(|g| large.selected_gate_ids.contains(g)));
    }

    #[test]
    fn candidate_classes_partition_the_space(seed in any::<u64>(), k in 0usize..=5) {
        let base = small_netlist(seed, 6, 2, 8);
        let plan = CamoPlan::for_gates(&base, pick_gates(&base, k, seed ^ 0x5a)).unwrap();
        let camo = apply_camouflage(&base, &plan).unwrap();
        let k = camo.camo_count();
        let space = enumerate_candidates(&camo, SignatureMode::Exhaustive, 0).unwrap();
        prop_assert!(space.classes.len() as u64 <= 1 << k);
        prop_assert_eq!(space.classes.iter().map(|c| c.members).sum::<u64>(), 1 << k);
        for (i, c) in space.classes.iter().enumerate() {
            prop_assert_eq!(space.members(i)[0], c.representative.pattern());
        }
    }

    #[test]
    fn critical_path_matches_enumeration(seed in any::<u64>(), k in 0usize..=4) {
        let base = small_netlist(seed, 5, 2, 4);
        prop_assume!(base.gates().len() <= 15);
        let plan = CamoPlan::for_gates(&base, pick_gates(&base, k, seed)).unwrap();
        let camo = apply_camouflage(&base, &plan).unwrap();
        let chars = CellCharacterization::<f64>::default();
        let costs = gate_costs(&camo, &plan.true_assignment, &chars).unwrap();
        let delays: Vec<f64> = costs.iter().map(|c| c.delay).collect();
        let cp = critical_path_delay(&camo, &plan.true_assignment, &chars).unwrap();
        prop_assert!((cp.delay - brute_longest(&camo, &delays)).abs() < 1e-9);
        let along: f64 = cp.path.iter().map(|g| delays[g.index()]).sum();
        prop_assert!((along - cp.delay).abs() < 1e-9);
        for w in cp.path.windows(2) {
            let out = camo.gate(w[0]).output;
            prop_assert!(camo.gate(w[1]).fanin.contains(&out));
        }
    }

    #[test]
    fn overhead_monotone_in_nested_plans(seed in any::<u64>(), sel in any::<u64>()) {
        let base = small_netlist(seed, 8, 3, 12);
        let chars = CellCharacterization::<f64>::default();
        let mut last = (0.0, 0.0);
        for fraction in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let plan = select_random(&base, fraction, sel).unwrap();
            let camo = apply_camouflage(&base, &plan).unwrap();
            let r = overhead_report(&base, &camo, &plan, &chars).unwrap();
            prop_assert!(r.delay_overhead_pct >= last.0 && r.power_overhead_pct >= last.1);
            prop_assert!(r.delay_overhead_pct <= 416.0 + 1e-9 && r.power_overhead_pct <= 39.0 + 1e-9);
            last = (r.delay_overhead_pct, r.power_overhead_pct);
        }
    }

    #[test]
    fn cascade_laws(
        vdd in 0.5f64..1.5,
        lo_frac in 0.05f64..0.45,
        gap in 0.01f64..0.5,
        off_frac in 0.0f64..0.99,
        n in 1usize..10,
    ) {
        let vth_low = lo_frac * vdd;
        let vth_high = (vth_low + gap * vdd).min(0.99 * vdd);
        let p = DeviceParams {
            vdd,
            vth_low,
            vth_high,
            subthreshold_offset: off_frac * vth_low,
            ..DeviceParams::default()
        };
        for f in [Flavor::Low, Flavor::High] {
            let ideal = cascade_ideal(&p, n, f).unwrap();
            let corr = cascade_corrected(&p, n, f).unwrap();
            prop_assert!(ideal.windows(2).all(|w| w[1] <= w[0]));
            prop_assert!(corr.windows(2).all(|w| w[1] <= w[0]));
            prop_assert!(ideal.iter().all(|&v| v >= 0.0));
            prop_assert!(ideal.iter().zip(&corr).all(|(i, c)| i <= c && *c <= vdd));
        }
        let (l, h) = (cascade_corrected(&p, n, Flavor::Low).unwrap(), cascade_corrected(&p, n, Flavor::High).unwrap());
        prop_assert!(h.iter().zip(&l).all(|(h, l)| h <= l));
    }

    #[test]
    fn separability_is_the_shifted_inequality(vl in 0.0f64..1.0, vh in 0.0f64..1.0, d in 0.0f64..0.5) {
        let p = DeviceParams { vth_low: vl, vth_high: vh, delta_vth: d, ..DeviceParams::default() };
        let v = robustness_condition(&p);
        prop_assert_eq!(v.holds, vl + d < vh - d);
        prop_assert_eq!(v.margin, (vh - d) - (vl + d));
    }

    #[test]
    fn trip_point_monotone(wn in 10.0f64..500.0, wp in 50.0f64..800.0, scale in 1.01f64..3.0) {
        let p = DeviceParams::<f64>::default();
        let g = InverterGeometry { wn, wp, ..InverterGeometry::default() };
        let vm = inverter_trip_point(&p, &g).unwrap();
        prop_assert!(vm > 0.0 && vm < p.vdd);
        let wider_n = inverter_trip_point(&p, &g.with_wn(wn * scale)).unwrap();
        let wider_p = inverter_trip_point(&p, &InverterGeometry { wp: wp * scale, ..g }).unwrap();
        prop_assert!(wider_n < vm);
        prop_assert!(wider_p > vm);
    }
}

#[test]
fn mixed_netlist_power_is_manual_sum() {
    let base = small_netlist(3, 6, 2, 4);
    let plan = CamoPlan::for_gates(&base, pick_gates(&base, 3, 1)).unwrap();
    let camo = apply_camouflage(&base, &plan).unwrap();
    let chars = CellCharacterization::<f64>::default();
    let mut manual = 0.0;
    let mut next = 0;
    for g in camo.gates() {
        manual += match g.kind {
            GateKind::And2 => 1.0,
            GateKind::Or2 => 1.0,
            GateKind::Inv => 0.2,
            GateKind::Camo => {
                let c = plan.true_assignment.0[next];
                next += 1;
                if c == camoforge::camo::CamoChoice::And { 1.39 } else { 1.04 }
            }
            GateKind::Const0 | GateKind::Const1 => 0.0,
        };
    }
    let p = camoforge::overhead::total_power(&camo, &plan.true_assignment, &chars).unwrap();
    assert!((p - manual).abs() < 1e-9);
}

#[test]
fn narrowing_supply_range_never_shrinks_widths() {
    use camoforge::device::{corner_sweep, CornerGrid, ProcessSpread, WidthRange};
    let widths = |p: &DeviceParams<f64>, s| {
        let r = corner_sweep(p, &InverterGeometry::default(), &WidthRange::default(), &CornerGrid::from_params(p), s)
            .unwrap();
        r.feasible_widths.iter().map(|w| w.round() as u64).collect::<std::collections::BTreeSet<_>>()
    };
    for s in [ProcessSpread::Relative, ProcessSpread::Absolute] {
        let mut prev = std::collections::BTreeSet::new();
        for half in [0.15, 0.1, 0.05, 0.0] {
            let p = DeviceParams { vdd_range: (1.0 - half, 1.0 + half), ..DeviceParams::default() };
            let cur = widths(&p, s);
            assert!(prev.is_subset(&cur), "{s:?} half-range {half}");
            prev = cur;
        }
    }
}
