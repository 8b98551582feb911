mod common;

use std::collections::{BTreeSet, HashMap};

use common::*;
use n1screen::fdpf::{
    branch_flows, build_bdoubleprime, build_bprime, check_violations, compute_p_mismatch,
    compute_q_mismatch, fdpf_solve, FdpfMode, FdpfOptions, LinearBackend, PrecondSource,
    SystemState,
};
use n1screen::graph::{apply_outage, build_graph, PowerGraph, ScenarioOverlay};
use n1screen::ingest::{parse_json_network, BusType, NetworkModel};
use n1screen::linalg::{Preconditioner, PreconditionerKind};

struct BaseFactors {
    bprime: Preconditioner,
    bdoubleprime: Preconditioner,
}

impl BaseFactors {
    fn new(g: &PowerGraph) -> Self {
        let base = ScenarioOverlay::base(g);
        let lu = |m| Preconditioner::build(PreconditionerKind::FullLu, &m).unwrap();
        Self {
            bprime: lu(build_bprime(g, &base)),
            bdoubleprime: lu(build_bdoubleprime(g, &base)),
        }
    }

    fn backend(&self) -> LinearBackend<'_> {
        LinearBackend::Pcg {
            bprime: PrecondSource::Fixed(&self.bprime),
            bdoubleprime: PrecondSource::Fixed(&self.bdoubleprime),
        }
    }
}

fn lossless_ring() -> NetworkModel {
    parse_json_network(
        r#"{"base_mva": 100,
            "buses": [{"id": 1, "type": "slack"},
                      {"id": 2, "type": "pq", "p_load": 40, "q_load": 10},
                      {"id": 3, "type": "pq", "p_gen": 25, "p_load": 5},
                      {"id": 4, "type": "pq", "p_load": 30, "q_load": 12}],
            "branches": [{"from": 1, "to": 2, "x": 0.1}, {"from": 2, "to": 3, "x": 0.2},
                         {"from": 3, "to": 4, "x": 0.15}, {"from": 4, "to": 1, "x": 0.25}]}"#,
    )
    .unwrap()
}

#[test]
fn flat_start_lossless_mismatch_is_schedule() {
    let model = lossless_ring();
    let g = build_graph(&model);
    let dp = compute_p_mismatch(&g, &ScenarioOverlay::base(&g), &SystemState::flat(&g)).unwrap();
    for (v, d) in dp.iter().enumerate() {
        let expected = if v == g.slack_index {
            0.0
        } else {
            g.vertices[v].p_sched
        };
        assert_eq!(*d, expected);
    }
    let dq = compute_q_mismatch(&g, &ScenarioOverlay::base(&g), &SystemState::flat(&g)).unwrap();
    for (v, d) in dq.iter().enumerate() {
        let expected = if v == g.slack_index {
            0.0
        } else {
            g.vertices[v].q_sched
        };
        assert!((d - expected).abs() < 1e-15);
    }
}

#[test]
fn two_bus_hand_mismatch() {
    let g = build_graph(
        &parse_json_network(
            r#"{"base_mva": 100, "buses": [{"id": 1, "type": "slack"}, {"id": 2, "type": "pq", "p_load": 50}],
                "branches": [{"from": 1, "to": 2, "x": 0.1}]}"#,
        )
        .unwrap(),
    );
    let s = SystemState {
        v_mag: vec![1.0, 1.0],
        v_ang: vec![0.0, -0.05],
    };
    let dp = compute_p_mismatch(&g, &ScenarioOverlay::base(&g), &s).unwrap();
    assert!((dp[1] - (-0.5 + (0.05f64).sin() / 0.1)).abs() < 1e-15);
    assert!((dp[1] - -0.00021).abs() < 1e-5);
}

#[test]
fn recorded_ieee14_state_is_nearly_balanced() {
    let g = build_graph(&fixture("ieee14"));
    let base = ScenarioOverlay::base(&g);
    let s = SystemState::recorded(&g);
    let dp = compute_p_mismatch(&g, &base, &s).unwrap();
    let dq = compute_q_mismatch(&g, &base, &s).unwrap();
    // recorded voltages are rounded to three decimals
    assert!(dp.iter().all(|d| d.abs() < 0.05), "{dp:?}");
    assert!(dq.iter().all(|d| d.abs() < 0.05), "{dq:?}");
    for (v, vert) in g.vertices.iter().enumerate() {
        if vert.bus_type == BusType::PV {
            assert_eq!(dq[v], 0.0);
        }
    }
}

#[test]
fn mismatch_sum_matches_dense_admittance() {
    let model = fixture("ieee118");
    let g = build_graph(&model);
    let mut rng = rng(11);
    for e in [None, Some(0), Some(8), Some(100)] {
        let overlay = match e {
            None => ScenarioOverlay::base(&g),
            Some(e) => apply_outage(&g, e).unwrap(),
        };
        let mut s = SystemState::recorded(&g);
        for (v, a) in s.v_mag.iter_mut().zip(s.v_ang.iter_mut()) {
            *v += 0.02 * random_vec(&mut rng, 1)[0];
            *a += 0.05 * random_vec(&mut rng, 1)[0];
        }
        let dp = compute_p_mismatch(&g, &overlay, &s).unwrap();
        let ours: f64 = dp.iter().sum();
        let island: BTreeSet<usize> = overlay.deenergized.iter().copied().collect();
        let oracle = p_mismatch_sum(
            &model,
            overlay.outaged_edge.map(|e| g.edges[e].branch_id),
            &s.v_mag,
            &s.v_ang,
            &island,
            &HashMap::new(),
        );
        assert!((ours - oracle).abs() < 1e-10, "{ours} vs {oracle}");
    }
}

#[test]
fn bprime_symmetric_positive_definite() {
    for name in ["ieee14", "ieee118"] {
        let g = build_graph(&fixture(name));
        let a = build_bprime(&g, &ScenarioOverlay::base(&g));
        assert_eq!(a.asymmetry(), 0.0);
        let mut m = a.to_dense();
        let n = m.len();
        for k in 0..n {
            assert!(m[k][k] > 0.0, "{name}: pivot {k} = {}", m[k][k]);
            for i in k + 1..n {
                let f = m[i][k] / m[k][k];
                for j in k..n {
                    m[i][j] -= f * m[k][j];
                }
            }
        }
    }
}

#[test]
fn quick_and_full_agree_on_first_step() {
    let g = build_graph(&lossless_ring());
    let base = ScenarioOverlay::base(&g);
    let mut states = Vec::new();
    for mode in [FdpfMode::Full, FdpfMode::QuickPTheta] {
        let opts = FdpfOptions {
            max_outer: 1,
            mode,
            ..Default::default()
        };
        let s = fdpf_solve(
            &g,
            &base,
            &SystemState::flat(&g),
            &opts,
            BaseFactors::new(&g).backend(),
        )
        .unwrap();
        states.push(s.state.v_ang);
    }
    assert!(inf_norm_diff(&states[0], &states[1]) < 1e-9);
}

#[test]
fn solved_start_needs_no_iterations() {
    let g = build_graph(&fixture("ieee14"));
    let opts = FdpfOptions {
        mismatch_tol: 0.05,
        ..Default::default()
    };
    let s = fdpf_solve(
        &g,
        &ScenarioOverlay::base(&g),
        &SystemState::recorded(&g),
        &opts,
        BaseFactors::new(&g).backend(),
    )
    .unwrap();
    assert!(s.converged);
    assert_eq!(s.outer_iterations, 0);
}

#[test]
fn ieee118_flat_start_within_30_iterations() {
    let g = build_graph(&fixture("ieee118"));
    let s = fdpf_solve(
        &g,
        &ScenarioOverlay::base(&g),
        &SystemState::flat(&g),
        &FdpfOptions::default(),
        BaseFactors::new(&g).backend(),
    )
    .unwrap();
    assert!(s.converged);
    assert!(s.outer_iterations <= 30, "{}", s.outer_iterations);
    assert!(s.max_p_mismatch <= 1e-3 && s.max_q_mismatch <= 1e-3);
}

#[test]
fn converged_state_matches_newton_oracle() {
    let model = fixture("ieee14");
    let g = build_graph(&model);
    let s = fdpf_solve(
        &g,
        &ScenarioOverlay::base(&g),
        &SystemState::flat(&g),
        &FdpfOptions::default(),
        BaseFactors::new(&g).backend(),
    )
    .unwrap();
    let flat = SystemState::flat(&g);
    let (v, th) = newton_pf(&model, None, &flat.v_mag, &flat.v_ang, 1e-10).unwrap();
    assert!(inf_norm_diff(&s.state.v_mag, &v) < 2e-3);
    assert!(inf_norm_diff(&s.state.v_ang, &th) < 2e-3);
}

#[test]
fn two_bus_flow() {
    let g = build_graph(
        &parse_json_network(
            r#"{"base_mva": 100, "buses": [{"id": 1, "type": "slack"}, {"id": 2, "type": "pq"}],
                "branches": [{"from": 1, "to": 2, "x": 0.1}]}"#,
        )
        .unwrap(),
    );
    let s = SystemState {
        v_mag: vec![1.0, 1.0],
        v_ang: vec![0.05, 0.0],
    };
    let f = branch_flows(&g, &ScenarioOverlay::base(&g), &s)[0];
    assert!((f.p_from - 0.49979).abs() < 1e-5);
}

#[test]
fn losses_nonnegative_on_solved_118() {
    let g = build_graph(&fixture("ieee118"));
    let base = ScenarioOverlay::base(&g);
    let s = fdpf_solve(
        &g,
        &base,
        &SystemState::flat(&g),
        &FdpfOptions::default(),
        BaseFactors::new(&g).backend(),
    )
    .unwrap();
    for f in branch_flows(&g, &base, &s.state) {
        assert!(f.p_from + f.p_to >= -1e-12);
    }
}

#[test]
fn shielded_edge_carries_nothing() {
    let g = build_graph(&fixture("ieee14"));
    let overlay = apply_outage(&g, 3).unwrap();
    let flows = branch_flows(&g, &overlay, &SystemState::recorded(&g));
    assert_eq!(flows[3].p_from, 0.0);
    assert_eq!(flows[3].q_to, 0.0);
}

#[test]
fn unlimited_ratings_never_violate() {
    let mut model = fixture("ieee14");
    for b in &mut model.branches {
        b.rating_mva = 0.0;
    }
    let g = build_graph(&model);
    let flows = branch_flows(&g, &ScenarioOverlay::base(&g), &SystemState::recorded(&g));
    assert!(check_violations(&flows, &g).is_empty());
}

/// Sending-end active flow recomputed straight from the branch record.
fn oracle_p_flows(model: &NetworkModel, v: &[f64], th: &[f64]) -> Vec<f64> {
    let idx = index_of(model);
    model
        .branches
        .iter()
        .map(|br| {
            let (f, t) = (idx[&br.from_bus], idx[&br.to_bus]);
            let z2 = br.r * br.r + br.x * br.x;
            let (g, b) = (br.r / z2, -br.x / z2);
            let d = th[f] - th[t];
            let pf = v[f] * v[f] * g / (br.tap * br.tap)
                - v[f] * v[t] / br.tap * (g * d.cos() + b * d.sin());
            let pt = v[t] * v[t] * g - v[f] * v[t] / br.tap * (g * d.cos() - b * d.sin());
            pf.abs().max(pt.abs())
        })
        .collect()
}

#[test]
fn violations_match_recomputation() {
    let mut model = fixture("ieee14");
    for b in &mut model.branches {
        b.rating_mva = 40.0;
    }
    let g = build_graph(&model);
    let s = SystemState::recorded(&g);
    let flows = branch_flows(&g, &ScenarioOverlay::base(&g), &s);
    let ours = check_violations(&flows, &g);
    let loading = oracle_p_flows(&model, &s.v_mag, &s.v_ang);
    let expected: BTreeSet<usize> = loading
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > 0.4)
        .map(|(k, _)| model.branches[k].id)
        .collect();
    let got: BTreeSet<usize> = ours.iter().map(|v| v.branch_id).collect();
    assert_eq!(got, expected);
    assert!(!got.is_empty());
    for w in ours.windows(2) {
        assert!(w[0].percent >= w[1].percent);
    }
    for v in &ours {
        let k = model
            .branches
            .iter()
            .position(|b| b.id == v.branch_id)
            .unwrap();
        assert!((v.flow_pu - loading[k]).abs() < 1e-12);
        assert!((v.percent - 100.0 * loading[k] / 0.4).abs() < 1e-9);
    }
}

#[test]
fn deenergized_vertices_pinned() {
    let g = build_graph(&fixture("ieee14"));
    let e = (0..g.edge_count())
        .find(|&e| apply_outage(&g, e).unwrap().is_islanding())
        .unwrap();
    let overlay = apply_outage(&g, e).unwrap();
    let s = fdpf_solve(
        &g,
        &overlay,
        &SystemState::recorded(&g),
        &FdpfOptions::default(),
        BaseFactors::new(&g).backend(),
    )
    .unwrap();
    for &v in &overlay.deenergized {
        assert_eq!((s.state.v_mag[v], s.state.v_ang[v]), (1.0, 0.0));
    }
}
