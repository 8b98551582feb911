//! Independent reference implementations used as test oracles. None of these
//! touch the library's graph or linear-algebra code; they work from the
//! parsed `NetworkModel` with dense matrices.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use n1screen::ingest::{parse_cdf, BusType, NetworkModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Dense = Vec<Vec<f64>>;

pub fn fixture_text(name: &str) -> String {
    let path = format!("{}/tests/fixtures/{name}.cdf", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn fixture(name: &str) -> NetworkModel {
    parse_cdf(&fixture_text(name)).expect("fixture parses")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn index_of(model: &NetworkModel) -> HashMap<u32, usize> {
    model
        .buses
        .iter()
        .enumerate()
        .map(|(i, b)| (b.id, i))
        .collect()
}

pub fn slack_of(model: &NetworkModel) -> usize {
    model
        .buses
        .iter()
        .position(|b| b.bus_type == BusType::Slack)
        .unwrap()
}

fn branch_live(model: &NetworkModel, k: usize, outage: Option<usize>) -> bool {
    model.branches[k].in_service && Some(model.branches[k].id) != outage
}

/// Dense complex bus admittance matrix `(G, B)` with branch `outage` (by
/// id) removed.
pub fn ybus(model: &NetworkModel, outage: Option<usize>) -> (Dense, Dense) {
    let n = model.buses.len();
    let idx = index_of(model);
    let mut g = vec![vec![0.0; n]; n];
    let mut b = vec![vec![0.0; n]; n];
    for (i, bus) in model.buses.iter().enumerate() {
        g[i][i] += bus.g_shunt;
        b[i][i] += bus.b_shunt;
    }
    for k in 0..model.branches.len() {
        if !branch_live(model, k, outage) {
            continue;
        }
        let br = &model.branches[k];
        let (f, t) = (idx[&br.from_bus], idx[&br.to_bus]);
        let z2 = br.r * br.r + br.x * br.x;
        let (ys_g, ys_b) = (br.r / z2, -br.x / z2);
        let tap = br.tap;
        g[f][f] += ys_g / (tap * tap);
        b[f][f] += (ys_b + br.b_charging / 2.0) / (tap * tap);
        g[t][t] += ys_g;
        b[t][t] += ys_b + br.b_charging / 2.0;
        g[f][t] -= ys_g / tap;
        b[f][t] -= ys_b / tap;
        g[t][f] -= ys_g / tap;
        b[t][f] -= ys_b / tap;
    }
    (g, b)
}

/// Injected `(P, Q)` at every bus for the given voltages.
pub fn injections(g: &Dense, b: &Dense, v: &[f64], th: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = v.len();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            if g[i][j] == 0.0 && b[i][j] == 0.0 {
                continue;
            }
            let d = th[i] - th[j];
            p[i] += v[i] * v[j] * (g[i][j] * d.cos() + b[i][j] * d.sin());
            q[i] += v[i] * v[j] * (g[i][j] * d.sin() - b[i][j] * d.cos());
        }
    }
    (p, q)
}

/// Largest |ΔP| over non-slack buses and |ΔQ| over PQ buses, skipping any
/// bus in `skip`.
pub fn max_mismatch(
    model: &NetworkModel,
    outage: Option<usize>,
    v: &[f64],
    th: &[f64],
    skip: &BTreeSet<usize>,
) -> f64 {
    let (g, b) = ybus(model, outage);
    let (p, q) = injections(&g, &b, v, th);
    let mut worst = 0.0f64;
    for (i, bus) in model.buses.iter().enumerate() {
        if skip.contains(&i) || bus.bus_type == BusType::Slack {
            continue;
        }
        worst = worst.max((bus.p_sched() - p[i]).abs());
        if bus.bus_type == BusType::PQ {
            worst = worst.max((bus.q_sched() - q[i]).abs());
        }
    }
    worst
}

/// Sum of ΔP over non-slack buses outside `skip`, from the dense admittance
/// matrix, with optional scheduled-injection overrides.
pub fn p_mismatch_sum(
    model: &NetworkModel,
    outage: Option<usize>,
    v: &[f64],
    th: &[f64],
    skip: &BTreeSet<usize>,
    p_override: &HashMap<usize, f64>,
) -> f64 {
    let (g, b) = ybus(model, outage);
    let (p, _) = injections(&g, &b, v, th);
    model
        .buses
        .iter()
        .enumerate()
        .filter(|(i, bus)| !skip.contains(i) && bus.bus_type != BusType::Slack)
        .map(|(i, bus)| p_override.get(&i).copied().unwrap_or(bus.p_sched()) - p[i])
        .sum()
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(a: &Dense, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let mut m: Dense = a.to_vec();
    let mut x = rhs.to_vec();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
            .unwrap();
        assert!(m[p][k].abs() > 1e-300, "dense oracle: singular");
        m.swap(k, p);
        x.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[k][j] * x[j]).sum();
        x[k] = (x[k] - s) / m[k][k];
    }
    x
}

pub fn dense_mul(a: &Dense, v: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

/// Buses cut off from the slack bus by removing branch `outage`, found with
/// union-find over the raw branch list.
pub fn island_oracle(model: &NetworkModel, outage: Option<usize>) -> BTreeSet<u32> {
    let n = model.buses.len();
    let idx = index_of(model);
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for k in 0..model.branches.len() {
        if !branch_live(model, k, outage) {
            continue;
        }
        let br = &model.branches[k];
        let a = find(&mut parent, idx[&br.from_bus]);
        let b = find(&mut parent, idx[&br.to_bus]);
        parent[a] = b;
    }
    let root = find(&mut parent, slack_of(model));
    (0..n)
        .filter(|&i| find(&mut parent, i) != root)
        .map(|i| model.buses[i].id)
        .collect()
}

/// B' as a dense matrix: `1/x` stencil with identity rows and columns for
/// the slack bus and for every bus in `island`.
pub fn dense_bprime(model: &NetworkModel, outage: Option<usize>, island: &BTreeSet<u32>) -> Dense {
    let n = model.buses.len();
    let idx = index_of(model);
    let slack = slack_of(model);
    let fixed: Vec<bool> = (0..n)
        .map(|i| i == slack || island.contains(&model.buses[i].id))
        .collect();
    let mut a = vec![vec![0.0; n]; n];
    for k in 0..model.branches.len() {
        if !branch_live(model, k, outage) {
            continue;
        }
        let br = &model.branches[k];
        let (f, t) = (idx[&br.from_bus], idx[&br.to_bus]);
        let w = 1.0 / br.x;
        a[f][f] += w;
        a[t][t] += w;
        a[f][t] -= w;
        a[t][f] -= w;
    }
    for i in 0..n {
        if fixed[i] {
            for j in 0..n {
                a[i][j] = 0.0;
                a[j][i] = 0.0;
            }
            a[i][i] = 1.0;
        }
    }
    a
}

/// Full-Newton polar power flow with PV magnitudes held. Returns
/// `(|V|, θ)` or `None` if it fails to reach `tol`.
pub fn newton_pf(
    model: &NetworkModel,
    outage: Option<usize>,
    v0: &[f64],
    th0: &[f64],
    tol: f64,
) -> Option<(Vec<f64>, Vec<f64>)> {
    let (g, b) = ybus(model, outage);
    let n = model.buses.len();
    let pvpq: Vec<usize> = (0..n)
        .filter(|&i| model.buses[i].bus_type != BusType::Slack)
        .collect();
    let pq: Vec<usize> = (0..n)
        .filter(|&i| model.buses[i].bus_type == BusType::PQ)
        .collect();
    let mut v = v0.to_vec();
    let mut th = th0.to_vec();
    for _ in 0..30 {
        let (p, q) = injections(&g, &b, &v, &th);
        let mut f: Vec<f64> = pvpq
            .iter()
            .map(|&i| model.buses[i].p_sched() - p[i])
            .collect();
        f.extend(pq.iter().map(|&i| model.buses[i].q_sched() - q[i]));
        if f.iter().fold(0.0f64, |m, x| m.max(x.abs())) < tol {
            return Some((v, th));
        }
        let m = f.len();
        let mut jac = vec![vec![0.0; m]; m];
        let (na, nv) = (pvpq.len(), pq.len());
        for (r, &i) in pvpq.iter().chain(pq.iter()).enumerate() {
            let is_p = r < na;
            for (c, &k) in pvpq.iter().chain(pq.iter()).enumerate() {
                let wrt_theta = c < na;
                jac[r][c] = derivative(&g, &b, &v, &th, &p, &q, i, k, is_p, wrt_theta);
            }
        }
        let dx = dense_solve(&jac, &f);
        for (c, &k) in pvpq.iter().enumerate() {
            th[k] += dx[c];
        }
        for (c, &k) in pq.iter().enumerate() {
            v[k] += dx[na + c];
        }
        debug_assert_eq!(na + nv, m);
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn derivative(
    g: &Dense,
    b: &Dense,
    v: &[f64],
    th: &[f64],
    p: &[f64],
    q: &[f64],
    i: usize,
    k: usize,
    is_p: bool,
    wrt_theta: bool,
) -> f64 {
    if i == k {
        let (gii, bii, vi) = (g[i][i], b[i][i], v[i]);
        return match (is_p, wrt_theta) {
            (true, true) => -q[i] - bii * vi * vi,
            (true, false) => p[i] / vi + gii * vi,
            (false, true) => p[i] - gii * vi * vi,
            (false, false) => q[i] / vi - bii * vi,
        };
    }
    let (gik, bik) = (g[i][k], b[i][k]);
    if gik == 0.0 && bik == 0.0 {
        return 0.0;
    }
    let d = th[i] - th[k];
    let (s, c) = d.sin_cos();
    match (is_p, wrt_theta) {
        (true, true) => v[i] * v[k] * (gik * s - bik * c),
        (true, false) => v[i] * (gik * c + bik * s),
        (false, true) => -v[i] * v[k] * (gik * c + bik * s),
        (false, false) => v[i] * (gik * s - bik * c),
    }
}

/// Textbook unpreconditioned CG from `x0 = 0`, returning every iterate.
pub fn reference_cg(a: &Dense, b: &[f64], tol: f64, max_iter: usize) -> Vec<Vec<f64>> {
    let n = b.len();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let bnorm = rr.sqrt();
    let mut iterates = Vec::new();
    for _ in 0..max_iter {
        if rr.sqrt() <= tol * bnorm {
            break;
        }
        let ap = dense_mul(a, &p);
        let alpha = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        iterates.push(x.clone());
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    iterates
}

/// Random symmetric positive definite matrix `QᵀQ + n·I` with roughly
/// `density` of the entries of `Q` nonzero.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Dense {
    let q: Dense = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    if rng.random_bool(density) {
                        rng.random_range(-1.0..1.0)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = (0..n).map(|k| q[k][i] * q[k][j]).sum();
        }
        a[i][i] += n as f64 * 0.1 + 0.5;
    }
    a
}

pub fn inf_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}
