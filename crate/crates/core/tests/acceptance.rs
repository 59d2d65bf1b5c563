//! Acceptance suite. Each criterion prints one `PASS` or `FAIL` line, then
//! asserts.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use distgeom::ann::{fit, Network, TrainConfig};
use distgeom::cluster::{
    greedy_modularity, kmeans, modularity_exact_tiny, modularity_value, spectral_bisect, Clustering,
};
use distgeom::conic::{
    admm_sdp_solve, ddp_dual, ddp_primal, edmcp_sdp_solve, pushpull_sdp, solve_ddp, AdmmSettings,
    LpStatus,
};
use distgeom::dimred::{
    apply_rp, barvinok_realize, identity_stats, jll_distortion, make_rp, norm_preservation_stat,
    JllConfig, Pairs,
};
use distgeom::embed_exact::{frechet_embed, linf_dist, pairwise_distances};
use distgeom::graphs::{floyd_warshall_complete, PartialDistanceMatrix, WeightedGraph};
use distgeom::instability::{run_instability, Distribution, InstabilityConfig};
use distgeom::realize_opt::{quartic_gradient, quartic_objective, solve_quartic, DescentConfig};
use distgeom::rng::SeededRng;
use distgeom::textgraph::{
    clean_and_split, prepare_grid, sentence_set, Method, PipelineConfig, Reduction, Sigma,
};
use distgeom::Matrix;

fn verdict(id: u32, name: &str, ok: bool, detail: String) {
    println!(
        "{} criterion {id:>2} ({name}): {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {id} ({name}) failed: {detail}");
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn fixture_graph(name: &str) -> WeightedGraph {
    WeightedGraph::from_edge_list(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

/// Random spanning tree plus each remaining pair with probability `p`.
fn random_connected(
    n: usize,
    p: f64,
    rng: &mut SeededRng,
    weight: &mut dyn FnMut(usize, usize, &mut SeededRng) -> f64,
) -> WeightedGraph {
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    let mut edges = Vec::new();
    let mut present = vec![false; n * n];
    for i in 1..n {
        let (u, v) = (order[i], order[rng.below(i)]);
        present[u * n + v] = true;
        present[v * n + u] = true;
        edges.push((u, v));
    }
    for u in 0..n {
        for v in (u + 1)..n {
            if !present[u * n + v] && rng.bernoulli(p) {
                edges.push((u, v));
            }
        }
    }
    let weighted: Vec<(usize, usize, f64)> = edges
        .into_iter()
        .map(|(u, v)| (u, v, weight(u, v, rng)))
        .collect();
    WeightedGraph::new(n, weighted).unwrap()
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
}

#[test]
fn criterion_01_frechet_exactness() {
    let start = Instant::now();
    let mut rng = SeededRng::new(101);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let n = 2 + rng.below(19);
        let g = random_connected(n, 0.2, &mut rng, &mut |_, _, r| r.uniform_in(0.1, 10.0));
        let d = floyd_warshall_complete(&g).unwrap();
        let x = frechet_embed(&g).unwrap();
        for u in 0..n {
            for v in 0..n {
                worst = worst.max((linf_dist(x.row(u), x.row(v)) - d[(u, v)]).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        1,
        "Frechet exactness",
        worst <= 1e-12 && elapsed < Duration::from_secs(5),
        format!("100 graphs, max |linf - sp| = {worst:.2e}, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_02_edm_completion() {
    let start = Instant::now();
    let mut rng = SeededRng::new(202);
    let settings = AdmmSettings {
        tol: 1e-7,
        max_iter: 200_000,
        rho: 1.0,
    };
    let mut worst_obj = 0.0_f64;
    let mut worst_entry = 0.0_f64;
    let instances = 10;
    for t in 0..instances {
        let n = 8 + (t % 5);
        let k = 1 + (t % 3);
        let pts = Matrix::from_fn(n, k, |_, _| rng.normal());
        let d = pairwise_distances(&pts);
        let mut pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect();
        rng.shuffle(&mut pairs);
        let masked = pairs.len() / 5;
        let mut known = vec![true; n * n];
        for &(i, j) in &pairs[..masked] {
            known[i * n + j] = false;
            known[j * n + i] = false;
        }
        let pdm = PartialDistanceMatrix::new(d.clone(), known).unwrap();
        let r = edmcp_sdp_solve(&pdm, &settings).unwrap();
        worst_obj = worst_obj.max(r.objective);
        for &(i, j) in &pairs[..masked] {
            worst_entry = worst_entry.max((r.completed[(i, j)].sqrt() - d[(i, j)]).abs());
        }
    }
    let elapsed = start.elapsed();
    verdict(
        2,
        "EDM completion",
        worst_obj <= 1e-6 && worst_entry <= 1e-3 && elapsed < Duration::from_secs(60),
        format!(
            "{instances} instances (n 8-12, K 1-3, 20% masked), max objective {worst_obj:.2e}, \
             max recovered-entry error {worst_entry:.2e}, {elapsed:.2?}"
        ),
    );
}

#[test]
fn criterion_03_quartic_realizer() {
    let c4 = WeightedGraph::cycle(4, 1.0);
    let mut cfg = DescentConfig::new(303);
    cfg.restarts = 10;
    let sol = solve_quartic(&c4, 2, &cfg, None).unwrap();
    let good = sol
        .restart_objectives
        .iter()
        .filter(|&&f| f <= 1e-10)
        .count();

    let mut rng = SeededRng::new(3);
    let mut worst = 0.0_f64;
    for _ in 0..30 {
        let n = 3 + rng.below(6);
        let k = 1 + rng.below(3);
        let g = random_connected(n, 0.4, &mut rng, &mut |_, _, r| r.uniform_in(0.5, 2.0));
        let x = Matrix::from_fn(n, k, |_, _| rng.normal());
        let grad = quartic_gradient(&g, &x).unwrap();
        let h = 1e-5;
        for i in 0..n {
            for c in 0..k {
                let mut up = x.clone();
                up[(i, c)] += h;
                let mut down = x.clone();
                down[(i, c)] -= h;
                let fd = (quartic_objective(&g, &up).unwrap()
                    - quartic_objective(&g, &down).unwrap())
                    / (2.0 * h);
                worst = worst.max(relative_gap(grad[(i, c)], fd));
            }
        }
    }
    verdict(
        3,
        "quartic realizer",
        good >= 8 && worst <= 1e-5,
        format!(
            "C4 in K=2: {good}/10 restarts with f <= 1e-10; max relative gradient gap {worst:.2e}"
        ),
    );
}

#[test]
fn criterion_04_conic_sandwich() {
    let mut rng = SeededRng::new(404);
    let settings = AdmmSettings {
        tol: 1e-9,
        max_iter: 200_000,
        rho: 1.0,
    };
    let tol = 1e-6;
    let mut ordered = 0;
    let mut min_eig = f64::INFINITY;
    let mut detail = Vec::new();
    let instances = 20;
    for t in 0..instances {
        let n = 4 + (t % 12);
        let k = 2 + (t % 2);
        let pts = Matrix::from_fn(n, k, |_, _| rng.normal());
        let d = pairwise_distances(&pts);
        let g = random_connected(n, 0.3, &mut rng, &mut |u, v, _| d[(u, v)]);
        let primal = solve_ddp(n, &ddp_primal(&g)).unwrap();
        let dual = solve_ddp(n, &ddp_dual(&g)).unwrap();
        assert_eq!(primal.status, LpStatus::Optimal);
        assert_eq!(dual.status, LpStatus::Optimal);

        let p = pushpull_sdp(&g).unwrap();
        let r = admm_sdp_solve(&p, &settings).unwrap();
        let lengths: Vec<f64> = g
            .edges()
            .iter()
            .map(|e| r.x[(e.u, e.u)] + r.x[(e.v, e.v)] - 2.0 * r.x[(e.u, e.v)])
            .collect();
        let alpha = g
            .edges()
            .iter()
            .zip(&lengths)
            .map(|(e, &l)| {
                if l > 0.0 {
                    e.w * e.w / l
                } else {
                    f64::INFINITY
                }
            })
            .fold(f64::INFINITY, f64::min)
            .min(1.0);
        let sdp = alpha * lengths.iter().sum::<f64>();
        let scale = primal.objective.abs().max(dual.objective.abs()).max(1.0);
        if primal.objective <= sdp + tol * scale && sdp <= dual.objective + tol * scale {
            ordered += 1;
        } else {
            detail.push(format!(
                "n={n}: {} / {sdp} / {}",
                primal.objective, dual.objective
            ));
        }
        let top = primal
            .eigenvalues
            .iter()
            .fold(1.0_f64, |m, l| m.max(l.abs()));
        min_eig = min_eig.min(
            primal
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min)
                / top,
        );
    }
    verdict(
        4,
        "conic sandwich",
        ordered == instances && min_eig >= -1e-9,
        format!(
            "{ordered}/{instances} instances ordered primal <= SDP <= dual; min primal eigenvalue (relative) {min_eig:.2e} {}",
            detail.join("; ")
        ),
    );
}

#[test]
fn criterion_05_barvinok_pipeline() {
    let c4 = WeightedGraph::cycle(4, 1.0);
    let k4 = fixture_graph("k4.edges");
    let settings = AdmmSettings::default();
    let mut counts = Vec::new();
    for (g, k) in [(&c4, 2), (&k4, 3)] {
        let ok = (0..10)
            .filter(|&s| {
                let cfg = DescentConfig::new(500 + s);
                barvinok_realize(g, k, &cfg, &settings)
                    .unwrap()
                    .report
                    .final_objective
                    <= 1e-8
            })
            .count();
        counts.push(ok);
    }
    verdict(
        5,
        "Barvinok pipeline",
        counts.iter().all(|&c| c >= 8),
        format!(
            "f <= 1e-8 in {}/10 seeds on C4 (K=2) and {}/10 on K4 (K=3)",
            counts[0], counts[1]
        ),
    );
}

#[test]
fn criterion_06_rp_statistics() {
    let start = Instant::now();
    let ratio = norm_preservation_stat(200, 50, 10_000, 606).unwrap();
    let s = identity_stats(2000, 0.15, 606).unwrap();
    let norms: Vec<f64> = (1..=10)
        .map(|i| {
            identity_stats(1000 * i, 0.15, 600 + i as u64)
                .unwrap()
                .norm_ttt_over_n
        })
        .collect();
    let decreasing = norms.windows(2).filter(|w| w[1] < w[0]).count();
    let elapsed = start.elapsed();
    let ok = (0.98..=1.02).contains(&ratio)
        && (s.diag_mean - 1.0).abs() <= 0.02
        && s.offdiag_mean.abs() <= 0.001
        && decreasing >= 9
        && elapsed < Duration::from_secs(120);
    verdict(
        6,
        "RP statistics",
        ok,
        format!(
            "mean ||Tu||^2/||u||^2 = {ratio:.4}; n=2000 diag {:.5} offdiag {:.6}; \
             ||TT^T/n - I|| decreasing in {decreasing}/9 steps ({:.5} -> {:.5}); {elapsed:.2?}",
            s.diag_mean, s.offdiag_mean, norms[0], norms[9]
        ),
    );
}

#[test]
fn criterion_07_jll_audit() {
    let jll = JllConfig::with_constant(0.2, 1.8).unwrap();
    let k = jll.target_dim(100);
    let mut total = 0.0;
    for seed in 0..20 {
        let mut rng = SeededRng::new(7000 + seed);
        let x = Matrix::from_fn(100, 1000, |_, _| rng.normal());
        let t = make_rp(1000, k, 1.0, 7100 + seed).unwrap();
        let tx = apply_rp(&t, &x).unwrap();
        total += jll_distortion(&x, &tx, Pairs::All, 0.2)
            .unwrap()
            .violation_fraction();
    }
    let mean = total / 20.0;
    verdict(
        7,
        "JLL audit",
        mean <= 0.05,
        format!("l=100, n=1000, k={k}: mean violating fraction {mean:.4} over 20 seeds"),
    );
}

#[test]
fn criterion_08_distance_instability() {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    for d in Distribution::ALL {
        let cfg = InstabilityConfig {
            dims: vec![10, 10_000],
            points: 10,
            trials: 1000,
            distribution: d,
            p: 1.0,
            seed: 808,
        };
        let rows = run_instability(&cfg).unwrap();
        let ratio = rows[1].median_eps / rows[0].median_eps;
        ok &= ratio <= 0.2;
        lines.push(format!(
            "{d} {:.4} -> {:.4} (x{ratio:.3})",
            rows[0].median_eps, rows[1].median_eps
        ));
    }
    let elapsed = start.elapsed();
    verdict(
        8,
        "distance instability",
        ok && elapsed < Duration::from_secs(180),
        format!(
            "median eps n=10 -> n=1e4: {}; {elapsed:.2?}",
            lines.join(", ")
        ),
    );
}

/// Minimum-cut balanced bisection by enumeration.
fn best_bisection(g: &WeightedGraph) -> Clustering {
    let n = g.n();
    let mut best = (f64::INFINITY, 0u32);
    for mask in 0u32..(1 << n) {
        if mask & 1 == 0
            || (mask.count_ones() as usize).abs_diff(n - mask.count_ones() as usize) > 1
        {
            continue;
        }
        let cut: f64 = g
            .edges()
            .iter()
            .filter(|e| (mask >> e.u & 1) != (mask >> e.v & 1))
            .map(|e| e.w)
            .sum();
        if cut < best.0 {
            best = (cut, mask);
        }
    }
    Clustering::from_labels(
        &(0..n)
            .map(|i| (best.1 >> i & 1) as usize)
            .collect::<Vec<_>>(),
    )
}

#[test]
fn criterion_09_clustering_oracles() {
    let mut notes = Vec::new();
    let mut ok = true;
    for name in [
        "two_triangles_bridge.edges",
        "two_cliques_bridge.edges",
        "weighted_bridge.edges",
    ] {
        let g = fixture_graph(name);
        let greedy = greedy_modularity(&g);
        let (exact, q) = modularity_exact_tiny(&g).unwrap();
        let qg = modularity_value(&g, &greedy).unwrap();
        let spectral = spectral_bisect(&g).unwrap().clustering;
        let oracle = best_bisection(&g);
        let m = greedy.same_partition(&exact) && (qg - q).abs() <= 1e-12;
        let s = spectral.same_partition(&oracle);
        ok &= m && s;
        notes.push(format!(
            "{name}: modularity {qg:.4}/{q:.4} {m}, bisection {s}"
        ));
    }

    let mut rng = SeededRng::new(909);
    let mut monotone = true;
    for run in 0..20 {
        let n = 10 + rng.below(40);
        let x = Matrix::from_fn(n, 3, |_, _| rng.normal());
        let r = kmeans(&x, 1 + run % 5, run as u64, 100).unwrap();
        monotone &= r.history.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    }
    let tri = WeightedGraph::new(
        6,
        [
            (0, 1, 1.0),
            (1, 2, 1.0),
            (0, 2, 1.0),
            (3, 4, 1.0),
            (4, 5, 1.0),
            (3, 5, 1.0),
        ],
    )
    .unwrap();
    let q = modularity_value(&tri, &Clustering::from_labels(&[0, 0, 0, 1, 1, 1])).unwrap();
    ok &= monotone && q == 0.5;
    verdict(
        9,
        "clustering oracles",
        ok,
        format!(
            "{}; k-means monotone on 20 runs: {monotone}; two triangles Q = {q}",
            notes.join("; ")
        ),
    );
}

#[test]
fn criterion_10_ann() {
    let mut rng = SeededRng::new(1010);
    let mut worst = 0.0_f64;
    for (n, h) in [(2, 1), (1, 3), (4, 4), (6, 20), (10, 8)] {
        let x = Matrix::from_fn(12, n, |_, _| rng.normal());
        let y: Vec<f64> = (0..12).map(|_| rng.uniform()).collect();
        let rows: Vec<usize> = (0..12).collect();
        let mut seed = 0;
        let net = loop {
            let net = Network::new(n, h, seed).unwrap();
            let margin = (0..12)
                .flat_map(|i| {
                    let mut z = net.clone();
                    let p = z.params();
                    // |relu(a) - relu(-a)| = |a| recovers the hidden pre-activations
                    let mut neg = p.clone();
                    for v in neg[..h * n + h].iter_mut() {
                        *v = -*v;
                    }
                    let a = z.hidden_values(x.row(i)).unwrap();
                    z.set_params(&neg).unwrap();
                    let b = z.hidden_values(x.row(i)).unwrap();
                    a.into_iter()
                        .zip(b)
                        .map(|(a, b)| (a - b).abs())
                        .collect::<Vec<_>>()
                })
                .fold(f64::INFINITY, f64::min);
            if margin > 1e-3 {
                break net;
            }
            seed += 1;
        };
        let (_, g) = net.squared_error_gradient(&x, &y, &rows).unwrap();
        let p = net.params();
        let step = 1e-6;
        for k in 0..p.len() {
            let mut z = net.clone();
            let mut q = p.clone();
            q[k] += step;
            z.set_params(&q).unwrap();
            let up = z.squared_error_gradient(&x, &y, &rows).unwrap().0;
            q[k] -= 2.0 * step;
            z.set_params(&q).unwrap();
            let down = z.squared_error_gradient(&x, &y, &rows).unwrap().0;
            worst = worst.max(relative_gap(g[k], (up - down) / (2.0 * step)));
        }
    }

    let mut srng = SeededRng::new(1011);
    let x = Matrix::from_fn(
        20,
        2,
        |i, _| if i < 10 { -2.0 } else { 2.0 } + 0.3 * srng.normal(),
    );
    let y: Vec<f64> = (0..20).map(|i| if i < 10 { 0.0 } else { 1.0 }).collect();
    let mut cfg = TrainConfig::new(1012);
    cfg.max_epochs = 500;
    cfg.patience = 500;
    let (_, report) = fit(&x, &y, &cfg).unwrap();
    let again = fit(&x, &y, &cfg).unwrap().1;
    let same = report == again
        && report
            .train_losses
            .iter()
            .zip(&again.train_losses)
            .all(|(a, b)| a.to_bits() == b.to_bits());
    verdict(
        10,
        "ANN",
        worst <= 1e-4 && report.test_loss <= 0.1 && same,
        format!(
            "max relative gradient gap {worst:.2e}; separable toy test loss {:.4}; bitwise reproducible {same}",
            report.test_loss
        ),
    );
}

#[test]
fn criterion_11_end_to_end_pipeline() {
    let text = std::fs::read_to_string(fixture("civil_disobedience.txt")).unwrap();
    let corpus = clean_and_split(&text, 3).unwrap();
    let set = sentence_set(&corpus, Sigma::Large).unwrap();
    let mut fractions = Vec::new();
    let mut complete = true;
    for seed in 0..5u64 {
        let cfg = PipelineConfig::new(1100 + seed);
        let grid = prepare_grid(&set, Method::ALL, Reduction::ALL, &cfg).unwrap();
        let table =
            distgeom::ann::evaluate_experiment(&grid, &TrainConfig::new(1100 + seed)).unwrap();
        complete &= table.cells.len() == 8 * 9 && table.cells.iter().all(|c| c.loss.is_finite());
        fractions.push(table.diagonal_win_fraction().unwrap_or(0.0));
    }
    let mean = fractions.iter().sum::<f64>() / fractions.len() as f64;
    verdict(
        11,
        "end-to-end pipeline",
        complete && mean >= 0.6,
        format!(
            "{} sentences, 8 inputs x 9 outputs, all finite: {complete}; diagonal wins per seed {:?}, mean {mean:.3}",
            set.corpus.len(),
            fractions.iter().map(|f| format!("{f:.3}")).collect::<Vec<_>>()
        ),
    );
}
