//! Structural facts that hold at the central vertex of P9-free graphs.

use dimkit::decomposition::{crowded_isolated_component, special_p5};
use dimkit::driver::explain_trials;
use dimkit::generator::random_graph;
use dimkit::patterns::find_induced_path;
use dimkit::{Graph, SolveConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Levels 0..=4 of sizes `2, sizes[0], ...`; every vertex has a neighbor one
/// level up, other edges join equal or adjacent levels.
fn layered(sizes: &[usize], p_same: f64, p_next: f64, rng: &mut ChaCha8Rng) -> Graph {
    let mut level = vec![0usize, 0];
    for (i, &s) in sizes.iter().enumerate() {
        level.extend(std::iter::repeat(i + 1).take(s));
    }
    let n = level.len();
    let mut edges = vec![(0, 1)];
    for v in 2..n {
        let ups: Vec<usize> = (0..v).filter(|&u| level[u] + 1 == level[v]).collect();
        edges.push((ups[rng.gen_range(0..ups.len())], v));
    }
    for u in 0..n {
        for v in u + 1..n {
            let p = match level[v] - level[u] {
                0 => p_same,
                1 => p_next,
                _ => 0.0,
            };
            if !edges.contains(&(u, v)) && rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

fn p9_free_graphs(count: usize, seed: u64) -> Vec<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let g = if out.len() % 2 == 0 {
            let n = rng.gen_range(8..=22);
            let p = rng.gen_range(1.5..4.0) / n as f64;
            random_graph(n, p, &mut rng)
        } else {
            let sizes: Vec<usize> = [3, 5, 8, 5].iter().map(|&m| rng.gen_range(1..=m)).collect();
            layered(&sizes, rng.gen_range(0.0..0.3), rng.gen_range(0.0..0.3), &mut rng)
        };
        if g.is_connected() && find_induced_path(&g, 9).is_none() {
            out.push(g);
        }
    }
    out
}

#[test]
fn no_forbidden_level3_structure() {
    let cfg = SolveConfig { check_p9: true, ..SolveConfig::default() };
    let mut checked = 0;
    let mut with_level3 = 0;
    for g in p9_free_graphs(4000, 11) {
        let ex = explain_trials(&g, &cfg);
        assert!(ex.eccentricity.is_none_or(|e| e <= 4), "{}", g.to_text());
        for t in &ex.trials {
            let Some(d) = t.decomposition.as_ref() else { continue };
            checked += 1;
            with_level3 += !d.levels[3].is_empty() as usize;
            assert_eq!(special_p5(&g, d), None, "{}", g.to_text());
            assert_eq!(crowded_isolated_component(&g, d), None, "{}", g.to_text());
        }
    }
    assert!(with_level3 > 1000, "{checked} decompositions, {with_level3} with level 3");
}

#[test]
fn special_p5_detector_fires_without_p9_freeness() {
    let cfg = SolveConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut p5 = 0;
    for _ in 0..3000 {
        let sizes: Vec<usize> = [3, 6, 10, 1].iter().map(|&m| rng.gen_range(1..=m)).collect();
        let g = layered(&sizes, 0.12, 0.1, &mut rng);
        for t in explain_trials(&g, &cfg).trials {
            let Some(d) = t.decomposition.as_ref() else { continue };
            p5 += special_p5(&g, d).is_some() as usize;
        }
    }
    assert!(p5 > 0);
}
