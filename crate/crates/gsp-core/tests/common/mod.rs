//! Seeded generators shared by the integration suites. Every graph here is
//! reproducible from the seed printed by the failing test.
#![allow(dead_code)]

use gsp_core::Graph;
use ndarray::Array1;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Connected undirected graph: random spanning tree plus `extra` chords,
/// weights in [0.5, 2). Parallel picks merge, so the edge count may be lower.
pub fn connected_graph(n: usize, extra: usize, seed: u64) -> Graph {
    let mut rng = rng(seed);
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.push((u, v, rng.gen_range(0.5..2.0)));
    }
    for _ in 0..extra {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            edges.push((u.min(v), u.max(v), rng.gen_range(0.5..2.0)));
        }
    }
    Graph::build_with_n(n, &edges, false).unwrap()
}

/// Random spanning tree alone (the `extra = 0` case, kept for readability).
pub fn random_tree(n: usize, seed: u64) -> Graph {
    connected_graph(n, 0, seed)
}

/// Strongly connected aperiodic digraph: a directed cycle of odd length, one
/// reciprocal arc (gcd(2, n) = 1 kills the period), plus `extra` random arcs.
pub fn strongly_connected_digraph(n: usize, extra: usize, seed: u64) -> Graph {
    assert!(n >= 3 && n % 2 == 1, "need an odd cycle length");
    let mut rng = rng(seed);
    let mut edges: Vec<(usize, usize, f64)> =
        (0..n).map(|i| (i, (i + 1) % n, rng.gen_range(0.5..2.0))).collect();
    edges.push((1, 0, rng.gen_range(0.5..2.0)));
    for _ in 0..extra {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            edges.push((u, v, rng.gen_range(0.5..2.0)));
        }
    }
    Graph::build_with_n(n, &edges, true).unwrap()
}

/// Connected bipartite graph with sides at even and odd node indices: each
/// node joins a random earlier node of the other parity, then `extra` cross
/// edges are sprinkled on top.
pub fn bipartite_graph(n: usize, extra: usize, seed: u64) -> Graph {
    assert!(n >= 2);
    let mut rng = rng(seed);
    let mut edges = Vec::new();
    for v in 1..n {
        let u = loop {
            let u = rng.gen_range(0..v);
            if u % 2 != v % 2 {
                break u;
            }
        };
        edges.push((u.min(v), u.max(v), rng.gen_range(0.5..2.0)));
    }
    for _ in 0..extra {
        let u = 2 * rng.gen_range(0..(n + 1) / 2);
        let v = 2 * rng.gen_range(0..n / 2) + 1;
        edges.push((u.min(v), u.max(v), rng.gen_range(0.5..2.0)));
    }
    Graph::build_with_n(n, &edges, false).unwrap()
}

/// Random geometric graph on the unit square: nodes within `radius` are
/// joined with gaussian kernel weights exp(-d^2 / (2 radius^2)); leftover
/// components are stitched together at their closest point pair.
pub fn geometric_graph(n: usize, radius: f64, seed: u64) -> Graph {
    let mut rng = rng(seed);
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();
    let d2 = |i: usize, j: usize| {
        let dx = pts[i].0 - pts[j].0;
        let dy = pts[i].1 - pts[j].1;
        dx * dx + dy * dy
    };
    let weight = |d2: f64| (-d2 / (2.0 * radius * radius)).exp();

    let mut edges = Vec::new();
    let mut root: Vec<usize> = (0..n).collect();
    fn find(root: &mut Vec<usize>, mut i: usize) -> usize {
        while root[i] != i {
            root[i] = root[root[i]];
            i = root[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if d2(i, j) <= radius * radius {
                edges.push((i, j, weight(d2(i, j))));
                let (ri, rj) = (find(&mut root, i), find(&mut root, j));
                root[ri] = rj;
            }
        }
    }
    loop {
        let mut closest: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            for j in (i + 1)..n {
                if find(&mut root, i) != find(&mut root, j) {
                    let d = d2(i, j);
                    if closest.map_or(true, |(_, _, best)| d < best) {
                        closest = Some((i, j, d));
                    }
                }
            }
        }
        match closest {
            Some((i, j, d)) => {
                edges.push((i, j, weight(d)));
                let (ri, rj) = (find(&mut root, i), find(&mut root, j));
                root[ri] = rj;
            }
            None => break,
        }
    }
    Graph::build_with_n(n, &edges, false).unwrap()
}

pub fn random_signal(rng: &mut ChaCha8Rng, n: usize) -> Array1<f64> {
    Array1::from_shape_fn(n, |_| rng.gen_range(-1.0..1.0))
}

pub fn l2(x: &Array1<f64>) -> f64 {
    x.dot(x).sqrt()
}
