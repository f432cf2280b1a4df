//! Seeded instance generators: the named gadget families (H_k, G_k,
//! K_{3,k}, the treewidth-4 chain) plus random, random-planar, planar-wheel,
//! and random partial-k-tree families for sweeps.

use crate::connectivity;
use crate::error::{Error, Result};
use crate::graph::{Color, ColoredMultigraph, VertexId};
use crate::td::TreeDecomposition;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

#[derive(Clone, Debug)]
pub struct Instance {
    pub graph: ColoredMultigraph,
    /// Terminal groups; a single group for tree-packing instances.
    pub groups: Vec<Vec<VertexId>>,
    /// All terminals, ascending.
    pub terminals: Vec<VertexId>,
    /// Connectivity parameter: the constructed value for gadget families, the
    /// realized minimum for random families (computed, not promised).
    pub k: u32,
}

fn finish(graph: ColoredMultigraph, groups: Vec<Vec<VertexId>>, k: u32) -> Instance {
    let mut graph = graph;
    for (gi, members) in groups.iter().enumerate() {
        for v in members {
            graph.set_group(*v, Some(gi as u32)).expect("terminal exists");
        }
    }
    let terminals: BTreeSet<VertexId> = groups.iter().flatten().copied().collect();
    Instance { graph, groups, terminals: terminals.into_iter().collect(), k }
}

/// H_k: two black vertices x,y joined by k internally-white length-2 paths.
pub fn hk(k: u32) -> Instance {
    let mut g = ColoredMultigraph::new();
    let x = g.add_vertex(Color::Black);
    let y = g.add_vertex(Color::Black);
    for _ in 0..k {
        let w = g.add_vertex(Color::White);
        g.add_edge(x, w).unwrap();
        g.add_edge(w, y).unwrap();
    }
    finish(g, vec![vec![x, y]], k)
}

/// G_k: s and t joined by k vertex-disjoint length-(k+1) white paths, with an
/// H_k copy spliced into every white-white edge. Groups: {s,t} plus the {x,y}
/// pair of every H_k copy. Bipartite and planar by construction.
pub fn gk(k: u32) -> Instance {
    let mut g = ColoredMultigraph::new();
    let s = g.add_vertex(Color::Black);
    let t = g.add_vertex(Color::Black);
    let mut groups = vec![vec![s, t]];
    for _ in 0..k {
        let path: Vec<VertexId> = (0..k).map(|_| g.add_vertex(Color::White)).collect();
        g.add_edge(s, path[0]).unwrap();
        g.add_edge(*path.last().unwrap(), t).unwrap();
        for pq in path.windows(2) {
            // Insert H_k along the would-be edge (p,q).
            let (p, q) = (pq[0], pq[1]);
            let x = g.add_vertex(Color::Black);
            let y = g.add_vertex(Color::Black);
            for _ in 0..k {
                let w = g.add_vertex(Color::White);
                g.add_edge(x, w).unwrap();
                g.add_edge(w, y).unwrap();
            }
            g.add_edge(p, x).unwrap();
            g.add_edge(y, q).unwrap();
            groups.push(vec![x, y]);
        }
    }
    finish(g, groups, k)
}

/// K_{3,k} with the 3-side as terminals; κ′(T) = k while every white vertex
/// has degree 3.
pub fn k3k(k: u32) -> Instance {
    let mut g = ColoredMultigraph::new();
    let blacks: Vec<VertexId> = (0..3).map(|_| g.add_vertex(Color::Black)).collect();
    for _ in 0..k {
        let w = g.add_vertex(Color::White);
        for b in &blacks {
            g.add_edge(*b, w).unwrap();
        }
    }
    finish(g, vec![blacks], k)
}

/// Chain of m two-terminal groups, consecutive groups sharing a column of k
/// white vertices each adjacent to all four. Treewidth 4; κ′ over all
/// terminals is k.
pub fn tw_chain(m: u32, k: u32) -> Instance {
    assert!(m >= 2, "chain needs at least two groups");
    let mut g = ColoredMultigraph::new();
    let pairs: Vec<(VertexId, VertexId)> = (0..m)
        .map(|_| (g.add_vertex(Color::Black), g.add_vertex(Color::Black)))
        .collect();
    for i in 0..(m as usize - 1) {
        for _ in 0..k {
            let w = g.add_vertex(Color::White);
            g.add_edge(pairs[i].0, w).unwrap();
            g.add_edge(pairs[i].1, w).unwrap();
            g.add_edge(w, pairs[i + 1].0).unwrap();
            g.add_edge(w, pairs[i + 1].1).unwrap();
        }
    }
    let groups = pairs.iter().map(|(a, b)| vec![*a, *b]).collect();
    finish(g, groups, k)
}

/// Erdős–Rényi graph with `t` random terminals forming one group; `k` is the
/// realized minimum κ′ over terminal pairs.
pub fn random_instance(n: u32, p: f64, t: u32, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = ColoredMultigraph::new();
    let vs: Vec<VertexId> = (0..n).map(|_| g.add_vertex(Color::White)).collect();
    for i in 0..vs.len() {
        for j in (i + 1)..vs.len() {
            if rng.random_bool(p) {
                g.add_edge(vs[i], vs[j]).unwrap();
            }
        }
    }
    let mut shuffled = vs.clone();
    shuffled.shuffle(&mut rng);
    let mut terms: Vec<VertexId> = shuffled.into_iter().take(t.max(2) as usize).collect();
    terms.sort();
    for v in &terms {
        g.set_color(*v, Color::Black).unwrap();
    }
    let inst = finish(g, vec![terms], 0);
    let k = realized_min_kappa(&inst.graph, &inst.groups);
    Instance { k, ..inst }
}

/// Random instance with `m` two-terminal groups; `k` is the realized minimum
/// within-group κ′.
pub fn random_grouped(n: u32, p: f64, m: u32, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = ColoredMultigraph::new();
    let vs: Vec<VertexId> = (0..n).map(|_| g.add_vertex(Color::White)).collect();
    for i in 0..vs.len() {
        for j in (i + 1)..vs.len() {
            if rng.random_bool(p) {
                g.add_edge(vs[i], vs[j]).unwrap();
            }
        }
    }
    let mut shuffled = vs.clone();
    shuffled.shuffle(&mut rng);
    let want = (2 * m as usize).min(vs.len());
    let chosen: Vec<VertexId> = shuffled.into_iter().take(want).collect();
    let mut groups: Vec<Vec<VertexId>> = chosen.chunks(2).map(|c| c.to_vec()).collect();
    groups.retain(|grp| grp.len() == 2);
    for grp in &groups {
        for v in grp {
            g.set_color(*v, Color::Black).unwrap();
        }
    }
    let inst = finish(g, groups, 0);
    let k = realized_min_kappa(&inst.graph, &inst.groups);
    Instance { k, ..inst }
}

fn realized_min_kappa(g: &ColoredMultigraph, groups: &[Vec<VertexId>]) -> u32 {
    let mut min = u32::MAX;
    let mut any = false;
    for grp in groups {
        for (i, u) in grp.iter().enumerate() {
            for v in grp.iter().skip(i + 1) {
                any = true;
                min = min.min(connectivity::element_connectivity_value(g, *u, *v).unwrap());
            }
        }
    }
    if any {
        min
    } else {
        0
    }
}

/// Random planar graph via stacked triangulations: start with a triangle and
/// repeatedly insert a vertex into a face; a fraction of edges is then
/// deleted. Planar by construction.
pub fn random_planar(n: u32, t: u32, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = ColoredMultigraph::new();
    let a = g.add_vertex(Color::White);
    let b = g.add_vertex(Color::White);
    let c = g.add_vertex(Color::White);
    g.add_edge(a, b).unwrap();
    g.add_edge(b, c).unwrap();
    g.add_edge(c, a).unwrap();
    let mut faces = vec![(a, b, c)];
    while g.vertex_count() < n.max(3) as usize {
        let fi = rng.random_range(0..faces.len());
        let (u, v, w) = faces[fi];
        let x = g.add_vertex(Color::White);
        g.add_edge(u, x).unwrap();
        g.add_edge(v, x).unwrap();
        g.add_edge(w, x).unwrap();
        faces.swap_remove(fi);
        faces.push((u, v, x));
        faces.push((v, w, x));
        faces.push((u, w, x));
    }
    let drop: Vec<_> = g
        .edges()
        .map(|(e, _, _)| e)
        .filter(|_| rng.random_bool(0.12))
        .collect();
    let mut g = g.without_edges(&drop.into_iter().collect());
    let mut vs: Vec<VertexId> = g.vertices().collect();
    vs.shuffle(&mut rng);
    let mut terms: Vec<VertexId> = vs.into_iter().take(t.max(2) as usize).collect();
    terms.sort();
    for v in &terms {
        g.set_color(*v, Color::Black).unwrap();
    }
    let inst = finish(g, vec![terms], 0);
    let k = realized_min_kappa(&inst.graph, &inst.groups);
    Instance { k, ..inst }
}

/// Cycle of `t` terminals where consecutive terminals are joined by parallel
/// white length-2 paths; one segment carries ⌊k/2⌋ paths and the rest ⌈k/2⌉,
/// so κ′(T) = k exactly. Planar.
pub fn planar_wheel(t: u32, k: u32) -> Instance {
    assert!(t >= 2 && k >= 1);
    let mut g = ColoredMultigraph::new();
    let terms: Vec<VertexId> = (0..t).map(|_| g.add_vertex(Color::Black)).collect();
    let heavy = k.div_ceil(2);
    let light = k / 2;
    for i in 0..t as usize {
        let a = terms[i];
        let b = terms[(i + 1) % t as usize];
        let mult = if i == 0 { light } else { heavy };
        for _ in 0..mult {
            let w = g.add_vertex(Color::White);
            g.add_edge(a, w).unwrap();
            g.add_edge(w, b).unwrap();
        }
    }
    finish(g, vec![terms], k)
}

/// Random partial k-tree of the given width, together with the tree
/// decomposition witnessing it. Terminals are sampled at random; `k` is the
/// realized minimum κ′ over terminal pairs.
pub fn random_partial_ktree(
    n: u32,
    width: u32,
    keep: f64,
    t: u32,
    seed: u64,
) -> (Instance, TreeDecomposition) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = ColoredMultigraph::new();
    let base: Vec<VertexId> = (0..=width).map(|_| g.add_vertex(Color::White)).collect();
    for i in 0..base.len() {
        for j in (i + 1)..base.len() {
            g.add_edge(base[i], base[j]).unwrap();
        }
    }
    let mut bags: Vec<BTreeSet<VertexId>> = vec![base.iter().copied().collect()];
    let mut tree_edges: Vec<(usize, usize)> = Vec::new();
    while g.vertex_count() < n.max(width + 1) as usize {
        let parent = rng.random_range(0..bags.len());
        let mut bag: Vec<VertexId> = bags[parent].iter().copied().collect();
        let out = rng.random_range(0..bag.len());
        let x = g.add_vertex(Color::White);
        bag.remove(out);
        for v in &bag {
            g.add_edge(*v, x).unwrap();
        }
        bag.push(x);
        bags.push(bag.into_iter().collect());
        tree_edges.push((parent, bags.len() - 1));
    }
    let drop: Vec<_> = g
        .edges()
        .map(|(e, _, _)| e)
        .filter(|_| !rng.random_bool(keep))
        .collect();
    let mut g = g.without_edges(&drop.into_iter().collect());
    let mut vs: Vec<VertexId> = g.vertices().collect();
    vs.shuffle(&mut rng);
    let mut terms: Vec<VertexId> = vs.into_iter().take(t.max(2) as usize).collect();
    terms.sort();
    for v in &terms {
        g.set_color(*v, Color::Black).unwrap();
    }
    let inst = finish(g, vec![terms], 0);
    let k = realized_min_kappa(&inst.graph, &inst.groups);
    let td = TreeDecomposition { bags, tree_edges };
    (Instance { k, ..inst }, td)
}

/// Random costed instance for single-sink connectivity experiments: the first
/// vertex is the root, the next `t` are terminals; costs are uniform integers
/// in 1..=9.
pub fn random_costed(n: u32, p: f64, t: u32, seed: u64) -> (ColoredMultigraph, VertexId, Vec<VertexId>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = ColoredMultigraph::new();
    let vs: Vec<VertexId> = (0..n).map(|_| g.add_vertex(Color::White)).collect();
    for i in 0..vs.len() {
        for j in (i + 1)..vs.len() {
            if rng.random_bool(p) {
                let cost = num_rational::Rational64::from_integer(rng.random_range(1..=9));
                g.add_edge_with_cost(vs[i], vs[j], cost).unwrap();
            }
        }
    }
    let root = vs[0];
    let terms: Vec<VertexId> = vs[1..].iter().copied().take(t as usize).collect();
    for v in &terms {
        g.set_color(*v, Color::Black).unwrap();
    }
    (g, root, terms)
}

/// CLI entry point: builds an instance by kind name and positional params.
pub fn generate(kind: &str, params: &[String], seed: u64) -> Result<Instance> {
    let need = |idx: usize| -> Result<&String> {
        params.get(idx).ok_or_else(|| {
            Error::InvalidQuery(format!("generator '{kind}' is missing parameter {}", idx + 1))
        })
    };
    let int = |idx: usize| -> Result<u32> {
        need(idx)?
            .parse::<u32>()
            .map_err(|_| Error::InvalidQuery(format!("parameter {} must be an integer", idx + 1)))
    };
    let float = |idx: usize| -> Result<f64> {
        need(idx)?
            .parse::<f64>()
            .map_err(|_| Error::InvalidQuery(format!("parameter {} must be a number", idx + 1)))
    };
    match kind {
        "hk" => Ok(hk(int(0)?)),
        "gk" => Ok(gk(int(0)?)),
        "k3k" => Ok(k3k(int(0)?)),
        "tw-chain" => Ok(tw_chain(int(0)?, int(1)?)),
        "random" => Ok(random_instance(int(0)?, float(1)?, int(2)?, seed)),
        "random-planar" => Ok(random_planar(int(0)?, int(1)?, seed)),
        "planar-wheel" => Ok(planar_wheel(int(0)?, int(1)?)),
        other => Err(Error::InvalidQuery(format!(
            "unknown generator kind '{other}' (expected hk, gk, k3k, tw-chain, random, random-planar, planar-wheel)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hk4_shape() {
        let inst = hk(4);
        assert_eq!(inst.graph.vertex_count(), 6);
        assert_eq!(inst.graph.edge_count(), 8);
        assert_eq!(inst.graph.black_vertices().len(), 2);
    }

    #[test]
    fn gk_is_bipartite() {
        let inst = gk(3);
        assert!(inst.graph.black_black_edges().is_empty());
        assert!(inst.graph.white_white_edges().is_empty());
        assert_eq!(inst.groups.len(), 1 + 3 * 2);
    }

    #[test]
    fn tw_chain_shape_and_connectivity() {
        let inst = tw_chain(5, 6);
        assert_eq!(inst.terminals.len(), 10);
        assert_eq!(inst.graph.white_vertices().len(), 4 * 6);
        // Global κ′ over all terminals is exactly k: cross-group pairs
        // bottleneck at one shared white column; end-group pairs realize k,
        // middle groups see both their columns (2k).
        let table = crate::connectivity::full_table(&inst.graph).unwrap();
        assert_eq!(table.values().copied().min().unwrap(), 6);
        let end = &inst.groups[0];
        assert_eq!(table[&(end[0].min(end[1]), end[0].max(end[1]))], 6);
        let mid = &inst.groups[2];
        assert_eq!(table[&(mid[0].min(mid[1]), mid[0].max(mid[1]))], 12);
    }

    #[test]
    fn planar_wheel_realizes_exact_k() {
        for (t, k) in [(4, 5), (3, 6), (4, 15), (2, 7)] {
            let inst = planar_wheel(t, k);
            let table = crate::connectivity::full_table(&inst.graph).unwrap();
            assert_eq!(table.values().copied().min().unwrap(), k, "t={t} k={k}");
            assert!(table.values().all(|&v| v == k));
        }
    }

    #[test]
    fn partial_ktree_decomposition_is_valid() {
        let (inst, td) = random_partial_ktree(18, 4, 0.9, 5, 11);
        td.validate(&inst.graph).unwrap();
        assert!(td.width() <= 4);
    }

    #[test]
    fn generate_rejects_unknown_kind() {
        assert!(generate("nope", &[], 0).is_err());
    }
}
