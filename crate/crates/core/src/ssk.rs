//! Single-sink k-vertex-connectivity greedy: random terminal permutation plus
//! min-cost-flow augmentations, with already-bought edges re-priced to zero.

use crate::connectivity::{vertex_connectivity, VertexPath};
use crate::error::{Error, Result};
use crate::flow::{self, ArcTag, FlowNetwork, NodeId};
use crate::graph::{ColoredMultigraph, EdgeId, VertexId};
use crate::oracle::ValidationReport;
use num_rational::Rational64;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug)]
pub struct SskInstance {
    pub graph: ColoredMultigraph,
    pub root: VertexId,
    pub terminals: Vec<VertexId>,
    pub k: u32,
}

impl SskInstance {
    /// Validates costs, root/terminal disjointness, and feasibility
    /// (κ(t, root) ≥ k in the full graph for every terminal).
    pub fn new(graph: ColoredMultigraph, root: VertexId, terminals: Vec<VertexId>, k: u32) -> Result<Self> {
        if !graph.has_vertex(root) {
            return Err(Error::UnknownVertex(root));
        }
        let mut terminals = terminals;
        terminals.sort();
        terminals.dedup();
        if terminals.contains(&root) {
            return Err(Error::InvalidQuery(format!("root {root} cannot be a terminal")));
        }
        for t in &terminals {
            if !graph.has_vertex(*t) {
                return Err(Error::UnknownVertex(*t));
            }
        }
        for (e, _, _) in graph.edges() {
            if graph.cost(e)? < Rational64::zero() {
                return Err(Error::InvalidQuery(format!("edge {e} has negative cost")));
            }
        }
        let inst = SskInstance { graph, root, terminals, k };
        for t in &inst.terminals {
            let kappa = vertex_connectivity(&inst.graph, *t, inst.root)?;
            if kappa < k {
                return Err(Error::Infeasible(format!(
                    "terminal {t} is only {kappa}-vertex-connected to the root, need {k}"
                )));
            }
        }
        Ok(inst)
    }
}

/// k internally vertex-disjoint paths from a terminal to previously-connected
/// terminals or the root, each previous terminal ending at most one path.
#[derive(Clone, Debug)]
pub struct Augmentation {
    pub terminal: VertexId,
    pub paths: Vec<VertexPath>,
    /// Price actually paid (free edges contribute nothing).
    pub cost: Rational64,
}

impl Augmentation {
    pub fn edges(&self) -> BTreeSet<EdgeId> {
        self.paths.iter().flat_map(|p| p.edges.iter().copied()).collect()
    }
}

/// Scales rational edge costs to integers over a common denominator.
fn scaled_costs(g: &ColoredMultigraph, free: &BTreeSet<EdgeId>) -> Result<BTreeMap<EdgeId, i64>> {
    let mut denom_lcm: i64 = 1;
    for (e, _, _) in g.edges() {
        let d = *g.cost(e)?.denom();
        denom_lcm = num_integer_lcm(denom_lcm, d);
    }
    let mut out = BTreeMap::new();
    for (e, _, _) in g.edges() {
        if free.contains(&e) {
            out.insert(e, 0);
            continue;
        }
        let c = g.cost(e)?;
        out.insert(e, c.numer() * (denom_lcm / c.denom()));
    }
    Ok(out)
}

fn num_integer_lcm(a: i64, b: i64) -> i64 {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    (a / gcd(a, b)).abs() * b.abs()
}

/// Minimum-cost augmentation of `t` with respect to `prior`, or `None` when
/// no k-path augmentation exists. Every non-root vertex other than `t` is
/// split with capacity 1, so a prior terminal cannot both end a path and sit
/// inside another; the root absorbs any number of endpoints.
pub fn min_cost_augmentation(
    inst: &SskInstance,
    t: VertexId,
    prior: &BTreeSet<VertexId>,
) -> Result<Option<Augmentation>> {
    augmentation_with_free_edges(inst, t, prior, &BTreeSet::new())
}

fn augmentation_with_free_edges(
    inst: &SskInstance,
    t: VertexId,
    prior: &BTreeSet<VertexId>,
    free: &BTreeSet<EdgeId>,
) -> Result<Option<Augmentation>> {
    if prior.contains(&t) {
        return Err(Error::InvalidQuery(format!("terminal {t} is already connected")));
    }
    let g = &inst.graph;
    let costs = scaled_costs(g, free)?;

    let mut node_in: BTreeMap<VertexId, NodeId> = BTreeMap::new();
    let mut node_out: BTreeMap<VertexId, NodeId> = BTreeMap::new();
    let mut next = 0usize;
    for v in g.vertices() {
        if v == t || v == inst.root {
            node_in.insert(v, next);
            node_out.insert(v, next);
            next += 1;
        } else {
            node_in.insert(v, next);
            node_out.insert(v, next + 1);
            next += 2;
        }
    }
    let sink = next;
    let mut net = FlowNetwork::new(next + 1);
    for v in g.vertices() {
        if v != t && v != inst.root {
            net.add_arc(node_in[&v], node_out[&v], 1, 0, Some(ArcTag::SplitVertex(v)))?;
        }
    }
    for (e, u, v) in g.edges() {
        let c = costs[&e];
        net.add_arc(node_out[&u], node_in[&v], 1, c, Some(ArcTag::Edge(e)))?;
        net.add_arc(node_out[&v], node_in[&u], 1, c, Some(ArcTag::Edge(e)))?;
    }
    for p in prior {
        net.add_arc(node_out[p], sink, 1, 0, None)?;
    }
    net.add_arc(node_out[&inst.root], sink, inst.k as u64, 0, None)?;

    let Some(assignment) = flow::min_cost_flow_of_value(&net, node_out[&t], sink, inst.k as u64)?
    else {
        return Ok(None);
    };
    let arc_paths = flow::decompose_into_paths(&net, &assignment, node_out[&t], sink)?;
    let node_vertex: BTreeMap<NodeId, VertexId> = node_in
        .iter()
        .map(|(v, n)| (*n, *v))
        .chain(node_out.iter().map(|(v, n)| (*n, *v)))
        .collect();
    let mut paths = Vec::with_capacity(arc_paths.len());
    let mut cost = Rational64::zero();
    for arcs in arc_paths {
        let mut vertices = vec![t];
        let mut edges = Vec::new();
        for &i in &arcs {
            let arc = &net.arcs()[i];
            if let Some(ArcTag::Edge(e)) = arc.tag {
                vertices.push(node_vertex[&arc.head]);
                edges.push(e);
                if !free.contains(&e) {
                    cost += g.cost(e)?;
                }
            }
        }
        paths.push(VertexPath { vertices, edges });
    }
    Ok(Some(Augmentation { terminal: t, paths, cost }))
}

#[derive(Clone, Debug)]
pub struct GreedyRun {
    pub edges: BTreeSet<EdgeId>,
    pub total_cost: Rational64,
    /// Terminals in permutation order with the price paid at each step.
    pub steps: Vec<(VertexId, Rational64)>,
    /// Bought edge set after each step, for feasibility replay.
    pub history: Vec<BTreeSet<EdgeId>>,
}

/// Random-permutation greedy: each terminal in turn buys a min-cost
/// augmentation against the already-connected set, with bought edges
/// re-priced to zero.
pub fn greedy_ssk(inst: &SskInstance, seed: u64) -> Result<GreedyRun> {
    let mut order = inst.terminals.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let mut bought: BTreeSet<EdgeId> = BTreeSet::new();
    let mut connected: BTreeSet<VertexId> = BTreeSet::new();
    let mut steps = Vec::with_capacity(order.len());
    let mut history = Vec::with_capacity(order.len());
    let mut total = Rational64::zero();
    for t in order {
        let aug = augmentation_with_free_edges(inst, t, &connected, &bought)?
            .ok_or_else(|| Error::Infeasible(format!("no augmentation for terminal {t}")))?;
        validate_augmentation(inst, &aug, &connected)?;
        total += aug.cost;
        steps.push((t, aug.cost));
        bought.extend(aug.edges());
        connected.insert(t);
        history.push(bought.clone());
    }
    Ok(GreedyRun { edges: bought, total_cost: total, steps, history })
}

/// Structural invariants of one augmentation: k paths from the terminal into
/// prior ∪ {root}, internally vertex-disjoint, no prior terminal ending two.
pub fn validate_augmentation(
    inst: &SskInstance,
    aug: &Augmentation,
    prior: &BTreeSet<VertexId>,
) -> Result<()> {
    if aug.paths.len() != inst.k as usize {
        return Err(Error::InternalConsistency(format!(
            "augmentation for {} has {} paths, need {}",
            aug.terminal,
            aug.paths.len(),
            inst.k
        )));
    }
    let mut internal_seen: BTreeSet<VertexId> = BTreeSet::new();
    let mut endpoint_seen: BTreeSet<VertexId> = BTreeSet::new();
    for p in &aug.paths {
        if p.vertices.first() != Some(&aug.terminal) {
            return Err(Error::InternalConsistency("path does not start at the terminal".into()));
        }
        let end = *p.vertices.last().unwrap();
        if end != inst.root && !prior.contains(&end) {
            return Err(Error::InternalConsistency(format!(
                "path ends at {end}, which is neither root nor a prior terminal"
            )));
        }
        if end != inst.root && !endpoint_seen.insert(end) {
            return Err(Error::InternalConsistency(format!(
                "prior terminal {end} ends two augmentation paths"
            )));
        }
        for v in &p.vertices[1..p.vertices.len() - 1] {
            if !internal_seen.insert(*v) {
                return Err(Error::InternalConsistency(format!(
                    "vertex {v} is internal to two augmentation paths"
                )));
            }
        }
    }
    Ok(())
}

/// Feasibility report for an edge set: κ within H between every terminal and
/// the root, compared to k.
pub fn verify_ssk_feasible(inst: &SskInstance, edges: &BTreeSet<EdgeId>) -> Result<ValidationReport> {
    crate::oracle::validate_ssk(inst, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::graph::Color;
    use crate::oracle;

    fn unit_cost_complete(n: u32) -> ColoredMultigraph {
        let mut g = ColoredMultigraph::new();
        let vs: Vec<VertexId> = (0..n).map(|_| g.add_vertex(Color::White)).collect();
        for i in 0..vs.len() {
            for j in (i + 1)..vs.len() {
                g.add_edge(vs[i], vs[j]).unwrap();
            }
        }
        g
    }

    #[test]
    fn k1_augmentation_is_cheapest_path() {
        // Path r - a - b with costs 1, 5 and a shortcut r - b with cost 3.
        let mut g = ColoredMultigraph::new();
        let r = g.add_vertex(Color::White);
        let a = g.add_vertex(Color::White);
        let b = g.add_vertex(Color::Black);
        g.add_edge_with_cost(r, a, Rational64::from_integer(1)).unwrap();
        g.add_edge_with_cost(a, b, Rational64::from_integer(5)).unwrap();
        g.add_edge_with_cost(r, b, Rational64::from_integer(3)).unwrap();
        let inst = SskInstance::new(g, r, vec![b], 1).unwrap();
        let aug = min_cost_augmentation(&inst, b, &BTreeSet::new()).unwrap().unwrap();
        assert_eq!(aug.cost, Rational64::from_integer(3));
        assert_eq!(aug.paths.len(), 1);
    }

    #[test]
    fn star_hub_blocks_two_disjoint_paths() {
        // Star: all leaves attach to one hub; k=2 from a leaf is impossible.
        let mut g = ColoredMultigraph::new();
        let hub = g.add_vertex(Color::White);
        let r = g.add_vertex(Color::White);
        let t = g.add_vertex(Color::Black);
        let o = g.add_vertex(Color::White);
        g.add_edge(hub, r).unwrap();
        g.add_edge(hub, t).unwrap();
        g.add_edge(hub, o).unwrap();
        assert!(matches!(
            SskInstance::new(g.clone(), r, vec![t], 2),
            Err(Error::Infeasible(_))
        ));
        let inst = SskInstance { graph: g, root: r, terminals: vec![t], k: 2 };
        assert!(min_cost_augmentation(&inst, t, &BTreeSet::new()).unwrap().is_none());
    }

    #[test]
    fn k2_augmentation_matches_exhaustive_path_pair_search() {
        use rand::Rng;
        for seed in 0..8u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(700 + seed);
            let mut g = unit_cost_complete(0);
            let vs: Vec<VertexId> = (0..8).map(|_| g.add_vertex(Color::White)).collect();
            for i in 0..vs.len() {
                for j in (i + 1)..vs.len() {
                    if rng.random_bool(0.6) {
                        let c = Rational64::from_integer(rng.random_range(1..=6));
                        g.add_edge_with_cost(vs[i], vs[j], c).unwrap();
                    }
                }
            }
            let r = vs[0];
            let t = vs[7];
            g.set_color(t, Color::Black).unwrap();
            let Ok(inst) = SskInstance::new(g.clone(), r, vec![t], 2) else {
                continue;
            };
            let aug = min_cost_augmentation(&inst, t, &BTreeSet::new()).unwrap().unwrap();
            let brute = brute_best_two_paths(&g, t, r).expect("feasible instance has a pair");
            assert_eq!(aug.cost, brute, "seed {seed}");
        }
    }

    /// Exhaustive minimum over pairs of internally vertex-disjoint t→r paths.
    fn brute_best_two_paths(
        g: &ColoredMultigraph,
        t: VertexId,
        r: VertexId,
    ) -> Option<Rational64> {
        fn walk(
            g: &ColoredMultigraph,
            cur: VertexId,
            target: VertexId,
            path_v: &mut Vec<VertexId>,
            path_e: &mut Vec<EdgeId>,
            out: &mut Vec<(Vec<VertexId>, Vec<EdgeId>)>,
        ) {
            if cur == target {
                out.push((path_v.clone(), path_e.clone()));
                return;
            }
            for e in g.incident_edges(cur) {
                let (a, b) = g.endpoints(e).unwrap();
                let next = if a == cur { b } else { a };
                if path_v.contains(&next) {
                    continue;
                }
                path_v.push(next);
                path_e.push(e);
                walk(g, next, target, path_v, path_e, out);
                path_v.pop();
                path_e.pop();
            }
        }
        let mut all = Vec::new();
        walk(g, t, r, &mut vec![t], &mut vec![], &mut all);
        let mut best: Option<Rational64> = None;
        for (i, (va, ea)) in all.iter().enumerate() {
            for (vb, eb) in all.iter().skip(i + 1) {
                let ia: BTreeSet<_> = va[1..va.len() - 1].iter().collect();
                let ib: BTreeSet<_> = vb[1..vb.len() - 1].iter().collect();
                if ia.intersection(&ib).next().is_some() {
                    continue;
                }
                if ea.iter().any(|e| eb.contains(e)) {
                    continue;
                }
                let cost: Rational64 = ea
                    .iter()
                    .chain(eb.iter())
                    .map(|e| g.cost(*e).unwrap())
                    .sum();
                best = Some(best.map_or(cost, |b| b.min(cost)));
            }
        }
        best
    }

    #[test]
    fn greedy_k1_connects_everything() {
        let g = unit_cost_complete(6);
        let vs: Vec<VertexId> = g.vertices().collect();
        let inst = SskInstance::new(g, vs[0], vs[1..4].to_vec(), 1).unwrap();
        let run = greedy_ssk(&inst, 5).unwrap();
        let report = verify_ssk_feasible(&inst, &run.edges).unwrap();
        assert!(report.pass(), "{report}");
        let step_sum: Rational64 = run.steps.iter().map(|(_, c)| *c).sum();
        assert_eq!(step_sum, run.total_cost);
    }

    #[test]
    fn greedy_cost_at_least_opt_on_complete_unit_graph() {
        let g = unit_cost_complete(6);
        let vs: Vec<VertexId> = g.vertices().collect();
        let inst = SskInstance::new(g, vs[0], vs[1..4].to_vec(), 2).unwrap();
        let (opt_cost, opt_edges) = oracle::brute_ssk_opt(&inst).unwrap();
        assert!(oracle::validate_ssk(&inst, &opt_edges).unwrap().pass());
        for seed in 0..6 {
            let run = greedy_ssk(&inst, seed).unwrap();
            assert!(run.total_cost >= opt_cost, "seed {seed}");
            assert!(verify_ssk_feasible(&inst, &run.edges).unwrap().pass());
        }
    }

    #[test]
    fn greedy_output_feasible_on_random_instances() {
        let mut done = 0;
        let mut seed = 0u64;
        while done < 12 {
            seed += 1;
            let (g, root, terms) = gen::random_costed(10, 0.5, 3, 4000 + seed);
            let Ok(inst) = SskInstance::new(g, root, terms, 2) else {
                continue;
            };
            let run = greedy_ssk(&inst, seed).unwrap();
            let report = verify_ssk_feasible(&inst, &run.edges).unwrap();
            assert!(report.pass(), "seed {seed}: {report}");
            done += 1;
        }
    }

    #[test]
    fn empty_subgraph_fails_verification() {
        let g = unit_cost_complete(5);
        let vs: Vec<VertexId> = g.vertices().collect();
        let inst = SskInstance::new(g, vs[0], vs[1..3].to_vec(), 1).unwrap();
        let report = verify_ssk_feasible(&inst, &BTreeSet::new()).unwrap();
        assert_eq!(report.violations.len(), 2);
        let full: BTreeSet<EdgeId> = inst.graph.edges().map(|(e, _, _)| e).collect();
        assert!(verify_ssk_feasible(&inst, &full).unwrap().pass());
    }
}
