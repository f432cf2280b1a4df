//! Planar Steiner tree and forest packing. The instance is first reduced so
//! whites form a stable set, degree-2 whites are shortcut into direct
//! terminal-terminal parallel edges, and whites keep no parallel edges; the
//! packer then repeatedly merges a terminal pair carrying the most parallel
//! edges, assigning one copy per tree, and unwinds. Groups that shrink to a
//! single terminal are replaced by a grid of white vertices so the remaining
//! groups keep merging. Every white vertex in the output subgraphs has degree
//! exactly 2.

use crate::connectivity;
use crate::error::{Error, Result};
use crate::graph::{Color, ColoredMultigraph, EdgeId, MinorTrace, TraceRecord, VertexId};
use crate::packing::{Packing, PackingKind};
use crate::reduction::{self, Decision};
use std::collections::{BTreeMap, BTreeSet};

/// How many parallel edges a heavy pair must carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThresholdRule {
    /// ⌈k/5⌉ - 1, floored at 1.
    Planar,
    /// ⌈k/c⌉ for bounded-genus hosts (c ≤ 4g+8), floored at 1.
    Contraction(u32),
}

impl ThresholdRule {
    pub fn threshold(&self, k: u32) -> u32 {
        match self {
            ThresholdRule::Planar => (k.div_ceil(5).saturating_sub(1)).max(1),
            ThresholdRule::Contraction(c) => k.div_ceil((*c).max(1)).max(1),
        }
    }
}

/// A black-black edge standing in for a suppressed degree-2 white path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WhitePathLift {
    pub first: EdgeId,
    pub mid: VertexId,
    pub second: EdgeId,
}

/// Bipartite-reduced planar instance with degree-2 whites shortcut into
/// parallel terminal-terminal edges. Edges absent from `lift` are original.
#[derive(Clone, Debug)]
pub struct ReducedPlanarInstance {
    pub multigraph: ColoredMultigraph,
    pub lift: BTreeMap<EdgeId, WhitePathLift>,
    /// Minor operations from the input to the stage the lift map builds on.
    pub trace: MinorTrace,
}

enum Step {
    /// Terminal pair merged after reserving one parallel copy per tree.
    Merge { copies: Vec<EdgeId> },
    /// Degree-2 white shortcut: `replacement` stands for first-mid-second.
    Suppress { replacement: EdgeId, lift: WhitePathLift },
    /// κ′-preserving edge deletion (redundant white-white edge, extra
    /// parallel black-white copy, pendant white edge).
    Delete { edge: EdgeId },
    /// White-white contraction chosen by the reduction step.
    Contract { edge: EdgeId, survivor: VertexId, absorbed: VertexId, before: ColoredMultigraph },
    /// Dead terminal replaced by a grid; its internal edges must be dropped
    /// on the way back and the attached edges regain the terminal endpoint.
    Grid { internal: BTreeSet<EdgeId>, before: ColoredMultigraph },
}

struct Pipeline {
    graph: ColoredMultigraph,
    steps: Vec<Step>,
}

impl Pipeline {
    /// Brings the working graph back to reduced-instance form: no white-white
    /// edges, no parallel black-white copies, no whites of degree ≤ 2.
    fn normalize(&mut self) -> Result<()> {
        let mut baseline: Option<reduction::KappaTable> = None;
        loop {
            let mut changed = false;

            while let Some(&edge) = self.graph.white_white_edges().first() {
                let table = match &baseline {
                    Some(t) => t,
                    None => {
                        baseline = Some(connectivity::full_table(&self.graph)?);
                        baseline.as_ref().unwrap()
                    }
                };
                match reduction::classify_edge(&self.graph, edge, table)? {
                    Decision::Delete => {
                        self.graph = self.graph.delete_edge(edge)?;
                        self.steps.push(Step::Delete { edge });
                    }
                    Decision::Contract => {
                        let before = self.graph.clone();
                        let (next, rec) = self.graph.contract_edge(edge)?;
                        let TraceRecord::ContractEdge { survivor, absorbed, .. } = rec else {
                            unreachable!()
                        };
                        self.graph = next;
                        self.steps.push(Step::Contract { edge, survivor, absorbed, before });
                    }
                }
                changed = true;
            }

            // One white vertex never needs two parallel copies to the same
            // terminal: its capacity is 1.
            for w in self.graph.white_vertices() {
                let mut by_neighbor: BTreeMap<VertexId, Vec<EdgeId>> = BTreeMap::new();
                for e in self.graph.incident_edges(w) {
                    let (a, b) = self.graph.endpoints(e)?;
                    by_neighbor.entry(if a == w { b } else { a }).or_default().push(e);
                }
                for (_, mut copies) in by_neighbor {
                    copies.sort();
                    for extra in copies.into_iter().skip(1) {
                        self.graph = self.graph.delete_edge(extra)?;
                        self.steps.push(Step::Delete { edge: extra });
                        changed = true;
                    }
                }
            }

            // Pendant and isolated whites carry no terminal path.
            for w in self.graph.white_vertices() {
                let incident = self.graph.incident_edges(w);
                match incident.len() {
                    0 => {
                        self.graph = self.graph.delete_isolated_vertex(w)?.0;
                        changed = true;
                    }
                    1 => {
                        self.graph = self.graph.delete_edge(incident[0])?;
                        self.steps.push(Step::Delete { edge: incident[0] });
                        self.graph = self.graph.delete_isolated_vertex(w)?.0;
                        changed = true;
                    }
                    _ => {}
                }
            }

            // Degree-2 whites act as edges between their two terminals.
            for w in self.graph.white_vertices() {
                let incident = self.graph.incident_edges(w);
                if incident.len() != 2 {
                    continue;
                }
                let (a1, b1) = self.graph.endpoints(incident[0])?;
                let (a2, b2) = self.graph.endpoints(incident[1])?;
                let n1 = if a1 == w { b1 } else { a1 };
                let n2 = if a2 == w { b2 } else { a2 };
                if n1 == n2 || !self.graph.is_black(n1) || !self.graph.is_black(n2) {
                    continue;
                }
                let cost = self.graph.cost(incident[0])?;
                let mut g = self.graph.without_vertices(&BTreeSet::from([w]));
                let replacement = g.add_edge_with_cost(n1, n2, cost)?;
                self.graph = g;
                self.steps.push(Step::Suppress {
                    replacement,
                    lift: WhitePathLift { first: incident[0], mid: w, second: incident[1] },
                });
                changed = true;
            }

            if !changed {
                return Ok(());
            }
        }
    }

    /// Replaces terminal `t` by a deg(t) × deg(t) grid of whites, attaching
    /// t's edges to the first grid column in ascending edge order.
    fn grid_replace(&mut self, t: VertexId) -> Result<()> {
        let incident = self.graph.incident_edges(t);
        if incident.is_empty() {
            self.graph = self.graph.delete_isolated_vertex(t)?.0;
            return Ok(());
        }
        let before = self.graph.clone();
        let d = incident.len();
        let mut attachments = Vec::with_capacity(d);
        for e in &incident {
            let (a, b) = self.graph.endpoints(*e)?;
            attachments.push((*e, if a == t { b } else { a }, self.graph.cost(*e)?));
        }
        let mut g = self.graph.without_vertices(&BTreeSet::from([t]));
        let mut grid = vec![vec![VertexId(0); d]; d];
        for row in grid.iter_mut() {
            for cell in row.iter_mut() {
                *cell = g.add_vertex(Color::White);
            }
        }
        let mut internal = BTreeSet::new();
        for r in 0..d {
            for c in 0..d {
                if c + 1 < d {
                    internal.insert(g.add_edge(grid[r][c], grid[r][c + 1])?);
                }
                if r + 1 < d {
                    internal.insert(g.add_edge(grid[r][c], grid[r + 1][c])?);
                }
            }
        }
        for (i, (e, other, cost)) in attachments.into_iter().enumerate() {
            g.insert_edge(e, grid[i][0], other, cost)?;
        }
        self.graph = g;
        self.steps.push(Step::Grid { internal, before });
        Ok(())
    }

    /// Maps subgraphs of the final working graph back to the stage where the
    /// pipeline started.
    fn unwind(&self, trees: Vec<BTreeSet<EdgeId>>) -> Result<Vec<BTreeSet<EdgeId>>> {
        let mut trees = trees;
        for step in self.steps.iter().rev() {
            match step {
                Step::Merge { copies } => {
                    let count = trees.len().min(copies.len());
                    trees.truncate(count);
                    for (tree, copy) in trees.iter_mut().zip(copies) {
                        tree.insert(*copy);
                    }
                }
                Step::Suppress { replacement, lift } => {
                    for tree in &mut trees {
                        if tree.remove(replacement) {
                            tree.insert(lift.first);
                            tree.insert(lift.second);
                        }
                    }
                }
                Step::Delete { edge } => {
                    for tree in &trees {
                        if tree.contains(edge) {
                            return Err(Error::InternalConsistency(format!(
                                "packed subgraph uses deleted edge {edge}"
                            )));
                        }
                    }
                }
                Step::Contract { edge, survivor, absorbed, before } => {
                    for tree in &mut trees {
                        let mut touches_survivor = false;
                        let mut touches_absorbed = false;
                        for e in tree.iter() {
                            let (a, b) = before.endpoints(*e)?;
                            touches_survivor |= a == *survivor || b == *survivor;
                            touches_absorbed |= a == *absorbed || b == *absorbed;
                        }
                        if touches_survivor && touches_absorbed {
                            tree.insert(*edge);
                        }
                    }
                }
                Step::Grid { internal, before } => {
                    for tree in &mut trees {
                        tree.retain(|e| !internal.contains(e));
                        // Routing through the grid collapses onto the dead
                        // terminal; break any cycles that creates.
                        let mut forest = spanning_forest(before, tree);
                        prune_white_leaves(before, &mut forest);
                        *tree = forest;
                    }
                }
            }
        }
        Ok(trees)
    }
}

fn spanning_forest(g: &ColoredMultigraph, edges: &BTreeSet<EdgeId>) -> BTreeSet<EdgeId> {
    let mut parent: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    fn find(parent: &mut BTreeMap<VertexId, VertexId>, v: VertexId) -> VertexId {
        let p = *parent.entry(v).or_insert(v);
        if p == v {
            v
        } else {
            let r = find(parent, p);
            parent.insert(v, r);
            r
        }
    }
    let mut out = BTreeSet::new();
    for e in edges {
        let (u, v) = g.endpoints(*e).expect("edge exists");
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru != rv {
            parent.insert(ru, rv);
            out.insert(*e);
        }
    }
    out
}

fn prune_white_leaves(g: &ColoredMultigraph, edges: &mut BTreeSet<EdgeId>) {
    loop {
        let mut incident: BTreeMap<VertexId, Vec<EdgeId>> = BTreeMap::new();
        for e in edges.iter() {
            let (u, v) = g.endpoints(*e).expect("edge exists");
            incident.entry(u).or_default().push(*e);
            incident.entry(v).or_default().push(*e);
        }
        let mut removed = false;
        for (v, es) in &incident {
            if es.len() == 1 && g.is_white(*v) {
                edges.remove(&es[0]);
                removed = true;
            }
        }
        if !removed {
            return;
        }
    }
}

fn normalized(g: &ColoredMultigraph, terminals: &BTreeSet<VertexId>) -> Result<ColoredMultigraph> {
    let mut out = g.clone();
    for v in g.vertices() {
        if terminals.contains(&v) {
            out.set_color(v, Color::Black)?;
        } else {
            out.set_color(v, Color::White)?;
        }
    }
    Ok(out)
}

fn start_pipeline(g: &ColoredMultigraph) -> Result<(Pipeline, MinorTrace)> {
    let result = reduction::reduce_to_bipartite(g, false)?;
    let mut pipeline = Pipeline { graph: result.reduced, steps: Vec::new() };
    pipeline.normalize()?;
    Ok((pipeline, result.trace))
}

/// Builds the reduced planar instance: bipartite reduction followed by
/// shortcutting degree-2 whites into direct terminal-terminal edges.
pub fn build_reduced_instance(g: &ColoredMultigraph) -> Result<ReducedPlanarInstance> {
    let (pipeline, mut trace) = start_pipeline(g)?;
    let mut lift = BTreeMap::new();
    for step in &pipeline.steps {
        match step {
            Step::Suppress { replacement, lift: entry } => {
                lift.insert(*replacement, *entry);
            }
            Step::Delete { edge } => trace.push(TraceRecord::DeleteEdge { edge: *edge }),
            Step::Contract { edge, survivor, absorbed, .. } => trace.push(TraceRecord::ContractEdge {
                edge: *edge,
                survivor: *survivor,
                absorbed: *absorbed,
            }),
            Step::Merge { .. } | Step::Grid { .. } => {
                return Err(Error::InternalConsistency(
                    "instance construction produced packing-only steps".into(),
                ))
            }
        }
    }
    Ok(ReducedPlanarInstance { multigraph: pipeline.graph, lift, trace })
}

/// The terminal pair with the most parallel edges, with `threshold` reserved
/// copies. Errors when the maximum multiplicity is below the rule's
/// threshold, which signals a non-planar input or connectivity below k.
pub fn find_heavy_terminal_pair(
    ri: &ReducedPlanarInstance,
    k: u32,
    rule: ThresholdRule,
) -> Result<(VertexId, VertexId, Vec<EdgeId>)> {
    heavy_pair_in(&ri.multigraph, k, rule)
}

fn heavy_pair_in(
    g: &ColoredMultigraph,
    k: u32,
    rule: ThresholdRule,
) -> Result<(VertexId, VertexId, Vec<EdgeId>)> {
    let threshold = rule.threshold(k);
    let mut by_pair: BTreeMap<(VertexId, VertexId), Vec<EdgeId>> = BTreeMap::new();
    for e in g.black_black_edges() {
        let (u, v) = g.endpoints(e)?;
        by_pair.entry((u.min(v), u.max(v))).or_default().push(e);
    }
    let best = by_pair
        .into_iter()
        .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(&a.0)));
    match best {
        Some(((u, v), mut copies)) if copies.len() >= threshold as usize => {
            copies.sort();
            copies.truncate(threshold as usize);
            Ok((u, v, copies))
        }
        Some((_, copies)) => {
            Err(Error::ThresholdViolation { found: copies.len(), threshold: threshold as usize })
        }
        None => Err(Error::ThresholdViolation { found: 0, threshold: threshold as usize }),
    }
}

/// Replaces a dead terminal by a deg(t) × deg(t) grid of white vertices,
/// preserving planarity and all remaining pairwise element-connectivities.
pub fn replace_dead_terminal_with_grid(
    g: &ColoredMultigraph,
    t: VertexId,
) -> Result<ColoredMultigraph> {
    if !g.is_black(t) {
        return Err(Error::NotBlack(t));
    }
    let mut pipeline = Pipeline { graph: g.clone(), steps: Vec::new() };
    pipeline.grid_replace(t)?;
    Ok(pipeline.graph)
}

/// Packs ≥ max(1, ⌈k/5⌉-1) element-disjoint Steiner trees in a planar host;
/// every white vertex in every tree has degree exactly 2.
pub fn pack_planar_trees(g: &ColoredMultigraph, terminals: &[VertexId], k: u32) -> Result<Packing> {
    pack_planar_trees_with_rule(g, terminals, k, ThresholdRule::Planar)
}

pub fn pack_planar_trees_with_rule(
    g: &ColoredMultigraph,
    terminals: &[VertexId],
    k: u32,
    rule: ThresholdRule,
) -> Result<Packing> {
    let term_set: BTreeSet<VertexId> = terminals.iter().copied().collect();
    if term_set.len() < 2 {
        return Err(Error::InvalidQuery("tree packing needs at least two terminals".into()));
    }
    let norm = normalized(g, &term_set)?;
    let (mut pipeline, trace) = start_pipeline(&norm)?;

    let mut live: BTreeSet<VertexId> = term_set.iter().copied().collect();
    while live.len() > 2 {
        let (t1, t2, copies) = heavy_pair_in(&pipeline.graph, k, rule)?;
        pipeline.steps.push(Step::Merge { copies });
        let (merged, rec) = pipeline.graph.merge_vertices(t1, t2)?;
        pipeline.graph = merged;
        let TraceRecord::MergeVertices { survivor, absorbed } = rec else { unreachable!() };
        live.remove(&absorbed);
        live.insert(survivor);
        pipeline.normalize()?;
    }
    let pair: Vec<VertexId> = live.iter().copied().collect();
    let base = connectivity::element_connectivity(&pipeline.graph, pair[0], pair[1])?;
    if base.value == 0 {
        return Err(Error::NoPacking("terminals are disconnected".into()));
    }
    let paths: Vec<BTreeSet<EdgeId>> = base
        .witness_paths
        .into_iter()
        .map(|p| p.edges.into_iter().collect())
        .collect();
    let unwound = pipeline.unwind(paths)?;
    let mut subgraphs = Vec::with_capacity(unwound.len());
    for tree in unwound {
        subgraphs.push(trace.lift_edges(&norm, &tree)?);
    }
    Ok(Packing {
        kind: PackingKind::Trees,
        groups: vec![term_set.into_iter().collect()],
        subgraphs,
    })
}

/// Packs ≥ max(1, ⌈k/5⌉-1) element-disjoint Steiner forests in a planar
/// host. Merging across groups unions them; a group reduced to a single
/// terminal is replaced by a white grid so the loop can continue.
pub fn pack_planar_forests(
    g: &ColoredMultigraph,
    groups: &[Vec<VertexId>],
    k: u32,
) -> Result<Packing> {
    pack_planar_forests_with_rule(g, groups, k, ThresholdRule::Planar)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PlanarStats {
    pub merges: usize,
    pub grids_inserted: usize,
}

pub fn pack_planar_forests_with_rule(
    g: &ColoredMultigraph,
    groups: &[Vec<VertexId>],
    k: u32,
    rule: ThresholdRule,
) -> Result<Packing> {
    Ok(pack_planar_forests_with_stats(g, groups, k, rule)?.0)
}

pub fn pack_planar_forests_with_stats(
    g: &ColoredMultigraph,
    groups: &[Vec<VertexId>],
    k: u32,
    rule: ThresholdRule,
) -> Result<(Packing, PlanarStats)> {
    if groups.is_empty() {
        return Err(Error::InvalidQuery("forest packing needs at least one group".into()));
    }
    let term_set: BTreeSet<VertexId> = groups.iter().flatten().copied().collect();
    let norm = normalized(g, &term_set)?;
    let (mut pipeline, trace) = start_pipeline(&norm)?;

    let mut live: Vec<BTreeSet<VertexId>> =
        groups.iter().map(|grp| grp.iter().copied().collect()).collect();
    loop {
        if !live.iter().any(|grp| grp.len() > 1) {
            break;
        }
        // A group already merged to one terminal is dead; a grid keeps the
        // host planar while removing its low-degree terminal.
        if let Some(pos) = live.iter().position(|grp| grp.len() == 1) {
            let t = *live[pos].iter().next().unwrap();
            live.remove(pos);
            pipeline.grid_replace(t)?;
            pipeline.normalize()?;
            continue;
        }
        let (t1, t2, copies) = heavy_pair_in(&pipeline.graph, k, rule)?;
        pipeline.steps.push(Step::Merge { copies });
        let (merged, rec) = pipeline.graph.merge_vertices(t1, t2)?;
        pipeline.graph = merged;
        let TraceRecord::MergeVertices { survivor, absorbed } = rec else { unreachable!() };
        let holders: Vec<usize> = live
            .iter()
            .enumerate()
            .filter(|(_, grp)| grp.contains(&t1) || grp.contains(&t2))
            .map(|(i, _)| i)
            .collect();
        match holders.as_slice() {
            [single] => {
                let grp = &mut live[*single];
                grp.remove(&absorbed);
                grp.insert(survivor);
            }
            [a, b] => {
                let second = live.remove(*b);
                live[*a].extend(second);
                live[*a].remove(&absorbed);
                live[*a].insert(survivor);
            }
            _ => {
                return Err(Error::InternalConsistency(
                    "merged pair belongs to more than two groups".into(),
                ))
            }
        }
        pipeline.normalize()?;
    }
    let threshold = rule.threshold(k) as usize;
    let base = vec![BTreeSet::new(); threshold];
    let stats = PlanarStats {
        merges: pipeline.steps.iter().filter(|s| matches!(s, Step::Merge { .. })).count(),
        grids_inserted: pipeline.steps.iter().filter(|s| matches!(s, Step::Grid { .. })).count(),
    };
    let unwound = pipeline.unwind(base)?;
    let mut subgraphs = Vec::with_capacity(unwound.len());
    for forest in unwound {
        subgraphs.push(trace.lift_edges(&norm, &forest)?);
    }
    Ok((Packing { kind: PackingKind::Forests, groups: groups.to_vec(), subgraphs }, stats))
}

/// Every white vertex appearing in the subgraph has degree exactly 2 there.
pub fn whites_have_degree_two(g: &ColoredMultigraph, edges: &BTreeSet<EdgeId>) -> bool {
    let mut degree: BTreeMap<VertexId, usize> = BTreeMap::new();
    for e in edges {
        let Ok((u, v)) = g.endpoints(*e) else { return false };
        *degree.entry(u).or_insert(0) += 1;
        *degree.entry(v).or_insert(0) += 1;
    }
    degree.iter().all(|(v, d)| !g.is_white(*v) || *d == 2)
}
