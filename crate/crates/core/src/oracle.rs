//! Independent brute-force ground truth and certificate validation. Nothing
//! here reuses the flow-based query path, so agreement between the two is a
//! meaningful check. Hard size caps fail loudly instead of running forever.

use crate::connectivity;
use crate::error::{Error, Result};
use crate::graph::{ColoredMultigraph, EdgeId, VertexId};
use crate::packing::{Packing, PackingKind};
use crate::spider::SpiderDecomposition;
use crate::ssk::SskInstance;
use num_rational::Rational64;
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

const BRUTE_VERTEX_CAP: usize = 16;
const BRUTE_SSK_EDGE_CAP: usize = 22;

/// κ′(u,v) by exhaustive white-cut enumeration: subdivide terminal edges,
/// then find the smallest white set whose removal separates the pair.
pub fn brute_element_connectivity(g: &ColoredMultigraph, u: VertexId, v: VertexId) -> Result<u32> {
    if g.vertex_count() > BRUTE_VERTEX_CAP {
        return Err(Error::OracleSizeExceeded(format!(
            "{} vertices (cap {BRUTE_VERTEX_CAP})",
            g.vertex_count()
        )));
    }
    if !g.is_black(u) {
        return Err(Error::NotBlack(u));
    }
    if !g.is_black(v) {
        return Err(Error::NotBlack(v));
    }
    if u == v {
        return Err(Error::InvalidQuery("brute κ′ needs a distinct pair".into()));
    }
    let (sub, _) = g.subdivide_terminal_edges();
    let whites = sub.white_vertices();
    for size in 0..=whites.len() {
        let mut found = None;
        for_each_subset(&whites, size, &mut |subset| {
            if found.is_some() {
                return;
            }
            let removed: BTreeSet<VertexId> = subset.iter().copied().collect();
            if !connectivity::pair_connected_avoiding(&sub, u, v, &removed) {
                found = Some(size as u32);
            }
        });
        if let Some(k) = found {
            return Ok(k);
        }
    }
    // Removing every white isolates the pair (no black-black edges remain），
    // so control cannot reach here for distinct blacks.
    Err(Error::InternalConsistency("no disconnecting white set found".into()))
}

/// κ(u,v) by exhaustive internal-vertex-cut enumeration. Parallel direct
/// edges each count as one path.
pub fn brute_vertex_connectivity(g: &ColoredMultigraph, u: VertexId, v: VertexId) -> Result<u32> {
    if g.vertex_count() > BRUTE_VERTEX_CAP {
        return Err(Error::OracleSizeExceeded(format!(
            "{} vertices (cap {BRUTE_VERTEX_CAP})",
            g.vertex_count()
        )));
    }
    if u == v {
        return Err(Error::InvalidQuery("brute κ needs a distinct pair".into()));
    }
    let direct = g.edges_between(u, v).len() as u32;
    let stripped = g.without_edges(&g.edges_between(u, v).into_iter().collect());
    let internal: Vec<VertexId> = stripped.vertices().filter(|x| *x != u && *x != v).collect();
    for size in 0..=internal.len() {
        let mut found = None;
        for_each_subset(&internal, size, &mut |subset| {
            if found.is_some() {
                return;
            }
            let removed: BTreeSet<VertexId> = subset.iter().copied().collect();
            if !connectivity::pair_connected_avoiding(&stripped, u, v, &removed) {
                found = Some(size as u32);
            }
        });
        if let Some(s) = found {
            return Ok(s + direct);
        }
    }
    Ok(internal.len() as u32 + direct)
}

fn for_each_subset<T: Copy>(items: &[T], size: usize, f: &mut impl FnMut(&[T])) {
    fn rec<T: Copy>(items: &[T], size: usize, start: usize, acc: &mut Vec<T>, f: &mut impl FnMut(&[T])) {
        if acc.len() == size {
            f(acc);
            return;
        }
        let needed = size - acc.len();
        for i in start..items.len() {
            if items.len() - i < needed {
                break;
            }
            acc.push(items[i]);
            rec(items, size, i + 1, acc, f);
            acc.pop();
        }
    }
    rec(items, size, 0, &mut Vec::new(), f);
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    SharedWhite { subgraphs: (usize, usize), vertex: VertexId },
    SharedEdge { subgraphs: (usize, usize), edge: EdgeId },
    Cyclic { subgraph: usize },
    MissingEdge { subgraph: usize, edge: EdgeId },
    GroupDisconnected { subgraph: usize, group: usize },
    TreeMissingTerminal { subgraph: usize, terminal: VertexId },
    TooManySubgraphs { count: usize, bound: u32 },
    FootCount { vertex: VertexId, found: u32, expected: u32 },
    FeetNotDistinctBlacks { spider: usize },
    IntermediateNotWhite { spider: usize, vertex: VertexId },
    WhiteHeadFewFeet { spider: usize, feet: usize },
    MalformedSpider { spider: usize, message: String },
    SskConnectivity { terminal: VertexId, found: u32, required: u32 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SharedWhite { subgraphs, vertex } => {
                write!(f, "subgraphs {} and {} share white vertex {vertex}", subgraphs.0, subgraphs.1)
            }
            Violation::SharedEdge { subgraphs, edge } => {
                write!(f, "subgraphs {} and {} share edge {edge}", subgraphs.0, subgraphs.1)
            }
            Violation::Cyclic { subgraph } => write!(f, "subgraph {subgraph} contains a cycle"),
            Violation::MissingEdge { subgraph, edge } => {
                write!(f, "subgraph {subgraph} uses edge {edge} absent from the host graph")
            }
            Violation::GroupDisconnected { subgraph, group } => {
                write!(f, "subgraph {subgraph} does not connect group {group}")
            }
            Violation::TreeMissingTerminal { subgraph, terminal } => {
                write!(f, "tree {subgraph} misses terminal {terminal}")
            }
            Violation::TooManySubgraphs { count, bound } => {
                write!(f, "{count} subgraphs exceed the connectivity bound {bound}")
            }
            Violation::FootCount { vertex, found, expected } => {
                write!(f, "black {vertex} is a foot of {found} spiders, expected {expected}")
            }
            Violation::FeetNotDistinctBlacks { spider } => {
                write!(f, "spider {spider} has repeated or non-black feet")
            }
            Violation::IntermediateNotWhite { spider, vertex } => {
                write!(f, "spider {spider} has non-white intermediate vertex {vertex}")
            }
            Violation::WhiteHeadFewFeet { spider, feet } => {
                write!(f, "white-headed spider {spider} has only {feet} feet")
            }
            Violation::MalformedSpider { spider, message } => {
                write!(f, "spider {spider} malformed: {message}")
            }
            Violation::SskConnectivity { terminal, found, required } => {
                write!(f, "terminal {terminal} is only {found}-vertex-connected to the root, need {required}")
            }
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pass() {
            write!(f, "pass")
        } else {
            writeln!(f, "fail ({} violations)", self.violations.len())?;
            for v in &self.violations {
                writeln!(f, "  - {v}")?;
            }
            Ok(())
        }
    }
}

fn subgraph_vertices(g: &ColoredMultigraph, edges: &BTreeSet<EdgeId>) -> BTreeSet<VertexId> {
    let mut vs = BTreeSet::new();
    for e in edges {
        if let Ok((u, v)) = g.endpoints(*e) {
            vs.insert(u);
            vs.insert(v);
        }
    }
    vs
}

fn is_acyclic(g: &ColoredMultigraph, edges: &BTreeSet<EdgeId>) -> bool {
    // A multiset of edges is a forest iff every component has |E| = |V| - 1.
    let vs = subgraph_vertices(g, edges);
    let mut parent: BTreeMap<VertexId, VertexId> = vs.iter().map(|v| (*v, *v)).collect();
    fn find(parent: &mut BTreeMap<VertexId, VertexId>, v: VertexId) -> VertexId {
        let p = parent[&v];
        if p == v {
            v
        } else {
            let root = find(parent, p);
            parent.insert(v, root);
            root
        }
    }
    for e in edges {
        let Ok((u, v)) = g.endpoints(*e) else { return false };
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru == rv {
            return false;
        }
        parent.insert(ru, rv);
    }
    true
}

fn component_of(
    g: &ColoredMultigraph,
    edges: &BTreeSet<EdgeId>,
    start: VertexId,
) -> BTreeSet<VertexId> {
    let mut adj: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    for e in edges {
        if let Ok((u, v)) = g.endpoints(*e) {
            adj.entry(u).or_default().push(v);
            adj.entry(v).or_default().push(u);
        }
    }
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        for y in adj.get(&x).into_iter().flatten() {
            if seen.insert(*y) {
                stack.push(*y);
            }
        }
    }
    seen
}

/// Checks pairwise white/edge disjointness, acyclicity, group connectivity,
/// edge existence, and the κ′ upper bound on the packing size.
pub fn validate_packing(g: &ColoredMultigraph, groups: &[Vec<VertexId>], p: &Packing) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut whites_of: Vec<BTreeSet<VertexId>> = Vec::new();
    for (i, edges) in p.subgraphs.iter().enumerate() {
        for e in edges {
            if !g.has_edge(*e) {
                report.violations.push(Violation::MissingEdge { subgraph: i, edge: *e });
            }
        }
        if !is_acyclic(g, edges) {
            report.violations.push(Violation::Cyclic { subgraph: i });
        }
        let whites: BTreeSet<VertexId> = subgraph_vertices(g, edges)
            .into_iter()
            .filter(|v| g.is_white(*v))
            .collect();
        whites_of.push(whites);
    }
    for i in 0..p.subgraphs.len() {
        for j in (i + 1)..p.subgraphs.len() {
            if let Some(w) = whites_of[i].intersection(&whites_of[j]).next() {
                report.violations.push(Violation::SharedWhite { subgraphs: (i, j), vertex: *w });
            }
            if let Some(e) = p.subgraphs[i].intersection(&p.subgraphs[j]).next() {
                report.violations.push(Violation::SharedEdge { subgraphs: (i, j), edge: *e });
            }
        }
    }
    let all_terminals: BTreeSet<VertexId> = groups.iter().flatten().copied().collect();
    for (i, edges) in p.subgraphs.iter().enumerate() {
        match p.kind {
            PackingKind::Trees => {
                let vs = subgraph_vertices(g, edges);
                let mut missing = false;
                for t in &all_terminals {
                    if !vs.contains(t) && all_terminals.len() > 1 {
                        report
                            .violations
                            .push(Violation::TreeMissingTerminal { subgraph: i, terminal: *t });
                        missing = true;
                    }
                }
                if !missing && all_terminals.len() > 1 {
                    let start = *all_terminals.iter().next().unwrap();
                    let comp = component_of(g, edges, start);
                    if !all_terminals.iter().all(|t| comp.contains(t)) {
                        report.violations.push(Violation::GroupDisconnected { subgraph: i, group: 0 });
                    }
                }
            }
            PackingKind::Forests => {
                for (gi, grp) in groups.iter().enumerate() {
                    if grp.len() <= 1 {
                        continue;
                    }
                    let comp = component_of(g, edges, grp[0]);
                    if !grp.iter().all(|t| comp.contains(t)) {
                        report.violations.push(Violation::GroupDisconnected { subgraph: i, group: gi });
                    }
                }
            }
        }
    }
    // Upper bound: at most min_i κ′(T_i) disjoint subgraphs can exist.
    if !p.subgraphs.is_empty() {
        if let Some(bound) = min_group_connectivity(g, groups) {
            if p.subgraphs.len() as u32 > bound {
                report
                    .violations
                    .push(Violation::TooManySubgraphs { count: p.subgraphs.len(), bound });
            }
        }
    }
    report
}

fn min_group_connectivity(g: &ColoredMultigraph, groups: &[Vec<VertexId>]) -> Option<u32> {
    let mut min: Option<u32> = None;
    for grp in groups {
        for (i, u) in grp.iter().enumerate() {
            for v in grp.iter().skip(i + 1) {
                let value = if g.vertex_count() <= 12 {
                    brute_element_connectivity(g, *u, *v).ok()?
                } else {
                    connectivity::element_connectivity_value(g, *u, *v).ok()?
                };
                min = Some(min.map_or(value, |m| m.min(value)));
            }
        }
    }
    min
}

/// Checks the three spider-decomposition conditions plus disjointness and
/// edge existence.
pub fn validate_spider_decomposition(
    g: &ColoredMultigraph,
    blacks: &BTreeSet<VertexId>,
    k: u32,
    sd: &SpiderDecomposition,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut white_owner: BTreeMap<VertexId, usize> = BTreeMap::new();
    let mut edge_owner: BTreeMap<EdgeId, usize> = BTreeMap::new();
    let mut foot_count: BTreeMap<VertexId, u32> = blacks.iter().map(|b| (*b, 0)).collect();

    for (si, spider) in sd.spiders.iter().enumerate() {
        if spider.legs.len() != spider.feet.len() {
            report.violations.push(Violation::MalformedSpider {
                spider: si,
                message: format!("{} legs for {} feet", spider.legs.len(), spider.feet.len()),
            });
            continue;
        }
        let mut feet_seen = BTreeSet::new();
        for foot in &spider.feet {
            if !blacks.contains(foot) || !feet_seen.insert(*foot) {
                report.violations.push(Violation::FeetNotDistinctBlacks { spider: si });
                break;
            }
        }
        for f in &spider.feet {
            if let Some(c) = foot_count.get_mut(f) {
                *c += 1;
            }
        }
        if g.is_white(spider.head) && spider.feet.len() < 2 {
            report
                .violations
                .push(Violation::WhiteHeadFewFeet { spider: si, feet: spider.feet.len() });
        }
        let mut spider_whites = BTreeSet::new();
        let mut spider_edges = BTreeSet::new();
        for (li, leg) in spider.legs.iter().enumerate() {
            if leg.vertices.first() != Some(&spider.head) || leg.vertices.last() != Some(&spider.feet[li]) {
                report.violations.push(Violation::MalformedSpider {
                    spider: si,
                    message: format!("leg {li} does not run head to foot"),
                });
                continue;
            }
            if leg.edges.len() + 1 != leg.vertices.len() {
                report.violations.push(Violation::MalformedSpider {
                    spider: si,
                    message: format!("leg {li} edge/vertex length mismatch"),
                });
                continue;
            }
            for (ei, e) in leg.edges.iter().enumerate() {
                match g.endpoints(*e) {
                    Ok((a, b)) => {
                        let (x, y) = (leg.vertices[ei], leg.vertices[ei + 1]);
                        if !((a == x && b == y) || (a == y && b == x)) {
                            report.violations.push(Violation::MalformedSpider {
                                spider: si,
                                message: format!("leg {li} edge {e} does not match its vertices"),
                            });
                        }
                    }
                    Err(_) => {
                        report.violations.push(Violation::MissingEdge { subgraph: si, edge: *e });
                    }
                }
                spider_edges.insert(*e);
            }
            // Intermediate vertices (not head, not the final foot) must be white.
            for x in leg.vertices.iter().skip(1).take(leg.vertices.len().saturating_sub(2)) {
                if !g.is_white(*x) {
                    report
                        .violations
                        .push(Violation::IntermediateNotWhite { spider: si, vertex: *x });
                }
            }
            for x in &leg.vertices {
                if g.is_white(*x) {
                    spider_whites.insert(*x);
                }
            }
        }
        for w in spider_whites {
            if let Some(prev) = white_owner.insert(w, si) {
                report.violations.push(Violation::SharedWhite { subgraphs: (prev, si), vertex: w });
            }
        }
        for e in spider_edges {
            if let Some(prev) = edge_owner.insert(e, si) {
                report.violations.push(Violation::SharedEdge { subgraphs: (prev, si), edge: e });
            }
        }
    }
    for (b, count) in foot_count {
        if count != k {
            report.violations.push(Violation::FootCount { vertex: b, found: count, expected: k });
        }
    }
    report
}

/// Feasibility report for a single-sink solution: κ within H between every
/// terminal and the root, compared to k.
pub fn validate_ssk(inst: &SskInstance, edges: &BTreeSet<EdgeId>) -> Result<ValidationReport> {
    let mut report = ValidationReport::default();
    let keep: BTreeSet<EdgeId> = inst.graph.edges().map(|(e, _, _)| e).collect();
    for e in edges {
        if !keep.contains(e) {
            report.violations.push(Violation::MissingEdge { subgraph: 0, edge: *e });
        }
    }
    let drop: BTreeSet<EdgeId> = keep.difference(edges).copied().collect();
    let h = inst.graph.without_edges(&drop);
    for t in &inst.terminals {
        let found = connectivity::vertex_connectivity(&h, *t, inst.root)?;
        if found < inst.k {
            report.violations.push(Violation::SskConnectivity {
                terminal: *t,
                found,
                required: inst.k,
            });
        }
    }
    Ok(report)
}

/// Exact minimum-cost feasible edge subset by branch and bound. Capped at 22
/// edges; returns `Infeasible` when even the full edge set fails.
pub fn brute_ssk_opt(inst: &SskInstance) -> Result<(Rational64, BTreeSet<EdgeId>)> {
    let all_edges: Vec<EdgeId> = inst.graph.edges().map(|(e, _, _)| e).collect();
    if all_edges.len() > BRUTE_SSK_EDGE_CAP {
        return Err(Error::OracleSizeExceeded(format!(
            "{} edges (cap {BRUTE_SSK_EDGE_CAP})",
            all_edges.len()
        )));
    }
    let feasible = |chosen: &BTreeSet<EdgeId>| -> Result<bool> {
        let drop: BTreeSet<EdgeId> = all_edges.iter().filter(|e| !chosen.contains(e)).copied().collect();
        let h = inst.graph.without_edges(&drop);
        for t in &inst.terminals {
            if connectivity::vertex_connectivity(&h, *t, inst.root)? < inst.k {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let full: BTreeSet<EdgeId> = all_edges.iter().copied().collect();
    if !feasible(&full)? {
        return Err(Error::Infeasible("full graph does not meet the requirement".into()));
    }
    let full_cost: Rational64 = all_edges.iter().map(|e| inst.graph.cost(*e).unwrap()).sum();
    let mut best_cost = full_cost;
    let mut best_set = full.clone();

    // DFS over edges; prefix is decided, suffix undecided. Prune on cost and
    // on infeasibility of prefix + entire suffix.
    fn search(
        inst: &SskInstance,
        all: &[EdgeId],
        idx: usize,
        chosen: &mut BTreeSet<EdgeId>,
        cost: Rational64,
        best_cost: &mut Rational64,
        best_set: &mut BTreeSet<EdgeId>,
        feasible: &dyn Fn(&BTreeSet<EdgeId>) -> Result<bool>,
    ) -> Result<()> {
        if cost >= *best_cost {
            return Ok(());
        }
        let mut relaxed = chosen.clone();
        relaxed.extend(all[idx..].iter().copied());
        if !feasible(&relaxed)? {
            return Ok(());
        }
        if idx == all.len() {
            if feasible(chosen)? {
                *best_cost = cost;
                *best_set = chosen.clone();
            }
            return Ok(());
        }
        let e = all[idx];
        // Exclude first: drives toward sparse solutions quickly.
        search(inst, all, idx + 1, chosen, cost, best_cost, best_set, feasible)?;
        chosen.insert(e);
        let c = inst.graph.cost(e).unwrap();
        search(inst, all, idx + 1, chosen, cost + c, best_cost, best_set, feasible)?;
        chosen.remove(&e);
        Ok(())
    }
    let mut chosen = BTreeSet::new();
    search(
        inst,
        &all_edges,
        0,
        &mut chosen,
        Rational64::zero(),
        &mut best_cost,
        &mut best_set,
        &feasible,
    )?;
    Ok((best_cost, best_set))
}

// ---------------------------------------------------------------------------
// Planarity (Demoucron's incremental face embedding, per biconnected block).

/// Combinatorial planarity test. Parallel edges never affect planarity, so
/// the test runs on the simple skeleton, block by block.
pub fn is_planar(g: &ColoredMultigraph) -> bool {
    let mut adj: BTreeMap<VertexId, BTreeSet<VertexId>> =
        g.vertices().map(|v| (v, BTreeSet::new())).collect();
    for (_, u, v) in g.edges() {
        adj.get_mut(&u).unwrap().insert(v);
        adj.get_mut(&v).unwrap().insert(u);
    }
    for block in blocks(&adj) {
        if !demoucron_planar(&block) {
            return false;
        }
    }
    true
}

type SimpleAdj = BTreeMap<VertexId, BTreeSet<VertexId>>;

/// Biconnected components as vertex-induced simple adjacency maps.
fn blocks(adj: &SimpleAdj) -> Vec<SimpleAdj> {
    let vertices: Vec<VertexId> = adj.keys().copied().collect();
    let mut index: BTreeMap<VertexId, usize> = BTreeMap::new();
    let mut low: BTreeMap<VertexId, usize> = BTreeMap::new();
    let mut stack: Vec<(VertexId, VertexId)> = Vec::new();
    let mut out: Vec<SimpleAdj> = Vec::new();
    let mut counter = 0usize;

    // Iterative Tarjan block decomposition.
    for &root in &vertices {
        if index.contains_key(&root) {
            continue;
        }
        let mut call: Vec<(VertexId, Option<VertexId>, Vec<VertexId>, usize)> = Vec::new();
        index.insert(root, counter);
        low.insert(root, counter);
        counter += 1;
        call.push((root, None, adj[&root].iter().copied().collect(), 0));
        while let Some((v, parent, nbrs, mut i)) = call.pop() {
            let mut descended = false;
            while i < nbrs.len() {
                let w = nbrs[i];
                i += 1;
                if Some(w) == parent {
                    continue;
                }
                if !index.contains_key(&w) {
                    stack.push((v, w));
                    index.insert(w, counter);
                    low.insert(w, counter);
                    counter += 1;
                    call.push((v, parent, nbrs, i));
                    call.push((w, Some(v), adj[&w].iter().copied().collect(), 0));
                    descended = true;
                    break;
                } else if index[&w] < index[&v] {
                    stack.push((v, w));
                    let lv = low[&v].min(index[&w]);
                    low.insert(v, lv);
                }
            }
            if descended {
                continue;
            }
            if let Some(p) = parent {
                let lv = low[&v];
                if lv < low[&p] {
                    low.insert(p, lv);
                }
                if lv >= index[&p] {
                    // (p, v) closes a block; pop its edges.
                    let mut block: SimpleAdj = BTreeMap::new();
                    while let Some(&(a, b)) = stack.last() {
                        if index[&a] >= index[&v] || (a, b) == (p, v) {
                            stack.pop();
                            block.entry(a).or_default().insert(b);
                            block.entry(b).or_default().insert(a);
                            if (a, b) == (p, v) {
                                break;
                            }
                        } else {
                            break;
                        }
                    }
                    if !block.is_empty() {
                        out.push(block);
                    }
                }
            }
        }
    }
    out
}

/// Demoucron's algorithm on a biconnected simple graph.
fn demoucron_planar(adj: &SimpleAdj) -> bool {
    let n = adj.len();
    let edge_count: usize = adj.values().map(|s| s.len()).sum::<usize>() / 2;
    if n <= 4 || edge_count <= n + 2 {
        // Fewer than n+3 edges cannot host a Kuratowski subdivision
        // (K_{3,3} needs E >= V+3, K_5 subdivisions likewise).
        return true;
    }
    if edge_count > 3 * n - 6 {
        return false;
    }

    // Initial cycle via DFS back edge.
    let cycle = match find_cycle(adj) {
        Some(c) => c,
        None => return true,
    };
    let mut embedded_vertices: BTreeSet<VertexId> = cycle.iter().copied().collect();
    let mut embedded_edges: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
    let norm = |a: VertexId, b: VertexId| (a.min(b), a.max(b));
    for i in 0..cycle.len() {
        embedded_edges.insert(norm(cycle[i], cycle[(i + 1) % cycle.len()]));
    }
    let mut faces: Vec<Vec<VertexId>> = vec![cycle.clone(), cycle.iter().rev().copied().collect()];
    let total_edges = edge_count;

    while embedded_edges.len() < total_edges {
        // Fragments: lone chords and attached components of the rest.
        let mut fragments: Vec<(BTreeSet<VertexId>, Vec<(VertexId, VertexId)>)> = Vec::new();
        for (u, nbrs) in adj {
            for v in nbrs {
                if u < v && embedded_vertices.contains(u) && embedded_vertices.contains(v)
                    && !embedded_edges.contains(&norm(*u, *v))
                {
                    fragments.push((BTreeSet::from([*u, *v]), vec![(*u, *v)]));
                }
            }
        }
        let outside: Vec<VertexId> =
            adj.keys().filter(|v| !embedded_vertices.contains(v)).copied().collect();
        let mut seen: BTreeSet<VertexId> = BTreeSet::new();
        for &start in &outside {
            if seen.contains(&start) {
                continue;
            }
            let mut comp = BTreeSet::from([start]);
            let mut attachments = BTreeSet::new();
            let mut stack = vec![start];
            seen.insert(start);
            while let Some(x) = stack.pop() {
                for y in &adj[&x] {
                    if embedded_vertices.contains(y) {
                        attachments.insert(*y);
                    } else if seen.insert(*y) {
                        comp.insert(*y);
                        stack.push(*y);
                    }
                }
            }
            let mut all: BTreeSet<VertexId> = comp.clone();
            all.extend(attachments.iter().copied());
            fragments.push((all, Vec::new()));
        }
        if fragments.is_empty() {
            return true;
        }

        // Admissible faces per fragment (faces containing all attachments).
        let mut chosen: Option<(usize, usize)> = None;
        let mut fallback: Option<(usize, usize)> = None;
        for (fi, (verts, chord)) in fragments.iter().enumerate() {
            let attachments: BTreeSet<VertexId> = if chord.is_empty() {
                verts.iter().filter(|v| embedded_vertices.contains(v)).copied().collect()
            } else {
                verts.clone()
            };
            let admissible: Vec<usize> = faces
                .iter()
                .enumerate()
                .filter(|(_, f)| attachments.iter().all(|a| f.contains(a)))
                .map(|(i, _)| i)
                .collect();
            match admissible.len() {
                0 => return false,
                1 => {
                    chosen = Some((fi, admissible[0]));
                    break;
                }
                _ => {
                    if fallback.is_none() {
                        fallback = Some((fi, admissible[0]));
                    }
                }
            }
        }
        let (fi, face_idx) = chosen.or(fallback).expect("some fragment exists");
        let (verts, chord) = &fragments[fi];

        // Alpha path through the fragment between two attachments.
        let path: Vec<VertexId> = if let Some((a, b)) = chord.first() {
            vec![*a, *b]
        } else {
            let attachments: Vec<VertexId> =
                verts.iter().filter(|v| embedded_vertices.contains(v)).copied().collect();
            fragment_path(adj, verts, &embedded_vertices, attachments[0])
        };

        // Split the face along the path.
        let face = faces.swap_remove(face_idx);
        let a = path[0];
        let b = *path.last().unwrap();
        let ai = face.iter().position(|v| *v == a).unwrap();
        let bi = face.iter().position(|v| *v == b).unwrap();
        let mut part1 = Vec::new();
        let mut i = ai;
        loop {
            part1.push(face[i]);
            if i == bi {
                break;
            }
            i = (i + 1) % face.len();
        }
        let mut part2 = Vec::new();
        let mut i = bi;
        loop {
            part2.push(face[i]);
            if i == ai {
                break;
            }
            i = (i + 1) % face.len();
        }
        let interior: Vec<VertexId> = path[1..path.len() - 1].to_vec();
        let mut face1 = part1.clone();
        face1.extend(interior.iter().rev());
        let mut face2 = part2.clone();
        face2.extend(interior.iter());
        faces.push(face1);
        faces.push(face2);

        for w in path.windows(2) {
            embedded_edges.insert(norm(w[0], w[1]));
        }
        for v in &path {
            embedded_vertices.insert(*v);
        }
    }
    true
}

fn find_cycle(adj: &SimpleAdj) -> Option<Vec<VertexId>> {
    // BFS tree plus the first non-tree edge; the cycle walks both endpoints
    // up to their meeting point.
    let start = *adj.keys().next()?;
    let mut parent: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    let mut depth: BTreeMap<VertexId, usize> = BTreeMap::from([(start, 0)]);
    let mut queue = std::collections::VecDeque::from([start]);
    let mut non_tree: Option<(VertexId, VertexId)> = None;
    'bfs: while let Some(v) = queue.pop_front() {
        for &w in &adj[&v] {
            if !depth.contains_key(&w) {
                depth.insert(w, depth[&v] + 1);
                parent.insert(w, v);
                queue.push_back(w);
            } else if parent.get(&v) != Some(&w) && parent.get(&w) != Some(&v) {
                non_tree = Some((v, w));
                break 'bfs;
            }
        }
    }
    let (mut a, mut b) = non_tree?;
    let mut left = vec![a];
    let mut right = vec![b];
    while depth[&a] > depth[&b] {
        a = parent[&a];
        left.push(a);
    }
    while depth[&b] > depth[&a] {
        b = parent[&b];
        right.push(b);
    }
    while a != b {
        a = parent[&a];
        left.push(a);
        b = parent[&b];
        right.push(b);
    }
    right.pop();
    right.reverse();
    left.extend(right);
    Some(left)
}

/// BFS inside the fragment from one attachment to any other, interior kept in
/// the fragment's own vertices.
fn fragment_path(
    adj: &SimpleAdj,
    fragment: &BTreeSet<VertexId>,
    embedded: &BTreeSet<VertexId>,
    from: VertexId,
) -> Vec<VertexId> {
    let mut parent: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    let mut visited = BTreeSet::from([from]);
    let mut queue = std::collections::VecDeque::from([from]);
    while let Some(x) = queue.pop_front() {
        for &y in &adj[&x] {
            if !fragment.contains(&y) || visited.contains(&y) {
                continue;
            }
            if embedded.contains(&y) {
                // A valid exit needs at least one interior vertex: leaving
                // straight from `from` would re-trace an embedded edge.
                if y != from && x != from {
                    let mut path = vec![y, x];
                    let mut z = x;
                    while z != from {
                        z = parent[&z];
                        path.push(z);
                    }
                    path.reverse();
                    return path;
                }
                continue;
            }
            visited.insert(y);
            parent.insert(y, x);
            queue.push_back(y);
        }
    }
    unreachable!("biconnected fragment always reaches a second attachment")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::graph::Color;

    #[test]
    fn brute_kappa_on_bwb_path_is_one() {
        let mut g = ColoredMultigraph::new();
        let a = g.add_vertex(Color::Black);
        let w = g.add_vertex(Color::White);
        let b = g.add_vertex(Color::Black);
        g.add_edge(a, w).unwrap();
        g.add_edge(w, b).unwrap();
        assert_eq!(brute_element_connectivity(&g, a, b).unwrap(), 1);
    }

    #[test]
    fn brute_kappa_on_h4_is_four() {
        let inst = gen::hk(4);
        let (x, y) = (inst.terminals[0], inst.terminals[1]);
        assert_eq!(brute_element_connectivity(&inst.graph, x, y).unwrap(), 4);
    }

    #[test]
    fn brute_kappa_rejects_oversized_inputs() {
        let inst = gen::gk(3);
        let (s, t) = (inst.groups[0][0], inst.groups[0][1]);
        assert!(matches!(
            brute_element_connectivity(&inst.graph, s, t),
            Err(Error::OracleSizeExceeded(_))
        ));
    }

    #[test]
    fn packing_validator_flags_shared_whites() {
        use crate::packing::{Packing, PackingKind};
        let inst = gen::k3k(3);
        let w = inst.graph.white_vertices()[0];
        let star: std::collections::BTreeSet<EdgeId> =
            inst.graph.incident_edges(w).into_iter().collect();
        let single = Packing {
            kind: PackingKind::Trees,
            groups: inst.groups.clone(),
            subgraphs: vec![star.clone()],
        };
        assert!(validate_packing(&inst.graph, &inst.groups, &single).pass());

        let doubled = Packing {
            kind: PackingKind::Trees,
            groups: inst.groups.clone(),
            subgraphs: vec![star.clone(), star],
        };
        let report = validate_packing(&inst.graph, &inst.groups, &doubled);
        assert!(!report.pass());
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::SharedWhite { vertex, .. } if *vertex == w)));
    }

    #[test]
    fn spider_validator_names_short_footed_black_and_shared_white() {
        let inst = gen::k3k(2);
        let blacks: BTreeSet<VertexId> = inst.terminals.iter().copied().collect();
        let sd = crate::spider::spider_decompose(&inst.graph, &blacks, 2).unwrap();
        assert!(validate_spider_decomposition(&inst.graph, &blacks, 2, &sd).pass());

        // Drop one spider: its feet lose a count each.
        let mut short = sd.clone();
        let removed = short.spiders.pop().unwrap();
        let report = validate_spider_decomposition(&inst.graph, &blacks, 2, &short);
        assert!(!report.pass());
        for foot in &removed.feet {
            assert!(report.violations.iter().any(
                |v| matches!(v, Violation::FootCount { vertex, found: 1, expected: 2 } if vertex == foot)
            ));
        }

        // Duplicate one spider: its white head appears twice.
        let mut doubled = sd.clone();
        doubled.spiders.push(doubled.spiders[0].clone());
        let head = doubled.spiders[0].head;
        let report = validate_spider_decomposition(&inst.graph, &blacks, 2, &doubled);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::SharedWhite { vertex, .. } if *vertex == head)));
    }

    #[test]
    fn brute_ssk_opt_on_tree_returns_the_tree() {
        use crate::graph::Color;
        let mut g = ColoredMultigraph::new();
        let r = g.add_vertex(Color::White);
        let a = g.add_vertex(Color::Black);
        let b = g.add_vertex(Color::Black);
        let e1 = g.add_edge(r, a).unwrap();
        let e2 = g.add_edge(a, b).unwrap();
        let inst = crate::ssk::SskInstance::new(g, r, vec![a, b], 1).unwrap();
        let (cost, edges) = brute_ssk_opt(&inst).unwrap();
        assert_eq!(cost, Rational64::from_integer(2));
        assert_eq!(edges, BTreeSet::from([e1, e2]));
    }

    #[test]
    fn brute_ssk_opt_on_cycle_needs_the_whole_cycle() {
        use crate::graph::Color;
        let mut g = ColoredMultigraph::new();
        let vs: Vec<VertexId> = (0..5).map(|_| g.add_vertex(Color::White)).collect();
        let mut es = Vec::new();
        for i in 0..5 {
            es.push(g.add_edge(vs[i], vs[(i + 1) % 5]).unwrap());
        }
        g.set_color(vs[2], Color::Black).unwrap();
        let inst = crate::ssk::SskInstance::new(g, vs[0], vec![vs[2]], 2).unwrap();
        let (cost, edges) = brute_ssk_opt(&inst).unwrap();
        assert_eq!(cost, Rational64::from_integer(5));
        assert_eq!(edges.len(), 5);
        assert_eq!(edges, es.into_iter().collect());
    }

    #[test]
    fn planarity_accepts_known_planar_graphs() {
        assert!(is_planar(&gen::hk(6).graph));
        assert!(is_planar(&gen::gk(3).graph));
        assert!(is_planar(&gen::planar_wheel(5, 7).graph));
        for seed in 0..5 {
            assert!(is_planar(&gen::random_planar(20, 4, seed).graph), "seed {seed}");
        }
        // K4 and a 4x4 grid.
        let mut k4 = ColoredMultigraph::new();
        let vs: Vec<_> = (0..4).map(|_| k4.add_vertex(Color::White)).collect();
        for i in 0..4 {
            for j in (i + 1)..4 {
                k4.add_edge(vs[i], vs[j]).unwrap();
            }
        }
        assert!(is_planar(&k4));
        let mut grid = ColoredMultigraph::new();
        let mut ids = vec![];
        for _ in 0..16 {
            ids.push(grid.add_vertex(Color::White));
        }
        for r in 0..4 {
            for c in 0..4 {
                if c + 1 < 4 {
                    grid.add_edge(ids[r * 4 + c], ids[r * 4 + c + 1]).unwrap();
                }
                if r + 1 < 4 {
                    grid.add_edge(ids[r * 4 + c], ids[(r + 1) * 4 + c]).unwrap();
                }
            }
        }
        assert!(is_planar(&grid));
    }

    #[test]
    fn planarity_rejects_k5_k33_petersen() {
        let mut k5 = ColoredMultigraph::new();
        let vs: Vec<_> = (0..5).map(|_| k5.add_vertex(Color::White)).collect();
        for i in 0..5 {
            for j in (i + 1)..5 {
                k5.add_edge(vs[i], vs[j]).unwrap();
            }
        }
        assert!(!is_planar(&k5));

        let mut k33 = ColoredMultigraph::new();
        let a: Vec<_> = (0..3).map(|_| k33.add_vertex(Color::White)).collect();
        let b: Vec<_> = (0..3).map(|_| k33.add_vertex(Color::White)).collect();
        for x in &a {
            for y in &b {
                k33.add_edge(*x, *y).unwrap();
            }
        }
        assert!(!is_planar(&k33));

        let mut pet = ColoredMultigraph::new();
        let vs: Vec<_> = (0..10).map(|_| pet.add_vertex(Color::White)).collect();
        for i in 0..5 {
            pet.add_edge(vs[i], vs[(i + 1) % 5]).unwrap();
            pet.add_edge(vs[i], vs[i + 5]).unwrap();
            pet.add_edge(vs[i + 5], vs[5 + (i + 2) % 5]).unwrap();
        }
        assert!(!is_planar(&pet));
    }

    #[test]
    fn planarity_handles_k5_hanging_off_planar_part() {
        let mut g = ColoredMultigraph::new();
        let vs: Vec<_> = (0..5).map(|_| g.add_vertex(Color::White)).collect();
        for i in 0..5 {
            for j in (i + 1)..5 {
                g.add_edge(vs[i], vs[j]).unwrap();
            }
        }
        let tail = g.add_vertex(Color::White);
        g.add_edge(vs[0], tail).unwrap();
        assert!(!is_planar(&g));
    }

    #[test]
    fn planarity_agrees_on_random_subgraphs_of_k33_plus() {
        // K_{3,3} minus any single edge is planar.
        let mut k33 = ColoredMultigraph::new();
        let a: Vec<_> = (0..3).map(|_| k33.add_vertex(Color::White)).collect();
        let b: Vec<_> = (0..3).map(|_| k33.add_vertex(Color::White)).collect();
        let mut edges = vec![];
        for x in &a {
            for y in &b {
                edges.push(k33.add_edge(*x, *y).unwrap());
            }
        }
        for e in edges {
            assert!(is_planar(&k33.delete_edge(e).unwrap()));
        }
    }
}
