//! Colored multigraphs with identity-stable vertices and edges, plus the
//! minor operations (delete, contract, subdivide, merge) and replayable traces
//! that certify a derived graph is a minor of the original.

use crate::error::{Error, Result};
use num_rational::Rational64;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VertexId(pub u32);

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct EdgeId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Color {
    Black,
    White,
}

#[derive(Clone, PartialEq, Eq, Debug)]
struct VertexData {
    color: Color,
    group: Option<u32>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
struct EdgeData {
    u: VertexId,
    v: VertexId,
    cost: Rational64,
}

/// Undirected multigraph whose vertices are black (terminals) or white
/// (Steiner vertices). Parallel edges are first-class citizens with their own
/// `EdgeId`; self-loops are forbidden. Edge costs default to 1 and only matter
/// to the cost-aware algorithms.
///
/// Values are immutable: every operation returns a new graph.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ColoredMultigraph {
    vertices: BTreeMap<VertexId, VertexData>,
    edges: BTreeMap<EdgeId, EdgeData>,
    next_vertex: u32,
    next_edge: u32,
}

impl Default for ColoredMultigraph {
    fn default() -> Self {
        Self::new()
    }
}

impl ColoredMultigraph {
    pub fn new() -> Self {
        ColoredMultigraph {
            vertices: BTreeMap::new(),
            edges: BTreeMap::new(),
            next_vertex: 0,
            next_edge: 0,
        }
    }

    pub fn add_vertex(&mut self, color: Color) -> VertexId {
        let id = VertexId(self.next_vertex);
        self.next_vertex += 1;
        self.vertices.insert(id, VertexData { color, group: None });
        id
    }

    /// Inserts a vertex under an explicit id, as the document parser and trace
    /// replay require.
    pub fn insert_vertex(&mut self, id: VertexId, color: Color, group: Option<u32>) -> Result<()> {
        if self.vertices.contains_key(&id) {
            return Err(Error::DuplicateVertex(id));
        }
        if group.is_some() && color != Color::Black {
            return Err(Error::NotBlack(id));
        }
        self.vertices.insert(id, VertexData { color, group });
        self.next_vertex = self.next_vertex.max(id.0 + 1);
        Ok(())
    }

    pub fn set_group(&mut self, v: VertexId, group: Option<u32>) -> Result<()> {
        let data = self.vertices.get_mut(&v).ok_or(Error::UnknownVertex(v))?;
        if group.is_some() && data.color != Color::Black {
            return Err(Error::NotBlack(v));
        }
        data.group = group;
        Ok(())
    }

    /// Recolors a vertex. Turning a black vertex white clears its group id.
    pub fn set_color(&mut self, v: VertexId, color: Color) -> Result<()> {
        let data = self.vertices.get_mut(&v).ok_or(Error::UnknownVertex(v))?;
        data.color = color;
        if color == Color::White {
            data.group = None;
        }
        Ok(())
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<EdgeId> {
        self.add_edge_with_cost(u, v, Rational64::from_integer(1))
    }

    pub fn add_edge_with_cost(&mut self, u: VertexId, v: VertexId, cost: Rational64) -> Result<EdgeId> {
        let id = EdgeId(self.next_edge);
        self.insert_edge(id, u, v, cost)?;
        Ok(id)
    }

    pub fn insert_edge(&mut self, id: EdgeId, u: VertexId, v: VertexId, cost: Rational64) -> Result<()> {
        if self.edges.contains_key(&id) {
            return Err(Error::DuplicateEdge(id));
        }
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        if !self.vertices.contains_key(&u) {
            return Err(Error::UnknownVertex(u));
        }
        if !self.vertices.contains_key(&v) {
            return Err(Error::UnknownVertex(v));
        }
        self.edges.insert(id, EdgeData { u, v, cost });
        self.next_edge = self.next_edge.max(id.0 + 1);
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        self.vertices.contains_key(&v)
    }

    pub fn has_edge(&self, e: EdgeId) -> bool {
        self.edges.contains_key(&e)
    }

    pub fn color(&self, v: VertexId) -> Result<Color> {
        self.vertices.get(&v).map(|d| d.color).ok_or(Error::UnknownVertex(v))
    }

    pub fn is_black(&self, v: VertexId) -> bool {
        self.vertices.get(&v).map(|d| d.color == Color::Black).unwrap_or(false)
    }

    pub fn is_white(&self, v: VertexId) -> bool {
        self.vertices.get(&v).map(|d| d.color == Color::White).unwrap_or(false)
    }

    pub fn group(&self, v: VertexId) -> Option<u32> {
        self.vertices.get(&v).and_then(|d| d.group)
    }

    pub fn endpoints(&self, e: EdgeId) -> Result<(VertexId, VertexId)> {
        self.edges.get(&e).map(|d| (d.u, d.v)).ok_or(Error::UnknownEdge(e))
    }

    pub fn cost(&self, e: EdgeId) -> Result<Rational64> {
        self.edges.get(&e).map(|d| d.cost).ok_or(Error::UnknownEdge(e))
    }

    pub fn set_cost(&mut self, e: EdgeId, cost: Rational64) -> Result<()> {
        self.edges.get_mut(&e).map(|d| d.cost = cost).ok_or(Error::UnknownEdge(e))
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.keys().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, VertexId, VertexId)> + '_ {
        self.edges.iter().map(|(id, d)| (*id, d.u, d.v))
    }

    pub fn black_vertices(&self) -> Vec<VertexId> {
        self.vertices
            .iter()
            .filter(|(_, d)| d.color == Color::Black)
            .map(|(v, _)| *v)
            .collect()
    }

    pub fn white_vertices(&self) -> Vec<VertexId> {
        self.vertices
            .iter()
            .filter(|(_, d)| d.color == Color::White)
            .map(|(v, _)| *v)
            .collect()
    }

    /// Terminal groups read off the `group` labels, keyed by group id.
    pub fn labeled_groups(&self) -> BTreeMap<u32, BTreeSet<VertexId>> {
        let mut out: BTreeMap<u32, BTreeSet<VertexId>> = BTreeMap::new();
        for (v, d) in &self.vertices {
            if let Some(g) = d.group {
                out.entry(g).or_default().insert(*v);
            }
        }
        out
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.edges.values().filter(|d| d.u == v || d.v == v).count()
    }

    /// Adjacency as (edge, neighbor) lists, sorted by edge id.
    pub fn adjacency(&self) -> BTreeMap<VertexId, Vec<(EdgeId, VertexId)>> {
        let mut adj: BTreeMap<VertexId, Vec<(EdgeId, VertexId)>> =
            self.vertices.keys().map(|v| (*v, Vec::new())).collect();
        for (id, d) in &self.edges {
            adj.get_mut(&d.u).unwrap().push((*id, d.v));
            adj.get_mut(&d.v).unwrap().push((*id, d.u));
        }
        adj
    }

    pub fn incident_edges(&self, v: VertexId) -> Vec<EdgeId> {
        self.edges
            .iter()
            .filter(|(_, d)| d.u == v || d.v == v)
            .map(|(id, _)| *id)
            .collect()
    }

    pub fn edges_between(&self, u: VertexId, v: VertexId) -> Vec<EdgeId> {
        self.edges
            .iter()
            .filter(|(_, d)| (d.u == u && d.v == v) || (d.u == v && d.v == u))
            .map(|(id, _)| *id)
            .collect()
    }

    pub fn black_black_edges(&self) -> Vec<EdgeId> {
        self.edges
            .iter()
            .filter(|(_, d)| self.is_black(d.u) && self.is_black(d.v))
            .map(|(id, _)| *id)
            .collect()
    }

    /// White-white edges sorted lexicographically by
    /// (min endpoint, max endpoint, edge id).
    pub fn white_white_edges(&self) -> Vec<EdgeId> {
        let mut edges: Vec<(VertexId, VertexId, EdgeId)> = self
            .edges
            .iter()
            .filter(|(_, d)| self.is_white(d.u) && self.is_white(d.v))
            .map(|(id, d)| (d.u.min(d.v), d.u.max(d.v), *id))
            .collect();
        edges.sort();
        edges.into_iter().map(|(_, _, id)| id).collect()
    }

    /// Replaces every black-black edge by a length-2 path through a fresh
    /// white vertex. Pairwise element-connectivity of black vertices is
    /// unchanged. Idempotent.
    pub fn subdivide_terminal_edges(&self) -> (Self, MinorTrace) {
        let mut g = self.clone();
        let mut trace = MinorTrace::new();
        for e in self.black_black_edges() {
            let rec = g.subdivide_edge_in_place(e).expect("edge exists");
            trace.push(rec);
        }
        (g, trace)
    }

    fn subdivide_edge_in_place(&mut self, e: EdgeId) -> Result<TraceRecord> {
        let data = self.edges.get(&e).ok_or(Error::UnknownEdge(e))?.clone();
        self.edges.remove(&e);
        let mid = self.add_vertex(Color::White);
        let first = self.add_edge_with_cost(data.u, mid, data.cost)?;
        let second = self.add_edge_with_cost(mid, data.v, data.cost)?;
        Ok(TraceRecord::SubdivideEdge { edge: e, mid, first, second })
    }

    pub fn delete_edge(&self, e: EdgeId) -> Result<Self> {
        if !self.edges.contains_key(&e) {
            return Err(Error::UnknownEdge(e));
        }
        let mut g = self.clone();
        g.edges.remove(&e);
        Ok(g)
    }

    /// Contracts edge `e`, merging its endpoints into the smaller `VertexId`.
    pub fn contract_edge(&self, e: EdgeId) -> Result<(Self, TraceRecord)> {
        let (u, v) = self.endpoints(e)?;
        self.contract_edge_into(e, u.min(v))
    }

    /// Contracts edge `e` into an explicit survivor endpoint. Self-loops
    /// created by the merge are discarded; parallel edges are kept. The
    /// survivor is black if either endpoint was black.
    pub fn contract_edge_into(&self, e: EdgeId, survivor: VertexId) -> Result<(Self, TraceRecord)> {
        let (u, v) = self.endpoints(e)?;
        if survivor != u && survivor != v {
            return Err(Error::InvalidQuery(format!(
                "survivor {survivor} is not an endpoint of {e}"
            )));
        }
        let absorbed = if survivor == u { v } else { u };
        let mut g = self.merged(survivor, absorbed);
        let black = self.is_black(u) || self.is_black(v);
        g.vertices.get_mut(&survivor).unwrap().color =
            if black { Color::Black } else { Color::White };
        Ok((g, TraceRecord::ContractEdge { edge: e, survivor, absorbed }))
    }

    /// Merges two (not necessarily adjacent) vertices. Edges between them
    /// become loops and are dropped; the survivor is the smaller id and keeps
    /// its own color and group.
    pub fn merge_vertices(&self, a: VertexId, b: VertexId) -> Result<(Self, TraceRecord)> {
        if !self.vertices.contains_key(&a) {
            return Err(Error::UnknownVertex(a));
        }
        if !self.vertices.contains_key(&b) {
            return Err(Error::UnknownVertex(b));
        }
        if a == b {
            return Err(Error::InvalidQuery(format!("cannot merge {a} with itself")));
        }
        let survivor = a.min(b);
        let absorbed = a.max(b);
        let g = self.merged(survivor, absorbed);
        Ok((g, TraceRecord::MergeVertices { survivor, absorbed }))
    }

    fn merged(&self, survivor: VertexId, absorbed: VertexId) -> Self {
        let mut g = self.clone();
        g.vertices.remove(&absorbed);
        let ids: Vec<EdgeId> = g.edges.keys().copied().collect();
        for id in ids {
            let d = g.edges.get_mut(&id).unwrap();
            if d.u == absorbed {
                d.u = survivor;
            }
            if d.v == absorbed {
                d.v = survivor;
            }
            if d.u == d.v {
                g.edges.remove(&id);
            }
        }
        g
    }

    /// Removes a vertex with no incident edges (needed when pendant Steiner
    /// vertices are stripped during planar preprocessing).
    pub fn delete_isolated_vertex(&self, v: VertexId) -> Result<(Self, TraceRecord)> {
        if !self.vertices.contains_key(&v) {
            return Err(Error::UnknownVertex(v));
        }
        if self.degree(v) != 0 {
            return Err(Error::NotIsolated(v));
        }
        let mut g = self.clone();
        g.vertices.remove(&v);
        Ok((g, TraceRecord::DeleteIsolatedVertex { vertex: v }))
    }

    /// Vertex sets of connected components, in ascending order of their
    /// smallest vertex.
    pub fn components(&self) -> Vec<BTreeSet<VertexId>> {
        let adj = self.adjacency();
        let mut seen: BTreeSet<VertexId> = BTreeSet::new();
        let mut out = Vec::new();
        for v in self.vertices.keys().copied() {
            if seen.contains(&v) {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut stack = vec![v];
            while let Some(x) = stack.pop() {
                if !seen.insert(x) {
                    continue;
                }
                comp.insert(x);
                for (_, y) in &adj[&x] {
                    if !seen.contains(y) {
                        stack.push(*y);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    /// Induced subgraph on a vertex set (keeps ids).
    pub fn induced(&self, keep: &BTreeSet<VertexId>) -> Self {
        let mut g = self.clone();
        g.vertices.retain(|v, _| keep.contains(v));
        g.edges.retain(|_, d| keep.contains(&d.u) && keep.contains(&d.v));
        g
    }

    /// Subgraph with the given edges removed.
    pub fn without_edges(&self, drop: &BTreeSet<EdgeId>) -> Self {
        let mut g = self.clone();
        g.edges.retain(|id, _| !drop.contains(id));
        g
    }

    /// Subgraph with the given vertices (and their edges) removed.
    pub fn without_vertices(&self, drop: &BTreeSet<VertexId>) -> Self {
        let mut g = self.clone();
        g.vertices.retain(|v, _| !drop.contains(v));
        g.edges.retain(|_, d| !drop.contains(&d.u) && !drop.contains(&d.v));
        g
    }

    /// True when every path endpoint pair in `targets` lies in one component.
    pub fn connects(&self, targets: &BTreeSet<VertexId>) -> bool {
        if targets.len() <= 1 {
            return true;
        }
        let mut it = targets.iter();
        let start = *it.next().unwrap();
        let adj = self.adjacency();
        if !adj.contains_key(&start) {
            return false;
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            if !seen.insert(x) {
                continue;
            }
            for (_, y) in &adj[&x] {
                if !seen.contains(y) {
                    stack.push(*y);
                }
            }
        }
        targets.iter().all(|t| seen.contains(t))
    }
}

/// One minor-preserving step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceRecord {
    DeleteEdge { edge: EdgeId },
    ContractEdge { edge: EdgeId, survivor: VertexId, absorbed: VertexId },
    SubdivideEdge { edge: EdgeId, mid: VertexId, first: EdgeId, second: EdgeId },
    MergeVertices { survivor: VertexId, absorbed: VertexId },
    DeleteIsolatedVertex { vertex: VertexId },
}

/// Ordered record of minor operations. Replaying the trace on the original
/// graph reproduces the derived graph exactly, certifying it is a minor;
/// subgraphs of the derived graph lift back to subgraphs of the original.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MinorTrace {
    records: Vec<TraceRecord>,
}

impl MinorTrace {
    pub fn new() -> Self {
        MinorTrace { records: Vec::new() }
    }

    pub fn push(&mut self, rec: TraceRecord) {
        self.records.push(rec);
    }

    pub fn extend(&mut self, other: MinorTrace) {
        self.records.extend(other.records);
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    fn apply(graph: &ColoredMultigraph, rec: &TraceRecord) -> Result<ColoredMultigraph> {
        match rec {
            TraceRecord::DeleteEdge { edge } => graph.delete_edge(*edge),
            TraceRecord::ContractEdge { edge, survivor, .. } => {
                Ok(graph.contract_edge_into(*edge, *survivor)?.0)
            }
            TraceRecord::SubdivideEdge { edge, mid, first, second } => {
                let data = graph.endpoints(*edge)?;
                let cost = graph.cost(*edge)?;
                let mut g = graph.delete_edge(*edge)?;
                g.insert_vertex(*mid, Color::White, None)?;
                g.insert_edge(*first, data.0, *mid, cost)?;
                g.insert_edge(*second, *mid, data.1, cost)?;
                Ok(g)
            }
            TraceRecord::MergeVertices { survivor, absorbed } => {
                Ok(graph.merge_vertices(*survivor, *absorbed)?.0)
            }
            TraceRecord::DeleteIsolatedVertex { vertex } => {
                Ok(graph.delete_isolated_vertex(*vertex)?.0)
            }
        }
    }

    /// Replays the trace on `original`, returning the derived graph and the
    /// map from original vertices to their current representative (vertices
    /// deleted outright are absent from the map).
    pub fn replay(&self, original: &ColoredMultigraph) -> Result<(ColoredMultigraph, BTreeMap<VertexId, VertexId>)> {
        let mut g = original.clone();
        let mut map: BTreeMap<VertexId, VertexId> =
            original.vertices().map(|v| (v, v)).collect();
        for rec in &self.records {
            g = Self::apply(&g, rec)?;
            match rec {
                TraceRecord::ContractEdge { survivor, absorbed, .. }
                | TraceRecord::MergeVertices { survivor, absorbed } => {
                    for target in map.values_mut() {
                        if *target == *absorbed {
                            *target = *survivor;
                        }
                    }
                }
                TraceRecord::DeleteIsolatedVertex { vertex } => {
                    map.retain(|_, tgt| tgt != vertex);
                }
                _ => {}
            }
        }
        Ok((g, map))
    }

    /// Lifts an edge set of the derived graph back to an edge set of
    /// `original`. Contracted edges are re-inserted whenever the subgraph
    /// touches both merged sides, so white vertices re-expand into paths;
    /// subdivided pairs collapse back to the original edge and must be used
    /// both-or-neither (callers prune white leaves before lifting).
    pub fn lift_edges(
        &self,
        original: &ColoredMultigraph,
        edges: &BTreeSet<EdgeId>,
    ) -> Result<BTreeSet<EdgeId>> {
        // Reconstruct the intermediate graphs so each reverse step knows the
        // endpoints in force at that time.
        let mut states = Vec::with_capacity(self.records.len());
        let mut g = original.clone();
        for rec in &self.records {
            states.push(g.clone());
            g = Self::apply(&g, rec)?;
        }
        for e in edges {
            if !g.has_edge(*e) {
                return Err(Error::UnknownEdge(*e));
            }
        }

        let mut current = edges.clone();
        for (rec, before) in self.records.iter().zip(states.iter()).rev() {
            match rec {
                TraceRecord::DeleteEdge { edge } => {
                    if current.contains(edge) {
                        return Err(Error::InternalConsistency(format!(
                            "lifted subgraph uses deleted edge {edge}"
                        )));
                    }
                }
                TraceRecord::DeleteIsolatedVertex { .. } => {}
                TraceRecord::SubdivideEdge { edge, first, second, .. } => {
                    let has1 = current.remove(first);
                    let has2 = current.remove(second);
                    if has1 != has2 {
                        return Err(Error::InternalConsistency(format!(
                            "subgraph uses only one half of subdivided edge {edge}"
                        )));
                    }
                    if has1 {
                        current.insert(*edge);
                    }
                }
                TraceRecord::ContractEdge { edge, survivor, absorbed } => {
                    let mut touches_survivor = false;
                    let mut touches_absorbed = false;
                    for e in &current {
                        let (a, b) = before.endpoints(*e)?;
                        if a == *survivor || b == *survivor {
                            touches_survivor = true;
                        }
                        if a == *absorbed || b == *absorbed {
                            touches_absorbed = true;
                        }
                    }
                    if touches_survivor && touches_absorbed {
                        current.insert(*edge);
                    }
                }
                TraceRecord::MergeVertices { .. } => {
                    return Err(Error::InternalConsistency(
                        "generic lifting across a terminal merge is not defined".into(),
                    ));
                }
            }
        }
        Ok(current)
    }
}
