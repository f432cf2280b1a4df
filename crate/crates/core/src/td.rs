//! Tree decompositions: validation against a graph, width, and a min-degree
//! elimination heuristic for recomputing decompositions of derived graphs.
//! No width optimality is promised anywhere.

use crate::error::{Error, Result};
use crate::graph::{ColoredMultigraph, VertexId};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug)]
pub struct TreeDecomposition {
    pub bags: Vec<BTreeSet<VertexId>>,
    /// Edges of the bag tree, as index pairs into `bags`.
    pub tree_edges: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    /// width = max bag size - 1.
    pub fn width(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(0).saturating_sub(1)
    }

    pub fn bag_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.bags.len()];
        for &(a, b) in &self.tree_edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Checks the three decomposition conditions: every vertex covered, every
    /// edge inside some bag, and the bags containing any fixed vertex form a
    /// connected subtree. Also checks the bag graph is a tree.
    pub fn validate(&self, g: &ColoredMultigraph) -> Result<()> {
        if self.bags.is_empty() {
            if g.vertex_count() == 0 {
                return Ok(());
            }
            return Err(Error::InvalidDecomposition("no bags".into()));
        }
        if self.tree_edges.len() + 1 != self.bags.len() {
            return Err(Error::InvalidDecomposition(format!(
                "{} bags need {} tree edges, found {}",
                self.bags.len(),
                self.bags.len() - 1,
                self.tree_edges.len()
            )));
        }
        for &(a, b) in &self.tree_edges {
            if a >= self.bags.len() || b >= self.bags.len() {
                return Err(Error::InvalidDecomposition("tree edge out of range".into()));
            }
        }
        // Connectivity of the bag graph (with n-1 edges this implies a tree).
        let adj = self.bag_adjacency();
        let mut seen = vec![false; self.bags.len()];
        let mut stack = vec![0usize];
        while let Some(x) = stack.pop() {
            if seen[x] {
                continue;
            }
            seen[x] = true;
            stack.extend(adj[x].iter().copied().filter(|y| !seen[*y]));
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::InvalidDecomposition("bag graph is disconnected".into()));
        }
        let covered: BTreeSet<VertexId> = self.bags.iter().flatten().copied().collect();
        for v in g.vertices() {
            if !covered.contains(&v) {
                return Err(Error::InvalidDecomposition(format!("vertex {v} not in any bag")));
            }
        }
        for (e, u, v) in g.edges() {
            if !self.bags.iter().any(|b| b.contains(&u) && b.contains(&v)) {
                return Err(Error::InvalidDecomposition(format!("edge {e} not inside any bag")));
            }
        }
        // Subtree property per vertex.
        for v in g.vertices() {
            let holding: Vec<usize> = (0..self.bags.len())
                .filter(|i| self.bags[*i].contains(&v))
                .collect();
            let inside: BTreeSet<usize> = holding.iter().copied().collect();
            let mut seen: BTreeSet<usize> = BTreeSet::new();
            let mut stack = vec![holding[0]];
            while let Some(x) = stack.pop() {
                if !seen.insert(x) {
                    continue;
                }
                for &y in &adj[x] {
                    if inside.contains(&y) && !seen.contains(&y) {
                        stack.push(y);
                    }
                }
            }
            if seen.len() != holding.len() {
                return Err(Error::InvalidDecomposition(format!(
                    "bags containing {v} do not form a subtree"
                )));
            }
        }
        Ok(())
    }

    /// Min-degree elimination heuristic. Always valid; width is best-effort.
    pub fn min_degree_heuristic(g: &ColoredMultigraph) -> Self {
        let mut nbrs: BTreeMap<VertexId, BTreeSet<VertexId>> =
            g.vertices().map(|v| (v, BTreeSet::new())).collect();
        for (_, u, v) in g.edges() {
            nbrs.get_mut(&u).unwrap().insert(v);
            nbrs.get_mut(&v).unwrap().insert(u);
        }
        if nbrs.is_empty() {
            return TreeDecomposition { bags: vec![BTreeSet::new()], tree_edges: vec![] };
        }
        let mut order: Vec<VertexId> = Vec::new();
        let mut elim_bag: Vec<BTreeSet<VertexId>> = Vec::new();
        let mut live: BTreeSet<VertexId> = nbrs.keys().copied().collect();
        while let Some(&v) = live.iter().min_by_key(|v| (nbrs[v].len(), **v)) {
            let bag: BTreeSet<VertexId> = {
                let mut b = nbrs[&v].clone();
                b.insert(v);
                b
            };
            // Make the neighborhood a clique, then remove v.
            let neigh: Vec<VertexId> = nbrs[&v].iter().copied().collect();
            for (i, a) in neigh.iter().enumerate() {
                for b in neigh.iter().skip(i + 1) {
                    nbrs.get_mut(a).unwrap().insert(*b);
                    nbrs.get_mut(b).unwrap().insert(*a);
                }
            }
            for a in &neigh {
                nbrs.get_mut(a).unwrap().remove(&v);
            }
            live.remove(&v);
            order.push(v);
            elim_bag.push(bag);
        }
        // Bag of v attaches to the bag of the first later-eliminated vertex
        // in v's elimination neighborhood.
        let position: BTreeMap<VertexId, usize> =
            order.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut tree_edges = Vec::new();
        for (i, v) in order.iter().enumerate() {
            let parent = elim_bag[i]
                .iter()
                .filter(|u| *u != v)
                .map(|u| position[u])
                .filter(|&p| p > i)
                .min();
            if let Some(p) = parent {
                tree_edges.push((i, p));
            } else if i + 1 < order.len() {
                tree_edges.push((i, i + 1));
            }
        }
        TreeDecomposition { bags: elim_bag, tree_edges }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Color;

    #[test]
    fn heuristic_on_cycle_has_width_two() {
        let mut g = ColoredMultigraph::new();
        let vs: Vec<VertexId> = (0..6).map(|_| g.add_vertex(Color::White)).collect();
        for i in 0..6 {
            g.add_edge(vs[i], vs[(i + 1) % 6]).unwrap();
        }
        let td = TreeDecomposition::min_degree_heuristic(&g);
        td.validate(&g).unwrap();
        assert_eq!(td.width(), 2);
    }

    #[test]
    fn heuristic_on_chain_instance_has_width_four() {
        let inst = crate::gen::tw_chain(4, 3);
        let td = TreeDecomposition::min_degree_heuristic(&inst.graph);
        td.validate(&inst.graph).unwrap();
        assert_eq!(td.width(), 4);
    }

    #[test]
    fn validate_rejects_missing_edge_coverage() {
        let mut g = ColoredMultigraph::new();
        let a = g.add_vertex(Color::White);
        let b = g.add_vertex(Color::White);
        g.add_edge(a, b).unwrap();
        let td = TreeDecomposition {
            bags: vec![BTreeSet::from([a]), BTreeSet::from([b])],
            tree_edges: vec![(0, 1)],
        };
        assert!(td.validate(&g).is_err());
    }

    #[test]
    fn validate_rejects_broken_subtree_property() {
        let mut g = ColoredMultigraph::new();
        let a = g.add_vertex(Color::White);
        let b = g.add_vertex(Color::White);
        g.add_edge(a, b).unwrap();
        let td = TreeDecomposition {
            bags: vec![BTreeSet::from([a, b]), BTreeSet::from([b]), BTreeSet::from([a, b])],
            tree_edges: vec![(0, 1), (1, 2)],
        };
        assert!(td.validate(&g).is_err());
    }
}
