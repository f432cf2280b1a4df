//! The executable reduction step: eliminate every white-white edge by
//! delete-or-contract while preserving all pairwise terminal
//! element-connectivities exactly. Deletion is tried first; when it drops any
//! pair, contraction is guaranteed to preserve every pair, which verify mode
//! re-checks after each step.

use crate::connectivity;
use crate::error::{Error, Result};
use crate::exec;
use crate::graph::{ColoredMultigraph, EdgeId, MinorTrace, VertexId};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Delete,
    Contract,
}

pub type KappaTable = BTreeMap<(VertexId, VertexId), u32>;

#[derive(Clone, Debug)]
pub struct ReductionResult {
    /// Bipartite between blacks and whites: no white-white and no black-black
    /// edges remain.
    pub reduced: ColoredMultigraph,
    pub trace: MinorTrace,
    /// All-pairs κ′ of the input over its black set.
    pub baseline: KappaTable,
    pub decisions: Vec<(EdgeId, Decision)>,
}

/// Classifies one white-white edge: `Delete` iff removing it preserves every
/// black pair's κ′ against the baseline, otherwise `Contract`.
pub fn classify_edge(g: &ColoredMultigraph, e: EdgeId, baseline: &KappaTable) -> Result<Decision> {
    let (u, v) = g.endpoints(e)?;
    if !g.is_white(u) || !g.is_white(v) {
        return Err(Error::NotWhiteWhite(e));
    }
    let without = g.delete_edge(e)?;
    let pairs: Vec<((VertexId, VertexId), u32)> =
        baseline.iter().map(|(p, k)| (*p, *k)).collect();
    let dropped = exec::any(&pairs, |((a, b), expect)| {
        match connectivity::element_connectivity_value(&without, *a, *b) {
            Ok(value) => value != *expect,
            Err(_) => true,
        }
    });
    Ok(if dropped { Decision::Contract } else { Decision::Delete })
}

/// Repeatedly classifies and applies the lexicographically smallest
/// white-white edge until none remain. Black-black edges are subdivided
/// first, so the result is bipartite. With `verify` on, every step re-checks
/// the full table and aborts on any violation.
pub fn reduce_to_bipartite(g: &ColoredMultigraph, verify: bool) -> Result<ReductionResult> {
    let baseline = connectivity::full_table(g)?;
    let (mut current, mut trace) = g.subdivide_terminal_edges();
    let mut decisions = Vec::new();

    loop {
        let Some(&edge) = current.white_white_edges().first() else {
            break;
        };
        let decision = classify_edge(&current, edge, &baseline)?;
        match decision {
            Decision::Delete => {
                current = current.delete_edge(edge)?;
                trace.push(crate::graph::TraceRecord::DeleteEdge { edge });
            }
            Decision::Contract => {
                let (next, rec) = current.contract_edge(edge)?;
                current = next;
                trace.push(rec);
            }
        }
        decisions.push((edge, decision));
        if verify {
            let table = connectivity::full_table(&current)?;
            if table != baseline {
                return Err(Error::InternalConsistency(format!(
                    "κ′ table changed after {decision:?} of edge {edge}"
                )));
            }
        }
    }
    debug_assert!(current.black_black_edges().is_empty());
    Ok(ReductionResult { reduced: current, trace, baseline, decisions })
}
