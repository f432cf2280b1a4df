//! Text formats: the `elemgraph v1` graph document, PACE-style tree
//! decompositions, certificate documents for packings / spiders / subgraphs,
//! and DOT export (terminals filled, Steiner vertices hollow). All numbers
//! are integers or exact rationals written `p/q`; no floating point.

use crate::connectivity::VertexPath;
use crate::error::{Error, Result};
use crate::graph::{Color, ColoredMultigraph, EdgeId, VertexId};
use crate::packing::{Packing, PackingKind};
use crate::spider::{Spider, SpiderDecomposition};
use crate::td::TreeDecomposition;
use num_rational::Rational64;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

pub fn parse_rational(s: &str, line: usize) -> Result<Rational64> {
    let value = if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.parse().map_err(|_| parse_err(line, format!("bad rational '{s}'")))?;
        let q: i64 = q.parse().map_err(|_| parse_err(line, format!("bad rational '{s}'")))?;
        if q == 0 {
            return Err(parse_err(line, "rational with zero denominator"));
        }
        Rational64::new(p, q)
    } else {
        let p: i64 = s.parse().map_err(|_| parse_err(line, format!("bad number '{s}'")))?;
        Rational64::from_integer(p)
    };
    if value < Rational64::from_integer(0) {
        return Err(parse_err(line, format!("negative cost '{s}'")));
    }
    Ok(value)
}

pub fn emit_rational(r: Rational64) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses an `elemgraph v1` document. Edge ids are assigned in file order,
/// with `mult=<n>` expanding into n consecutive parallel copies.
pub fn parse_graph(text: &str) -> Result<ColoredMultigraph> {
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() || l.trim_start().starts_with('#') => continue,
            Some((i, l)) => break (i + 1, l.trim()),
            None => return Err(parse_err(0, "empty document, expected 'elemgraph v1'")),
        }
    };
    if header.1 != "elemgraph v1" {
        return Err(parse_err(header.0, format!("expected 'elemgraph v1', found '{}'", header.1)));
    }
    let mut g = ColoredMultigraph::new();
    for (i, raw) in lines {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let id: u32 = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| parse_err(line_no, "vertex line needs a numeric id"))?;
                let color = match parts.next() {
                    Some("black") => Color::Black,
                    Some("white") => Color::White,
                    other => {
                        return Err(parse_err(
                            line_no,
                            format!("bad color token '{}'", other.unwrap_or("")),
                        ))
                    }
                };
                let mut group = None;
                for opt in parts {
                    if let Some(value) = opt.strip_prefix("group=") {
                        let v: u32 = value
                            .parse()
                            .map_err(|_| parse_err(line_no, format!("bad group '{value}'")))?;
                        group = Some(v);
                    } else {
                        return Err(parse_err(line_no, format!("unknown vertex option '{opt}'")));
                    }
                }
                if group.is_some() && color != Color::Black {
                    return Err(parse_err(line_no, "group labels are for black vertices only"));
                }
                g.insert_vertex(VertexId(id), color, group)
                    .map_err(|_| parse_err(line_no, format!("duplicate vertex id {id}")))?;
            }
            Some("e") => {
                let u: u32 = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| parse_err(line_no, "edge line needs two vertex ids"))?;
                let v: u32 = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| parse_err(line_no, "edge line needs two vertex ids"))?;
                let mut cost = Rational64::from_integer(1);
                let mut mult = 1u32;
                for opt in parts {
                    if let Some(value) = opt.strip_prefix("cost=") {
                        cost = parse_rational(value, line_no)?;
                    } else if let Some(value) = opt.strip_prefix("mult=") {
                        mult = value
                            .parse()
                            .map_err(|_| parse_err(line_no, format!("bad mult '{value}'")))?;
                        if mult < 1 {
                            return Err(parse_err(line_no, "mult must be at least 1"));
                        }
                    } else {
                        return Err(parse_err(line_no, format!("unknown edge option '{opt}'")));
                    }
                }
                for _ in 0..mult {
                    g.add_edge_with_cost(VertexId(u), VertexId(v), cost).map_err(|e| match e {
                        Error::UnknownVertex(x) => parse_err(line_no, format!("unknown vertex {x}")),
                        Error::SelfLoop(x) => parse_err(line_no, format!("self-loop at {x}")),
                        other => other,
                    })?;
                }
            }
            Some(tok) => return Err(parse_err(line_no, format!("unknown directive '{tok}'"))),
            None => {}
        }
    }
    Ok(g)
}

/// Emits a graph document; parallel edges with equal cost collapse back into
/// one `mult=` line.
pub fn emit_graph(g: &ColoredMultigraph) -> String {
    let mut out = String::from("elemgraph v1\n");
    for v in g.vertices() {
        let color = if g.is_black(v) { "black" } else { "white" };
        match g.group(v) {
            Some(grp) => writeln!(out, "v {} {color} group={grp}", v.0).unwrap(),
            None => writeln!(out, "v {} {color}", v.0).unwrap(),
        }
    }
    let mut bundles: BTreeMap<(VertexId, VertexId, Rational64), u32> = BTreeMap::new();
    for (e, u, v) in g.edges() {
        let cost = g.cost(e).unwrap();
        *bundles.entry((u.min(v), u.max(v), cost)).or_insert(0) += 1;
    }
    for ((u, v, cost), mult) in bundles {
        let mut line = format!("e {} {}", u.0, v.0);
        if cost != Rational64::from_integer(1) {
            line.push_str(&format!(" cost={}", emit_rational(cost)));
        }
        if mult > 1 {
            line.push_str(&format!(" mult={mult}"));
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// DOT export following the figure convention: terminals are filled disks,
/// Steiner vertices hollow circles.
pub fn emit_dot(g: &ColoredMultigraph) -> String {
    let mut out = String::from("graph elemgraph {\n  node [shape=circle];\n");
    for v in g.vertices() {
        if g.is_black(v) {
            let label = match g.group(v) {
                Some(grp) => format!("{} (T{})", v.0, grp),
                None => v.0.to_string(),
            };
            writeln!(
                out,
                "  n{} [style=filled, fillcolor=black, fontcolor=white, label=\"{label}\"];",
                v.0
            )
            .unwrap();
        } else {
            writeln!(out, "  n{} [label=\"{}\"];", v.0, v.0).unwrap();
        }
    }
    for (e, u, v) in g.edges() {
        let cost = g.cost(e).unwrap();
        if cost != Rational64::from_integer(1) {
            writeln!(out, "  n{} -- n{} [label=\"{}\"];", u.0, v.0, emit_rational(cost)).unwrap();
        } else {
            writeln!(out, "  n{} -- n{};", u.0, v.0).unwrap();
        }
    }
    out.push_str("}\n");
    out
}

// ---------------------------------------------------------------------------
// PACE-style tree decompositions.

/// `s td <#bags> <width+1> <#vertices>`, `b <id> <v...>` bag lines, then bag
/// tree edges as 1-based index pairs. `c` lines are comments.
pub fn parse_tree_decomposition(text: &str) -> Result<TreeDecomposition> {
    let mut bags: Vec<BTreeSet<VertexId>> = Vec::new();
    let mut tree_edges: Vec<(usize, usize)> = Vec::new();
    let mut declared = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("s") => {
                if parts.next() != Some("td") {
                    return Err(parse_err(line_no, "expected 's td ...'"));
                }
                let nums: Vec<usize> = parts
                    .map(|p| p.parse().map_err(|_| parse_err(line_no, "bad s-line number")))
                    .collect::<Result<_>>()?;
                if nums.len() != 3 {
                    return Err(parse_err(line_no, "s-line needs '#bags width+1 #vertices'"));
                }
                declared = Some(nums[0]);
                bags = vec![BTreeSet::new(); nums[0]];
            }
            Some("b") => {
                let id: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| parse_err(line_no, "bag line needs an id"))?;
                if id == 0 || id > bags.len() {
                    return Err(parse_err(line_no, format!("bag id {id} out of range")));
                }
                for p in parts {
                    let v: u32 =
                        p.parse().map_err(|_| parse_err(line_no, format!("bad vertex '{p}'")))?;
                    bags[id - 1].insert(VertexId(v));
                }
            }
            Some(tok) => {
                let a: usize =
                    tok.parse().map_err(|_| parse_err(line_no, format!("unknown line '{tok}'")))?;
                let b: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| parse_err(line_no, "tree edge needs two bag ids"))?;
                if a == 0 || b == 0 || a > bags.len() || b > bags.len() {
                    return Err(parse_err(line_no, "tree edge references unknown bag"));
                }
                tree_edges.push((a - 1, b - 1));
            }
            None => {}
        }
    }
    if declared.is_none() {
        return Err(parse_err(0, "missing 's td' header"));
    }
    Ok(TreeDecomposition { bags, tree_edges })
}

pub fn emit_tree_decomposition(td: &TreeDecomposition, g: &ColoredMultigraph) -> String {
    let mut out = String::new();
    writeln!(out, "s td {} {} {}", td.bags.len(), td.width() + 1, g.vertex_count()).unwrap();
    for (i, bag) in td.bags.iter().enumerate() {
        let ids: Vec<String> = bag.iter().map(|v| v.0.to_string()).collect();
        writeln!(out, "b {} {}", i + 1, ids.join(" ")).unwrap();
    }
    for (a, b) in &td.tree_edges {
        writeln!(out, "{} {}", a + 1, b + 1).unwrap();
    }
    out
}

// ---------------------------------------------------------------------------
// Certificate documents.

pub fn emit_packing(p: &Packing) -> String {
    let kind = match p.kind {
        PackingKind::Trees => "trees",
        PackingKind::Forests => "forests",
    };
    let mut out = format!("packing {kind}\n");
    for edges in &p.subgraphs {
        let ids: Vec<String> = edges.iter().map(|e| e.0.to_string()).collect();
        writeln!(out, "subgraph {}", ids.join(" ")).unwrap();
    }
    out
}

/// Groups are reconstructed from the graph's `group=` labels; ungrouped black
/// vertices form one residual group.
pub fn parse_packing(text: &str, g: &ColoredMultigraph) -> Result<Packing> {
    let mut kind = None;
    let mut subgraphs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("packing") => {
                kind = match parts.next() {
                    Some("trees") => Some(PackingKind::Trees),
                    Some("forests") => Some(PackingKind::Forests),
                    other => {
                        return Err(parse_err(
                            line_no,
                            format!("bad packing kind '{}'", other.unwrap_or("")),
                        ))
                    }
                };
            }
            Some("subgraph") => {
                let mut edges = BTreeSet::new();
                for p in parts {
                    let id: u32 =
                        p.parse().map_err(|_| parse_err(line_no, format!("bad edge id '{p}'")))?;
                    if !g.has_edge(EdgeId(id)) {
                        return Err(parse_err(line_no, format!("unknown edge {id}")));
                    }
                    edges.insert(EdgeId(id));
                }
                subgraphs.push(edges);
            }
            Some(tok) => return Err(parse_err(line_no, format!("unknown directive '{tok}'"))),
            None => {}
        }
    }
    let kind = kind.ok_or_else(|| parse_err(0, "missing 'packing trees|forests' header"))?;
    Ok(Packing { kind, groups: groups_from_labels(g), subgraphs })
}

/// Terminal groups from `group=` labels; unlabeled blacks become one group.
pub fn groups_from_labels(g: &ColoredMultigraph) -> Vec<Vec<VertexId>> {
    let labeled = g.labeled_groups();
    let mut groups: Vec<Vec<VertexId>> =
        labeled.into_values().map(|s| s.into_iter().collect()).collect();
    let unlabeled: Vec<VertexId> = g
        .black_vertices()
        .into_iter()
        .filter(|v| g.group(*v).is_none())
        .collect();
    if !unlabeled.is_empty() {
        groups.push(unlabeled);
    }
    groups
}

pub fn emit_spiders(sd: &SpiderDecomposition, k: u32) -> String {
    let mut out = format!("spiders k={k}\n");
    for s in &sd.spiders {
        writeln!(out, "spider head={}", s.head.0).unwrap();
        for leg in &s.legs {
            let mut parts = vec![leg.vertices[0].0.to_string()];
            for (i, e) in leg.edges.iter().enumerate() {
                parts.push(e.0.to_string());
                parts.push(leg.vertices[i + 1].0.to_string());
            }
            writeln!(out, "leg {}", parts.join(" ")).unwrap();
        }
    }
    out
}

pub fn parse_spiders(text: &str, g: &ColoredMultigraph) -> Result<(SpiderDecomposition, u32)> {
    let mut k = None;
    let mut spiders: Vec<Spider> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("spiders") => {
                let spec = parts.next().unwrap_or("");
                let value = spec
                    .strip_prefix("k=")
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| parse_err(line_no, "expected 'spiders k=<int>'"))?;
                k = Some(value);
            }
            Some("spider") => {
                let spec = parts.next().unwrap_or("");
                let head: u32 = spec
                    .strip_prefix("head=")
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| parse_err(line_no, "expected 'spider head=<id>'"))?;
                spiders.push(Spider { head: VertexId(head), legs: vec![], feet: vec![] });
            }
            Some("leg") => {
                let spider = spiders
                    .last_mut()
                    .ok_or_else(|| parse_err(line_no, "leg before any spider"))?;
                let nums: Vec<u32> = parts
                    .map(|p| p.parse().map_err(|_| parse_err(line_no, format!("bad id '{p}'"))))
                    .collect::<Result<_>>()?;
                if nums.is_empty() || nums.len() % 2 == 0 {
                    return Err(parse_err(line_no, "leg must alternate vertex edge vertex ..."));
                }
                let mut vertices = Vec::new();
                let mut edges = Vec::new();
                for (idx, n) in nums.iter().enumerate() {
                    if idx % 2 == 0 {
                        if !g.has_vertex(VertexId(*n)) {
                            return Err(parse_err(line_no, format!("unknown vertex {n}")));
                        }
                        vertices.push(VertexId(*n));
                    } else {
                        if !g.has_edge(EdgeId(*n)) {
                            return Err(parse_err(line_no, format!("unknown edge {n}")));
                        }
                        edges.push(EdgeId(*n));
                    }
                }
                let foot = *vertices.last().unwrap();
                spider.legs.push(VertexPath { vertices, edges });
                spider.feet.push(foot);
            }
            Some(tok) => return Err(parse_err(line_no, format!("unknown directive '{tok}'"))),
            None => {}
        }
    }
    let k = k.ok_or_else(|| parse_err(0, "missing 'spiders k=' header"))?;
    Ok((SpiderDecomposition { spiders }, k))
}

pub fn emit_subgraph(
    root: VertexId,
    k: u32,
    cost: Rational64,
    edges: &BTreeSet<EdgeId>,
) -> String {
    let ids: Vec<String> = edges.iter().map(|e| e.0.to_string()).collect();
    format!("ssk root={} k={} cost={}\nedges {}\n", root.0, k, emit_rational(cost), ids.join(" "))
}

pub fn parse_subgraph(text: &str, g: &ColoredMultigraph) -> Result<(VertexId, u32, BTreeSet<EdgeId>)> {
    let mut root = None;
    let mut k = None;
    let mut edges = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("ssk") => {
                for opt in parts {
                    if let Some(v) = opt.strip_prefix("root=") {
                        let id: u32 =
                            v.parse().map_err(|_| parse_err(line_no, "bad root id"))?;
                        root = Some(VertexId(id));
                    } else if let Some(v) = opt.strip_prefix("k=") {
                        k = Some(v.parse().map_err(|_| parse_err(line_no, "bad k"))?);
                    } else if opt.strip_prefix("cost=").is_some() {
                        // informational
                    } else {
                        return Err(parse_err(line_no, format!("unknown option '{opt}'")));
                    }
                }
            }
            Some("edges") => {
                for p in parts {
                    let id: u32 =
                        p.parse().map_err(|_| parse_err(line_no, format!("bad edge id '{p}'")))?;
                    if !g.has_edge(EdgeId(id)) {
                        return Err(parse_err(line_no, format!("unknown edge {id}")));
                    }
                    edges.insert(EdgeId(id));
                }
            }
            Some(tok) => return Err(parse_err(line_no, format!("unknown directive '{tok}'"))),
            None => {}
        }
    }
    match (root, k) {
        (Some(r), Some(k)) => Ok((r, k, edges)),
        _ => Err(parse_err(0, "missing 'ssk root= k=' header")),
    }
}

/// Structural equality up to edge-id renaming: same vertices, colors, groups,
/// and parallel-edge multiplicities per (endpoints, cost).
pub fn same_structure(a: &ColoredMultigraph, b: &ColoredMultigraph) -> bool {
    let verts = |g: &ColoredMultigraph| -> Vec<(VertexId, Color, Option<u32>)> {
        g.vertices().map(|v| (v, g.color(v).unwrap(), g.group(v))).collect()
    };
    let bundles = |g: &ColoredMultigraph| -> BTreeMap<(VertexId, VertexId, Rational64), u32> {
        let mut out = BTreeMap::new();
        for (e, u, v) in g.edges() {
            *out.entry((u.min(v), u.max(v), g.cost(e).unwrap())).or_insert(0) += 1;
        }
        out
    };
    verts(a) == verts(b) && bundles(a) == bundles(b)
}
