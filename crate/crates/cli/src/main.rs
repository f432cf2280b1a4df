use clap::{Parser, Subcommand, ValueEnum};
use elemconn::connectivity;
use elemconn::error::Error;
use elemconn::fmt;
use elemconn::gen;
use elemconn::graph::{ColoredMultigraph, TraceRecord, VertexId};
use elemconn::oracle;
use elemconn::packing;
use elemconn::planar::{self, ThresholdRule};
use elemconn::reduction;
use elemconn::spider;
use elemconn::ssk::SskInstance;
use elemconn::td::TreeDecomposition;
use elemconn::treewidth;
use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

/// Exit codes: 0 success, 2 validation failure, 3 infeasible, 4 parse error,
/// 5 internal-consistency error (an implementation bug, not bad input).
#[derive(Parser)]
#[command(name = "elemconn", version, about = "Element-connectivity toolkit: reduction, Steiner tree/forest packing, spiders, single-sink k-connectivity")]
struct Cli {
    /// Run the data-parallel inner loops sequentially.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pairwise element-connectivity of terminals.
    Kappa {
        graph: PathBuf,
        /// "all" or a single pair "u,v".
        #[arg(long, default_value = "all")]
        pairs: String,
    },
    /// Eliminate white-white edges while preserving all terminal pairwise
    /// element-connectivities; prints the reduced graph.
    Reduce {
        graph: PathBuf,
        /// Re-check the full connectivity table after every step.
        #[arg(long)]
        verify: bool,
        /// Write the minor trace to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Emit DOT instead of a graph document.
        #[arg(long)]
        dot: bool,
    },
    /// Pack element-disjoint Steiner trees over all terminals.
    PackTrees {
        graph: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Pack element-disjoint Steiner forests over the labeled groups.
    PackForests {
        graph: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Planar packing via heavy-pair contraction; whites in every output
    /// subgraph have degree exactly 2.
    PackPlanar {
        graph: PathBuf,
        #[arg(long)]
        k: u32,
        /// Pack forests over the labeled groups instead of trees.
        #[arg(long)]
        forests: bool,
        /// Contraction threshold parameter for bounded-genus hosts
        /// (threshold becomes ceil(k/C) instead of ceil(k/5)-1).
        #[arg(long)]
        genus_c: Option<u32>,
    },
    /// Bounded-treewidth Steiner tree packing using a decomposition file.
    PackTreewidth {
        graph: PathBuf,
        #[arg(long)]
        td: PathBuf,
        #[arg(long)]
        k: u32,
    },
    /// Emit a min-degree-elimination tree decomposition (PACE-style text,
    /// no width guarantee).
    Td { graph: PathBuf },
    /// Spider decomposition of a host whose blacks are pairwise
    /// k-element-connected (no black-black edges; run `reduce` first).
    Spiders {
        graph: PathBuf,
        #[arg(long)]
        k: u32,
    },
    /// Single-sink k-vertex-connectivity greedy.
    Ssk {
        graph: PathBuf,
        #[arg(long)]
        root: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        seed: Option<u64>,
        /// Run this many seeds (0..N) and print the best.
        #[arg(long)]
        seeds: Option<u64>,
    },
    /// Validate a certificate against a graph.
    Verify {
        graph: PathBuf,
        #[arg(long)]
        certificate: PathBuf,
        #[arg(long)]
        kind: CertificateKind,
    },
    /// Generate an instance (hk, gk, k3k, tw-chain, random, random-planar,
    /// planar-wheel) and print its graph document.
    Gen {
        kind: String,
        params: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        dot: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CertificateKind {
    Packing,
    Spiders,
    Ssk,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } => 4,
        Error::Infeasible(_) | Error::NoPacking(_) | Error::ThresholdViolation { .. } => 3,
        Error::InternalConsistency(_) => 5,
        _ => 1,
    }
}

fn read(path: &PathBuf) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse {
        line: 0,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

fn load_graph(path: &PathBuf) -> Result<ColoredMultigraph, Error> {
    fmt::parse_graph(&read(path)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    elemconn::exec::set_sequential(cli.sequential);
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Kappa { graph, pairs } => {
            let g = load_graph(&graph)?;
            let wanted: Vec<(VertexId, VertexId)> = if pairs == "all" {
                connectivity::black_pairs(&g)
            } else {
                let (u, v) = pairs.split_once(',').ok_or_else(|| Error::Parse {
                    line: 0,
                    message: format!("--pairs expects 'all' or 'u,v', got '{pairs}'"),
                })?;
                let u: u32 = u.trim().parse().map_err(|_| Error::Parse {
                    line: 0,
                    message: format!("bad vertex id '{u}'"),
                })?;
                let v: u32 = v.trim().parse().map_err(|_| Error::Parse {
                    line: 0,
                    message: format!("bad vertex id '{v}'"),
                })?;
                vec![(VertexId(u), VertexId(v))]
            };
            let table = connectivity::all_pairs_element_connectivity(&g, &wanted)?;
            for ((u, v), k) in table {
                println!("{} {} {k}", u.0, v.0);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Reduce { graph, verify, trace, dot } => {
            let g = load_graph(&graph)?;
            let result = reduction::reduce_to_bipartite(&g, verify)?;
            if let Some(path) = trace {
                let mut out = String::new();
                for rec in result.trace.records() {
                    out.push_str(&describe_record(rec));
                    out.push('\n');
                }
                std::fs::write(&path, out).map_err(|e| Error::Parse {
                    line: 0,
                    message: format!("cannot write {}: {e}", path.display()),
                })?;
            }
            eprintln!(
                "# reduced: {} decisions, {} vertices, {} edges",
                result.decisions.len(),
                result.reduced.vertex_count(),
                result.reduced.edge_count()
            );
            if dot {
                print!("{}", fmt::emit_dot(&result.reduced));
            } else {
                print!("{}", fmt::emit_graph(&result.reduced));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::PackTrees { graph, k, seed } => {
            let g = load_graph(&graph)?;
            let terminals = g.black_vertices();
            let p = packing::pack_trees_random_coloring(&g, &terminals, k, seed)?;
            print_packing(&g, p)
        }
        Command::PackForests { graph, k, seed } => {
            let g = load_graph(&graph)?;
            let groups = fmt::groups_from_labels(&g);
            let p = packing::pack_forests(&g, &groups, k, seed)?;
            print_packing(&g, p)
        }
        Command::PackPlanar { graph, k, forests, genus_c } => {
            let g = load_graph(&graph)?;
            let rule = match genus_c {
                Some(c) => ThresholdRule::Contraction(c),
                None => ThresholdRule::Planar,
            };
            let p = if forests {
                let groups = fmt::groups_from_labels(&g);
                planar::pack_planar_forests_with_rule(&g, &groups, k, rule)?
            } else {
                let terminals = g.black_vertices();
                planar::pack_planar_trees_with_rule(&g, &terminals, k, rule)?
            };
            print_packing(&g, p)
        }
        Command::PackTreewidth { graph, td, k } => {
            let g = load_graph(&graph)?;
            let decomposition: TreeDecomposition = fmt::parse_tree_decomposition(&read(&td)?)?;
            let terminals = g.black_vertices();
            let p = treewidth::pack_treewidth_trees(&g, &terminals, k, &decomposition)?;
            print_packing(&g, p)
        }
        Command::Td { graph } => {
            let g = load_graph(&graph)?;
            let td = TreeDecomposition::min_degree_heuristic(&g);
            td.validate(&g)?;
            eprintln!("# width {}", td.width());
            print!("{}", fmt::emit_tree_decomposition(&td, &g));
            Ok(ExitCode::SUCCESS)
        }
        Command::Spiders { graph, k } => {
            let g = load_graph(&graph)?;
            let blacks: BTreeSet<VertexId> = g.black_vertices().into_iter().collect();
            let sd = spider::spider_decompose(&g, &blacks, k).map_err(|e| match e {
                Error::BlackBlackEdge(e) => Error::Infeasible(format!(
                    "graph has a terminal-terminal edge ({e}); run `reduce` first"
                )),
                other => other,
            })?;
            eprintln!("# {} spiders", sd.spiders.len());
            print!("{}", fmt::emit_spiders(&sd, k));
            Ok(ExitCode::SUCCESS)
        }
        Command::Ssk { graph, root, k, seed, seeds } => {
            let g = load_graph(&graph)?;
            let terminals: Vec<VertexId> = g
                .black_vertices()
                .into_iter()
                .filter(|t| *t != VertexId(root))
                .collect();
            let inst = SskInstance::new(g, VertexId(root), terminals, k)?;
            let seed_list: Vec<u64> = match (seed, seeds) {
                (Some(_), Some(_)) => {
                    return Err(Error::Parse {
                        line: 0,
                        message: "--seed and --seeds are mutually exclusive".into(),
                    })
                }
                (Some(s), None) => vec![s],
                (None, Some(n)) => (0..n.max(1)).collect(),
                (None, None) => vec![0],
            };
            let runs = elemconn::exec::map_collect(&seed_list, |s| {
                elemconn::ssk::greedy_ssk(&inst, *s).map(|r| (*s, r))
            });
            let mut best: Option<(u64, elemconn::ssk::GreedyRun)> = None;
            for run in runs {
                let (s, run) = run?;
                eprintln!("# seed {s}: cost {}", fmt::emit_rational(run.total_cost));
                if best.as_ref().map(|(_, b)| run.total_cost < b.total_cost).unwrap_or(true) {
                    best = Some((s, run));
                }
            }
            let (s, run) = best.expect("at least one seed");
            eprintln!("# best seed {s}");
            print!(
                "{}",
                fmt::emit_subgraph(inst.root, inst.k, run.total_cost, &run.edges)
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { graph, certificate, kind } => {
            let g = load_graph(&graph)?;
            let cert = read(&certificate)?;
            let report = match kind {
                CertificateKind::Packing => {
                    let p = fmt::parse_packing(&cert, &g)?;
                    oracle::validate_packing(&g, &p.groups.clone(), &p)
                }
                CertificateKind::Spiders => {
                    let (sd, k) = fmt::parse_spiders(&cert, &g)?;
                    let blacks: BTreeSet<VertexId> = g.black_vertices().into_iter().collect();
                    oracle::validate_spider_decomposition(&g, &blacks, k, &sd)
                }
                CertificateKind::Ssk => {
                    let (root, k, edges) = fmt::parse_subgraph(&cert, &g)?;
                    let terminals = g
                        .black_vertices()
                        .into_iter()
                        .filter(|t| *t != root)
                        .collect();
                    let inst = SskInstance { graph: g.clone(), root, terminals, k };
                    oracle::validate_ssk(&inst, &edges)?
                }
            };
            println!("{report}");
            if report.pass() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(2))
            }
        }
        Command::Gen { kind, params, seed, dot } => {
            let inst = gen::generate(&kind, &params, seed)?;
            eprintln!(
                "# {} vertices, {} edges, {} groups, k={}",
                inst.graph.vertex_count(),
                inst.graph.edge_count(),
                inst.groups.len(),
                inst.k
            );
            if dot {
                print!("{}", fmt::emit_dot(&inst.graph));
            } else {
                print!("{}", fmt::emit_graph(&inst.graph));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn print_packing(g: &ColoredMultigraph, p: packing::Packing) -> Result<ExitCode, Error> {
    let report = oracle::validate_packing(g, &p.groups, &p);
    eprintln!("# packed {} subgraphs, validation: {report}", p.len());
    print!("{}", fmt::emit_packing(&p));
    if report.pass() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(2))
    }
}

fn describe_record(rec: &TraceRecord) -> String {
    match rec {
        TraceRecord::DeleteEdge { edge } => format!("delete {edge}"),
        TraceRecord::ContractEdge { edge, survivor, absorbed } => {
            format!("contract {edge} survivor {survivor} absorbed {absorbed}")
        }
        TraceRecord::SubdivideEdge { edge, mid, first, second } => {
            format!("subdivide {edge} mid {mid} halves {first} {second}")
        }
        TraceRecord::MergeVertices { survivor, absorbed } => {
            format!("merge survivor {survivor} absorbed {absorbed}")
        }
        TraceRecord::DeleteIsolatedVertex { vertex } => format!("drop {vertex}"),
    }
}
