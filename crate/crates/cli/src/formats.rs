//! Text formats for cascade systems and priority profiles.
//!
//! Cascade spec, one line per cascade plus the star designation:
//! ```text
//! # cascade <id> <M|P> [seed node ids...]
//! cascade 0 M 12 57
//! cascade 1 P 3
//! cascade 2 P
//! star 2
//! ```
//!
//! Priority spec:
//! ```text
//! mode random            # or homogeneous | m-dominant | p-dominant | explicit
//! seed 42                # random mode
//! order 1 0 2            # optional global order, lowest priority first
//! node 7 1 3 2           # explicit mode: node id then one rank per cascade
//! ```
//!
//! Node ids in both formats are input-file ids and are resolved against the
//! loaded graph's id map.

use mc_core::cascade::{CascadeGroup, CascadeSystem, PriorityKind, PriorityProfile};
use mc_core::graph::DirectedGraph;
use mc_core::{make_priority_profile, Error, NodeId};

use crate::error::CliResult;

#[derive(Debug, Clone)]
pub struct CascadeSpec {
    /// Per cascade: group and seed node ids (input-file ids).
    pub cascades: Vec<(CascadeGroup, Vec<u64>)>,
    pub star: usize,
}

pub fn parse_cascade_spec(text: &str) -> CliResult<CascadeSpec> {
    let mut cascades: Vec<(CascadeGroup, Vec<u64>)> = Vec::new();
    let mut star: Option<usize> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let mut tokens = body.split_whitespace();
        match tokens.next() {
            Some("cascade") => {
                let id: usize = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::parse(line, "cascade needs a numeric id"))?;
                if id != cascades.len() {
                    return Err(Error::parse(
                        line,
                        format!("cascade ids must be dense and in order; expected {}", cascades.len()),
                    )
                    .into());
                }
                let group = match tokens.next() {
                    Some("M") | Some("m") => CascadeGroup::Misinformation,
                    Some("P") | Some("p") => CascadeGroup::Positive,
                    other => {
                        return Err(Error::parse(
                            line,
                            format!("cascade group must be M or P, found {other:?}"),
                        )
                        .into())
                    }
                };
                let mut seeds = Vec::new();
                for t in tokens {
                    let v: u64 = t
                        .parse()
                        .map_err(|_| Error::parse(line, format!("bad seed id {t:?}")))?;
                    seeds.push(v);
                }
                cascades.push((group, seeds));
            }
            Some("star") => {
                let id: usize = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::parse(line, "star needs a cascade id"))?;
                if star.replace(id).is_some() {
                    return Err(Error::parse(line, "star declared twice").into());
                }
            }
            other => {
                return Err(Error::parse(
                    line,
                    format!("expected `cascade` or `star`, found {other:?}"),
                )
                .into())
            }
        }
    }
    let star = star.ok_or_else(|| Error::invalid("cascade spec misses a star declaration"))?;
    if star >= cascades.len() {
        return Err(Error::invalid(format!("star id {star} has no cascade line")).into());
    }
    if !cascades[star].1.is_empty() {
        return Err(Error::invalid(
            "the star cascade's seeds are supplied at run time; list it without seeds",
        )
        .into());
    }
    Ok(CascadeSpec { cascades, star })
}

impl CascadeSpec {
    /// Resolves input-file node ids against the graph and builds the system.
    pub fn into_system(self, graph: &DirectedGraph) -> CliResult<CascadeSystem> {
        let mut resolved = Vec::with_capacity(self.cascades.len());
        for (group, seeds) in self.cascades {
            let mut nodes = Vec::with_capacity(seeds.len());
            for ext in seeds {
                nodes.push(resolve_node(graph, ext)?);
            }
            resolved.push((group, nodes));
        }
        Ok(CascadeSystem::new(resolved, self.star as u32)?)
    }
}

pub fn resolve_node(graph: &DirectedGraph, ext: u64) -> CliResult<NodeId> {
    graph
        .resolve_external(ext)
        .ok_or_else(|| Error::invalid(format!("node {ext} does not appear in the graph")).into())
}

pub fn resolve_nodes(graph: &DirectedGraph, exts: &[u64]) -> CliResult<Vec<NodeId>> {
    exts.iter().map(|&e| resolve_node(graph, e)).collect()
}

#[derive(Debug, Clone)]
pub struct PrioritySpec {
    pub mode: String,
    pub order: Option<Vec<u32>>,
    pub seed: Option<u64>,
    /// Explicit rows: input-file node id, then one rank per cascade.
    pub table: Vec<(u64, Vec<u32>)>,
}

pub fn parse_priority_spec(text: &str) -> CliResult<PrioritySpec> {
    let mut mode: Option<String> = None;
    let mut order: Option<Vec<u32>> = None;
    let mut seed: Option<u64> = None;
    let mut table: Vec<(u64, Vec<u32>)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let mut tokens = body.split_whitespace();
        match tokens.next() {
            Some("mode") => {
                let m = tokens
                    .next()
                    .ok_or_else(|| Error::parse(line, "mode needs a value"))?;
                mode = Some(m.to_string());
            }
            Some("order") => {
                let mut o = Vec::new();
                for t in tokens {
                    o.push(
                        t.parse()
                            .map_err(|_| Error::parse(line, format!("bad cascade id {t:?}")))?,
                    );
                }
                order = Some(o);
            }
            Some("seed") => {
                let s = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::parse(line, "seed needs an unsigned value"))?;
                seed = Some(s);
            }
            Some("node") => {
                let id: u64 = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::parse(line, "node row needs a node id"))?;
                let mut ranks = Vec::new();
                for t in tokens {
                    ranks.push(
                        t.parse()
                            .map_err(|_| Error::parse(line, format!("bad rank {t:?}")))?,
                    );
                }
                table.push((id, ranks));
            }
            other => {
                return Err(Error::parse(
                    line,
                    format!("expected mode/order/seed/node, found {other:?}"),
                )
                .into())
            }
        }
    }
    let mode = mode.ok_or_else(|| Error::invalid("priority spec misses a mode line"))?;
    Ok(PrioritySpec {
        mode,
        order,
        seed,
        table,
    })
}

impl PrioritySpec {
    pub fn build_profile(
        &self,
        graph: &DirectedGraph,
        system: &CascadeSystem,
    ) -> CliResult<PriorityProfile> {
        let cc = system.cascade_count();
        let default_order = || {
            self.order
                .clone()
                .unwrap_or_else(|| PriorityKind::identity_order(cc))
        };
        let kind = match self.mode.as_str() {
            "homogeneous" => PriorityKind::Homogeneous { order: default_order() },
            "m-dominant" | "m_dominant" => PriorityKind::MDominant { order: default_order() },
            "p-dominant" | "p_dominant" => PriorityKind::PDominant { order: default_order() },
            "random" => PriorityKind::Random {
                seed: self
                    .seed
                    .ok_or_else(|| Error::invalid("random priority mode needs a seed line"))?,
            },
            "explicit" => {
                let n = graph.node_count();
                let mut ranks = vec![0u32; n * cc];
                let mut seen = vec![false; n];
                for (ext, row) in &self.table {
                    let v = resolve_node(graph, *ext)?;
                    if row.len() != cc {
                        return Err(Error::invalid(format!(
                            "node {ext} lists {} ranks, expected {cc}",
                            row.len()
                        ))
                        .into());
                    }
                    seen[v as usize] = true;
                    ranks[v as usize * cc..(v as usize + 1) * cc].copy_from_slice(row);
                }
                if let Some(missing) = seen.iter().position(|s| !s) {
                    return Err(Error::invalid(format!(
                        "explicit priority table misses node {}",
                        graph.external_id(missing as NodeId)
                    ))
                    .into());
                }
                PriorityKind::Explicit { ranks }
            }
            other => {
                return Err(Error::invalid(format!("unknown priority mode {other:?}")).into())
            }
        };
        Ok(make_priority_profile(&kind, system, graph.node_count())?)
    }
}

/// Parses a comma- or whitespace-separated list of node ids.
pub fn parse_id_list(text: &str) -> CliResult<Vec<u64>> {
    let mut out = Vec::new();
    for t in text.split(|c: char| c == ',' || c.is_whitespace()) {
        if t.is_empty() {
            continue;
        }
        out.push(
            t.parse()
                .map_err(|_| Error::invalid(format!("bad node id {t:?}")))?,
        );
    }
    Ok(out)
}
