//! Executable reduction from positive-negative partial set cover to the
//! misinformation-minimization problem, with the activation-count identity
//! `f_m(selection) = 3 + cost(selection)` checkable by deterministic
//! simulation.

use crate::cascade::{CascadeGroup, CascadeId, CascadeSystem, PriorityProfile};
use crate::diffusion::{simulate, LiveEdgeGraph, Randomness};
use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Edge, NodeId};

/// Cascade ids of a reduced instance.
pub const CASCADE_M1: CascadeId = 0;
pub const CASCADE_P1: CascadeId = 1;
pub const CASCADE_STAR: CascadeId = 2;

/// A positive-negative partial set cover instance over disjoint element sets
/// `X` (to cover) and `Y` (to avoid), with subsets indexed `0..set_count`.
/// Elements are indices `0..x_count` and `0..y_count`.
#[derive(Debug, Clone)]
pub struct PspcInstance {
    x_count: usize,
    y_count: usize,
    sets: Vec<PspcSet>,
}

#[derive(Debug, Clone, Default)]
pub struct PspcSet {
    pub xs: Vec<usize>,
    pub ys: Vec<usize>,
}

impl PspcInstance {
    pub fn new(x_count: usize, y_count: usize, sets: Vec<PspcSet>) -> Result<Self> {
        let mut cleaned = Vec::with_capacity(sets.len());
        for (i, mut s) in sets.into_iter().enumerate() {
            s.xs.sort_unstable();
            s.xs.dedup();
            s.ys.sort_unstable();
            s.ys.dedup();
            if s.xs.last().is_some_and(|&x| x >= x_count) {
                return Err(Error::invalid(format!("set {i} references an x outside X")));
            }
            if s.ys.last().is_some_and(|&y| y >= y_count) {
                return Err(Error::invalid(format!("set {i} references a y outside Y")));
            }
            cleaned.push(s);
        }
        Ok(PspcInstance {
            x_count,
            y_count,
            sets: cleaned,
        })
    }

    /// Parses the text format: a header line `|X| |Y| m`, then exactly `m`
    /// lines each listing a subset's elements as `x<i>` / `y<j>` tokens
    /// (1-based). A blank line is an empty subset; `#` lines are comments.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim_start().starts_with('#'));
        let (header_no, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing header line"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::parse(header_no + 1, "header must be `|X| |Y| m`"));
        }
        let parse_count = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::parse(header_no + 1, format!("bad count {s:?}")))
        };
        let x_count = parse_count(fields[0])?;
        let y_count = parse_count(fields[1])?;
        let set_count = parse_count(fields[2])?;

        let mut sets = Vec::with_capacity(set_count);
        for (lineno, line) in lines {
            if sets.len() == set_count {
                if line.trim().is_empty() {
                    continue;
                }
                return Err(Error::parse(
                    lineno + 1,
                    format!("found content after {set_count} subsets"),
                ));
            }
            let mut set = PspcSet::default();
            for token in line.split_whitespace() {
                if !token.is_char_boundary(1) {
                    return Err(Error::parse(lineno + 1, format!("bad element {token:?}")));
                }
                let (kind, index) = token.split_at(1);
                let i: usize = index
                    .parse()
                    .map_err(|_| Error::parse(lineno + 1, format!("bad element {token:?}")))?;
                if i == 0 {
                    return Err(Error::parse(lineno + 1, "element indices are 1-based"));
                }
                match kind {
                    "x" => set.xs.push(i - 1),
                    "y" => set.ys.push(i - 1),
                    _ => {
                        return Err(Error::parse(
                            lineno + 1,
                            format!("element {token:?} must start with x or y"),
                        ))
                    }
                }
            }
            sets.push(set);
        }
        if sets.len() != set_count {
            return Err(Error::invalid(format!(
                "expected {set_count} subset lines, found {}",
                sets.len()
            )));
        }
        PspcInstance::new(x_count, y_count, sets)
    }

    pub fn x_count(&self) -> usize {
        self.x_count
    }

    pub fn y_count(&self) -> usize {
        self.y_count
    }

    pub fn set_count(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[PspcSet] {
        &self.sets
    }

    fn check_selection(&self, selection: &[usize]) -> Result<()> {
        for &s in selection {
            if s >= self.sets.len() {
                return Err(Error::invalid(format!(
                    "selection references set {s}, instance has {}",
                    self.sets.len()
                )));
            }
        }
        Ok(())
    }
}

/// The cover cost of a selection: uncovered elements of `X` plus covered
/// elements of `Y`.
pub fn pspc_cost(instance: &PspcInstance, selection: &[usize]) -> Result<usize> {
    instance.check_selection(selection)?;
    let mut x_covered = vec![false; instance.x_count];
    let mut y_covered = vec![false; instance.y_count];
    for &s in selection {
        for &x in &instance.sets[s].xs {
            x_covered[x] = true;
        }
        for &y in &instance.sets[s].ys {
            y_covered[y] = true;
        }
    }
    let x_missing = x_covered.iter().filter(|&&c| !c).count();
    let y_hit = y_covered.iter().filter(|&&c| c).count();
    Ok(x_missing + y_hit)
}

/// What each node of a reduced instance stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRole {
    X(usize),
    Y(usize),
    Z(usize),
    Phi(usize),
    A,
    B1,
    B2,
    C,
}

/// The misinformation-minimization instance produced by the reduction: every
/// edge is certain, one misinformation cascade is seeded at the two blocker
/// nodes, one positive cascade at the feeder node, and the candidate set is
/// the subset nodes with budget `set_count`.
#[derive(Debug, Clone)]
pub struct ReducedInstance {
    pub graph: DirectedGraph,
    pub system: CascadeSystem,
    pub profile: PriorityProfile,
    pub candidates: Vec<NodeId>,
    pub budget: usize,
    pub roles: Vec<NodeRole>,
}

impl ReducedInstance {
    pub fn x_node(&self, i: usize) -> NodeId {
        i as NodeId
    }

    pub fn y_node(&self, inst: &PspcInstance, i: usize) -> NodeId {
        (inst.x_count + i) as NodeId
    }

    pub fn z_node(&self, inst: &PspcInstance, i: usize) -> NodeId {
        (inst.x_count + inst.y_count + i) as NodeId
    }

    pub fn phi_node(&self, inst: &PspcInstance, i: usize) -> NodeId {
        (inst.x_count + 2 * inst.y_count + i) as NodeId
    }

    /// Maps set indices to their subset nodes.
    pub fn selection_seeds(&self, inst: &PspcInstance, selection: &[usize]) -> Vec<NodeId> {
        selection.iter().map(|&s| self.phi_node(inst, s)).collect()
    }
}

/// Builds the reduction graph: subset nodes point at their elements, each
/// `y_i` feeds a sink `z_i` also fed by `c`, the feeder `a` covers every
/// `y_i`, blocker `b2` covers every `x_i`, and `b1` feeds `c`.
pub fn build_reduction(instance: &PspcInstance) -> Result<ReducedInstance> {
    let (xs, ys, m) = (instance.x_count, instance.y_count, instance.sets.len());
    let n = xs + 2 * ys + m + 4;
    let x_node = |i: usize| i as NodeId;
    let y_node = |i: usize| (xs + i) as NodeId;
    let z_node = |i: usize| (xs + ys + i) as NodeId;
    let phi_node = |i: usize| (xs + 2 * ys + i) as NodeId;
    let a = (n - 4) as NodeId;
    let b1 = (n - 3) as NodeId;
    let b2 = (n - 2) as NodeId;
    let c = (n - 1) as NodeId;

    let mut edges = Vec::new();
    let mut push = |u: NodeId, v: NodeId| edges.push(Edge::new(u, v, 1.0));
    for (i, set) in instance.sets.iter().enumerate() {
        for &x in &set.xs {
            push(phi_node(i), x_node(x));
        }
        for &y in &set.ys {
            push(phi_node(i), y_node(y));
        }
    }
    for i in 0..ys {
        push(y_node(i), z_node(i));
        push(c, z_node(i));
        push(a, y_node(i));
    }
    for i in 0..xs {
        push(b2, x_node(i));
    }
    push(b1, c);
    let graph = DirectedGraph::new(n, edges)?;

    let system = CascadeSystem::new(
        vec![
            (CascadeGroup::Misinformation, vec![b1, b2]),
            (CascadeGroup::Positive, vec![a]),
            (CascadeGroup::Positive, vec![]),
        ],
        CASCADE_STAR,
    )?;

    // ranks per node for [M1, P1, star]: the sinks z_i invert the usual
    // order so that the star loses to misinformation there; everywhere else
    // the fixed convention star > P1 > M1 applies
    let mut ranks = Vec::with_capacity(n * 3);
    for v in 0..n as NodeId {
        let row: [u32; 3] = if (xs + ys..xs + 2 * ys).contains(&(v as usize)) {
            [2, 3, 1] // P1 > M1 > star
        } else {
            [1, 2, 3] // star > P1 > M1
        };
        ranks.extend_from_slice(&row);
    }
    let profile = PriorityProfile::from_ranks(n, 3, ranks)?;

    let roles = (0..n)
        .map(|v| {
            if v < xs {
                NodeRole::X(v)
            } else if v < xs + ys {
                NodeRole::Y(v - xs)
            } else if v < xs + 2 * ys {
                NodeRole::Z(v - xs - ys)
            } else if v < xs + 2 * ys + m {
                NodeRole::Phi(v - xs - 2 * ys)
            } else if v == a as usize {
                NodeRole::A
            } else if v == b1 as usize {
                NodeRole::B1
            } else if v == b2 as usize {
                NodeRole::B2
            } else {
                NodeRole::C
            }
        })
        .collect();

    Ok(ReducedInstance {
        graph,
        system,
        profile,
        candidates: (0..m).map(phi_node).collect(),
        budget: m,
        roles,
    })
}

/// Outcome of checking the reduction identity for one selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    /// Misinformation-active count from the deterministic simulation.
    pub f_m: f64,
    /// `3 + cost(selection)`.
    pub expected: f64,
    pub ok: bool,
}

/// Builds the reduced instance, seeds the star cascade at the selected
/// subset nodes, simulates on the single live graph and compares the
/// misinformation count against `3 + cost`.
pub fn verify_reduction_identity(
    instance: &PspcInstance,
    selection: &[usize],
) -> Result<IdentityCheck> {
    let cost = pspc_cost(instance, selection)?;
    let reduced = build_reduction(instance)?;
    let seeds = reduced.selection_seeds(instance, selection);
    let live = LiveEdgeGraph::all_kept(&reduced.graph);
    let outcome = simulate(
        &reduced.graph,
        &reduced.system,
        &reduced.profile,
        &seeds,
        Randomness::Live(&live),
    )?;
    let f_m = outcome.m_active_count as f64;
    let expected = (3 + cost) as f64;
    Ok(IdentityCheck {
        f_m,
        expected,
        ok: f_m == expected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(x: usize, y: usize, sets: Vec<PspcSet>) -> PspcInstance {
        PspcInstance::new(x, y, sets).unwrap()
    }

    fn set(xs: &[usize], ys: &[usize]) -> PspcSet {
        PspcSet {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
        }
    }

    #[test]
    fn builds_the_single_set_gadget() {
        let instance = inst(1, 1, vec![set(&[0], &[0])]);
        let reduced = build_reduction(&instance).unwrap();
        assert_eq!(reduced.graph.node_count(), 8);
        let phi = reduced.phi_node(&instance, 0);
        let x = reduced.x_node(0);
        let y = reduced.y_node(&instance, 0);
        let z = reduced.z_node(&instance, 0);
        let mut edges: Vec<(NodeId, NodeId)> = (0..reduced.graph.edge_count())
            .map(|e| reduced.graph.edge_endpoints(e))
            .collect();
        edges.sort_unstable();
        let a = 4;
        let b1 = 5;
        let b2 = 6;
        let c = 7;
        let mut expected = vec![
            (phi, x),
            (phi, y),
            (y, z),
            (c, z),
            (a, y),
            (b2, x),
            (b1, c),
        ];
        expected.sort_unstable();
        assert_eq!(edges, expected);
        assert_eq!(reduced.candidates, vec![phi]);
        assert_eq!(reduced.budget, 1);
    }

    #[test]
    fn degenerate_and_counting_cases() {
        let empty = inst(0, 0, vec![set(&[], &[])]);
        let reduced = build_reduction(&empty).unwrap();
        assert_eq!(reduced.graph.node_count(), 5);
        assert_eq!(reduced.graph.edge_count(), 1); // just b1 -> c

        let two = inst(2, 1, vec![set(&[0], &[]), set(&[1], &[0])]);
        assert_eq!(build_reduction(&two).unwrap().graph.node_count(), 10);
    }

    #[test]
    fn cost_counts_uncovered_x_and_covered_y() {
        let i1 = inst(1, 1, vec![set(&[0], &[0])]);
        assert_eq!(pspc_cost(&i1, &[]).unwrap(), 1);
        assert_eq!(pspc_cost(&i1, &[0]).unwrap(), 1);
        let i2 = inst(2, 1, vec![set(&[0], &[])]);
        assert_eq!(pspc_cost(&i2, &[0]).unwrap(), 1);
    }

    #[test]
    fn identity_holds_on_worked_selections() {
        let instance = inst(1, 1, vec![set(&[0], &[0])]);
        // no selection: b1, b2, c and the uncovered x are M-active
        let none = verify_reduction_identity(&instance, &[]).unwrap();
        assert!(none.ok);
        assert_eq!(none.f_m, 4.0);
        // selecting the set trades x for z
        let all = verify_reduction_identity(&instance, &[0]).unwrap();
        assert!(all.ok);
        assert_eq!(all.f_m, 4.0);

        let empty = inst(0, 0, vec![set(&[], &[])]);
        let check = verify_reduction_identity(&empty, &[]).unwrap();
        assert!(check.ok);
        assert_eq!(check.f_m, 3.0);
    }

    #[test]
    fn parses_the_text_format() {
        let text = "# a comment\n2 1 2\nx1 y1\n\n";
        let instance = PspcInstance::parse(text).unwrap();
        assert_eq!(instance.x_count(), 2);
        assert_eq!(instance.y_count(), 1);
        assert_eq!(instance.set_count(), 2);
        assert_eq!(instance.sets()[0].xs, vec![0]);
        assert_eq!(instance.sets()[0].ys, vec![0]);
        assert!(instance.sets()[1].xs.is_empty());

        assert!(PspcInstance::parse("1 1 1\nq3").is_err());
        assert!(PspcInstance::parse("1 1 1\nx2").is_err());
        assert!(PspcInstance::parse("1 1 0\nx1").is_err());
    }

    #[test]
    fn rejects_out_of_range_selection() {
        let instance = inst(1, 0, vec![set(&[0], &[])]);
        assert!(pspc_cost(&instance, &[3]).is_err());
    }

    /// Sampled instances up to |X| + |Y| = 6 with up to four subsets: the
    /// identity holds for every selection, and the cover-cost minimizers are
    /// exactly the misinformation-count minimizers.
    #[test]
    fn sampled_instances_share_identity_and_minimizers() {
        use rand::Rng;
        let mut rng = crate::rng::substream(0x505343, 0, 0);
        for _ in 0..300 {
            let x_count = rng.random_range(0..=6usize);
            let y_count = rng.random_range(0..=(6 - x_count));
            let m = rng.random_range(0..=4usize);
            let sets: Vec<PspcSet> = (0..m)
                .map(|_| PspcSet {
                    xs: (0..x_count).filter(|_| rng.random_bool(0.4)).collect(),
                    ys: (0..y_count).filter(|_| rng.random_bool(0.4)).collect(),
                })
                .collect();
            let instance = inst(x_count, y_count, sets);

            let mut best_cost = usize::MAX;
            let mut best_fm = f64::INFINITY;
            let mut cost_argmin = Vec::new();
            let mut fm_argmin = Vec::new();
            for mask in 0u32..1 << m {
                let selection: Vec<usize> = (0..m).filter(|&s| mask >> s & 1 == 1).collect();
                let check = verify_reduction_identity(&instance, &selection).unwrap();
                assert!(check.ok, "identity fails at mask {mask:#b}");
                let cost = pspc_cost(&instance, &selection).unwrap();
                match cost.cmp(&best_cost) {
                    std::cmp::Ordering::Less => {
                        best_cost = cost;
                        cost_argmin = vec![mask];
                    }
                    std::cmp::Ordering::Equal => cost_argmin.push(mask),
                    std::cmp::Ordering::Greater => {}
                }
                if check.f_m < best_fm {
                    best_fm = check.f_m;
                    fm_argmin = vec![mask];
                } else if check.f_m == best_fm {
                    fm_argmin.push(mask);
                }
            }
            assert_eq!(cost_argmin, fm_argmin, "minimizer sets coincide");
        }
    }
}
