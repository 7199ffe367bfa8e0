//! Cascade systems and per-node cascade priorities.
//!
//! A cascade is either misinformation (`M`) or positive (`P`); one positive
//! cascade is designated as the new cascade whose seed set is the decision
//! variable. Every node carries a total order over the cascades, encoded as
//! a bijection onto `{1..cascade_count}` where a larger rank wins ties.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::rng::substream;

pub type CascadeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CascadeGroup {
    Misinformation,
    Positive,
}

/// The labeled cascades of one containment instance: the existing cascades
/// with their fixed seed sets, plus the designated new cascade whose seeds
/// are supplied per evaluation.
#[derive(Debug, Clone)]
pub struct CascadeSystem {
    groups: Vec<CascadeGroup>,
    seeds: Vec<Vec<NodeId>>,
    star: CascadeId,
}

impl CascadeSystem {
    pub fn new(cascades: Vec<(CascadeGroup, Vec<NodeId>)>, star: CascadeId) -> Result<Self> {
        if cascades.is_empty() {
            return Err(Error::invalid("a cascade system needs at least one cascade"));
        }
        if star as usize >= cascades.len() {
            return Err(Error::invalid(format!(
                "star cascade id {} out of range 0..{}",
                star,
                cascades.len()
            )));
        }
        let (star_group, star_seeds) = &cascades[star as usize];
        if *star_group != CascadeGroup::Positive {
            return Err(Error::invalid("the star cascade must belong to group P"));
        }
        if !star_seeds.is_empty() {
            return Err(Error::invalid(
                "the star cascade's seed set is the decision variable; list it without seeds",
            ));
        }
        let mut groups = Vec::with_capacity(cascades.len());
        let mut seeds = Vec::with_capacity(cascades.len());
        for (group, mut s) in cascades {
            s.sort_unstable();
            s.dedup();
            groups.push(group);
            seeds.push(s);
        }
        Ok(CascadeSystem { groups, seeds, star })
    }

    pub fn cascade_count(&self) -> usize {
        self.groups.len()
    }

    pub fn star(&self) -> CascadeId {
        self.star
    }

    pub fn group(&self, c: CascadeId) -> CascadeGroup {
        self.groups[c as usize]
    }

    pub fn is_misinformation(&self, c: CascadeId) -> bool {
        self.groups[c as usize] == CascadeGroup::Misinformation
    }

    /// Fixed seeds of a cascade; empty for the star cascade.
    pub fn seeds(&self, c: CascadeId) -> &[NodeId] {
        &self.seeds[c as usize]
    }

    pub fn misinformation_ids(&self) -> impl Iterator<Item = CascadeId> + '_ {
        (0..self.cascade_count() as CascadeId).filter(|&c| self.is_misinformation(c))
    }

    pub fn positive_ids(&self) -> impl Iterator<Item = CascadeId> + '_ {
        (0..self.cascade_count() as CascadeId).filter(|&c| !self.is_misinformation(c))
    }

    /// Union of misinformation seed sets, sorted and deduplicated.
    pub fn m_seed_union(&self) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = self
            .misinformation_ids()
            .flat_map(|c| self.seeds(c).iter().copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Union of the fixed positive seed sets (the star contributes nothing).
    pub fn fixed_positive_seed_union(&self) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = self
            .positive_ids()
            .flat_map(|c| self.seeds(c).iter().copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// All fixed seeds of any cascade.
    pub fn all_fixed_seeds(&self) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = self.seeds.iter().flatten().copied().collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn validate_against(&self, node_count: usize) -> Result<()> {
        for (c, seeds) in self.seeds.iter().enumerate() {
            for &v in seeds {
                if v as usize >= node_count {
                    return Err(Error::invalid(format!(
                        "cascade {c} seed {v} outside node range 0..{node_count}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Detected structure of a priority profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileClass {
    Homogeneous,
    MDominant,
    PDominant,
    General,
}

impl std::fmt::Display for ProfileClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ProfileClass::Homogeneous => "homogeneous",
            ProfileClass::MDominant => "m-dominant",
            ProfileClass::PDominant => "p-dominant",
            ProfileClass::General => "general",
        };
        f.write_str(s)
    }
}

/// Per-node cascade priorities. `rank(v, c)` is a bijection onto
/// `{1..cascade_count}` for every `v`; larger rank means higher priority.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriorityProfile {
    cascade_count: usize,
    ranks: Vec<u32>, // node-major
}

impl PriorityProfile {
    /// Builds a profile from a node-major rank table, checking that every
    /// row is a permutation of `{1..cascade_count}`.
    pub fn from_ranks(node_count: usize, cascade_count: usize, ranks: Vec<u32>) -> Result<Self> {
        if ranks.len() != node_count * cascade_count {
            return Err(Error::invalid(format!(
                "rank table has {} entries, expected {}",
                ranks.len(),
                node_count * cascade_count
            )));
        }
        let profile = PriorityProfile {
            cascade_count,
            ranks,
        };
        for v in 0..node_count {
            if !profile.row_is_permutation(v as NodeId) {
                return Err(Error::invalid(format!(
                    "priority ranks at node {v} are not a permutation of 1..={cascade_count}"
                )));
            }
        }
        Ok(profile)
    }

    fn row_is_permutation(&self, v: NodeId) -> bool {
        let mut seen = vec![false; self.cascade_count];
        for c in 0..self.cascade_count {
            let r = self.rank(v, c as CascadeId) as usize;
            if r == 0 || r > self.cascade_count || seen[r - 1] {
                return false;
            }
            seen[r - 1] = true;
        }
        true
    }

    pub fn node_count(&self) -> usize {
        self.ranks.len() / self.cascade_count
    }

    pub fn cascade_count(&self) -> usize {
        self.cascade_count
    }

    #[inline]
    pub fn rank(&self, v: NodeId, c: CascadeId) -> u32 {
        self.ranks[v as usize * self.cascade_count + c as usize]
    }

    #[inline]
    pub(crate) fn row(&self, v: NodeId) -> &[u32] {
        let base = v as usize * self.cascade_count;
        &self.ranks[base..base + self.cascade_count]
    }

    pub fn is_homogeneous(&self) -> bool {
        let n = self.node_count();
        if n <= 1 {
            return true;
        }
        let first = self.row(0);
        (1..n).all(|v| self.row(v as NodeId) == first)
    }

    pub fn is_m_dominant(&self, system: &CascadeSystem) -> bool {
        self.dominates(system, CascadeGroup::Misinformation)
    }

    pub fn is_p_dominant(&self, system: &CascadeSystem) -> bool {
        self.dominates(system, CascadeGroup::Positive)
    }

    fn dominates(&self, system: &CascadeSystem, winner: CascadeGroup) -> bool {
        let ids: Vec<CascadeId> = (0..self.cascade_count as CascadeId).collect();
        for v in 0..self.node_count() as NodeId {
            let min_winner = ids
                .iter()
                .filter(|&&c| system.group(c) == winner)
                .map(|&c| self.rank(v, c))
                .min();
            let max_loser = ids
                .iter()
                .filter(|&&c| system.group(c) != winner)
                .map(|&c| self.rank(v, c))
                .max();
            if let (Some(lo), Some(hi)) = (min_winner, max_loser) {
                if lo < hi {
                    return false;
                }
            }
        }
        true
    }

    /// Picks the cheapest evaluator class the profile satisfies.
    pub fn class(&self, system: &CascadeSystem) -> ProfileClass {
        if self.is_m_dominant(system) {
            ProfileClass::MDominant
        } else if self.is_p_dominant(system) {
            ProfileClass::PDominant
        } else if self.is_homogeneous() {
            ProfileClass::Homogeneous
        } else {
            ProfileClass::General
        }
    }

    pub fn is_class(&self, system: &CascadeSystem, class: ProfileClass) -> bool {
        match class {
            ProfileClass::Homogeneous => self.is_homogeneous(),
            ProfileClass::MDominant => self.is_m_dominant(system),
            ProfileClass::PDominant => self.is_p_dominant(system),
            ProfileClass::General => true,
        }
    }
}

/// Recipe for building a priority profile.
///
/// `order` lists cascade ids from lowest to highest priority; for the
/// m-/p-dominant kinds it supplies the within-group order.
#[derive(Debug, Clone)]
pub enum PriorityKind {
    Homogeneous { order: Vec<CascadeId> },
    MDominant { order: Vec<CascadeId> },
    PDominant { order: Vec<CascadeId> },
    /// Independent uniform permutation per node, reproducible from the seed.
    Random { seed: u64 },
    /// Full node-major rank table.
    Explicit { ranks: Vec<u32> },
}

impl PriorityKind {
    /// Identity cascade order (cascade 0 lowest).
    pub fn identity_order(cascade_count: usize) -> Vec<CascadeId> {
        (0..cascade_count as CascadeId).collect()
    }
}

fn ranks_from_order(order: &[CascadeId], cascade_count: usize) -> Result<Vec<u32>> {
    if order.len() != cascade_count {
        return Err(Error::invalid(format!(
            "priority order lists {} cascades, expected {}",
            order.len(),
            cascade_count
        )));
    }
    let mut ranks = vec![0u32; cascade_count];
    for (pos, &c) in order.iter().enumerate() {
        if c as usize >= cascade_count || ranks[c as usize] != 0 {
            return Err(Error::invalid("priority order is not a permutation"));
        }
        ranks[c as usize] = pos as u32 + 1;
    }
    Ok(ranks)
}

/// Builds a profile for `node_count` nodes over the system's cascades.
pub fn make_priority_profile(
    kind: &PriorityKind,
    system: &CascadeSystem,
    node_count: usize,
) -> Result<PriorityProfile> {
    let cc = system.cascade_count();
    match kind {
        PriorityKind::Homogeneous { order } => {
            let row = ranks_from_order(order, cc)?;
            let mut ranks = Vec::with_capacity(node_count * cc);
            for _ in 0..node_count {
                ranks.extend_from_slice(&row);
            }
            PriorityProfile::from_ranks(node_count, cc, ranks)
        }
        PriorityKind::MDominant { order } => {
            let base = make_priority_profile(
                &PriorityKind::Homogeneous { order: order.clone() },
                system,
                node_count,
            )?;
            Ok(induce_lower_priority(&base, system))
        }
        PriorityKind::PDominant { order } => {
            let base = make_priority_profile(
                &PriorityKind::Homogeneous { order: order.clone() },
                system,
                node_count,
            )?;
            Ok(induce_upper_priority(&base, system))
        }
        PriorityKind::Random { seed } => {
            let mut ranks = Vec::with_capacity(node_count * cc);
            for v in 0..node_count {
                let mut row: Vec<u32> = (1..=cc as u32).collect();
                let mut rng = substream(*seed, 0x7072696f72697479, v as u64);
                row.shuffle(&mut rng);
                ranks.extend_from_slice(&row);
            }
            PriorityProfile::from_ranks(node_count, cc, ranks)
        }
        PriorityKind::Explicit { ranks } => {
            PriorityProfile::from_ranks(node_count, cc, ranks.clone())
        }
    }
}

/// Rewrites every node's priorities so that all misinformation cascades rank
/// below all positive cascades, preserving the relative order within each
/// group. The output is P-dominant and uniquely determined by the input.
pub fn induce_upper_priority(
    profile: &PriorityProfile,
    system: &CascadeSystem,
) -> PriorityProfile {
    induce(profile, system, CascadeGroup::Positive)
}

/// Symmetric to [`induce_upper_priority`]: positive cascades rank below
/// misinformation cascades; the output is M-dominant.
pub fn induce_lower_priority(
    profile: &PriorityProfile,
    system: &CascadeSystem,
) -> PriorityProfile {
    induce(profile, system, CascadeGroup::Misinformation)
}

fn induce(
    profile: &PriorityProfile,
    system: &CascadeSystem,
    top_group: CascadeGroup,
) -> PriorityProfile {
    let cc = profile.cascade_count();
    let n = profile.node_count();
    let mut ranks = vec![0u32; n * cc];
    let mut order: Vec<CascadeId> = (0..cc as CascadeId).collect();
    for v in 0..n as NodeId {
        // bottom group first, each group sorted by the node's current ranks
        order.sort_by_key(|&c| (system.group(c) == top_group, profile.rank(v, c)));
        for (pos, &c) in order.iter().enumerate() {
            ranks[v as usize * cc + c as usize] = pos as u32 + 1;
        }
    }
    PriorityProfile {
        cascade_count: cc,
        ranks,
    }
}
