//! Canonical character-role configurations and the cannot-link rule.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::types::{NarrativeChain, Role, Stance};

/// Group-to-role map plus optional stance. Roles are never `Neutral` and the
/// stance is never `Stance::Neutral`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub roles: BTreeMap<String, Role>,
    pub stance: Option<Stance>,
}

impl CanonicalForm {
    pub fn is_empty(&self) -> bool {
        self.roles.is_empty() && self.stance.is_none()
    }

    pub fn role_of(&self, group: &str) -> Option<Role> {
        self.roles.get(group).copied()
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (group, role) in &self.roles {
            if !first {
                f.write_str("; ")?;
            }
            write!(f, "{group}: {role}")?;
            first = false;
        }
        if let Some(stance) = self.stance {
            if !first {
                f.write_str("; ")?;
            }
            write!(f, "Stance: {stance}")?;
            first = false;
        }
        if first {
            f.write_str("<empty>")?;
        }
        Ok(())
    }
}

/// Reduce a chain's annotations to its canonical form.
///
/// Neutral annotations are dropped, the most frequent remaining role wins per
/// group, and exact ties are broken with an RNG seeded from `seed`. The RNG
/// is only consulted for ties, so a strict majority never depends on the seed.
pub fn derive_canonical_form(chain: &NarrativeChain, seed: u64) -> CanonicalForm {
    let mut tallies: BTreeMap<&str, [usize; 3]> = BTreeMap::new();
    for ann in &chain.characters {
        let slot = match ann.role {
            Role::Hero => 0,
            Role::Threat => 1,
            Role::Victim => 2,
            Role::Neutral => continue,
        };
        tallies.entry(ann.group.as_str()).or_default()[slot] += 1;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut roles = BTreeMap::new();
    for (group, counts) in tallies {
        let best = *counts.iter().max().expect("three slots");
        let leaders: Vec<Role> = Role::ACTIVE
            .iter()
            .zip(counts)
            .filter(|&(_, c)| c == best)
            .map(|(r, _)| *r)
            .collect();
        let role = if leaders.len() == 1 {
            leaders[0]
        } else {
            leaders[rng.gen_range(0..leaders.len())]
        };
        roles.insert(group.to_string(), role);
    }

    let stance = match chain.stance {
        Stance::Neutral => None,
        s => Some(s),
    };
    CanonicalForm { roles, stance }
}

/// True when two forms assign different roles to a shared group or carry
/// opposite stances.
pub fn conflicts(a: &CanonicalForm, b: &CanonicalForm) -> bool {
    if let (Some(sa), Some(sb)) = (a.stance, b.stance) {
        if sa != sb {
            return true;
        }
    }
    // Both maps are sorted; walk them in lockstep.
    let mut left = a.roles.iter().peekable();
    let mut right = b.roles.iter().peekable();
    while let (Some((ga, ra)), Some((gb, rb))) = (left.peek(), right.peek()) {
        match ga.cmp(gb) {
            std::cmp::Ordering::Less => {
                left.next();
            }
            std::cmp::Ordering::Greater => {
                right.next();
            }
            std::cmp::Ordering::Equal => {
                if ra != rb {
                    return true;
                }
                left.next();
                right.next();
            }
        }
    }
    false
}

/// Per-chain tie-breaking seed, stable across corpus orderings.
pub fn chain_seed(seed: u64, chain_id: &str) -> u64 {
    // FNV-1a over the id, then a splitmix64 finalizer mixed with the seed.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in chain_id.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = h ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
