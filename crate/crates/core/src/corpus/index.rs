//! Cannot-link constraints stored at canonical-form granularity.
//!
//! Chains sharing a canonical form never conflict with each other, so the
//! pairwise constraint set is fully described by the partition of chains into
//! forms plus a form-by-form conflict matrix. Chain-level pairs are never
//! materialized.

use std::collections::HashMap;

use super::canonical::{chain_seed, conflicts, derive_canonical_form, CanonicalForm};
use super::types::Corpus;

#[derive(Debug, Clone)]
pub struct ConflictIndex {
    forms: Vec<CanonicalForm>,
    /// Form index per chain, in corpus order.
    form_of: Vec<usize>,
    sizes: Vec<usize>,
    /// Row-major bit matrix over form pairs.
    bits: Vec<u64>,
    words_per_row: usize,
    /// Conflicting forms for each form, ascending.
    neighbors: Vec<Vec<usize>>,
}

impl ConflictIndex {
    /// Group chains by form and compute the conflict relation once per form pair.
    pub fn from_forms(chain_forms: Vec<CanonicalForm>) -> Self {
        let mut lookup: HashMap<CanonicalForm, usize> = HashMap::new();
        let mut forms = Vec::new();
        let mut form_of = Vec::with_capacity(chain_forms.len());
        for form in chain_forms {
            let next = forms.len();
            let idx = *lookup.entry(form.clone()).or_insert_with(|| {
                forms.push(form);
                next
            });
            form_of.push(idx);
        }
        Self::from_partition(forms, form_of)
    }

    /// Build from distinct forms and a chain-to-form assignment.
    pub fn from_partition(forms: Vec<CanonicalForm>, form_of: Vec<usize>) -> Self {
        let f = forms.len();
        let mut sizes = vec![0usize; f];
        for &idx in &form_of {
            sizes[idx] += 1;
        }
        let words_per_row = f.div_ceil(64);
        let mut bits = vec![0u64; words_per_row * f];
        let mut neighbors = vec![Vec::new(); f];
        for a in 0..f {
            if forms[a].is_empty() {
                continue;
            }
            for b in (a + 1)..f {
                if conflicts(&forms[a], &forms[b]) {
                    bits[a * words_per_row + b / 64] |= 1 << (b % 64);
                    bits[b * words_per_row + a / 64] |= 1 << (a % 64);
                    neighbors[a].push(b);
                    neighbors[b].push(a);
                }
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        ConflictIndex {
            forms,
            form_of,
            sizes,
            bits,
            words_per_row,
            neighbors,
        }
    }

    /// An index where no chain conflicts with any other.
    pub fn unconstrained(n: usize) -> Self {
        Self::from_partition(vec![CanonicalForm::default()], vec![0; n])
    }

    pub fn forms(&self) -> &[CanonicalForm] {
        &self.forms
    }

    pub fn form_of(&self, chain: usize) -> usize {
        self.form_of[chain]
    }

    pub fn chain_forms(&self) -> &[usize] {
        &self.form_of
    }

    pub fn form_of_chain(&self, chain: usize) -> &CanonicalForm {
        &self.forms[self.form_of[chain]]
    }

    pub fn num_chains(&self) -> usize {
        self.form_of.len()
    }

    pub fn num_forms(&self) -> usize {
        self.forms.len()
    }

    pub fn form_size(&self, form: usize) -> usize {
        self.sizes[form]
    }

    #[inline]
    pub fn forms_conflict(&self, a: usize, b: usize) -> bool {
        self.bits[a * self.words_per_row + b / 64] >> (b % 64) & 1 == 1
    }

    #[inline]
    pub fn chains_conflict(&self, i: usize, j: usize) -> bool {
        self.forms_conflict(self.form_of[i], self.form_of[j])
    }

    pub fn conflicting_forms(&self, form: usize) -> &[usize] {
        &self.neighbors[form]
    }

    /// Number of unordered chain pairs carrying a cannot-link constraint.
    pub fn implied_constraint_count(&self) -> u64 {
        let mut total = 0u64;
        for (a, list) in self.neighbors.iter().enumerate() {
            for &b in list.iter().filter(|&&b| b > a) {
                total += self.sizes[a] as u64 * self.sizes[b] as u64;
            }
        }
        total
    }

    pub fn has_constraints(&self) -> bool {
        self.neighbors.iter().any(|l| !l.is_empty())
    }
}

/// Derive every chain's canonical form and index the conflicts between them.
///
/// Tie-breaking for each chain is seeded from `seed` and the chain id, so the
/// result does not depend on file order.
pub fn build_conflict_index(corpus: &Corpus, seed: u64) -> ConflictIndex {
    let forms = corpus
        .chains()
        .iter()
        .map(|c| derive_canonical_form(c, chain_seed(seed, &c.id)))
        .collect();
    ConflictIndex::from_forms(forms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::types::{Role, Stance};

    fn form(group: &str, role: Role) -> CanonicalForm {
        CanonicalForm {
            roles: [(group.to_string(), role)].into_iter().collect(),
            stance: None,
        }
    }

    #[test]
    fn two_conflicting_forms_three_by_one() {
        let hero = form("Police", Role::Hero);
        let threat = form("Police", Role::Threat);
        let idx = ConflictIndex::from_forms(vec![hero.clone(), hero.clone(), threat, hero]);
        assert_eq!(idx.num_forms(), 2);
        assert_eq!(idx.implied_constraint_count(), 3);
        assert!(idx.chains_conflict(0, 2));
        assert!(!idx.chains_conflict(0, 1));
    }

    #[test]
    fn single_form_has_no_constraints() {
        let f = form("Voters", Role::Victim);
        let idx = ConflictIndex::from_forms(vec![f.clone(); 5]);
        assert_eq!(idx.implied_constraint_count(), 0);
        assert!(!idx.has_constraints());
    }

    #[test]
    fn large_scale_count_without_pairs() {
        // Two conflicting forms of 5773 chains each imply ~33.3M pairs.
        let a = CanonicalForm {
            roles: Default::default(),
            stance: Some(Stance::Pro),
        };
        let b = CanonicalForm {
            roles: Default::default(),
            stance: Some(Stance::Anti),
        };
        let mut form_of = vec![0usize; 5773];
        form_of.extend(std::iter::repeat(1).take(5773));
        let idx = ConflictIndex::from_partition(vec![a, b], form_of);
        assert_eq!(idx.implied_constraint_count(), 5773 * 5773);
        assert!(idx.implied_constraint_count() > 33_000_000);
    }

    #[test]
    fn bit_matrix_symmetric_and_irreflexive() {
        let forms: Vec<CanonicalForm> = (0..130)
            .map(|i| form(&format!("G{}", i % 7), Role::ACTIVE[i % 3]))
            .collect();
        let idx = ConflictIndex::from_forms(forms);
        for a in 0..idx.num_forms() {
            assert!(!idx.forms_conflict(a, a));
            for b in 0..idx.num_forms() {
                assert_eq!(idx.forms_conflict(a, b), idx.forms_conflict(b, a));
                assert_eq!(
                    idx.forms_conflict(a, b),
                    conflicts(&idx.forms()[a], &idx.forms()[b])
                );
            }
        }
    }
}
