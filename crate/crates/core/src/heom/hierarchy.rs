//! Multi-index bookkeeping for the ADO hierarchy.

use std::collections::HashMap;

use crate::error::{invalid, Result};

/// binomial(n_terms + depth, depth), the number of multi-indices of length
/// `n_terms` with entries summing to at most `depth`.
pub fn hierarchy_size(n_terms: usize, depth: usize) -> Result<usize> {
    let mut acc: u128 = 1;
    let k = depth.min(n_terms) as u128;
    let n = (n_terms + depth) as u128;
    for i in 0..k {
        acc = acc
            .checked_mul(n - i)
            .ok_or_else(|| invalid("depth", "hierarchy size overflows"))?
            / (i + 1);
    }
    usize::try_from(acc).map_err(|_| invalid("depth", "hierarchy size overflows"))
}

pub(crate) const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct Hierarchy {
    pub n_terms: usize,
    pub depth: usize,
    indices: Vec<u8>,
    lookup: HashMap<Vec<u8>, u32>,
    /// `plus[i*K + k]`: ADO index of `n_i + e_k`, or NONE at the top level.
    pub(crate) plus: Vec<u32>,
    /// `minus[i*K + k]`: ADO index of `n_i − e_k`, or NONE when n_k = 0.
    pub(crate) minus: Vec<u32>,
}

impl Hierarchy {
    /// Enumerates all multi-indices level by level; index 0 is the zero
    /// vector.
    pub fn new(n_terms: usize, depth: usize) -> Result<Self> {
        if depth > u8::MAX as usize {
            return Err(invalid("depth", "at most 255"));
        }
        let size = hierarchy_size(n_terms, depth)?;
        if size >= NONE as usize {
            return Err(invalid("depth", "hierarchy too large to index"));
        }
        let k = n_terms;
        let mut indices = Vec::with_capacity(size * k);
        let mut lookup = HashMap::with_capacity(size);
        let mut current = vec![0u8; k];
        lookup.insert(current.clone(), 0);
        indices.extend_from_slice(&current);
        let mut frontier_start = 0;
        for _level in 1..=depth {
            let frontier_end = lookup.len();
            for i in frontier_start..frontier_end {
                for t in 0..k {
                    current.copy_from_slice(&indices[i * k..(i + 1) * k]);
                    current[t] += 1;
                    if !lookup.contains_key(&current) {
                        lookup.insert(current.clone(), (indices.len() / k.max(1)) as u32);
                        indices.extend_from_slice(&current);
                    }
                }
            }
            frontier_start = frontier_end;
            if k == 0 {
                break;
            }
        }
        let n_ado = indices.len().checked_div(k).unwrap_or(1);
        debug_assert_eq!(n_ado, size.max(1).min(if k == 0 { 1 } else { size }));
        let mut plus = vec![NONE; n_ado * k];
        let mut minus = vec![NONE; n_ado * k];
        for i in 0..n_ado {
            for t in 0..k {
                current.copy_from_slice(&indices[i * k..(i + 1) * k]);
                current[t] += 1;
                if let Some(&j) = lookup.get(&current) {
                    plus[i * k + t] = j;
                }
                if indices[i * k + t] > 0 {
                    current[t] -= 2;
                    minus[i * k + t] = lookup[&current];
                }
            }
        }
        Ok(Self {
            n_terms,
            depth,
            indices,
            lookup,
            plus,
            minus,
        })
    }

    pub fn len(&self) -> usize {
        self.indices.len().checked_div(self.n_terms).unwrap_or(1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn multi_index(&self, i: usize) -> &[u8] {
        &self.indices[i * self.n_terms..(i + 1) * self.n_terms]
    }

    pub fn index_of(&self, multi: &[u8]) -> Option<usize> {
        self.lookup.get(multi).map(|&i| i as usize)
    }

    pub fn level(&self, i: usize) -> usize {
        self.multi_index(i).iter().map(|&v| v as usize).sum()
    }
}
