//! Uncoded cache placement.
//!
//! Cache `c` stores sub-files `kc + j (mod K)`, `j ∈ [0, k-1]`, of every file.
//! Contents are tracked by sub-file index only; bytes live in
//! [`crate::harness::FileStore`].

use serde::Serialize;

use crate::error::Result;
use crate::model::{mod_index, SubfileIndex, SystemParams};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CacheContents {
    caches: Vec<Vec<SubfileIndex>>,
}

impl CacheContents {
    pub fn cache(&self, c: usize) -> &[SubfileIndex] {
        &self.caches[c]
    }

    pub fn num_caches(&self) -> usize {
        self.caches.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[SubfileIndex]> {
        self.caches.iter().map(Vec::as_slice)
    }
}

pub fn place(params: &SystemParams) -> CacheContents {
    let users = params.num_users();
    let k = params.cache_subfiles();
    let caches = (0..users)
        .map(|c| {
            (0..k)
                .map(|j| mod_index((k * c + j) as i64, users))
                .collect()
        })
        .collect();
    CacheContents { caches }
}

/// Union of the caches `α, ..., α+z-1 (mod K)`, in first-seen order.
pub fn user_view(
    alpha: usize,
    contents: &CacheContents,
    params: &SystemParams,
) -> Result<Vec<SubfileIndex>> {
    params.check_user(alpha)?;
    let users = params.num_users();
    let mut seen = vec![false; users];
    let mut view = Vec::with_capacity(params.view_size());
    for offset in 0..params.access_degree() {
        for &s in contents.cache((alpha + offset) % users) {
            if !std::mem::replace(&mut seen[s.get()], true) {
                view.push(s);
            }
        }
    }
    Ok(view)
}
