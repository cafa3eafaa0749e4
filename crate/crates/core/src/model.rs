//! Instance parameters and the cyclic index algebra shared by every other module.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a sub-file, always normalized into `[0, K - 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubfileIndex(usize);

impl SubfileIndex {
    pub fn get(self) -> usize {
        self.0
    }
}

impl fmt::Display for SubfileIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<SubfileIndex> for usize {
    fn from(s: SubfileIndex) -> usize {
        s.0
    }
}

/// Reduces `x` into `[0, modulus - 1]`, wrapping negative values.
pub fn mod_index(x: i64, modulus: usize) -> SubfileIndex {
    assert!(modulus >= 1, "modulus must be positive");
    SubfileIndex(x.rem_euclid(modulus as i64) as usize)
}

/// Inverse of `a` modulo `m`, if it exists.
pub(crate) fn mod_inverse(a: usize, m: usize) -> Option<usize> {
    if m == 1 {
        return Some(0);
    }
    let egcd = (a as i64).extended_gcd(&(m as i64));
    (egcd.gcd == 1).then(|| egcd.x.rem_euclid(m as i64) as usize)
}

/// A multi-access caching instance `(N, K, k, z)`.
///
/// Instances with `kz < K` and `gcd(k, K) != 1` are rejected: the delivery
/// scheme resolves demanding users by dividing index sums by `k` modulo `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemParams {
    num_files: usize,
    num_users: usize,
    cache_subfiles: usize,
    access_degree: usize,
}

impl SystemParams {
    pub fn new(
        num_files: usize,
        num_users: usize,
        cache_subfiles: usize,
        access_degree: usize,
    ) -> Result<Self> {
        validate_shape(num_users, cache_subfiles, access_degree)?;
        if num_files == 0 {
            return Err(Error::InvalidParams("N must be at least 1".into()));
        }
        let params = SystemParams {
            num_files,
            num_users,
            cache_subfiles,
            access_degree,
        };
        if params.uncovered() > 0 && num_users.gcd(&cache_subfiles) != 1 {
            return Err(Error::UnsupportedParameters {
                num_users,
                cache_subfiles,
            });
        }
        Ok(params)
    }

    /// N
    pub fn num_files(&self) -> usize {
        self.num_files
    }

    /// K
    pub fn num_users(&self) -> usize {
        self.num_users
    }

    /// k, the number of sub-files of every file each cache stores.
    pub fn cache_subfiles(&self) -> usize {
        self.cache_subfiles
    }

    /// z, the number of consecutive caches each user reads.
    pub fn access_degree(&self) -> usize {
        self.access_degree
    }

    /// Normalized cache size `k / K`.
    pub fn gamma(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.cache_subfiles),
            BigInt::from(self.num_users),
        )
    }

    /// `K - kz`: how many sub-files of its demand a user cannot reach.
    /// Zero or negative means every user sees every sub-file.
    pub fn uncovered(&self) -> i64 {
        self.num_users as i64 - (self.cache_subfiles * self.access_degree) as i64
    }

    /// Number of sub-file indices a single user can read, `min(kz, K)`.
    pub fn view_size(&self) -> usize {
        (self.cache_subfiles * self.access_degree).min(self.num_users)
    }

    pub fn check_user(&self, alpha: usize) -> Result<()> {
        if alpha >= self.num_users {
            return Err(Error::InvalidParams(format!(
                "user {alpha} out of range for K = {}",
                self.num_users
            )));
        }
        Ok(())
    }

    /// The user `alpha` with `k * alpha = x (mod K)`.
    pub fn resolve_user(&self, x: i64) -> Result<usize> {
        let inv = mod_inverse(self.cache_subfiles % self.num_users, self.num_users).ok_or(
            Error::UnsupportedParameters {
                num_users: self.num_users,
                cache_subfiles: self.cache_subfiles,
            },
        )?;
        let x = mod_index(x, self.num_users).get();
        Ok((x * inv) % self.num_users)
    }

    /// The window `kα, kα+1, ..., k(α+z)-1` (mod K), truncated to `K` entries.
    pub fn accessible_subfiles(&self, alpha: usize) -> Vec<SubfileIndex> {
        let start = (self.cache_subfiles * alpha) as i64;
        (0..self.view_size() as i64)
            .map(|i| mod_index(start + i, self.num_users))
            .collect()
    }

    /// The sub-files `k(α+z)+i`, `i ∈ [0, K-kz-1]`, user `alpha` must receive.
    pub fn missing_subfiles(&self, alpha: usize) -> Vec<SubfileIndex> {
        let start = (self.cache_subfiles * (alpha + self.access_degree)) as i64;
        (0..self.uncovered().max(0))
            .map(|i| mod_index(start + i, self.num_users))
            .collect()
    }

    pub fn is_accessible(&self, alpha: usize, subfile: SubfileIndex) -> bool {
        let start = self.cache_subfiles * alpha % self.num_users;
        let offset = (subfile.get() + self.num_users - start) % self.num_users;
        offset < self.view_size()
    }
}

/// Shape checks shared with the closed-form analysis, which does not need `N`
/// or invertibility of `k`.
pub(crate) fn validate_shape(
    num_users: usize,
    cache_subfiles: usize,
    access_degree: usize,
) -> Result<()> {
    if num_users < 2 {
        return Err(Error::InvalidParams(format!(
            "K must be at least 2, got {num_users}"
        )));
    }
    if cache_subfiles == 0 || cache_subfiles > num_users {
        return Err(Error::InvalidParams(format!(
            "k must lie in [1, K = {num_users}], got {cache_subfiles}"
        )));
    }
    if access_degree < 2 || access_degree > num_users {
        return Err(Error::InvalidParams(format!(
            "z must lie in [2, K = {num_users}], got {access_degree}"
        )));
    }
    Ok(())
}

/// One requested file index per user.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DemandVector(Vec<usize>);

impl DemandVector {
    pub fn new(demands: Vec<usize>, params: &SystemParams) -> Result<Self> {
        if demands.len() != params.num_users() {
            return Err(Error::InvalidDemands(format!(
                "expected {} demands, got {}",
                params.num_users(),
                demands.len()
            )));
        }
        if let Some(&bad) = demands.iter().find(|&&d| d >= params.num_files()) {
            return Err(Error::InvalidDemands(format!(
                "file index {bad} out of range for N = {}",
                params.num_files()
            )));
        }
        Ok(DemandVector(demands))
    }

    /// User `α` requests file `α mod N`.
    pub fn identity(params: &SystemParams) -> Self {
        DemandVector(
            (0..params.num_users())
                .map(|u| u % params.num_files())
                .collect(),
        )
    }

    /// A uniformly random permutation of `[0, N-1]` truncated to `K` entries.
    pub fn worst_case<R: Rng + ?Sized>(params: &SystemParams, rng: &mut R) -> Result<Self> {
        if params.num_files() < params.num_users() {
            return Err(Error::InvalidDemands(format!(
                "distinct demands need N >= K, got N = {} and K = {}",
                params.num_files(),
                params.num_users()
            )));
        }
        let mut files: Vec<usize> = (0..params.num_files()).collect();
        files.shuffle(rng);
        files.truncate(params.num_users());
        Ok(DemandVector(files))
    }

    pub fn file_of(&self, user: usize) -> usize {
        self.0[user]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn is_distinct(&self) -> bool {
        let mut seen = self.0.clone();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }
}
