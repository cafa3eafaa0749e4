//! Synthetic file stores and end-to-end placement → delivery → decode trials.

use std::collections::HashSet;
use std::ops::Range;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::rate_new;
use crate::decoder::{
    lemma_decode, lemma_decode_map, peel_decode, verify_plan_consistency, CacheView,
};
use crate::delivery::{build_schedule, encode_payloads};
use crate::error::{Error, Result};
use crate::model::{DemandVector, SubfileIndex, SystemParams};
use crate::placement::place;

/// `N` equal-length files, each a multiple of the schedule granularity long.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileStore {
    files: Vec<Vec<u8>>,
    num_users: usize,
    granularity: usize,
}

impl FileStore {
    pub fn new(files: Vec<Vec<u8>>, num_users: usize, granularity: usize) -> Result<Self> {
        let len = files.first().map_or(0, Vec::len);
        if files.is_empty() || len == 0 {
            return Err(Error::SizeMismatch(
                "file store must hold non-empty files".into(),
            ));
        }
        if files.iter().any(|f| f.len() != len) {
            return Err(Error::SizeMismatch("files differ in length".into()));
        }
        if granularity == 0
            || !granularity.is_multiple_of(num_users)
            || !len.is_multiple_of(granularity)
        {
            return Err(Error::SizeMismatch(format!(
                "file length {len} is not a multiple of granularity {granularity} (K = {num_users})"
            )));
        }
        Ok(FileStore {
            files,
            num_users,
            granularity,
        })
    }

    /// Deterministic pseudo-random files of `granularity * scale` bytes.
    ///
    /// Panics if `granularity` is not a positive multiple of `K` or `scale` is
    /// zero; [`synthesize_files`] is the checked entry point.
    pub fn synthesize(params: &SystemParams, granularity: usize, seed: u64, scale: usize) -> Self {
        let len = granularity * scale;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let files = (0..params.num_files())
            .map(|_| {
                let mut f = vec![0u8; len];
                rng.fill_bytes(&mut f);
                f
            })
            .collect();
        FileStore::new(files, params.num_users(), granularity).expect("valid synthetic store")
    }

    pub fn num_files(&self) -> usize {
        self.files.len()
    }

    pub fn file_len(&self) -> usize {
        self.files[0].len()
    }

    pub fn granularity(&self) -> usize {
        self.granularity
    }

    pub fn file(&self, n: usize) -> &[u8] {
        &self.files[n]
    }

    pub fn subfile(&self, file: usize, subfile: SubfileIndex) -> &[u8] {
        let len = self.file_len() / self.num_users;
        let start = subfile.get() * len;
        &self.files[file][start..start + len]
    }

    pub fn part(
        &self,
        file: usize,
        subfile: SubfileIndex,
        part: usize,
        part_count: usize,
    ) -> &[u8] {
        let sub = self.subfile(file, subfile);
        &sub[part_within(sub.len(), part, part_count)]
    }
}

/// Byte range of part `part` of `part_count` inside a sub-file of `sub_len` bytes.
pub(crate) fn part_within(sub_len: usize, part: usize, part_count: usize) -> Range<usize> {
    assert!(
        part < part_count && sub_len.is_multiple_of(part_count),
        "part {part}/{part_count} of {sub_len} bytes"
    );
    let len = sub_len / part_count;
    part * len..(part + 1) * len
}

pub fn synthesize_files(
    params: &SystemParams,
    granularity: usize,
    seed: u64,
    scale: usize,
) -> Result<FileStore> {
    if scale == 0 {
        return Err(Error::InvalidParams("scale must be at least 1".into()));
    }
    if granularity == 0 || !granularity.is_multiple_of(params.num_users()) {
        return Err(Error::SizeMismatch(format!(
            "granularity {granularity} is not a positive multiple of K = {}",
            params.num_users()
        )));
    }
    Ok(FileStore::synthesize(params, granularity, seed, scale))
}

/// First byte-level disagreement between a reconstruction and the original.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub user: usize,
    pub subfile: usize,
    pub byte_offset: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialReport {
    pub per_user_success: Vec<bool>,
    #[serde(serialize_with = "crate::render::serialize_ratio")]
    pub measured_rate: BigRational,
    #[serde(serialize_with = "crate::render::serialize_ratio")]
    pub formula_rate: BigRational,
    pub symbols_sent: usize,
    pub bytes_sent: usize,
    pub file_len: usize,
    pub mismatches: Vec<Mismatch>,
    /// Every user isolated all of its missing parts in one peeling pass.
    pub single_pass: bool,
    /// Explicit plans passed the consistency check and replayed to the same
    /// bytes as peeling, for every user.
    pub plans_agree: bool,
}

impl TrialReport {
    pub fn success(&self) -> bool {
        self.per_user_success.iter().all(|&ok| ok) && self.measured_rate == self.formula_rate
    }
}

/// Runs placement, delivery and both decoders for every user.
pub fn end_to_end(
    params: &SystemParams,
    demands: &DemandVector,
    seed: u64,
    scale: usize,
) -> Result<TrialReport> {
    let schedule = build_schedule(params, demands)?;
    let store = synthesize_files(params, schedule.granularity(), seed, scale)?;
    let encoded = encode_payloads(&schedule, &store, params)?;
    let contents = place(params);
    let sub_len = store.file_len() / params.num_users();

    let mut per_user_success = Vec::with_capacity(params.num_users());
    let mut mismatches = Vec::new();
    let mut single_pass = true;
    let mut plans_agree = true;
    for alpha in 0..params.num_users() {
        let view = CacheView::materialize(&store, alpha, params, &contents)?;
        let rec = peel_decode(alpha, params, demands, &encoded, &view)?;
        let original = store.file(demands.file_of(alpha));
        let first_bad = rec.bytes.iter().zip(original).position(|(a, b)| a != b);
        match first_bad {
            Some(offset) => {
                mismatches.push(Mismatch {
                    user: alpha,
                    subfile: offset / sub_len,
                    byte_offset: offset,
                });
                per_user_success.push(false);
            }
            None => per_user_success.push(rec.bytes.len() == original.len()),
        }
        single_pass &= rec.single_pass;

        let plan = lemma_decode_map(alpha, params)?;
        plans_agree &= verify_plan_consistency(&plan, &schedule, alpha, params);
        plans_agree &= lemma_decode(&plan, demands, &encoded, &view)?
            .iter()
            .all(|(key, bytes)| rec.recovered.get(key).is_some_and(|r| &r.bytes == bytes));
    }

    let bytes_sent: usize = encoded
        .symbols()
        .map(|s| s.payload.as_ref().map_or(0, Vec::len))
        .sum();
    Ok(TrialReport {
        per_user_success,
        measured_rate: BigRational::new(BigInt::from(bytes_sent), BigInt::from(store.file_len())),
        formula_rate: rate_new(
            params.num_users(),
            params.cache_subfiles(),
            params.access_degree(),
        )?,
        symbols_sent: encoded.symbol_count(),
        bytes_sent,
        file_len: store.file_len(),
        mismatches,
        single_pass,
        plans_agree,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TrialAggregate {
    pub trials: usize,
    pub failures: usize,
    pub distinct_demand_vectors_tested: usize,
}

/// `num_trials` end-to-end runs, each with a fresh distinct-demand vector and
/// fresh file bytes drawn from `seed`.
pub fn randomized_trials(
    params: &SystemParams,
    num_trials: usize,
    seed: u64,
) -> Result<TrialAggregate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut failures = 0;
    for _ in 0..num_trials {
        let demands = DemandVector::worst_case(params, &mut rng)?;
        let file_seed = rng.gen();
        let report = end_to_end(params, &demands, file_seed, 1)?;
        if !(report.success() && report.plans_agree) {
            failures += 1;
        }
        seen.insert(demands);
    }
    Ok(TrialAggregate {
        trials: num_trials,
        failures,
        distinct_demand_vectors_tested: seen.len(),
    })
}
