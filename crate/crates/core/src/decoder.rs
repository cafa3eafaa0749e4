//! Per-user decoding.
//!
//! Two independent routes recover the parts a user cannot read from its
//! caches:
//!
//! * [`peel_decode`] knows nothing about the scheme. It repeatedly looks for
//!   symbols with exactly one term the user cannot derive and XORs the rest
//!   out.
//! * [`lemma_decode_map`] names, for every missing part, the symbol the scheme
//!   intends the user to decode it from. [`lemma_decode`] then replays those
//!   entries.
//!
//! Both must agree byte for byte.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::delivery::{round_shapes, xor_into, RoundKind, SymbolId, TransmissionSchedule, Variant};
use crate::error::{Error, Result};
use crate::harness::{part_within, FileStore};
use crate::model::{mod_index, DemandVector, SubfileIndex, SystemParams};
use crate::placement::{user_view, CacheContents};

/// The bytes of every file restricted to the sub-files one user can reach.
#[derive(Debug, Clone)]
pub struct CacheView {
    user: usize,
    num_users: usize,
    file_len: usize,
    subfiles: HashMap<(usize, SubfileIndex), Vec<u8>>,
}

impl CacheView {
    pub fn materialize(
        store: &FileStore,
        alpha: usize,
        params: &SystemParams,
        contents: &CacheContents,
    ) -> Result<Self> {
        let view = user_view(alpha, contents, params)?;
        let mut subfiles = HashMap::with_capacity(view.len() * store.num_files());
        for file in 0..store.num_files() {
            for &s in &view {
                subfiles.insert((file, s), store.subfile(file, s).to_vec());
            }
        }
        Ok(CacheView {
            user: alpha,
            num_users: params.num_users(),
            file_len: store.file_len(),
            subfiles,
        })
    }

    pub fn user(&self) -> usize {
        self.user
    }

    pub fn holds(&self, subfile: SubfileIndex) -> bool {
        self.subfiles.contains_key(&(0, subfile))
    }

    pub fn subfile(&self, file: usize, subfile: SubfileIndex) -> Option<&[u8]> {
        self.subfiles.get(&(file, subfile)).map(Vec::as_slice)
    }

    pub fn part(
        &self,
        file: usize,
        subfile: SubfileIndex,
        part: usize,
        part_count: usize,
    ) -> Option<&[u8]> {
        let bytes = self.subfile(file, subfile)?;
        Some(&bytes[part_within(self.file_len / self.num_users, part, part_count)])
    }
}

/// One part of one sub-file of one file, at a given split granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PartKey {
    pub file: usize,
    pub subfile: SubfileIndex,
    pub part: usize,
    pub part_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recovered {
    pub source: SymbolId,
    pub bytes: Vec<u8>,
    /// Peeling pass (1-based) that first isolated the part.
    pub pass: usize,
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub user: usize,
    pub file: usize,
    pub bytes: Vec<u8>,
    pub recovered: BTreeMap<PartKey, Recovered>,
    pub passes: usize,
    /// Every part of the demanded file was isolated in the first pass.
    pub single_pass: bool,
    pub symbols_used: usize,
}

/// Generic peeling decoder for user `alpha`.
pub fn peel_decode(
    alpha: usize,
    params: &SystemParams,
    demands: &DemandVector,
    schedule: &TransmissionSchedule,
    view: &CacheView,
) -> Result<Reconstruction> {
    params.check_user(alpha)?;
    let wanted = demands.file_of(alpha);
    let mut recovered: BTreeMap<PartKey, Recovered> = BTreeMap::new();
    let mut passes = 0;

    loop {
        passes += 1;
        let mut progress = false;
        for symbol in schedule.symbols() {
            let payload = symbol.payload.as_deref().ok_or_else(|| {
                Error::SizeMismatch(format!("symbol {} carries no payload", symbol.id))
            })?;
            let mut unknown = None;
            let mut unknown_count = 0;
            let mut acc = payload.to_vec();
            for term in &symbol.terms {
                let key = PartKey {
                    file: term.file,
                    subfile: term.subfile,
                    part: term.part,
                    part_count: term.part_count,
                };
                if let Some(bytes) = view.part(term.file, term.subfile, term.part, term.part_count)
                {
                    xor_into(&mut acc, bytes);
                } else if let Some(r) = recovered.get(&key).filter(|r| r.source != symbol.id) {
                    xor_into(&mut acc, &r.bytes);
                } else {
                    unknown_count += 1;
                    unknown = Some(key);
                }
            }
            if unknown_count != 1 {
                continue;
            }
            let key = unknown.expect("one unknown term");
            match recovered.get(&key) {
                Some(prev) if prev.bytes != acc => {
                    return Err(Error::InconsistentRecovery {
                        user: alpha,
                        file: key.file,
                        subfile: key.subfile.get(),
                        part: key.part,
                    })
                }
                Some(_) => {}
                None => {
                    recovered.insert(
                        key,
                        Recovered {
                            source: symbol.id,
                            bytes: acc,
                            pass: passes,
                        },
                    );
                    progress = true;
                }
            }
        }
        if !progress {
            break;
        }
    }

    let sub_len = view.file_len / params.num_users();
    let mut bytes = Vec::with_capacity(view.file_len);
    let mut last_pass = 0;
    for s in 0..params.num_users() {
        let s = mod_index(s as i64, params.num_users());
        if let Some(chunk) = view.subfile(wanted, s) {
            bytes.extend_from_slice(chunk);
            continue;
        }
        let chunk =
            assemble_subfile(&recovered, wanted, s, sub_len).ok_or(Error::DecodeIncomplete {
                user: alpha,
                file: wanted,
                subfile: s.get(),
            })?;
        last_pass = last_pass.max(chunk.1);
        bytes.extend_from_slice(&chunk.0);
    }

    let symbols_used = {
        let mut ids: Vec<SymbolId> = recovered.values().map(|r| r.source).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    };
    Ok(Reconstruction {
        user: alpha,
        file: wanted,
        bytes,
        recovered,
        passes,
        single_pass: last_pass <= 1,
        symbols_used,
    })
}

/// Concatenates a complete set of recovered parts of one sub-file, together
/// with the latest pass any of them needed.
fn assemble_subfile(
    recovered: &BTreeMap<PartKey, Recovered>,
    file: usize,
    subfile: SubfileIndex,
    sub_len: usize,
) -> Option<(Vec<u8>, usize)> {
    let mut counts: Vec<usize> = recovered
        .keys()
        .filter(|k| k.file == file && k.subfile == subfile)
        .map(|k| k.part_count)
        .collect();
    counts.sort_unstable();
    counts.dedup();
    counts.into_iter().find_map(|part_count| {
        let mut out = Vec::with_capacity(sub_len);
        let mut pass = 0;
        for part in 0..part_count {
            let r = recovered.get(&PartKey {
                file,
                subfile,
                part,
                part_count,
            })?;
            pass = pass.max(r.pass);
            out.extend_from_slice(&r.bytes);
        }
        Some((out, pass))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PlanEntry {
    pub subfile: SubfileIndex,
    pub part: usize,
    pub part_count: usize,
    pub source: SymbolId,
}

/// Which symbol user `user` decodes each missing part of its demand from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecodePlan {
    pub user: usize,
    pub entries: Vec<PlanEntry>,
}

/// The scheme's explicit decode map for user `alpha`.
///
/// Per round `r` the user takes sub-file `kα - r` from the first-half terms and
/// sub-file `k(α+z) + r - 1` from the second-half terms. In the odd case the
/// anchor round `t` supplies only `kα - t`; the remaining rounds `t+1..=2t-1`
/// supply both.
pub fn lemma_decode_map(alpha: usize, params: &SystemParams) -> Result<DecodePlan> {
    params.check_user(alpha)?;
    let users = params.num_users();
    let shapes = round_shapes(users, params.cache_subfiles(), params.access_degree())?;
    if let Some(first) = shapes.first() {
        // k must be invertible for the symbol indices below to name the right users
        params.resolve_user(first.r as i64)?;
    }
    let k = params.cache_subfiles() as i64;
    let ka = k * alpha as i64;
    let kaz = k * (alpha + params.access_degree()) as i64;
    let mut entries = Vec::new();

    for shape in &shapes {
        let r = shape.r as i64;
        let p = shape.p;
        let q = shape.part_count;
        let entry = |subfile: i64, part: usize, shift: i64, variant| PlanEntry {
            subfile: mod_index(subfile, users),
            part,
            part_count: q,
            source: SymbolId {
                round: shape.r,
                stage: shape.stage,
                shift: mod_index(shift, users).get(),
                variant,
            },
        };
        let head = ka - r;
        let tail = kaz + r - 1;
        match shape.kind {
            RoundKind::Anchor => {
                for l in 0..p {
                    entries.push(entry(head, l, ka - (l as i64 + 1) * r, Variant::Single));
                }
            }
            RoundKind::Paired => {
                let half = p / 2;
                for l in 0..half {
                    entries.push(entry(head, l, ka - (l as i64 + 1) * r, Variant::Single));
                }
                for l in 0..half {
                    let shift = kaz - 1 - (l as i64 + half as i64 - 1) * r;
                    entries.push(entry(tail, l, shift, Variant::Single));
                }
            }
            RoundKind::Split => {
                let lo = (p - 1) / 2;
                for l in 0..lo {
                    entries.push(entry(head, l, ka - (l as i64 + 1) * r, Variant::First));
                }
                for l in lo..p {
                    let shift = ka - ((l - lo) as i64 + 1) * r;
                    entries.push(entry(head, l, shift, Variant::Second));
                }
                for l in 0..=lo {
                    let shift = kaz - 1 - (l as i64 + lo as i64 - 1) * r;
                    entries.push(entry(tail, l, shift, Variant::First));
                }
                for l in lo + 1..p {
                    let shift = kaz - 1 - (l as i64 - 1) * r;
                    entries.push(entry(tail, l, shift, Variant::Second));
                }
            }
        }
    }
    Ok(DecodePlan {
        user: alpha,
        entries,
    })
}

/// Every entry's symbol exists and holds the keyed part, demanded by `alpha`,
/// as its only term outside `alpha`'s view.
pub fn verify_plan_consistency(
    plan: &DecodePlan,
    schedule: &TransmissionSchedule,
    alpha: usize,
    params: &SystemParams,
) -> bool {
    plan.user == alpha
        && plan.entries.iter().all(|e| {
            let Some(symbol) = schedule.symbol(&e.source) else {
                return false;
            };
            let mut outside = symbol
                .terms
                .iter()
                .filter(|t| !params.is_accessible(alpha, t.subfile));
            match (outside.next(), outside.next()) {
                (Some(t), None) => {
                    t.subfile == e.subfile
                        && t.part == e.part
                        && t.part_count == e.part_count
                        && t.user == alpha
                }
                _ => false,
            }
        })
}

/// The plan keys are exactly the parts of the user's missing sub-files, each
/// once.
pub fn plan_tiles_missing(plan: &DecodePlan, params: &SystemParams) -> bool {
    let missing = params.missing_subfiles(plan.user);
    let mut seen: BTreeMap<SubfileIndex, Vec<(usize, usize)>> = BTreeMap::new();
    for e in &plan.entries {
        seen.entry(e.subfile)
            .or_default()
            .push((e.part, e.part_count));
    }
    if seen.len() != missing.len() || !missing.iter().all(|s| seen.contains_key(s)) {
        return false;
    }
    seen.values_mut().all(|parts| {
        parts.sort_unstable();
        let count = parts[0].1;
        parts.len() == count
            && parts
                .iter()
                .enumerate()
                .all(|(i, &(part, c))| part == i && c == count)
    })
}

/// Replays a plan against the encoded schedule, returning each keyed part.
pub fn lemma_decode(
    plan: &DecodePlan,
    demands: &DemandVector,
    schedule: &TransmissionSchedule,
    view: &CacheView,
) -> Result<BTreeMap<PartKey, Vec<u8>>> {
    let file = demands.file_of(plan.user);
    let mut out = BTreeMap::new();
    for e in &plan.entries {
        let symbol = schedule.symbol(&e.source).ok_or(Error::DecodeIncomplete {
            user: plan.user,
            file,
            subfile: e.subfile.get(),
        })?;
        let mut acc = symbol.payload.clone().ok_or_else(|| {
            Error::SizeMismatch(format!("symbol {} carries no payload", symbol.id))
        })?;
        let mut target_seen = false;
        for t in &symbol.terms {
            let is_target =
                !target_seen && t.subfile == e.subfile && t.part == e.part && t.user == plan.user;
            if is_target {
                target_seen = true;
                continue;
            }
            let bytes = view.part(t.file, t.subfile, t.part, t.part_count).ok_or(
                Error::DecodeIncomplete {
                    user: plan.user,
                    file,
                    subfile: e.subfile.get(),
                },
            )?;
            xor_into(&mut acc, bytes);
        }
        if !target_seen {
            return Err(Error::DecodeIncomplete {
                user: plan.user,
                file,
                subfile: e.subfile.get(),
            });
        }
        out.insert(
            PartKey {
                file,
                subfile: e.subfile,
                part: e.part,
                part_count: e.part_count,
            },
            acc,
        );
    }
    Ok(out)
}
