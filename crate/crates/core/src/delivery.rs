//! Delivery: the coded transmission schedule.
//!
//! With `t` the first round, the server runs rounds `r = t, t+1, ...` and in
//! each round splits every sub-file into a round-specific number of parts.
//! Every coded symbol XORs parts whose sub-file indices step by `r`; the first
//! half of the terms serve the users whose `kα - r` sub-file is missing, the
//! second half the users whose `k(α+z) + r - 1` sub-file is missing.
//!
//! When `K - kz` is even, `t = (K - kz + 2) / 2` and the rounds run up to
//! `K - kz`. When it is odd, `t = (K - kz + 1) / 2` and round `t` is a single
//! anchor round of `K` symbols that hands every user its `kα - t` sub-file.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::FileStore;
use crate::model::{mod_index, validate_shape, DemandVector, SubfileIndex, SystemParams};

/// Which coded symbol of a shift `j` within a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// `T_j`: the only symbol for shift `j` in this round.
    Single,
    /// `T_{j,1}`
    First,
    /// `T_{j,2}`
    Second,
}

/// How a round splits sub-files and how many symbols it sends per shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundKind {
    /// Odd `K - kz`, round `t`: `p` parts, one `p`-term symbol per shift.
    Anchor,
    /// `p` even: `p/2` parts, one `p`-term symbol per shift.
    Paired,
    /// `p` odd: `p` parts, two `p`-term symbols per shift.
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RoundShape {
    pub r: usize,
    /// `r - t`, the superscript of the round's symbols.
    pub stage: usize,
    /// `ceil(kz / r) + 1`
    pub p: usize,
    pub part_count: usize,
    pub kind: RoundKind,
}

impl RoundShape {
    pub fn symbols_per_shift(&self) -> usize {
        match self.kind {
            RoundKind::Split => 2,
            RoundKind::Anchor | RoundKind::Paired => 1,
        }
    }
}

/// First round `t`, or `None` when `kz >= K` and nothing is sent.
pub fn first_round(num_users: usize, cache_subfiles: usize, access_degree: usize) -> Option<usize> {
    let uncovered = num_users as i64 - (cache_subfiles * access_degree) as i64;
    if uncovered <= 0 {
        return None;
    }
    let uncovered = uncovered as usize;
    Some(if uncovered.is_multiple_of(2) {
        (uncovered + 2) / 2
    } else {
        uncovered.div_ceil(2)
    })
}

/// Round layout of the schedule for `(K, k, z)`. Needs no demands and no
/// invertibility of `k`, so the analysis can use it for any instance shape.
pub fn round_shapes(
    num_users: usize,
    cache_subfiles: usize,
    access_degree: usize,
) -> Result<Vec<RoundShape>> {
    validate_shape(num_users, cache_subfiles, access_degree)?;
    let Some(t) = first_round(num_users, cache_subfiles, access_degree) else {
        return Ok(Vec::new());
    };
    let covered = cache_subfiles * access_degree;
    let uncovered = num_users - covered;
    let odd = uncovered % 2 == 1;
    let last = uncovered;
    Ok((t..=last)
        .map(|r| {
            let p = covered.div_ceil(r) + 1;
            let (kind, part_count) = if odd && r == t {
                (RoundKind::Anchor, p)
            } else if p % 2 == 0 {
                (RoundKind::Paired, p / 2)
            } else {
                (RoundKind::Split, p)
            };
            RoundShape {
                r,
                stage: r - t,
                p,
                part_count,
                kind,
            }
        })
        .collect())
}

/// One XOR term: part `part` of `part_count` of sub-file `subfile` of the file
/// requested by `user`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct TermRef {
    pub subfile: SubfileIndex,
    pub part: usize,
    pub part_count: usize,
    pub user: usize,
    pub file: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SymbolId {
    pub round: usize,
    pub stage: usize,
    pub shift: usize,
    pub variant: Variant,
}

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.variant {
            Variant::Single => write!(f, "T[{}]^{}", self.shift, self.stage),
            Variant::First => write!(f, "T[{},1]^{}", self.shift, self.stage),
            Variant::Second => write!(f, "T[{},2]^{}", self.shift, self.stage),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CodedSymbol {
    pub id: SymbolId,
    pub part_count: usize,
    pub terms: Vec<TermRef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payload: Option<Vec<u8>>,
}

impl CodedSymbol {
    /// Size in file units, `1 / (K * part_count)`.
    pub fn size(&self, num_users: usize) -> BigRational {
        BigRational::new(BigInt::from(1), BigInt::from(num_users * self.part_count))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Round {
    #[serde(flatten)]
    pub shape: RoundShape,
    pub symbols: Vec<CodedSymbol>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransmissionSchedule {
    pub num_users: usize,
    pub first_round: Option<usize>,
    pub rounds: Vec<Round>,
    #[serde(serialize_with = "crate::render::serialize_ratio")]
    pub total_rate: BigRational,
}

impl TransmissionSchedule {
    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn symbols(&self) -> impl Iterator<Item = &CodedSymbol> {
        self.rounds.iter().flat_map(|r| r.symbols.iter())
    }

    pub fn symbol_count(&self) -> usize {
        self.rounds.iter().map(|r| r.symbols.len()).sum()
    }

    pub fn symbol(&self, id: &SymbolId) -> Option<&CodedSymbol> {
        let t = self.first_round?;
        let round = self.rounds.get(id.round.checked_sub(t)?)?;
        let pos = match (round.shape.kind, id.variant) {
            (RoundKind::Split, Variant::First) => 2 * id.shift,
            (RoundKind::Split, Variant::Second) => 2 * id.shift + 1,
            (RoundKind::Anchor | RoundKind::Paired, Variant::Single) => id.shift,
            _ => return None,
        };
        round.symbols.get(pos).filter(|s| s.id == *id)
    }

    /// `K * lcm(part counts)`: the smallest file size every part fits in.
    pub fn granularity(&self) -> usize {
        let lcm = self
            .rounds
            .iter()
            .fold(1usize, |acc, r| acc.lcm(&r.shape.part_count));
        self.num_users * lcm
    }
}

/// Builds every coded symbol for the instance and demand vector.
pub fn build_schedule(
    params: &SystemParams,
    demands: &DemandVector,
) -> Result<TransmissionSchedule> {
    let users = params.num_users();
    if demands.as_slice().len() != users {
        return Err(Error::InvalidDemands(format!(
            "expected {users} demands, got {}",
            demands.as_slice().len()
        )));
    }
    if let Some(&bad) = demands
        .as_slice()
        .iter()
        .find(|&&d| d >= params.num_files())
    {
        return Err(Error::InvalidDemands(format!(
            "file index {bad} out of range for N = {}",
            params.num_files()
        )));
    }
    let shapes = round_shapes(users, params.cache_subfiles(), params.access_degree())?;
    let first = first_round(users, params.cache_subfiles(), params.access_degree());
    // Second-half terms resolve their user from (i-1)r + j + (K - kz + 1).
    let tail_offset = params.uncovered() + 1;

    let term = |subfile: i64, part: usize, part_count: usize, user_index: i64| -> Result<TermRef> {
        let user = params.resolve_user(user_index)?;
        Ok(TermRef {
            subfile: mod_index(subfile, users),
            part,
            part_count,
            user,
            file: demands.file_of(user),
        })
    };

    let mut rounds = Vec::with_capacity(shapes.len());
    for shape in shapes {
        let r = shape.r as i64;
        let p = shape.p;
        let q = shape.part_count;
        let mut symbols = Vec::with_capacity(users * shape.symbols_per_shift());
        for shift in 0..users {
            let j = shift as i64;
            let id = |variant| SymbolId {
                round: shape.r,
                stage: shape.stage,
                shift,
                variant,
            };
            match shape.kind {
                RoundKind::Anchor => {
                    let terms = (0..p)
                        .map(|i| term(i as i64 * r + j, i, q, (i as i64 + 1) * r + j))
                        .collect::<Result<_>>()?;
                    symbols.push(CodedSymbol {
                        id: id(Variant::Single),
                        part_count: q,
                        terms,
                        payload: None,
                    });
                }
                RoundKind::Paired => {
                    let half = p / 2;
                    let terms = (0..p)
                        .map(|i| {
                            let ii = i as i64;
                            if i < half {
                                term(ii * r + j, i, q, (ii + 1) * r + j)
                            } else {
                                term(ii * r + j, i - half, q, (ii - 1) * r + j + tail_offset)
                            }
                        })
                        .collect::<Result<_>>()?;
                    symbols.push(CodedSymbol {
                        id: id(Variant::Single),
                        part_count: q,
                        terms,
                        payload: None,
                    });
                }
                RoundKind::Split => {
                    let lo = (p - 1) / 2;
                    let first = (0..p)
                        .map(|i| {
                            let ii = i as i64;
                            if i < lo {
                                term(ii * r + j, i, q, (ii + 1) * r + j)
                            } else {
                                term(ii * r + j, i - lo, q, (ii - 1) * r + j + tail_offset)
                            }
                        })
                        .collect::<Result<_>>()?;
                    let second = (0..p)
                        .map(|i| {
                            let ii = i as i64;
                            if i <= lo {
                                term(ii * r + j, lo + i, q, (ii + 1) * r + j)
                            } else {
                                term(ii * r + j, i, q, (ii - 1) * r + j + tail_offset)
                            }
                        })
                        .collect::<Result<_>>()?;
                    symbols.push(CodedSymbol {
                        id: id(Variant::First),
                        part_count: q,
                        terms: first,
                        payload: None,
                    });
                    symbols.push(CodedSymbol {
                        id: id(Variant::Second),
                        part_count: q,
                        terms: second,
                        payload: None,
                    });
                }
            }
        }
        rounds.push(Round { shape, symbols });
    }

    let mut schedule = TransmissionSchedule {
        num_users: users,
        first_round: first,
        rounds,
        total_rate: BigRational::zero(),
    };
    schedule.total_rate = schedule_rate(&schedule);
    Ok(schedule)
}

/// Sum of symbol sizes, in file units.
pub fn schedule_rate(schedule: &TransmissionSchedule) -> BigRational {
    schedule.symbols().fold(BigRational::zero(), |acc, s| {
        acc + s.size(schedule.num_users)
    })
}

/// Attaches to every symbol the XOR of the byte ranges its terms reference.
pub fn encode_payloads(
    schedule: &TransmissionSchedule,
    store: &FileStore,
    params: &SystemParams,
) -> Result<TransmissionSchedule> {
    if store.num_files() != params.num_files() {
        return Err(Error::SizeMismatch(format!(
            "store holds {} files, instance has N = {}",
            store.num_files(),
            params.num_files()
        )));
    }
    let granularity = schedule.granularity();
    if store.file_len() == 0 || !store.file_len().is_multiple_of(granularity) {
        return Err(Error::SizeMismatch(format!(
            "file length {} is not a positive multiple of {granularity}",
            store.file_len()
        )));
    }
    let mut encoded = schedule.clone();
    for round in &mut encoded.rounds {
        for symbol in &mut round.symbols {
            let len = store.file_len() / (schedule.num_users * symbol.part_count);
            let mut payload = vec![0u8; len];
            for t in &symbol.terms {
                xor_into(
                    &mut payload,
                    store.part(t.file, t.subfile, t.part, t.part_count),
                );
            }
            symbol.payload = Some(payload);
        }
    }
    Ok(encoded)
}

pub(crate) fn xor_into(acc: &mut [u8], bytes: &[u8]) {
    debug_assert_eq!(acc.len(), bytes.len());
    for (a, b) in acc.iter_mut().zip(bytes) {
        *a ^= b;
    }
}
