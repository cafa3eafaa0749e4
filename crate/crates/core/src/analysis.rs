//! Closed-form rates, baselines, bounds, sub-packetization and memory-sharing
//! envelopes. Every quantity is an exact rational; decimals only appear when
//! rendering.

use std::io::Write;
use std::ops::RangeInclusive;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::delivery::round_shapes;
use crate::error::{Error, Result};
use crate::model::validate_shape;
use crate::render::{decimal_text, is_nonnegative, serialize_ratio};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn ceil_div(a: i64, b: i64) -> i64 {
    (a + b - 1) / b
}

/// One achievable `(γ, rate)` pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RatePoint {
    #[serde(serialize_with = "serialize_ratio")]
    pub gamma: BigRational,
    #[serde(serialize_with = "serialize_ratio")]
    pub rate: BigRational,
}

impl RatePoint {
    pub fn new(gamma: BigRational, rate: BigRational) -> Self {
        debug_assert!(is_nonnegative(&gamma) && is_nonnegative(&rate));
        RatePoint { gamma, rate }
    }
}

/// Rate of the multi-access scheme at `γ = k/K` with access degree `z`.
pub fn rate_new(
    num_users: usize,
    cache_subfiles: usize,
    access_degree: usize,
) -> Result<BigRational> {
    validate_shape(num_users, cache_subfiles, access_degree)?;
    let covered = (cache_subfiles * access_degree) as i64;
    let uncovered = num_users as i64 - covered;
    let term = |r: i64| q(1, 1 + ceil_div(covered, r));
    Ok(match uncovered {
        d if d <= 0 => BigRational::zero(),
        1 => q(1, num_users as i64),
        d if d % 2 == 0 => {
            (d / 2 + 1..=d)
                .map(term)
                .fold(BigRational::zero(), |a, b| a + b)
                * q(2, 1)
        }
        d => {
            let anchor = q(1, ceil_div(2 * covered, d + 1) + 1);
            (((d + 3) / 2)..=d)
                .map(|r| term(r) * q(2, 1))
                .fold(anchor, |a, b| a + b)
        }
    })
}

/// The index-coding baseline `K(1 - zγ)^2 = (K - kz)^2 / K`, zero once `kz >= K`.
pub fn rate_ic(
    num_users: usize,
    cache_subfiles: usize,
    access_degree: usize,
) -> Result<BigRational> {
    validate_shape(num_users, cache_subfiles, access_degree)?;
    let uncovered = num_users as i64 - (cache_subfiles * access_degree) as i64;
    Ok(if uncovered <= 0 {
        BigRational::zero()
    } else {
        q(uncovered * uncovered, num_users as i64)
    })
}

/// Lower bound over uncoded placements, defined for `z >= K/2`.
pub fn rate_lb(num_users: usize, access_degree: usize, gamma: &BigRational) -> Result<BigRational> {
    if num_users < 2 || access_degree < 2 || access_degree > num_users {
        return Err(Error::InvalidParams(format!(
            "K = {num_users}, z = {access_degree}"
        )));
    }
    if 2 * access_degree < num_users {
        return Err(Error::DomainError(format!(
            "the bound needs z >= K/2, got z = {access_degree}, K = {num_users}"
        )));
    }
    if !is_nonnegative(gamma) {
        return Err(Error::DomainError("γ must be non-negative".into()));
    }
    let users = num_users as i64;
    let gap = (num_users - access_degree) as i64;
    let c = q(gap * (gap + 1), 2 * users);
    let kg = gamma * q(users, 1);
    Ok(if kg <= BigRational::one() {
        q(users, 1) - (q(users, 1) - &c) * kg
    } else if kg <= q(2, 1) {
        c * (q(2, 1) - kg)
    } else {
        BigRational::zero()
    })
}

/// `rate_new <= rate_ic`.
pub fn theorem2_check(
    num_users: usize,
    cache_subfiles: usize,
    access_degree: usize,
) -> Result<bool> {
    Ok(rate_new(num_users, cache_subfiles, access_degree)?
        <= rate_ic(num_users, cache_subfiles, access_degree)?)
}

/// With `z = K - 1` the rate is `1/K` for `k = 1` and zero for `k >= 2`.
pub fn corollary2_check(num_users: usize, cache_subfiles: usize) -> Result<bool> {
    let expected = if cache_subfiles == 1 {
        q(1, num_users as i64)
    } else {
        BigRational::zero()
    };
    Ok(rate_new(num_users, cache_subfiles, num_users.saturating_sub(1))? == expected)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Subpacketization {
    /// `K` times the largest per-round part count.
    pub per_round_max: usize,
    /// `K` times the lcm of all part counts; what payload encoding needs.
    pub payload_lcm: usize,
}

/// Sub-packetization of the scheme. With no rounds, files are still split
/// into `K` sub-files, so both figures are `K`.
pub fn subpacketization_new(
    num_users: usize,
    cache_subfiles: usize,
    access_degree: usize,
) -> Result<Subpacketization> {
    let shapes = round_shapes(num_users, cache_subfiles, access_degree)?;
    let max = shapes.iter().map(|s| s.part_count).max().unwrap_or(1);
    let lcm = shapes.iter().fold(1usize, |acc, s| acc.lcm(&s.part_count));
    Ok(Subpacketization {
        per_round_max: num_users * max,
        payload_lcm: num_users * lcm,
    })
}

/// Sub-packetization of the index-coding baseline, `C(K-kz+k-1, k-1) K / k`.
pub fn subpacketization_ic(
    num_users: usize,
    cache_subfiles: usize,
    access_degree: usize,
) -> Result<BigUint> {
    validate_shape(num_users, cache_subfiles, access_degree)?;
    let covered = cache_subfiles * access_degree;
    if covered > num_users {
        return Err(Error::InvalidParams(format!(
            "baseline sub-packetization needs kz <= K, got kz = {covered}, K = {num_users}"
        )));
    }
    let n = BigUint::from(num_users - covered + cache_subfiles - 1);
    let binom = num_integer::binomial(n, BigUint::from(cache_subfiles - 1));
    let (quot, rem) = (binom * num_users).div_rem(&BigUint::from(cache_subfiles));
    if !rem.is_zero() {
        return Err(Error::InvalidParams(
            "baseline sub-packetization is not integral".into(),
        ));
    }
    Ok(quot)
}

/// Strict vertices of the lower convex hull, ascending in `γ`. Collinear
/// points are dropped; for repeated `γ` only the lowest rate is kept.
pub fn convex_envelope(points: &[RatePoint]) -> Vec<RatePoint> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.gamma.cmp(&b.gamma).then_with(|| a.rate.cmp(&b.rate)));
    pts.dedup_by(|later, earlier| later.gamma == earlier.gamma);

    let mut hull: Vec<RatePoint> = Vec::with_capacity(pts.len());
    for p in pts {
        while hull.len() >= 2 {
            let a = &hull[hull.len() - 2];
            let b = &hull[hull.len() - 1];
            let cross = (&b.gamma - &a.gamma) * (&p.rate - &a.rate)
                - (&b.rate - &a.rate) * (&p.gamma - &a.gamma);
            if cross <= BigRational::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Value of the piecewise-linear envelope at `gamma`, or `None` outside its span.
pub fn envelope_at(hull: &[RatePoint], gamma: &BigRational) -> Option<BigRational> {
    hull.windows(2)
        .find(|w| &w[0].gamma <= gamma && gamma <= &w[1].gamma)
        .map(|w| {
            let t = (gamma - &w[0].gamma) / (&w[1].gamma - &w[0].gamma);
            &w[0].rate + (&w[1].rate - &w[0].rate) * t
        })
        .or_else(|| {
            hull.iter()
                .find(|p| &p.gamma == gamma)
                .map(|p| p.rate.clone())
        })
}

/// `(0, K)` and `(k/K, rate_new)` for every `k ∈ [1, K]`.
pub fn envelope_points(num_users: usize, access_degree: usize) -> Result<Vec<RatePoint>> {
    let mut points = vec![RatePoint::new(BigRational::zero(), q(num_users as i64, 1))];
    for k in 1..=num_users {
        points.push(RatePoint::new(
            q(k as i64, num_users as i64),
            rate_new(num_users, k, access_degree)?,
        ));
    }
    Ok(points)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnvelopeRow {
    pub num_users: usize,
    pub access_degree: usize,
    pub cache_subfiles: usize,
    pub point: RatePoint,
    pub hull_vertex: bool,
}

pub fn envelope_table(num_users: usize, access_degree: usize) -> Result<Vec<EnvelopeRow>> {
    let points = envelope_points(num_users, access_degree)?;
    let hull = convex_envelope(&points);
    Ok(points
        .into_iter()
        .enumerate()
        .map(|(k, point)| EnvelopeRow {
            num_users,
            access_degree,
            cache_subfiles: k,
            hull_vertex: hull.contains(&point),
            point,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub num_users: usize,
    pub cache_subfiles: usize,
    pub access_degree: usize,
    #[serde(serialize_with = "serialize_ratio")]
    pub gamma: BigRational,
    #[serde(serialize_with = "serialize_ratio")]
    pub rate_new: BigRational,
    #[serde(serialize_with = "serialize_ratio")]
    pub rate_ic: BigRational,
    #[serde(serialize_with = "serialize_opt_ratio")]
    pub rate_lb: Option<BigRational>,
    pub subpack_new: Subpacketization,
    pub subpack_ic: Option<String>,
}

fn serialize_opt_ratio<S: serde::Serializer>(
    v: &Option<BigRational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(r) => serialize_ratio(r, s),
        None => s.serialize_none(),
    }
}

/// One row per `(k, z)` in the ranges (clamped to `k ∈ [1, K]`, `z ∈ [2, K]`),
/// ordered by `k` then `z`.
pub fn sweep(
    num_users: usize,
    k_range: Option<RangeInclusive<usize>>,
    z_range: Option<RangeInclusive<usize>>,
) -> Result<Vec<SweepRow>> {
    validate_shape(num_users, 1, 2.min(num_users))?;
    let ks = k_range.unwrap_or(1..=num_users);
    let zs = z_range.unwrap_or(2..=num_users);
    let mut rows = Vec::new();
    for k in ks.clone().filter(|k| (1..=num_users).contains(k)) {
        for z in zs.clone().filter(|z| (2..=num_users).contains(z)) {
            let gamma = q(k as i64, num_users as i64);
            let rate_lb = if 2 * z >= num_users {
                Some(rate_lb(num_users, z, &gamma)?)
            } else {
                None
            };
            rows.push(SweepRow {
                num_users,
                cache_subfiles: k,
                access_degree: z,
                rate_new: rate_new(num_users, k, z)?,
                rate_ic: rate_ic(num_users, k, z)?,
                rate_lb,
                subpack_new: subpacketization_new(num_users, k, z)?,
                subpack_ic: subpacketization_ic(num_users, k, z)
                    .ok()
                    .map(|v| v.to_string()),
                gamma,
            });
        }
    }
    Ok(rows)
}

pub const SWEEP_HEADER: [&str; 10] = [
    "K",
    "k",
    "z",
    "gamma",
    "rate_new",
    "rate_ic",
    "rate_lb",
    "subpack_new_max",
    "subpack_new_lcm",
    "subpack_ic",
];

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            r.num_users.to_string(),
            r.cache_subfiles.to_string(),
            r.access_degree.to_string(),
            decimal_text(&r.gamma),
            decimal_text(&r.rate_new),
            decimal_text(&r.rate_ic),
            r.rate_lb.as_ref().map(decimal_text).unwrap_or_default(),
            r.subpack_new.per_round_max.to_string(),
            r.subpack_new.payload_lcm.to_string(),
            r.subpack_ic.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()
}

pub const ENVELOPE_HEADER: [&str; 6] = ["K", "z", "k", "gamma", "rate", "hull_vertex"];

pub fn write_envelope_csv<W: Write>(rows: &[EnvelopeRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ENVELOPE_HEADER)?;
    for r in rows {
        w.write_record([
            r.num_users.to_string(),
            r.access_degree.to_string(),
            r.cache_subfiles.to_string(),
            decimal_text(&r.point.gamma),
            decimal_text(&r.point.rate),
            r.hull_vertex.to_string(),
        ])?;
    }
    w.flush()
}

/// How the scheme compares with the index-coding baseline over a sweep.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ComparisonSummary {
    pub rows: usize,
    pub strictly_better: usize,
    pub coinciding: usize,
    pub worse: usize,
}

pub fn compare_with_baseline(rows: &[SweepRow]) -> ComparisonSummary {
    let mut s = ComparisonSummary {
        rows: rows.len(),
        ..Default::default()
    };
    for r in rows {
        match r.rate_new.cmp(&r.rate_ic) {
            std::cmp::Ordering::Less => s.strictly_better += 1,
            std::cmp::Ordering::Equal => s.coinciding += 1,
            std::cmp::Ordering::Greater => s.worse += 1,
        }
    }
    s
}

/// Grid points with `2z >= K` where the bound exceeds the scheme's rate.
/// Reported, not asserted.
pub fn lower_bound_violations(num_users: usize) -> Result<Vec<(usize, usize)>> {
    Ok(sweep(num_users, None, None)?
        .into_iter()
        .filter(|r| r.rate_lb.as_ref().is_some_and(|lb| lb > &r.rate_new))
        .map(|r| (r.cache_subfiles, r.access_degree))
        .collect())
}
