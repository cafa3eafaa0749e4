//! Text formats shared by the CLI and the golden tests.

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serializer;

use crate::delivery::{CodedSymbol, TermRef, TransmissionSchedule};
use crate::placement::CacheContents;

/// `W[<subfile>,<part>]^<file>`
pub fn term_text(term: &TermRef) -> String {
    format!("W[{},{}]^{}", term.subfile, term.part, term.file)
}

/// `T[<j>]^<stage> = W[..]^.. + W[..]^..`
pub fn symbol_line(symbol: &CodedSymbol) -> String {
    let terms: Vec<String> = symbol.terms.iter().map(term_text).collect();
    format!("{} = {}", symbol.id, terms.join(" + "))
}

pub fn schedule_lines(schedule: &TransmissionSchedule) -> Vec<String> {
    schedule.symbols().map(symbol_line).collect()
}

/// `M_<c> = {<i1>,...,<ik>}`
pub fn placement_lines(contents: &CacheContents) -> Vec<String> {
    contents
        .iter()
        .enumerate()
        .map(|(c, subfiles)| {
            let ids: Vec<String> = subfiles.iter().map(|s| s.to_string()).collect();
            format!("M_{c} = {{{}}}", ids.join(","))
        })
        .collect()
}

/// `p/q`, or just `p` for integers.
pub fn ratio_text(value: &BigRational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Decimal with six significant digits and trailing zeros trimmed.
pub fn decimal_text(value: &BigRational) -> String {
    let x = value.to_f64().unwrap_or(f64::NAN);
    sig_figs(x, 6)
}

/// Fixed-point with `places` decimals.
pub fn fixed_text(value: &BigRational, places: usize) -> String {
    format!("{:.*}", places, value.to_f64().unwrap_or(f64::NAN))
}

fn sig_figs(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    let mut s = format!("{:.*}", decimals, x);
    // rounding can carry into a new leading digit (9.999995 -> 10.00000)
    let int_digits = s
        .trim_start_matches('-')
        .split('.')
        .next()
        .map_or(0, str::len) as i32;
    if magnitude >= 0 && int_digits > magnitude + 1 && decimals > 0 {
        s = format!("{:.*}", decimals - 1, x);
    }
    if s.contains('.') {
        s = s.trim_end_matches('0').trim_end_matches('.').to_string();
    }
    s
}

pub(crate) fn serialize_ratio<S: Serializer>(value: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&ratio_text(value))
}

pub(crate) fn is_nonnegative(value: &BigRational) -> bool {
    value.is_zero() || value.is_positive()
}
