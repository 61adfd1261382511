//! Typed interpretation of cell and parameter text.
//!
//! `int` and `float` are decimal numbers. `datetime` accepts a date-time
//! prefix `YYYY[-MM[-DD[THH[:MM[:SS[.f]]]]]]` with an optional `Z` or
//! `±HH:MM` offset; missing parts are padded to the earliest instant, so
//! `2016-05` is 2016-05-01T00:00:00. `duration` is an ISO-8601 duration
//! normalized to seconds with months of 30 days and years of 365 days.
//! The empty string is below every non-empty value of any type.

use alloc::string::String;
use core::cmp::Ordering;

use crate::config::ValueType;

#[derive(Debug, Clone, PartialEq)]
pub enum TypedValue {
    Empty,
    Str(String),
    Int(i64),
    Float(f64),
    /// Seconds.
    Duration(f64),
    /// Seconds since the Unix epoch (UTC) plus nanoseconds.
    DateTime(i64, u32),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("`{lexical}` is not a valid {value_type}")]
pub struct ValueParseError {
    pub value_type: ValueType,
    pub lexical: String,
}

impl TypedValue {
    pub fn parse(value_type: ValueType, lexical: &str) -> Result<Self, ValueParseError> {
        if lexical.is_empty() {
            return Ok(TypedValue::Empty);
        }
        let parsed = match value_type {
            ValueType::Str => Some(TypedValue::Str(String::from(lexical))),
            ValueType::Int => parse_int(lexical).map(TypedValue::Int),
            ValueType::Float => parse_float(lexical).map(TypedValue::Float),
            ValueType::Duration => parse_duration(lexical).map(TypedValue::Duration),
            ValueType::DateTime => parse_datetime(lexical).map(|(s, n)| TypedValue::DateTime(s, n)),
        };
        parsed.ok_or_else(|| ValueParseError { value_type, lexical: String::from(lexical) })
    }

    /// Orders two values of the same type. Values of different types are
    /// ordered by variant, which only happens with `Empty`.
    pub fn compare(&self, other: &Self) -> Ordering {
        use TypedValue::*;
        match (self, other) {
            (Empty, Empty) => Ordering::Equal,
            (Empty, _) => Ordering::Less,
            (_, Empty) => Ordering::Greater,
            (Str(a), Str(b)) => a.cmp(b),
            (Int(a), Int(b)) => a.cmp(b),
            (Float(a), Float(b)) | (Duration(a), Duration(b)) => a.total_cmp(b),
            (DateTime(a, an), DateTime(b, bn)) => (a, an).cmp(&(b, bn)),
            (a, b) => a.rank().cmp(&b.rank()),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            TypedValue::Empty => 0,
            TypedValue::Str(_) => 1,
            TypedValue::Int(_) => 2,
            TypedValue::Float(_) => 3,
            TypedValue::Duration(_) => 4,
            TypedValue::DateTime(..) => 5,
        }
    }
}

/// Checks that `lexical` parses under `value_type`.
pub fn check(value_type: ValueType, lexical: &str) -> Result<(), ValueParseError> {
    TypedValue::parse(value_type, lexical).map(|_| ())
}

fn parse_int(s: &str) -> Option<i64> {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn parse_float(s: &str) -> Option<f64> {
    // reject inf/nan spellings that f64::from_str accepts
    if !s.bytes().all(|b| b.is_ascii_digit() || matches!(b, b'+' | b'-' | b'.' | b'e' | b'E')) {
        return None;
    }
    if !s.bytes().any(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok().filter(|f: &f64| f.is_finite())
}

const MINUTE: f64 = 60.0;
const HOUR: f64 = 60.0 * MINUTE;
const DAY: f64 = 24.0 * HOUR;

fn parse_duration(s: &str) -> Option<f64> {
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, s.strip_prefix('+').unwrap_or(s)),
    };
    let body = body.strip_prefix('P')?;
    let (date_part, time_part) = match body.split_once('T') {
        Some((d, t)) => (d, Some(t)),
        None => (body, None),
    };

    let mut total = 0.0;
    let mut components = 0;
    let date_units: &[(char, f64)] = &[('Y', 365.0 * DAY), ('M', 30.0 * DAY), ('W', 7.0 * DAY), ('D', DAY)];
    let time_units: &[(char, f64)] = &[('H', HOUR), ('M', MINUTE), ('S', 1.0)];

    let mut scan = |part: &str, units: &[(char, f64)]| -> Option<usize> {
        let mut rest = part;
        let mut next_unit = 0;
        let mut found = 0;
        while !rest.is_empty() {
            let end = rest.find(|c: char| !(c.is_ascii_digit() || c == '.' || c == ','))?;
            let number = &rest[..end];
            let designator = rest[end..].chars().next()?;
            let pos = units[next_unit..].iter().position(|(u, _)| *u == designator)? + next_unit;
            let value = parse_decimal(number)?;
            total += value * units[pos].1;
            next_unit = pos + 1;
            found += 1;
            rest = &rest[end + designator.len_utf8()..];
        }
        Some(found)
    };

    components += scan(date_part, date_units)?;
    if let Some(t) = time_part {
        let n = scan(t, time_units)?;
        if n == 0 {
            return None;
        }
        components += n;
    }
    (components > 0).then_some(sign * total)
}

fn parse_decimal(s: &str) -> Option<f64> {
    if s.is_empty() || !s.as_bytes()[0].is_ascii_digit() {
        return None;
    }
    let normalized: String = s.chars().map(|c| if c == ',' { '.' } else { c }).collect();
    if normalized.matches('.').count() > 1 || normalized.ends_with('.') {
        return None;
    }
    normalized.parse().ok()
}

fn parse_datetime(s: &str) -> Option<(i64, u32)> {
    let b = s.as_bytes();
    let mut pos = 0;
    let num = |pos: &mut usize, len: usize| -> Option<u32> {
        let digits = b.get(*pos..*pos + len)?;
        if !digits.iter().all(u8::is_ascii_digit) {
            return None;
        }
        *pos += len;
        Some(digits.iter().fold(0, |acc, d| acc * 10 + u32::from(d - b'0')))
    };
    let eat = |pos: &mut usize, c: &[u8]| -> bool {
        if b.get(*pos).is_some_and(|x| c.contains(x)) {
            *pos += 1;
            true
        } else {
            false
        }
    };

    let year = num(&mut pos, 4)? as i64;
    let (mut month, mut day, mut hour, mut minute, mut second, mut nanos) = (1, 1, 0, 0, 0, 0u32);
    let mut has_time = false;
    if eat(&mut pos, b"-") {
        month = num(&mut pos, 2)?;
        if eat(&mut pos, b"-") {
            day = num(&mut pos, 2)?;
            if eat(&mut pos, b"Tt ") {
                hour = num(&mut pos, 2)?;
                has_time = true;
                if eat(&mut pos, b":") {
                    minute = num(&mut pos, 2)?;
                    if eat(&mut pos, b":") {
                        second = num(&mut pos, 2)?;
                        if eat(&mut pos, b".") {
                            let start = pos;
                            while b.get(pos).is_some_and(u8::is_ascii_digit) {
                                pos += 1;
                            }
                            let frac = &b[start..pos];
                            if frac.is_empty() {
                                return None;
                            }
                            nanos = frac
                                .iter()
                                .chain(core::iter::repeat(&b'0'))
                                .take(9)
                                .fold(0, |acc, d| acc * 10 + u32::from(d - b'0'));
                        }
                    }
                }
            }
        }
    }

    if !(1..=12).contains(&month)
        || day < 1
        || day > days_in_month(year, month)
        || hour > 23
        || minute > 59
        || second > 59
    {
        return None;
    }

    let mut offset_secs = 0i64;
    if has_time && pos < b.len() {
        if eat(&mut pos, b"Zz") {
        } else if b[pos] == b'+' || b[pos] == b'-' {
            let negative = b[pos] == b'-';
            pos += 1;
            let oh = num(&mut pos, 2)?;
            eat(&mut pos, b":");
            let om = num(&mut pos, 2)?;
            if oh > 23 || om > 59 {
                return None;
            }
            let off = i64::from(oh * 3600 + om * 60);
            offset_secs = if negative { -off } else { off };
        }
    }
    if pos != b.len() {
        return None;
    }

    let days = days_from_civil(year, month, day);
    let secs = days * 86_400 + i64::from(hour * 3600 + minute * 60 + second) - offset_secs;
    Some((secs, nanos))
}

fn is_leap(year: i64) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

fn days_in_month(year: i64, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap(year) => 29,
        _ => 28,
    }
}

/// Days since 1970-01-01 of a proleptic Gregorian date.
fn days_from_civil(year: i64, month: u32, day: u32) -> i64 {
    let y = if month <= 2 { year - 1 } else { year };
    let era = y.div_euclid(400);
    let yoe = y - era * 400;
    let m = i64::from(month);
    let doy = (153 * (if m > 2 { m - 3 } else { m + 9 }) + 2) / 5 + i64::from(day) - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}
