//! Lexical-space checks for the XSD datatypes the syntactic validity metric
//! inspects. Other datatypes are not checked.

use std::sync::OnceLock;

use regex::Regex;

use crate::rdf::vocab::{
    XSD_ANY_URI, XSD_BOOLEAN, XSD_DATE, XSD_DATE_TIME, XSD_DECIMAL, XSD_DOUBLE, XSD_G_YEAR, XSD_INTEGER,
};

pub const CHECKED_DATATYPES: [&str; 8] = [
    XSD_INTEGER,
    XSD_DECIMAL,
    XSD_DOUBLE,
    XSD_BOOLEAN,
    XSD_DATE,
    XSD_DATE_TIME,
    XSD_G_YEAR,
    XSD_ANY_URI,
];

fn re(cell: &'static OnceLock<Regex>, pattern: &str) -> &'static Regex {
    cell.get_or_init(|| Regex::new(pattern).expect("static pattern"))
}

const TZ: &str = r"(Z|[+-](\d{2}):(\d{2}))?";

fn timezone_ok(caps: &regex::Captures<'_>, hh: usize, mm: usize) -> bool {
    match (caps.get(hh), caps.get(mm)) {
        (Some(h), Some(m)) => {
            let h: u32 = h.as_str().parse().unwrap_or(99);
            let m: u32 = m.as_str().parse().unwrap_or(99);
            m < 60 && (h < 14 || (h == 14 && m == 0))
        }
        _ => true,
    }
}

fn days_in_month(year: i64, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if (year % 4 == 0 && year % 100 != 0) || year % 400 == 0 => 29,
        2 => 28,
        _ => 0,
    }
}

/// Year with at least four digits; more than four may not start with zero.
fn year_ok(sign: &str, digits: &str) -> Option<i64> {
    if digits.len() > 4 && digits.starts_with('0') {
        return None;
    }
    let y: i64 = digits.parse().ok()?;
    Some(if sign == "-" { -y } else { y })
}

fn date_parts_ok(sign: &str, year: &str, month: &str, day: &str) -> bool {
    let Some(y) = year_ok(sign, year) else { return false };
    let m: u32 = month.parse().unwrap_or(0);
    let d: u32 = day.parse().unwrap_or(0);
    (1..=12).contains(&m) && d >= 1 && d <= days_in_month(y, m)
}

pub fn valid_integer(s: &str) -> bool {
    static R: OnceLock<Regex> = OnceLock::new();
    re(&R, r"^[+-]?\d+$").is_match(s)
}

pub fn valid_decimal(s: &str) -> bool {
    static R: OnceLock<Regex> = OnceLock::new();
    re(&R, r"^[+-]?(\d+(\.\d*)?|\.\d+)$").is_match(s)
}

pub fn valid_double(s: &str) -> bool {
    static R: OnceLock<Regex> = OnceLock::new();
    re(&R, r"^([+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?|[+-]?INF|NaN)$").is_match(s)
}

pub fn valid_boolean(s: &str) -> bool {
    matches!(s, "true" | "false" | "1" | "0")
}

pub fn valid_date(s: &str) -> bool {
    static R: OnceLock<Regex> = OnceLock::new();
    let r = re(&R, &format!(r"^(-?)(\d{{4,}})-(\d{{2}})-(\d{{2}}){TZ}$"));
    let Some(c) = r.captures(s) else { return false };
    date_parts_ok(&c[1], &c[2], &c[3], &c[4]) && timezone_ok(&c, 6, 7)
}

pub fn valid_date_time(s: &str) -> bool {
    static R: OnceLock<Regex> = OnceLock::new();
    let r = re(
        &R,
        &format!(r"^(-?)(\d{{4,}})-(\d{{2}})-(\d{{2}})T(\d{{2}}):(\d{{2}}):(\d{{2}})(\.\d+)?{TZ}$"),
    );
    let Some(c) = r.captures(s) else { return false };
    if !date_parts_ok(&c[1], &c[2], &c[3], &c[4]) || !timezone_ok(&c, 10, 11) {
        return false;
    }
    let h: u32 = c[5].parse().unwrap_or(99);
    let m: u32 = c[6].parse().unwrap_or(99);
    let sec: u32 = c[7].parse().unwrap_or(99);
    let frac_zero = c.get(8).is_none_or(|f| f.as_str()[1..].bytes().all(|b| b == b'0'));
    (h < 24 && m < 60 && sec < 60) || (h == 24 && m == 0 && sec == 0 && frac_zero)
}

pub fn valid_g_year(s: &str) -> bool {
    static R: OnceLock<Regex> = OnceLock::new();
    let r = re(&R, &format!(r"^(-?)(\d{{4,}}){TZ}$"));
    let Some(c) = r.captures(s) else { return false };
    year_ok(&c[1], &c[2]).is_some() && timezone_ok(&c, 4, 5)
}

/// Rejects whitespace, control characters, characters that are never legal
/// in IRIs, and malformed percent escapes.
pub fn valid_any_uri(s: &str) -> bool {
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'%' => {
                if !(bytes.get(i + 1).is_some_and(u8::is_ascii_hexdigit)
                    && bytes.get(i + 2).is_some_and(u8::is_ascii_hexdigit))
                {
                    return false;
                }
                i += 3;
                continue;
            }
            b if b <= 0x20 || b == 0x7f => return false,
            b'<' | b'>' | b'"' | b'{' | b'}' | b'|' | b'\\' | b'^' | b'`' => return false,
            _ => {}
        }
        i += 1;
    }
    true
}

/// `None` when the datatype is not checked.
pub fn check(datatype: &str, lexical: &str) -> Option<bool> {
    Some(match datatype {
        XSD_INTEGER => valid_integer(lexical),
        XSD_DECIMAL => valid_decimal(lexical),
        XSD_DOUBLE => valid_double(lexical),
        XSD_BOOLEAN => valid_boolean(lexical),
        XSD_DATE => valid_date(lexical),
        XSD_DATE_TIME => valid_date_time(lexical),
        XSD_G_YEAR => valid_g_year(lexical),
        XSD_ANY_URI => valid_any_uri(lexical),
        _ => return None,
    })
}
