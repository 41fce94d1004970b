use chrono::{Datelike, NaiveDate};

use super::CodecError;

pub const PIVOT_MIN_YEAR: i32 = 1970;
pub const PIVOT_MAX_YEAR: i32 = 2069;

/// `MM/DD/YY`, zero padded.
pub fn format_date(date: NaiveDate) -> Result<String, CodecError> {
    if !(PIVOT_MIN_YEAR..=PIVOT_MAX_YEAR).contains(&date.year()) {
        return Err(CodecError::DateOutOfPivotRange(date));
    }
    Ok(format!(
        "{:02}/{:02}/{:02}",
        date.month(),
        date.day(),
        date.year() % 100
    ))
}

/// Inverse of [`format_date`]. `00`-`69` map to 20YY, `70`-`99` to 19YY.
pub fn parse_date(text: &str) -> Result<NaiveDate, CodecError> {
    let malformed = || CodecError::MalformedDate(text.to_string());
    let b = text.as_bytes();
    if b.len() != 8 || b[2] != b'/' || b[5] != b'/' {
        return Err(malformed());
    }
    let num = |i: usize| -> Result<u32, CodecError> {
        let (hi, lo) = (b[i], b[i + 1]);
        if hi.is_ascii_digit() && lo.is_ascii_digit() {
            Ok(u32::from(hi - b'0') * 10 + u32::from(lo - b'0'))
        } else {
            Err(malformed())
        }
    };
    let (month, day, yy) = (num(0)?, num(3)?, num(6)? as i32);
    let year = if yy < 70 { 2000 + yy } else { 1900 + yy };
    NaiveDate::from_ymd_opt(year, month, day).ok_or_else(malformed)
}
