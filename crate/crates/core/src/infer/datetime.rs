//! Date/time recognition against a fixed format list.

use chrono::{DateTime, NaiveDate, NaiveDateTime};

const DATETIME_FORMATS: &[&str] = &[
    "%Y-%m-%d %H:%M:%S%.f",
    "%Y-%m-%dT%H:%M:%S%.f",
    "%Y-%m-%d %H:%M",
    "%Y-%m-%dT%H:%M",
];

const DATE_FORMATS: &[&str] = &["%Y-%m-%d", "%Y/%m/%d", "%m/%d/%Y"];

/// Earliest and latest accepted epoch seconds (1990-01-01, 2035-12-31).
const EPOCH_MIN: i64 = 631_152_000;
const EPOCH_MAX: i64 = 2_082_758_399;

/// Parses text under the format list. Epoch seconds are only accepted when
/// `epoch_seconds` is set.
pub fn parse_datetime(s: &str, epoch_seconds: bool) -> Option<NaiveDateTime> {
    let t = s.trim();
    if t.is_empty() {
        return None;
    }
    for f in DATETIME_FORMATS {
        if let Ok(dt) = NaiveDateTime::parse_from_str(t, f) {
            return Some(dt);
        }
    }
    for f in DATE_FORMATS {
        if let Ok(d) = NaiveDate::parse_from_str(t, f) {
            return d.and_hms_opt(0, 0, 0);
        }
    }
    if epoch_seconds {
        return parse_epoch(t);
    }
    None
}

pub(crate) fn parse_epoch(t: &str) -> Option<NaiveDateTime> {
    if t.len() != 10 || !t.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let secs: i64 = t.parse().ok()?;
    if !(EPOCH_MIN..=EPOCH_MAX).contains(&secs) {
        return None;
    }
    DateTime::from_timestamp(secs, 0).map(|d| d.naive_utc())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{Datelike, Timelike};

    #[test]
    fn accepts_listed_formats() {
        for s in [
            "2019-01-02",
            "2019-01-02 10:00:00",
            "2019-01-02T10:00:00",
            "2019-01-02T10:00:00.250",
            "2019/01/02",
            "01/02/2019",
        ] {
            let d = parse_datetime(s, false).unwrap_or_else(|| panic!("{s}"));
            assert_eq!((d.year(), d.month(), d.day()), (2019, 1, 2), "{s}");
        }
        let d = parse_datetime("2019-03-05 10:20:30", false).unwrap();
        assert_eq!((d.hour(), d.minute(), d.second()), (10, 20, 30));
    }

    #[test]
    fn rejects_non_dates() {
        for s in ["day 1", "2019-13-01", "hello", "12", "1546300800"] {
            assert!(parse_datetime(s, false).is_none(), "{s}");
        }
    }

    #[test]
    fn epoch_needs_flag_and_range() {
        assert!(parse_datetime("1546300800", true).is_some());
        assert!(parse_datetime("0946684799", true).is_some());
        assert!(parse_datetime("0100000000", true).is_none());
        assert!(parse_datetime("9999999999", true).is_none());
    }
}
