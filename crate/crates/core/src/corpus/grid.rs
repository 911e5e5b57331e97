//! Regular time grids and nearest-point snapping.

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, NaiveTime};

use super::frequency::{is_month_end, month_number, FrequencySpec, Step};

/// A regular grid `origin + i·step`. The origin is always a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    pub freq: FrequencySpec,
    pub origin: NaiveDateTime,
}

const MONDAY_EPOCH: NaiveDate = match NaiveDate::from_ymd_opt(1970, 1, 5) {
    Some(d) => d,
    None => panic!("valid date"),
};

fn midnight(date: NaiveDate) -> NaiveDateTime {
    date.and_time(NaiveTime::MIN)
}

fn business_number(date: NaiveDate) -> i64 {
    let days = (date - MONDAY_EPOCH).num_days();
    days.div_euclid(7) * 5 + days.rem_euclid(7).min(4)
}

fn business_date(n: i64) -> NaiveDate {
    MONDAY_EPOCH + Duration::days(n.div_euclid(5) * 7 + n.rem_euclid(5))
}

fn is_business(date: NaiveDate) -> bool {
    (date - MONDAY_EPOCH).num_days().rem_euclid(7) < 5
}

fn month_point(n: i32, month_end: bool) -> NaiveDateTime {
    let year = n.div_euclid(12);
    let month = n.rem_euclid(12) as u32 + 1;
    let first = NaiveDate::from_ymd_opt(year, month, 1).expect("valid month");
    if month_end {
        let next = if month == 12 {
            NaiveDate::from_ymd_opt(year + 1, 1, 1)
        } else {
            NaiveDate::from_ymd_opt(year, month + 1, 1)
        }
        .expect("valid month");
        midnight(next.pred_opt().expect("valid date"))
    } else {
        midnight(first)
    }
}

/// Picks the candidate nearest to `t`; exact ties go to the earlier one.
fn nearest<I: IntoIterator<Item = (i64, NaiveDateTime)>>(t: NaiveDateTime, candidates: I) -> i64 {
    let mut best: Option<(Duration, NaiveDateTime, i64)> = None;
    for (idx, point) in candidates {
        let dist = (t - point).abs();
        let better = match best {
            None => true,
            Some((bd, bp, _)) => dist < bd || (dist == bd && point < bp),
        };
        if better {
            best = Some((dist, point, idx));
        }
    }
    best.expect("non-empty candidate set").2
}

impl Grid {
    /// Builds the grid whose origin is the grid point nearest to `first`.
    pub fn anchored_at(freq: FrequencySpec, first: NaiveDateTime) -> Self {
        let origin = match freq.step {
            Step::Fixed(step) if step.num_seconds() < 7 * 86_400 => {
                let s = step.num_milliseconds();
                let ms = first.and_utc().timestamp_millis();
                let (q, r) = (ms.div_euclid(s), ms.rem_euclid(s));
                let q = if 2 * r > s { q + 1 } else { q };
                chrono::DateTime::from_timestamp_millis(q * s)
                    .expect("timestamp in range")
                    .naive_utc()
            }
            Step::Fixed(_) => {
                let day = midnight(first.date());
                let next = day + Duration::days(1);
                if first - day <= next - first {
                    day
                } else {
                    next
                }
            }
            Step::BusinessDay => {
                let mut before = first.date();
                while !is_business(before) {
                    before = before.pred_opt().expect("valid date");
                }
                let mut after = first.date().succ_opt().expect("valid date");
                while !is_business(after) {
                    after = after.succ_opt().expect("valid date");
                }
                let (b, a) = (midnight(before), midnight(after));
                if first - b <= a - first {
                    b
                } else {
                    a
                }
            }
            Step::Months(_) => {
                let month_end = first.day() > 15;
                let n = month_number(first.date());
                let idx = nearest(
                    first,
                    (n - 1..=n + 1).map(|k| (i64::from(k), month_point(k, month_end))),
                );
                month_point(idx as i32, month_end)
            }
        };
        Self { freq, origin }
    }

    fn month_end(&self) -> bool {
        self.origin.day() > 15 && is_month_end(self.origin.date())
    }

    /// The `i`-th grid point (may be negative).
    pub fn point(&self, i: i64) -> NaiveDateTime {
        match self.freq.step {
            Step::Fixed(step) => self.origin + step * i as i32,
            Step::BusinessDay => {
                midnight(business_date(business_number(self.origin.date()) + i))
            }
            Step::Months(k) => {
                let n = month_number(self.origin.date()) + i as i32 * k as i32;
                month_point(n, self.month_end())
            }
        }
    }

    /// Index of the grid point nearest to `t`, ties snapping to the earlier point.
    pub fn nearest_index(&self, t: NaiveDateTime) -> i64 {
        match self.freq.step {
            Step::Fixed(step) => {
                let s = step.num_milliseconds();
                let delta = (t - self.origin).num_milliseconds();
                let (q, r) = (delta.div_euclid(s), delta.rem_euclid(s));
                if 2 * r > s {
                    q + 1
                } else {
                    q
                }
            }
            Step::BusinessDay => {
                let base = business_number(t.date()) - business_number(self.origin.date());
                nearest(t, (base - 1..=base + 2).map(|i| (i, self.point(i))))
            }
            Step::Months(k) => {
                let k = i64::from(k);
                let months =
                    i64::from(month_number(t.date()) - month_number(self.origin.date()));
                let base = months.div_euclid(k);
                nearest(t, (base - 1..=base + 2).map(|i| (i, self.point(i))))
            }
        }
    }

    pub fn points(&self, len: usize) -> Vec<NaiveDateTime> {
        (0..len as i64).map(|i| self.point(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::frequency::FrequencyCode;

    fn ts(s: &str) -> NaiveDateTime {
        NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M").unwrap()
    }

    #[test]
    fn fifteen_minute_snap() {
        let grid = Grid::anchored_at(FrequencySpec::new(FrequencyCode::Min15), ts("2024-01-01 00:07"));
        assert_eq!(grid.origin, ts("2024-01-01 00:00"));
        let grid = Grid::anchored_at(FrequencySpec::new(FrequencyCode::Min15), ts("2024-01-01 00:08"));
        assert_eq!(grid.origin, ts("2024-01-01 00:15"));
    }

    #[test]
    fn halfway_snaps_earlier() {
        let freq = FrequencySpec::new(FrequencyCode::Hourly);
        let grid = Grid::anchored_at(freq, ts("2024-01-01 00:30"));
        assert_eq!(grid.origin, ts("2024-01-01 00:00"));
        assert_eq!(grid.nearest_index(ts("2024-01-01 05:30")), 5);
    }

    #[test]
    fn business_grid_skips_weekends() {
        let freq = FrequencySpec::new(FrequencyCode::BusinessDaily);
        // Friday
        let grid = Grid::anchored_at(freq, ts("2024-01-05 00:00"));
        assert_eq!(grid.point(1), ts("2024-01-08 00:00"));
        assert_eq!(grid.point(5), ts("2024-01-12 00:00"));
        // Saturday noon is nearer to Friday than to Monday
        assert_eq!(grid.nearest_index(ts("2024-01-06 12:00")), 0);
        assert_eq!(grid.nearest_index(ts("2024-01-07 12:00")), 1);
    }

    #[test]
    fn month_end_grid() {
        let freq = FrequencySpec::new(FrequencyCode::Monthly);
        let grid = Grid::anchored_at(freq, ts("2020-01-31 00:00"));
        assert_eq!(grid.point(1), ts("2020-02-29 00:00"));
        assert_eq!(grid.point(11), ts("2020-12-31 00:00"));
        assert_eq!(grid.nearest_index(ts("2020-03-30 00:00")), 2);

        let q = Grid::anchored_at(FrequencySpec::new(FrequencyCode::Quarterly), ts("2020-01-01 00:00"));
        assert_eq!(q.point(2), ts("2020-07-01 00:00"));
        assert_eq!(q.nearest_index(ts("2020-06-20 00:00")), 2);
    }

    #[test]
    fn weekly_anchored_on_first_day() {
        let grid = Grid::anchored_at(FrequencySpec::new(FrequencyCode::Weekly), ts("2024-01-07 09:00"));
        assert_eq!(grid.origin, ts("2024-01-07 00:00"));
        assert_eq!(grid.point(2), ts("2024-01-21 00:00"));
    }
}
