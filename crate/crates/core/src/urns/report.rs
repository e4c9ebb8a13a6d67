//! Bundled predictions for one urn model.

use std::fmt;

use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::{
    birthday_asymptotic, birthday_exact, coupon_bounds, coupon_uniform_exact, coverage_first_order, expected_coverage,
    expected_distinct, expected_occupied_weight, BirthdayOptions, UrnError, UrnModel, UrnValue, FIRST_ORDER_THRESHOLD,
};
use crate::scalar::rational_to_f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Exact,
    Asymptotic,
    Bound,
    Estimate,
    Simulation,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Asymptotic => "asymptotic",
            Method::Bound => "bound",
            Method::Estimate => "estimate",
            Method::Simulation => "simulation",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub statistic: String,
    pub method: Method,
    pub n: Option<usize>,
    pub k: Option<u64>,
    pub value: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// Exact rational value when short enough to print.
    pub exact: Option<String>,
    pub note: String,
}

impl ReportRow {
    pub fn new(statistic: &str, method: Method, n: Option<usize>, k: Option<u64>) -> Self {
        ReportRow {
            statistic: statistic.to_string(),
            method,
            n,
            k,
            value: None,
            lower: None,
            upper: None,
            exact: None,
            note: String::new(),
        }
    }

    pub fn value(mut self, v: f64) -> Self {
        self.value = Some(v);
        self
    }

    pub fn bounds(mut self, lower: f64, upper: f64) -> Self {
        self.lower = Some(lower);
        self.upper = Some(upper);
        self
    }

    pub fn rational(mut self, r: &BigRational) -> Self {
        self.value = Some(rational_to_f64(r));
        let text = r.to_string();
        if text.len() <= MAX_EXACT_TEXT {
            self.exact = Some(text);
        }
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    fn urn_value(self, v: &UrnValue) -> Self {
        match &v.exact {
            Some(r) => self.rational(r),
            None => self.value(v.value).note("float powers"),
        }
    }

    /// `statistic,method,n,k,value,lower,upper` fields.
    pub fn csv_record(&self) -> [String; 7] {
        [
            self.statistic.clone(),
            self.method.to_string(),
            opt(self.n),
            opt(self.k),
            num(self.value),
            num(self.lower),
            num(self.upper),
        ]
    }
}

const MAX_EXACT_TEXT: usize = 60;

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn num(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.12e}")).unwrap_or_default()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AnalyticsReport {
    pub rows: Vec<ReportRow>,
}

impl AnalyticsReport {
    pub const CSV_HEADER: [&'static str; 7] = ["statistic", "method", "n", "k", "value", "lower", "upper"];

    pub fn push(&mut self, row: ReportRow) {
        self.rows.push(row);
    }

    pub fn find(&self, statistic: &str, method: Method) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.statistic == statistic && r.method == method)
    }
}

fn show(v: f64) -> String {
    if v != 0.0 && !(1e-4..1e12).contains(&v.abs()) {
        format!("{v:.10e}")
    } else {
        format!("{v:.10}")
    }
}

impl fmt::Display for AnalyticsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<[String; 6]> = self
            .rows
            .iter()
            .map(|r| {
                let value = match (&r.exact, r.value) {
                    (Some(e), Some(v)) if e.contains('/') => format!("{} ({e})", show(v)),
                    (_, Some(v)) => show(v),
                    _ => String::new(),
                };
                let interval = match (r.lower, r.upper) {
                    (Some(l), Some(u)) => format!("[{}, {}]", show(l), show(u)),
                    _ => String::new(),
                };
                let nk = match (r.n, r.k) {
                    (Some(n), Some(k)) => format!("n={n} k={k}"),
                    (Some(n), None) => format!("n={n}"),
                    (None, Some(k)) => format!("k={k}"),
                    (None, None) => String::new(),
                };
                [
                    r.statistic.clone(),
                    r.method.to_string(),
                    nk,
                    value,
                    interval,
                    r.note.clone(),
                ]
            })
            .collect();
        let mut widths = [0usize; 6];
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        for row in &cells {
            let mut line = String::new();
            for (i, (c, w)) in row.iter().zip(widths).enumerate() {
                if i > 0 {
                    line.push_str("  ");
                }
                line.push_str(c);
                line.extend(std::iter::repeat_n(' ', w - c.chars().count()));
            }
            writeln!(f, "{}", line.trim_end())?;
        }
        Ok(())
    }
}

/// Largest uniform model for which `m · H_m` is reported exactly.
const UNIFORM_EXACT_MAX: u64 = 100_000;

/// All predictions for `u`; `n` only labels the rows.
pub fn analyze(u: &UrnModel, n: Option<usize>, k: u64) -> Result<AnalyticsReport, UrnError> {
    let mut rep = AnalyticsReport::default();
    let m = u.urn_count();
    let mut urns = ReportRow::new("urns", Method::Exact, n, None).value(m.to_f64().unwrap_or(f64::INFINITY));
    urns.exact = Some(m.to_string());
    rep.push(urns.note(format!("{} classes", u.classes().len())));
    rep.push(ReportRow::new("alpha2", Method::Exact, n, None).rational(&u.alpha2()));

    let b = birthday_exact(u, BirthdayOptions::default())?;
    rep.push(
        ReportRow::new("first_collision", Method::Exact, n, None)
            .value(b.value)
            .note(format!("quadrature, error {:.1e}", b.error_estimate)),
    );
    rep.push(ReportRow::new("first_collision", Method::Asymptotic, n, None).value(birthday_asymptotic(u)));

    let c = coupon_bounds(u);
    rep.push(ReportRow::new("full_collection", Method::Bound, n, None).bounds(c.lower, c.upper));
    rep.push(
        ReportRow::new("full_collection", Method::Estimate, n, None)
            .value(c.xi)
            .note("xi"),
    );
    if let Some((lo, hi)) = c.berenbrink {
        rep.push(
            ReportRow::new("full_collection_xi_window", Method::Bound, n, None)
                .bounds(lo, hi)
                .note("log log factor, base 2"),
        );
    }
    if u.classes().len() == 1 {
        if let Some(mm) = m.to_u64().filter(|&mm| mm <= UNIFORM_EXACT_MAX) {
            rep.push(ReportRow::new("full_collection", Method::Exact, n, None).rational(&coupon_uniform_exact(mm)));
        }
    }

    let d = expected_distinct(u, k);
    rep.push(ReportRow::new("distinct", Method::Exact, n, Some(k)).urn_value(&d.expected));
    rep.push(
        ReportRow::new("distinct", Method::Asymptotic, n, Some(k))
            .value(d.exponential)
            .note(format!("error {:+.3e}", d.exponential - d.expected.value)),
    );
    rep.push(ReportRow::new("coverage", Method::Exact, n, Some(k)).urn_value(&expected_coverage(u, k)));
    let fo = coverage_first_order(u, k, FIRST_ORDER_THRESHOLD);
    rep.push(
        ReportRow::new("coverage", Method::Asymptotic, n, Some(k))
            .rational(&fo.value)
            .note(if fo.valid {
                format!("k*p_max={:.3e}", fo.k_times_pmax)
            } else {
                format!("invalid: k*p_max={:.3e}", fo.k_times_pmax)
            }),
    );
    rep.push(ReportRow::new("occupied_weight", Method::Exact, n, Some(k)).urn_value(&expected_occupied_weight(u, k)));
    Ok(rep)
}
