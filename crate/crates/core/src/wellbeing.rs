//! Well-being component scores and the composite index.
//!
//! Per-component opinion distributions over the codes -1/0/+1 are mapped to
//! scores in [0, 100] (positive share among polarized documents), eight
//! component scores average into the composite, and daily composites
//! integrate into per-period gross balances.

use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate};

use crate::error::{Error, Result};

/// The eight well-being components, in presentation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ComponentCode {
    Emo,
    Sat,
    Vit,
    Res,
    Fun,
    Tru,
    Rel,
    Wor,
}

impl ComponentCode {
    pub const ALL: [ComponentCode; 8] = [
        ComponentCode::Emo,
        ComponentCode::Sat,
        ComponentCode::Vit,
        ComponentCode::Res,
        ComponentCode::Fun,
        ComponentCode::Tru,
        ComponentCode::Rel,
        ComponentCode::Wor,
    ];

    /// Alphabetical order used by the panel CSV columns.
    pub const CSV_ORDER: [ComponentCode; 8] = [
        ComponentCode::Emo,
        ComponentCode::Fun,
        ComponentCode::Rel,
        ComponentCode::Res,
        ComponentCode::Sat,
        ComponentCode::Tru,
        ComponentCode::Vit,
        ComponentCode::Wor,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            ComponentCode::Emo => "emo",
            ComponentCode::Sat => "sat",
            ComponentCode::Vit => "vit",
            ComponentCode::Res => "res",
            ComponentCode::Fun => "fun",
            ComponentCode::Tru => "tru",
            ComponentCode::Rel => "rel",
            ComponentCode::Wor => "wor",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        ComponentCode::ALL
            .iter()
            .find(|c| c.tag() == s)
            .copied()
            .ok_or_else(|| Error::WellBeing(format!("unknown component code '{s}'")))
    }
}

/// Probabilities of the codes -1, 0, +1 for one component.
#[derive(Debug, Clone, Copy)]
pub struct PolarityDistribution {
    pub p_neg: f64,
    pub p_neu: f64,
    pub p_pos: f64,
}

impl PolarityDistribution {
    pub fn new(p_neg: f64, p_neu: f64, p_pos: f64) -> Result<Self> {
        let d = PolarityDistribution { p_neg, p_neu, p_pos };
        if [p_neg, p_neu, p_pos].iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::WellBeing("polarity probabilities outside [0,1]".into()));
        }
        let sum = p_neg + p_neu + p_pos;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::WellBeing(format!(
                "polarity probabilities sum to {sum}, not 1"
            )));
        }
        Ok(d)
    }
}

/// Score in [0, 100]: positive share among polarized documents, times 100.
/// When no polarized mass exists the neutral midpoint 50 is returned and the
/// flag is set.
pub fn component_score(d: &PolarityDistribution) -> (f64, bool) {
    let polarized = d.p_pos + d.p_neg;
    if polarized == 0.0 {
        (50.0, true)
    } else {
        (100.0 * d.p_pos / polarized, false)
    }
}

/// Arithmetic mean of the eight component scores.
pub fn compose_swbi(scores: &[f64; 8]) -> Result<f64> {
    for (code, &s) in ComponentCode::ALL.iter().zip(scores.iter()) {
        if !(0.0..=100.0).contains(&s) {
            return Err(Error::WellBeing(format!(
                "component {} score {s} outside [0,100]",
                code.tag()
            )));
        }
    }
    Ok(scores.iter().sum::<f64>() / 8.0)
}

/// Calendar period granularity for integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Period {
    Month,
    Year,
}

/// A period's integrated (gross-balance) value.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratedValue {
    /// "YYYY-MM" for months, "YYYY" for years.
    pub period: String,
    pub value: f64,
    pub n_days: usize,
}

/// Per calendar period, the sum of available daily values plus the count of
/// contributing days. Missing days contribute nothing; empty periods are
/// omitted. With `average`, the per-day mean is reported instead of the sum.
pub fn integrate_period(
    daily: &[(NaiveDate, f64)],
    period: Period,
    average: bool,
) -> Result<Vec<IntegratedValue>> {
    if daily.is_empty() {
        return Err(Error::WellBeing("empty daily series".into()));
    }
    let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for (date, value) in daily {
        let key = match period {
            Period::Month => format!("{:04}-{:02}", date.year(), date.month()),
            Period::Year => format!("{:04}", date.year()),
        };
        let entry = acc.entry(key).or_insert((0.0, 0));
        entry.0 += value;
        entry.1 += 1;
    }
    Ok(acc
        .into_iter()
        .map(|(period, (sum, n_days))| IntegratedValue {
            period,
            value: if average { sum / n_days as f64 } else { sum },
            n_days,
        })
        .collect())
}

/// One panel row: a (period, unit) cell with its component scores.
#[derive(Debug, Clone)]
pub struct PanelRow {
    pub period: String,
    pub unit: String,
    /// Scores in CSV column order; `None` for missing components.
    pub components: [Option<f64>; 8],
    /// `None` when any component is missing.
    pub swbi: Option<f64>,
    pub n_docs: usize,
    /// Components absent from the input, when the row is incomplete.
    pub missing: Vec<ComponentCode>,
}

/// Panel of per-(period, unit) component scores and composites.
#[derive(Debug, Clone, Default)]
pub struct WellBeingPanel {
    pub rows: Vec<PanelRow>,
}

/// One per-component estimate feeding the panel.
#[derive(Debug, Clone)]
pub struct ComponentEstimate {
    pub period: String,
    pub unit: String,
    pub component: ComponentCode,
    pub distribution: PolarityDistribution,
    pub n_docs: usize,
}

/// Assemble the panel. Rows with all eight components get scores and a
/// composite; incomplete rows carry nulls and the list of missing components
/// so joins against external series stay aligned.
pub fn build_panel(estimates: &[ComponentEstimate]) -> Result<WellBeingPanel> {
    type Cell<'a> = BTreeMap<ComponentCode, (&'a PolarityDistribution, usize)>;
    let mut cells: BTreeMap<(String, String), Cell> = BTreeMap::new();
    for e in estimates {
        let cell = cells.entry((e.period.clone(), e.unit.clone())).or_default();
        if cell.insert(e.component, (&e.distribution, e.n_docs)).is_some() {
            return Err(Error::WellBeing(format!(
                "duplicate estimate for ({}, {}, {})",
                e.period,
                e.unit,
                e.component.tag()
            )));
        }
    }
    let mut rows = Vec::with_capacity(cells.len());
    for ((period, unit), comps) in cells {
        let mut components: [Option<f64>; 8] = [None; 8];
        let mut n_docs = 0usize;
        let mut missing = Vec::new();
        for (i, code) in ComponentCode::CSV_ORDER.iter().enumerate() {
            match comps.get(code) {
                Some((dist, n)) => {
                    let (score, _flagged) = component_score(dist);
                    components[i] = Some(score);
                    n_docs += n;
                }
                None => missing.push(*code),
            }
        }
        let swbi = if missing.is_empty() {
            let scores: [f64; 8] = std::array::from_fn(|i| components[i].unwrap());
            Some(compose_swbi(&scores)?)
        } else {
            None
        };
        rows.push(PanelRow {
            period,
            unit,
            components,
            swbi,
            n_docs,
            missing,
        });
    }
    Ok(WellBeingPanel { rows })
}

impl WellBeingPanel {
    /// CSV with header `period,unit,emo,fun,rel,res,sat,tru,vit,wor,swbi,n_docs`;
    /// nulls as empty fields.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("period,unit,emo,fun,rel,res,sat,tru,vit,wor,swbi,n_docs\n");
        for row in &self.rows {
            out.push_str(&row.period);
            out.push(',');
            out.push_str(&row.unit);
            for c in &row.components {
                out.push(',');
                if let Some(v) = c {
                    out.push_str(&format_score(*v));
                }
            }
            out.push(',');
            if let Some(v) = row.swbi {
                out.push_str(&format_score(v));
            }
            out.push(',');
            out.push_str(&row.n_docs.to_string());
            out.push('\n');
        }
        out
    }

    /// Complete rows as a dated composite series, for integration and
    /// lead-lag joins. Periods must be ISO dates.
    pub fn daily_composites(&self, unit: &str) -> Result<Vec<(NaiveDate, f64)>> {
        let mut out = Vec::new();
        for row in self.rows.iter().filter(|r| r.unit == unit) {
            if let Some(swbi) = row.swbi {
                let date = NaiveDate::parse_from_str(&row.period, "%Y-%m-%d").map_err(|_| {
                    Error::WellBeing(format!("period '{}' is not an ISO date", row.period))
                })?;
                out.push((date, swbi));
            }
        }
        Ok(out)
    }
}

fn format_score(v: f64) -> String {
    // fixed precision keeps panel files byte-stable across runs
    format!("{v:.6}")
}

/// Parse a panel CSV produced by [`WellBeingPanel::to_csv`].
pub fn panel_from_csv(text: &str) -> Result<WellBeingPanel> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::WellBeing("empty panel file".into()))?;
    if header != "period,unit,emo,fun,rel,res,sat,tru,vit,wor,swbi,n_docs" {
        return Err(Error::WellBeing(format!("unexpected panel header '{header}'")));
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            return Err(Error::WellBeing(format!(
                "panel line {}: expected 12 fields, got {}",
                lineno + 2,
                fields.len()
            )));
        }
        let parse_opt = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse()
                    .map(Some)
                    .map_err(|_| Error::WellBeing(format!("bad number '{s}' on line {}", lineno + 2)))
            }
        };
        let mut components: [Option<f64>; 8] = [None; 8];
        let mut missing = Vec::new();
        for i in 0..8 {
            components[i] = parse_opt(fields[2 + i])?;
            if components[i].is_none() {
                missing.push(ComponentCode::CSV_ORDER[i]);
            }
        }
        rows.push(PanelRow {
            period: fields[0].to_string(),
            unit: fields[1].to_string(),
            components,
            swbi: parse_opt(fields[10])?,
            n_docs: fields[11]
                .parse()
                .map_err(|_| Error::WellBeing(format!("bad n_docs on line {}", lineno + 2)))?,
            missing,
        });
    }
    Ok(WellBeingPanel { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(neg: f64, neu: f64, pos: f64) -> PolarityDistribution {
        PolarityDistribution::new(neg, neu, pos).unwrap()
    }

    #[test]
    fn score_all_positive() {
        assert_eq!(component_score(&dist(0.0, 0.0, 1.0)), (100.0, false));
    }

    #[test]
    fn score_symmetric() {
        assert_eq!(component_score(&dist(0.5, 0.0, 0.5)), (50.0, false));
    }

    #[test]
    fn score_excludes_neutral() {
        // 100 * 0.3 / (0.3 + 0.2) = 60
        let (s, flagged) = component_score(&dist(0.2, 0.5, 0.3));
        assert!((s - 60.0).abs() < 1e-12);
        assert!(!flagged);
    }

    #[test]
    fn score_all_neutral_is_midpoint_flagged() {
        assert_eq!(component_score(&dist(0.0, 1.0, 0.0)), (50.0, true));
    }

    #[test]
    fn score_monotone_in_positive_share() {
        let mut prev = -1.0;
        for i in 0..=7 {
            let p_pos = i as f64 * 0.1;
            let (s, _) = component_score(&dist(0.2, 0.8 - p_pos, p_pos));
            assert!(s >= prev);
            assert!((0.0..=100.0).contains(&s));
            prev = s;
        }
    }

    #[test]
    fn swbi_published_yearly_rows() {
        // (emo, fun, rel, res, sat, tru, vit, wor) -> SWBI, per published year
        let rows: [([f64; 8], f64); 4] = [
            ([60.55, 67.76, 34.10, 55.10, 43.88, 59.22, 53.91, 16.44], 48.87),
            ([57.32, 73.31, 37.35, 57.19, 55.03, 64.04, 58.04, 15.50], 52.22),
            ([48.24, 68.26, 39.73, 56.11, 52.37, 62.59, 55.15, 15.10], 49.69),
            ([49.50, 54.57, 55.35, 54.30, 36.72, 40.40, 57.81, 39.33], 48.50),
        ];
        for (components, expected) in rows {
            let got = compose_swbi(&components).unwrap();
            assert!(
                (got - expected).abs() <= 0.005,
                "expected {expected}, got {got}"
            );
        }
    }

    #[test]
    fn swbi_mean_of_constants_and_permutation_invariance() {
        let c = 37.5;
        assert_eq!(compose_swbi(&[c; 8]).unwrap(), c);
        let a = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0];
        let mut b = a;
        b.reverse();
        assert_eq!(compose_swbi(&a).unwrap(), compose_swbi(&b).unwrap());
    }

    #[test]
    fn swbi_rejects_out_of_range() {
        let mut s = [50.0; 8];
        s[3] = 101.0;
        assert!(compose_swbi(&s).is_err());
    }

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    #[test]
    fn integrate_full_month() {
        let daily: Vec<(NaiveDate, f64)> = (1..=30)
            .map(|day| (NaiveDate::from_ymd_opt(2014, 4, day).unwrap(), 50.0))
            .collect();
        let out = integrate_period(&daily, Period::Month, false).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].period, "2014-04");
        assert!((out[0].value - 1500.0).abs() < 1e-9);
        assert_eq!(out[0].n_days, 30);
    }

    #[test]
    fn integrate_single_day_and_sparse_month() {
        let out = integrate_period(&[(d("2014-04-07"), 42.5)], Period::Month, false).unwrap();
        assert_eq!(out[0].value, 42.5);
        assert_eq!(out[0].n_days, 1);

        let daily = vec![(d("2014-04-01"), 40.0), (d("2014-04-10"), 60.0), (d("2014-04-20"), 50.0)];
        let out = integrate_period(&daily, Period::Month, false).unwrap();
        assert_eq!(out[0].value, 150.0);
        assert_eq!(out[0].n_days, 3);
        let avg = integrate_period(&daily, Period::Month, true).unwrap();
        assert_eq!(avg[0].value, 50.0);
    }

    #[test]
    fn yearly_integral_equals_sum_of_monthly_integrals() {
        let mut daily = Vec::new();
        for m in 1..=12u32 {
            for day in [3, 14, 25] {
                daily.push((
                    NaiveDate::from_ymd_opt(2013, m, day).unwrap(),
                    (m * day) as f64 * 0.37,
                ));
            }
        }
        let yearly = integrate_period(&daily, Period::Year, false).unwrap();
        let monthly = integrate_period(&daily, Period::Month, false).unwrap();
        let monthly_sum: f64 = monthly.iter().map(|m| m.value).sum();
        assert_eq!(yearly.len(), 1);
        assert!((yearly[0].value - monthly_sum).abs() < 1e-9);
    }

    fn estimate(period: &str, unit: &str, code: ComponentCode, pos: f64) -> ComponentEstimate {
        ComponentEstimate {
            period: period.into(),
            unit: unit.into(),
            component: code,
            distribution: dist(1.0 - pos, 0.0, pos),
            n_docs: 10,
        }
    }

    #[test]
    fn panel_all_positive_row() {
        let estimates: Vec<ComponentEstimate> = ComponentCode::ALL
            .iter()
            .map(|&c| estimate("2014-01-01", "MI", c, 1.0))
            .collect();
        let panel = build_panel(&estimates).unwrap();
        assert_eq!(panel.rows.len(), 1);
        let row = &panel.rows[0];
        assert!(row.components.iter().all(|c| c == &Some(100.0)));
        assert_eq!(row.swbi, Some(100.0));
        assert_eq!(row.n_docs, 80);
    }

    #[test]
    fn panel_incomplete_row_flagged() {
        let estimates: Vec<ComponentEstimate> = ComponentCode::ALL
            .iter()
            .filter(|&&c| c != ComponentCode::Wor)
            .map(|&c| estimate("2014-01-01", "MI", c, 0.5))
            .collect();
        let panel = build_panel(&estimates).unwrap();
        let row = &panel.rows[0];
        assert_eq!(row.swbi, None);
        assert_eq!(row.missing, vec![ComponentCode::Wor]);
    }

    #[test]
    fn panel_two_units_two_rows() {
        let mut estimates = Vec::new();
        for unit in ["MI", "TO"] {
            for &c in &ComponentCode::ALL {
                estimates.push(estimate("2014-01-01", unit, c, 0.6));
            }
        }
        let panel = build_panel(&estimates).unwrap();
        assert_eq!(panel.rows.len(), 2);
    }

    #[test]
    fn panel_mean_identity() {
        let mut estimates = Vec::new();
        for (i, &c) in ComponentCode::ALL.iter().enumerate() {
            estimates.push(estimate("2014-01-01", "MI", c, 0.1 + 0.1 * i as f64));
        }
        let panel = build_panel(&estimates).unwrap();
        let row = &panel.rows[0];
        let mean = row.components.iter().map(|c| c.unwrap()).sum::<f64>() / 8.0;
        assert!((row.swbi.unwrap() - mean).abs() < 1e-9);
    }

    #[test]
    fn panel_csv_roundtrip() {
        let mut estimates: Vec<ComponentEstimate> = ComponentCode::ALL
            .iter()
            .map(|&c| estimate("2014-01-01", "MI", c, 0.45))
            .collect();
        estimates.extend(
            ComponentCode::ALL
                .iter()
                .filter(|&&c| c != ComponentCode::Rel)
                .map(|&c| estimate("2014-01-02", "MI", c, 0.7)),
        );
        let panel = build_panel(&estimates).unwrap();
        let csv = panel.to_csv();
        let parsed = panel_from_csv(&csv).unwrap();
        assert_eq!(parsed.rows.len(), panel.rows.len());
        assert_eq!(parsed.rows[1].swbi, None);
        assert_eq!(parsed.rows[1].missing, vec![ComponentCode::Rel]);
        assert!((parsed.rows[0].swbi.unwrap() - panel.rows[0].swbi.unwrap()).abs() < 1e-6);
    }
}
