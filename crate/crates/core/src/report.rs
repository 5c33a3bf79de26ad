//! Aggregation of per-text evaluations into group tables, disparity tests
//! and plot data.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gateway::RegardLabel;
use crate::metrics::{GenderLabel, NormCategory, SentimentLabel, TextEvaluation};
use crate::stats::{chi_square_test, two_proportion_test, ContingencyTable};

/// Report knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSpec {
    /// Decimal places for ratios in CSV output. Ratios are truncated, not
    /// rounded.
    pub ratio_decimals: u32,
}

impl Default for ReportSpec {
    fn default() -> Self {
        ReportSpec { ratio_decimals: 2 }
    }
}

/// `num / den` truncated to `decimals` places, or "NA" when `den` is 0.
/// Exact integer arithmetic, so 145/101 gives "1.43".
pub fn format_ratio(num: u64, den: u64, decimals: u32) -> String {
    if den == 0 {
        return "NA".into();
    }
    let scale = 10u128.pow(decimals);
    let scaled = num as u128 * scale / den as u128;
    if decimals == 0 {
        return scaled.to_string();
    }
    format!(
        "{}.{:0width$}",
        scaled / scale,
        scaled % scale,
        width = decimals as usize
    )
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn proportion(count: u64, total: u64) -> f64 {
    if total == 0 {
        0.0
    } else {
        count as f64 / total as f64
    }
}

/// (pa − pb) in percentage points, computed from counts so that 3/100 vs
/// 5/100 gives exactly −2.
pub fn difference_pp(a: u64, na: u64, b: u64, nb: u64) -> f64 {
    if na == 0 || nb == 0 {
        return f64::NAN;
    }
    let num = (a as i128 * nb as i128 - b as i128 * na as i128) * 100;
    num as f64 / (na as i128 * nb as i128) as f64
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupKey {
    pub domain: String,
    pub group: String,
    pub source: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Tally {
    total: u64,
    sentiment: BTreeMap<SentimentLabel, u64>,
    toxicity_scored: u64,
    toxic: u64,
    regard: BTreeMap<RegardLabel, u64>,
    norms: BTreeMap<NormCategory, u64>,
    gender_max: BTreeMap<GenderLabel, u64>,
    gender_wavg: BTreeMap<GenderLabel, u64>,
    gender_unigram: BTreeMap<GenderLabel, u64>,
}

fn merge_counts<K: Ord + Copy>(into: &mut BTreeMap<K, u64>, from: &BTreeMap<K, u64>) {
    for (k, v) in from {
        *into.entry(*k).or_default() += v;
    }
}

impl Tally {
    fn add(&mut self, e: &TextEvaluation) {
        self.total += 1;
        *self.sentiment.entry(e.sentiment.label).or_default() += 1;
        if let Some(t) = &e.toxicity {
            self.toxicity_scored += 1;
            self.toxic += t.is_toxic as u64;
        }
        if let Some(label) = e.regard.as_ref().filter(|r| r.applicable).and_then(|r| r.label) {
            *self.regard.entry(label).or_default() += 1;
        }
        for c in &e.norm_categories {
            *self.norms.entry(*c).or_default() += 1;
        }
        *self.gender_max.entry(e.gender.max.label).or_default() += 1;
        *self.gender_wavg.entry(e.gender.wavg.label).or_default() += 1;
        *self.gender_unigram.entry(e.gender.unigram.label).or_default() += 1;
    }

    /// Associative, commutative combination of partial tallies.
    fn merge(&mut self, other: &Tally) {
        self.total += other.total;
        merge_counts(&mut self.sentiment, &other.sentiment);
        self.toxicity_scored += other.toxicity_scored;
        self.toxic += other.toxic;
        merge_counts(&mut self.regard, &other.regard);
        merge_counts(&mut self.norms, &other.norms);
        merge_counts(&mut self.gender_max, &other.gender_max);
        merge_counts(&mut self.gender_wavg, &other.gender_wavg);
        merge_counts(&mut self.gender_unigram, &other.gender_unigram);
    }

    fn regard_total(&self) -> u64 {
        self.regard.values().sum()
    }
}

fn count<K: Ord>(m: &BTreeMap<K, u64>, k: &K) -> u64 {
    m.get(k).copied().unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenderCounts {
    pub male: u64,
    pub female: u64,
    pub neutral: u64,
    /// male / female at full precision; `None` when there are no female
    /// texts.
    pub ratio: Option<f64>,
}

impl GenderCounts {
    fn from_map(m: &BTreeMap<GenderLabel, u64>) -> GenderCounts {
        let male = count(m, &GenderLabel::Male);
        let female = count(m, &GenderLabel::Female);
        GenderCounts {
            male,
            female,
            neutral: count(m, &GenderLabel::Neutral),
            ratio: ratio(male, female),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenderRow {
    #[serde(flatten)]
    pub key: GroupKey,
    pub total: u64,
    pub max: GenderCounts,
    pub wavg: GenderCounts,
    pub unigram: GenderCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentToxicityRow {
    #[serde(flatten)]
    pub key: GroupKey,
    pub total: u64,
    pub positive: u64,
    pub neutral: u64,
    pub negative: u64,
    pub positive_proportion: f64,
    pub neutral_proportion: f64,
    pub negative_proportion: f64,
    /// Texts with a toxicity verdict.
    pub toxicity_scored: u64,
    pub toxic: u64,
    pub toxic_proportion: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    #[serde(flatten)]
    pub key: GroupKey,
    pub total: u64,
    pub counts: BTreeMap<NormCategory, u64>,
    pub proportions: BTreeMap<NormCategory, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormDifferenceRow {
    pub domain: String,
    pub source: String,
    pub group_a: String,
    pub group_b: String,
    pub category: NormCategory,
    pub proportion_a: f64,
    pub proportion_b: f64,
    /// (proportion_a − proportion_b) × 100.
    pub difference_pp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegardRow {
    #[serde(flatten)]
    pub key: GroupKey,
    /// Texts with a regard label, "other" included.
    pub total: u64,
    pub positive: u64,
    pub negative: u64,
    pub neutral: u64,
    pub other: u64,
    /// Proportions over positive + negative + neutral.
    pub positive_proportion: f64,
    pub negative_proportion: f64,
    pub neutral_proportion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRow {
    pub domain: String,
    pub source: String,
    pub metric: String,
    pub test: String,
    pub groups: Vec<String>,
    /// z for the proportion test, χ² otherwise. `None` when the table is
    /// degenerate.
    pub statistic: Option<f64>,
    pub dof: Option<usize>,
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub domain: String,
    pub group: String,
    pub source: String,
    pub category: String,
    pub proportion: f64,
}

/// Every report table. Serializes to `report.json`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Reports {
    pub gender: Vec<GenderRow>,
    pub sentiment_toxicity: Vec<SentimentToxicityRow>,
    pub norms: Vec<NormRow>,
    pub norm_differences: Vec<NormDifferenceRow>,
    pub regard: Vec<RegardRow>,
    pub tests: Vec<TestRow>,
    pub plot_data: Vec<PlotRow>,
}

fn tally(evaluations: &[TextEvaluation]) -> BTreeMap<GroupKey, Tally> {
    let mut out: BTreeMap<GroupKey, Tally> = BTreeMap::new();
    for e in evaluations {
        let key = GroupKey {
            domain: e.domain.clone(),
            group: e.group.clone(),
            source: e.source.clone(),
        };
        let mut t = Tally::default();
        t.add(e);
        out.entry(key).or_default().merge(&t);
    }
    out
}

/// (domain, source) → group → tally.
fn by_domain_source(tallies: &BTreeMap<GroupKey, Tally>) -> BTreeMap<(String, String), BTreeMap<String, &Tally>> {
    let mut out: BTreeMap<(String, String), BTreeMap<String, &Tally>> = BTreeMap::new();
    for (k, t) in tallies {
        out.entry((k.domain.clone(), k.source.clone()))
            .or_default()
            .insert(k.group.clone(), t);
    }
    out
}

fn chi_row<F>(domain: &str, source: &str, metric: &str, groups: &BTreeMap<String, &Tally>, cols: &[&str], cell: F) -> TestRow
where
    F: Fn(&Tally, usize) -> u64,
{
    let rows: Vec<String> = groups.keys().cloned().collect();
    let counts = groups
        .values()
        .map(|t| (0..cols.len()).map(|j| cell(t, j)).collect())
        .collect();
    let table = ContingencyTable::new(rows.clone(), cols.iter().map(|s| s.to_string()).collect(), counts)
        .expect("rectangular by construction")
        .trimmed();
    let result = chi_square_test(&table).ok();
    TestRow {
        domain: domain.into(),
        source: source.into(),
        metric: metric.into(),
        test: "chi_square".into(),
        groups: rows,
        statistic: result.map(|r| r.stat),
        dof: result.map(|r| r.dof),
        p_value: result.map(|r| r.p),
    }
}

fn proportion_row(
    domain: &str,
    source: &str,
    metric: &str,
    (ga, xa, na): (&str, u64, u64),
    (gb, xb, nb): (&str, u64, u64),
) -> TestRow {
    let result = two_proportion_test(xa, na, xb, nb).ok();
    TestRow {
        domain: domain.into(),
        source: source.into(),
        metric: metric.into(),
        test: "two_proportion".into(),
        groups: vec![ga.into(), gb.into()],
        statistic: result.map(|r| r.z),
        dof: None,
        p_value: result.map(|r| r.p_two_sided),
    }
}

fn tests_for(domain: &str, source: &str, groups: &BTreeMap<String, &Tally>) -> Vec<TestRow> {
    let mut out = Vec::new();
    let sentiment_cols: Vec<&str> = SentimentLabel::ALL.iter().map(|l| l.as_str()).collect();
    out.push(chi_row(domain, source, "sentiment", groups, &sentiment_cols, |t, j| {
        count(&t.sentiment, &SentimentLabel::ALL[j])
    }));
    out.push(chi_row(domain, source, "toxicity", groups, &["toxic", "non_toxic"], |t, j| {
        if j == 0 {
            t.toxic
        } else {
            t.toxicity_scored - t.toxic
        }
    }));
    let gender_labels = [GenderLabel::Male, GenderLabel::Female, GenderLabel::Neutral];
    out.push(chi_row(domain, source, "gender_max", groups, &["male", "female", "neutral"], |t, j| {
        count(&t.gender_max, &gender_labels[j])
    }));
    if groups.values().any(|t| t.regard_total() > 0) {
        let regard_cols: Vec<&str> = RegardLabel::ALL.iter().map(|l| l.as_str()).collect();
        let with_regard: BTreeMap<String, &Tally> = groups
            .iter()
            .filter(|(_, t)| t.regard_total() > 0)
            .map(|(g, t)| (g.clone(), *t))
            .collect();
        out.push(chi_row(domain, source, "regard", &with_regard, &regard_cols, |t, j| {
            count(&t.regard, &RegardLabel::ALL[j])
        }));
    }

    if groups.len() == 2 {
        let mut it = groups.iter();
        let (ga, ta) = it.next().expect("two groups");
        let (gb, tb) = it.next().expect("two groups");
        for label in [SentimentLabel::Positive, SentimentLabel::Negative] {
            out.push(proportion_row(
                domain,
                source,
                &format!("sentiment_{}", label.as_str()),
                (ga, count(&ta.sentiment, &label), ta.total),
                (gb, count(&tb.sentiment, &label), tb.total),
            ));
        }
        out.push(proportion_row(
            domain,
            source,
            "toxic",
            (ga, ta.toxic, ta.toxicity_scored),
            (gb, tb.toxic, tb.toxicity_scored),
        ));
    }
    out
}

/// Builds every report table from a batch of evaluations. The result does
/// not depend on the order of `evaluations`.
pub fn make_reports(evaluations: &[TextEvaluation], _spec: &ReportSpec) -> Reports {
    let tallies = tally(evaluations);
    let mut r = Reports::default();

    for (key, t) in &tallies {
        r.gender.push(GenderRow {
            key: key.clone(),
            total: t.total,
            max: GenderCounts::from_map(&t.gender_max),
            wavg: GenderCounts::from_map(&t.gender_wavg),
            unigram: GenderCounts::from_map(&t.gender_unigram),
        });

        let s = |l| count(&t.sentiment, &l);
        let (pos, neu, neg) = (
            s(SentimentLabel::Positive),
            s(SentimentLabel::Neutral),
            s(SentimentLabel::Negative),
        );
        r.sentiment_toxicity.push(SentimentToxicityRow {
            key: key.clone(),
            total: t.total,
            positive: pos,
            neutral: neu,
            negative: neg,
            positive_proportion: proportion(pos, t.total),
            neutral_proportion: proportion(neu, t.total),
            negative_proportion: proportion(neg, t.total),
            toxicity_scored: t.toxicity_scored,
            toxic: t.toxic,
            toxic_proportion: ratio(t.toxic, t.toxicity_scored),
        });

        r.norms.push(NormRow {
            key: key.clone(),
            total: t.total,
            counts: NormCategory::ALL.iter().map(|c| (*c, count(&t.norms, c))).collect(),
            proportions: NormCategory::ALL
                .iter()
                .map(|c| (*c, proportion(count(&t.norms, c), t.total)))
                .collect(),
        });

        if t.regard_total() > 0 {
            let g = |l| count(&t.regard, &l);
            let (pos, neg, neu, other) = (
                g(RegardLabel::Positive),
                g(RegardLabel::Negative),
                g(RegardLabel::Neutral),
                g(RegardLabel::Other),
            );
            let denom = pos + neg + neu;
            r.regard.push(RegardRow {
                key: key.clone(),
                total: t.regard_total(),
                positive: pos,
                negative: neg,
                neutral: neu,
                other,
                positive_proportion: proportion(pos, denom),
                negative_proportion: proportion(neg, denom),
                neutral_proportion: proportion(neu, denom),
            });
        }
    }

    for ((domain, source), groups) in by_domain_source(&tallies) {
        let names: Vec<&String> = groups.keys().collect();
        for (i, a) in names.iter().enumerate() {
            for b in &names[i + 1..] {
                let (ta, tb) = (groups[*a], groups[*b]);
                for c in NormCategory::ALL {
                    let (xa, xb) = (count(&ta.norms, &c), count(&tb.norms, &c));
                    r.norm_differences.push(NormDifferenceRow {
                        domain: domain.clone(),
                        source: source.clone(),
                        group_a: (*a).clone(),
                        group_b: (*b).clone(),
                        category: c,
                        proportion_a: proportion(xa, ta.total),
                        proportion_b: proportion(xb, tb.total),
                        difference_pp: difference_pp(xa, ta.total, xb, tb.total),
                    });
                }
            }
        }
        r.tests.extend(tests_for(&domain, &source, &groups));
    }

    r.plot_data = plot_rows(&r);
    r
}

fn plot_rows(r: &Reports) -> Vec<PlotRow> {
    let mut out = Vec::new();
    let mut push = |key: &GroupKey, category: String, proportion: f64| {
        out.push(PlotRow {
            domain: key.domain.clone(),
            group: key.group.clone(),
            source: key.source.clone(),
            category,
            proportion,
        })
    };
    for row in &r.sentiment_toxicity {
        push(&row.key, "sentiment:positive".into(), row.positive_proportion);
        push(&row.key, "sentiment:neutral".into(), row.neutral_proportion);
        push(&row.key, "sentiment:negative".into(), row.negative_proportion);
        if let Some(p) = row.toxic_proportion {
            push(&row.key, "toxicity:toxic".into(), p);
        }
    }
    for row in &r.gender {
        for (method, c) in [("gender_max", &row.max), ("gender_wavg", &row.wavg), ("gender_unigram", &row.unigram)] {
            push(&row.key, format!("{method}:male"), proportion(c.male, row.total));
            push(&row.key, format!("{method}:female"), proportion(c.female, row.total));
            push(&row.key, format!("{method}:neutral"), proportion(c.neutral, row.total));
        }
    }
    for row in &r.norms {
        for (c, p) in &row.proportions {
            push(&row.key, format!("norm:{}", c.as_str()), *p);
        }
    }
    for row in &r.regard {
        push(&row.key, "regard:positive".into(), row.positive_proportion);
        push(&row.key, "regard:negative".into(), row.negative_proportion);
        push(&row.key, "regard:neutral".into(), row.neutral_proportion);
    }
    out.sort_by(|a, b| {
        (&a.domain, &a.group, &a.source, &a.category).cmp(&(&b.domain, &b.group, &b.source, &b.category))
    });
    out
}

fn num(v: f64) -> String {
    if v.is_nan() {
        "NA".into()
    } else {
        v.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), num)
}

fn write_csv(path: &Path, header: &[String], rows: Vec<Vec<String>>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(csv_error)?;
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Domain(format!("csv: {other:?}")),
    }
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// File names written by [`write_reports`].
pub const REPORT_FILES: [&str; 8] = [
    "gender.csv",
    "sentiment_toxicity.csv",
    "norms.csv",
    "norm_differences.csv",
    "regard.csv",
    "tests.csv",
    "plot_data.csv",
    "report.json",
];

/// Writes the CSV tables and `report.json` into `dir`, creating it if
/// needed.
pub fn write_reports(reports: &Reports, spec: &ReportSpec, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let key_cols = ["domain", "group", "source"];
    let key = |k: &GroupKey| vec![k.domain.clone(), k.group.clone(), k.source.clone()];

    let mut header = strings(&key_cols);
    header.push("total".into());
    for method in ["Gender-Max", "Gender-Wavg", "Unigram"] {
        for col in ["male #", "female #", "neutral #", "male : female"] {
            header.push(format!("{method} {col}"));
        }
    }
    let rows = reports
        .gender
        .iter()
        .map(|r| {
            let mut row = key(&r.key);
            row.push(r.total.to_string());
            for c in [&r.max, &r.wavg, &r.unigram] {
                row.push(c.male.to_string());
                row.push(c.female.to_string());
                row.push(c.neutral.to_string());
                row.push(format_ratio(c.male, c.female, spec.ratio_decimals));
            }
            row
        })
        .collect();
    write_csv(&dir.join("gender.csv"), &header, rows)?;

    let mut header = strings(&key_cols);
    header.extend(strings(&[
        "total",
        "positive #",
        "neutral #",
        "negative #",
        "positive",
        "neutral",
        "negative",
        "toxicity scored #",
        "toxic #",
        "toxic",
    ]));
    let rows = reports
        .sentiment_toxicity
        .iter()
        .map(|r| {
            let mut row = key(&r.key);
            row.extend([
                r.total.to_string(),
                r.positive.to_string(),
                r.neutral.to_string(),
                r.negative.to_string(),
                num(r.positive_proportion),
                num(r.neutral_proportion),
                num(r.negative_proportion),
                r.toxicity_scored.to_string(),
                r.toxic.to_string(),
                opt(r.toxic_proportion),
            ]);
            row
        })
        .collect();
    write_csv(&dir.join("sentiment_toxicity.csv"), &header, rows)?;

    let mut header = strings(&key_cols);
    header.push("total".into());
    for c in NormCategory::ALL {
        header.push(format!("{} #", c.as_str()));
    }
    for c in NormCategory::ALL {
        header.push(c.as_str().to_string());
    }
    let rows = reports
        .norms
        .iter()
        .map(|r| {
            let mut row = key(&r.key);
            row.push(r.total.to_string());
            row.extend(NormCategory::ALL.iter().map(|c| r.counts[c].to_string()));
            row.extend(NormCategory::ALL.iter().map(|c| num(r.proportions[c])));
            row
        })
        .collect();
    write_csv(&dir.join("norms.csv"), &header, rows)?;

    let header = strings(&[
        "domain",
        "source",
        "group a",
        "group b",
        "category",
        "group a proportion",
        "group b proportion",
        "difference (pp)",
    ]);
    let rows = reports
        .norm_differences
        .iter()
        .map(|r| {
            vec![
                r.domain.clone(),
                r.source.clone(),
                r.group_a.clone(),
                r.group_b.clone(),
                r.category.as_str().to_string(),
                num(r.proportion_a),
                num(r.proportion_b),
                num(r.difference_pp),
            ]
        })
        .collect();
    write_csv(&dir.join("norm_differences.csv"), &header, rows)?;

    let mut header = strings(&key_cols);
    header.extend(strings(&[
        "total",
        "positive #",
        "negative #",
        "neutral #",
        "other #",
        "positive",
        "negative",
        "neutral",
    ]));
    let rows = reports
        .regard
        .iter()
        .map(|r| {
            let mut row = key(&r.key);
            row.extend([
                r.total.to_string(),
                r.positive.to_string(),
                r.negative.to_string(),
                r.neutral.to_string(),
                r.other.to_string(),
                num(r.positive_proportion),
                num(r.negative_proportion),
                num(r.neutral_proportion),
            ]);
            row
        })
        .collect();
    write_csv(&dir.join("regard.csv"), &header, rows)?;

    let header = strings(&["domain", "source", "metric", "test", "groups", "statistic", "dof", "p-value"]);
    let rows = reports
        .tests
        .iter()
        .map(|r| {
            vec![
                r.domain.clone(),
                r.source.clone(),
                r.metric.clone(),
                r.test.clone(),
                r.groups.join(";"),
                opt(r.statistic),
                r.dof.map_or_else(|| "NA".into(), |d| d.to_string()),
                opt(r.p_value),
            ]
        })
        .collect();
    write_csv(&dir.join("tests.csv"), &header, rows)?;

    let header = strings(&["domain", "group", "source", "category", "proportion"]);
    let rows = reports
        .plot_data
        .iter()
        .map(|r| {
            vec![
                r.domain.clone(),
                r.group.clone(),
                r.source.clone(),
                r.category.clone(),
                num(r.proportion),
            ]
        })
        .collect();
    write_csv(&dir.join("plot_data.csv"), &header, rows)?;

    let mut f = fs::File::create(dir.join("report.json"))?;
    serde_json::to_writer_pretty(&mut f, &json_safe(reports))?;
    f.write_all(b"\n")?;
    Ok(())
}

/// JSON has no NaN; undefined differences become null.
fn json_safe(reports: &Reports) -> serde_json::Value {
    let mut v = serde_json::to_value(reports).expect("report types serialize");
    if let Some(rows) = v.get_mut("norm_differences").and_then(|d| d.as_array_mut()) {
        for (row, src) in rows.iter_mut().zip(&reports.norm_differences) {
            if src.difference_pp.is_nan() {
                row["difference_pp"] = serde_json::Value::Null;
            }
        }
    }
    v
}

/// Distinct groups seen per domain, for summaries.
pub fn groups_by_domain(evaluations: &[TextEvaluation]) -> BTreeMap<String, BTreeSet<String>> {
    let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for e in evaluations {
        out.entry(e.domain.clone()).or_default().insert(e.group.clone());
    }
    out
}
