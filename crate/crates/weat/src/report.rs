//! Result tables: flat CSV, model x test heatmap matrices, and a Markdown
//! summary with significance marks.

use std::collections::HashMap;

use weat_core::runner::RunRecord;

pub const CSV_HEADER: [&str; 14] = [
    "test_id",
    "level",
    "variants",
    "model_id",
    "n_targ1",
    "n_targ2",
    "n_attr1",
    "n_attr2",
    "s_obs",
    "effect_size",
    "p_value",
    "method",
    "count",
    "seed",
];

pub const METHODOLOGY: &str = "Methodology: one-sided permutation test on the differential association \
statistic. A relabeling of the combined target items counts toward the p-value when its statistic is \
greater than or equal to the observed one; the observed labeling is included, so exact p-values are never \
zero. Monte-Carlo p-values use the add-one estimate (b + 1) / (m + 1) over m sampled relabelings. Effect \
sizes divide the difference of mean per-item associations by their sample standard deviation (n - 1) and \
are signed: positive means the first target set leans toward the first attribute set. \
Marks: ** p < 0.01, * p < 0.05, † p < 0.1.";

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("duplicate result for model {model_id:?} and test {test_id:?}")]
    DuplicateCell { model_id: String, test_id: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatmapValue {
    PValue,
    EffectSize,
}

/// Significance mark: `**` below 0.01, `*` below 0.05, `†` below 0.1.
pub fn significance(p: f64) -> &'static str {
    if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else if p < 0.1 {
        "†"
    } else {
        ""
    }
}

/// Six significant digits, trailing zeros dropped; scientific notation
/// outside `1e-5 ..= 999999.5`.
pub fn fmt_sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_owned()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}

fn variants_field(r: &RunRecord) -> String {
    r.variants.iter().map(|v| v.as_str()).collect::<Vec<_>>().join(";")
}

fn csv_string(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv of UTF-8 fields is UTF-8")
}

/// One row per record under [`CSV_HEADER`]. Failed records leave the numeric
/// fields empty and carry `failed` as method.
pub fn to_csv(records: &[RunRecord]) -> String {
    let mut rows = vec![CSV_HEADER.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
    for r in records {
        let mut row = vec![
            r.test_id.clone(),
            r.level.as_str().to_owned(),
            variants_field(r),
            r.model_id.clone(),
            r.n_targ1.to_string(),
            r.n_targ2.to_string(),
            r.n_attr1.to_string(),
            r.n_attr2.to_string(),
        ];
        match &r.result {
            Ok(res) => row.extend([
                fmt_sig6(res.s_obs),
                fmt_sig6(res.effect_size),
                fmt_sig6(res.p_value),
                res.method.as_str().to_owned(),
                res.count.to_string(),
                res.seed.map(|s| s.to_string()).unwrap_or_default(),
            ]),
            Err(_) => row.extend(["", "", "", "failed", "", ""].map(String::from)),
        }
        rows.push(row);
    }
    csv_string(rows)
}

/// Models as rows (first-appearance order), tests as columns (record order).
/// Failed or absent cells are empty.
pub fn heatmap_matrix(records: &[RunRecord], value: HeatmapValue) -> Result<String, ReportError> {
    let mut models: Vec<&str> = Vec::new();
    let mut tests: Vec<&str> = Vec::new();
    let mut cells: HashMap<(&str, &str), Option<f64>> = HashMap::new();
    for r in records {
        let (m, t) = (r.model_id.as_str(), r.test_id.as_str());
        if !models.contains(&m) {
            models.push(m);
        }
        if !tests.contains(&t) {
            tests.push(t);
        }
        let v = r.result.as_ref().ok().map(|res| match value {
            HeatmapValue::PValue => res.p_value,
            HeatmapValue::EffectSize => res.effect_size,
        });
        if cells.insert((m, t), v).is_some() {
            return Err(ReportError::DuplicateCell {
                model_id: m.to_owned(),
                test_id: t.to_owned(),
            });
        }
    }
    let mut rows = Vec::with_capacity(models.len() + 1);
    rows.push(std::iter::once("model_id").chain(tests.iter().copied()).map(String::from).collect());
    for m in &models {
        let mut row = vec![m.to_string()];
        row.extend(tests.iter().map(|t| match cells.get(&(*m, *t)) {
            Some(Some(v)) => fmt_sig6(*v),
            _ => String::new(),
        }));
        rows.push(row);
    }
    Ok(csv_string(rows))
}

/// `0.004000**`: six decimals plus the significance mark.
pub fn p_cell(p: f64) -> String {
    format!("{p:.6}{}", significance(p))
}

fn md_escape(s: &str) -> String {
    s.replace('|', "\\|")
}

pub fn to_markdown(records: &[RunRecord]) -> String {
    let mut out = String::from(
        "| test | level | model | n (X/Y/A/B) | s | d | p | method |\n\
         |---|---|---|---|---:|---:|---:|---|\n",
    );
    for r in records {
        let sizes = format!("{}/{}/{}/{}", r.n_targ1, r.n_targ2, r.n_attr1, r.n_attr2);
        let (s, d, p, method) = match &r.result {
            Ok(res) => (
                format!("{:.6}", res.s_obs),
                format!("{:.6}", res.effect_size),
                p_cell(res.p_value),
                format!("{} ({})", res.method.as_str(), res.count),
            ),
            Err(e) => (String::new(), String::new(), String::new(), format!("failed: {}", md_escape(e))),
        };
        out.push_str(&format!(
            "| {} | {} | {} | {sizes} | {s} | {d} | {p} | {method} |\n",
            md_escape(&r.test_id),
            r.level.as_str(),
            md_escape(&r.model_id),
        ));
    }
    let warnings: Vec<String> = records
        .iter()
        .flat_map(|r| r.warnings.iter().map(move |w| format!("- {} / {}: {w}", r.test_id, r.model_id)))
        .collect();
    if !warnings.is_empty() {
        out.push_str("\nWarnings:\n\n");
        out.push_str(&warnings.join("\n"));
        out.push('\n');
    }
    out.push('\n');
    out.push_str(METHODOLOGY);
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use weat_core::stats::{AssociationResult, Method};
    use weat_core::testspec::Level;

    fn record(test: &str, model: &str, p: f64, d: f64) -> RunRecord {
        RunRecord {
            test_id: test.into(),
            level: Level::Sentence,
            variants: Default::default(),
            model_id: model.into(),
            n_targ1: 8,
            n_targ2: 8,
            n_attr1: 8,
            n_attr2: 8,
            result: Ok(AssociationResult {
                s_obs: 0.5,
                per_item: vec![],
                effect_size: d,
                p_value: p,
                method: Method::Exact,
                count: 12870,
                seed: None,
            }),
            warnings: vec![],
        }
    }

    #[test]
    fn significance_buckets() {
        assert_eq!(significance(0.004), "**");
        assert_eq!(significance(0.01), "*");
        assert_eq!(significance(0.049), "*");
        assert_eq!(significance(0.05), "†");
        assert_eq!(significance(0.07), "†");
        assert_eq!(significance(0.1), "");
        assert_eq!(significance(0.5), "");
        assert_eq!(p_cell(0.004), "0.004000**");
        assert_eq!(p_cell(0.07), "0.070000†");
        assert_eq!(p_cell(0.5), "0.500000");
    }

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt_sig6(1.0 / 6.0), "0.166667");
        assert_eq!(fmt_sig6(4.0), "4");
        assert_eq!(fmt_sig6(1.7320508075688772), "1.73205");
        assert_eq!(fmt_sig6(-0.35), "-0.35");
        assert_eq!(fmt_sig6(0.0), "0");
        assert_eq!(fmt_sig6(1.0 / 184756.0), "5.41254e-6");
        assert_eq!(fmt_sig6(0.000123456789), "0.000123457");
        assert_eq!(fmt_sig6(999999.7), "1e6");
        assert_eq!(fmt_sig6(123456.7), "123457");
    }

    #[test]
    fn csv_shapes() {
        assert_eq!(to_csv(&[]), format!("{}\n", CSV_HEADER.join(",")));
        let csv = to_csv(&[record("weat6", "m", 1.0 / 6.0, 1.2)]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1].split(',').count(), 14);
        assert!(lines[1].contains(",0.166667,"));
    }

    #[test]
    fn csv_quotes_awkward_fields() {
        let csv = to_csv(&[record("a,\"b\"", "m", 0.5, 0.0)]);
        assert!(csv.lines().nth(1).unwrap().starts_with("\"a,\"\"b\"\"\","));
    }

    #[test]
    fn heatmap_layout() {
        let mut records = vec![];
        for m in ["m1", "m2"] {
            for t in ["t1", "t2", "t3"] {
                records.push(record(t, m, 0.02, -0.7));
            }
        }
        records[4].result = Err("degenerate".into());
        let p = heatmap_matrix(&records, HeatmapValue::PValue).unwrap();
        let lines: Vec<&str> = p.lines().collect();
        assert_eq!(lines, ["model_id,t1,t2,t3", "m1,0.02,0.02,0.02", "m2,0.02,,0.02"]);
        let d = heatmap_matrix(&records, HeatmapValue::EffectSize).unwrap();
        assert_eq!(d.lines().nth(1).unwrap(), "m1,-0.7,-0.7,-0.7");

        records.push(record("t1", "m1", 0.3, 0.1));
        assert!(matches!(
            heatmap_matrix(&records, HeatmapValue::PValue),
            Err(ReportError::DuplicateCell { .. })
        ));
    }

    #[test]
    fn markdown_marks_and_footer() {
        let mut failed = record("t2", "m", 0.5, 0.0);
        failed.result = Err("zero | spread".into());
        failed.warnings.push("subsampled targ1".into());
        let md = to_markdown(&[record("t1", "m", 0.004, 1.05), failed]);
        assert!(md.contains("| 0.004000** |"));
        assert!(md.contains("failed: zero \\| spread"));
        assert!(md.contains("- t2 / m: subsampled targ1"));
        assert!(md.trim_end().ends_with(METHODOLOGY));
        assert!(md.contains("greater than or equal"));
        assert!(md.contains("(b + 1) / (m + 1)"));
    }
}
