//! Results files: one JSON object per [`RunRecord`] per line, numbers in
//! shortest round-trip form.

use std::collections::BTreeSet;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use weat_core::runner::RunRecord;
use weat_core::stats::{AssociationResult, Method};
use weat_core::testspec::{Level, Variant};

#[derive(Debug, thiserror::Error)]
pub enum ResultsError {
    #[error("cannot read results: {0}")]
    Io(#[from] io::Error),
    #[error("results line {line}: {message}")]
    Malformed { line: usize, message: String },
}

#[derive(Serialize, Deserialize)]
struct ItemDoc {
    text: String,
    value: f64,
}

#[derive(Serialize, Deserialize)]
struct RecordDoc {
    test_id: String,
    level: String,
    variants: Vec<String>,
    model_id: String,
    n_targ1: usize,
    n_targ2: usize,
    n_attr1: usize,
    n_attr2: usize,
    status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s_obs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    effect_size: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    per_item: Option<Vec<ItemDoc>>,
    warnings: Vec<String>,
}

impl From<&RunRecord> for RecordDoc {
    fn from(r: &RunRecord) -> Self {
        let mut doc = RecordDoc {
            test_id: r.test_id.clone(),
            level: r.level.as_str().into(),
            variants: r.variants.iter().map(|v| v.as_str().into()).collect(),
            model_id: r.model_id.clone(),
            n_targ1: r.n_targ1,
            n_targ2: r.n_targ2,
            n_attr1: r.n_attr1,
            n_attr2: r.n_attr2,
            status: "ok".into(),
            error: None,
            s_obs: None,
            effect_size: None,
            p_value: None,
            method: None,
            count: None,
            seed: None,
            per_item: None,
            warnings: r.warnings.clone(),
        };
        match &r.result {
            Ok(res) => {
                doc.s_obs = Some(res.s_obs);
                doc.effect_size = Some(res.effect_size);
                doc.p_value = Some(res.p_value);
                doc.method = Some(res.method.as_str().into());
                doc.count = Some(res.count);
                doc.seed = res.seed;
                doc.per_item = Some(
                    res.per_item
                        .iter()
                        .map(|(text, value)| ItemDoc {
                            text: text.clone(),
                            value: *value,
                        })
                        .collect(),
                );
            }
            Err(message) => {
                doc.status = "failed".into();
                doc.error = Some(message.clone());
            }
        }
        doc
    }
}

impl TryFrom<RecordDoc> for RunRecord {
    type Error = String;

    fn try_from(doc: RecordDoc) -> Result<Self, String> {
        let level: Level = doc.level.parse().map_err(|e| format!("{e}"))?;
        let variants = doc
            .variants
            .iter()
            .map(|v| v.parse::<Variant>().map_err(|e| format!("{e}")))
            .collect::<Result<BTreeSet<_>, _>>()?;
        let result = match doc.status.as_str() {
            "ok" => {
                let need = |name: &str| format!("ok record lacks {name:?}");
                let method = match doc.method.as_deref() {
                    Some("exact") => Method::Exact,
                    Some("monte_carlo") => Method::MonteCarlo,
                    Some(other) => return Err(format!("unknown method {other:?}")),
                    None => return Err(need("method")),
                };
                Ok(AssociationResult {
                    s_obs: doc.s_obs.ok_or_else(|| need("s_obs"))?,
                    per_item: doc
                        .per_item
                        .unwrap_or_default()
                        .into_iter()
                        .map(|i| (i.text, i.value))
                        .collect(),
                    effect_size: doc.effect_size.ok_or_else(|| need("effect_size"))?,
                    p_value: doc.p_value.ok_or_else(|| need("p_value"))?,
                    method,
                    count: doc.count.ok_or_else(|| need("count"))?,
                    seed: doc.seed,
                })
            }
            "failed" => Err(doc.error.unwrap_or_default()),
            other => return Err(format!("unknown status {other:?}")),
        };
        Ok(RunRecord {
            test_id: doc.test_id,
            level,
            variants,
            model_id: doc.model_id,
            n_targ1: doc.n_targ1,
            n_targ2: doc.n_targ2,
            n_attr1: doc.n_attr1,
            n_attr2: doc.n_attr2,
            result,
            warnings: doc.warnings,
        })
    }
}

pub fn write_records<W: Write>(records: &[RunRecord], mut writer: W) -> io::Result<()> {
    for record in records {
        serde_json::to_writer(&mut writer, &RecordDoc::from(record))?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn read_records<R: BufRead>(reader: R) -> Result<Vec<RunRecord>, ResultsError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| ResultsError::Malformed { line: i + 1, message };
        let doc: RecordDoc = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        out.push(RunRecord::try_from(doc).map_err(malformed)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample_records() -> Vec<RunRecord> {
        let ok = RunRecord {
            test_id: "weat6".into(),
            level: Level::Word,
            variants: [Variant::Religious].into_iter().collect(),
            model_id: "m1".into(),
            n_targ1: 2,
            n_targ2: 2,
            n_attr1: 1,
            n_attr2: 1,
            result: Ok(AssociationResult {
                s_obs: 4.0,
                per_item: vec![("Mustafa".into(), 1.0 / 3.0), ("Zeynep".into(), -0.1)],
                effect_size: 1.7320508075688772,
                p_value: 1.0 / 6.0,
                method: Method::MonteCarlo,
                count: 6,
                seed: Some(u64::MAX),
            }),
            warnings: vec!["subsampled".into()],
        };
        let failed = RunRecord {
            result: Err("per-item associations have zero spread".into()),
            model_id: "m2".into(),
            warnings: vec![],
            ..ok.clone()
        };
        vec![ok, failed]
    }

    #[test]
    fn round_trips_exactly() {
        let records = sample_records();
        let mut buf = Vec::new();
        write_records(&records, &mut buf).unwrap();
        assert_eq!(buf.iter().filter(|&&b| b == b'\n').count(), 2);
        assert_eq!(read_records(buf.as_slice()).unwrap(), records);
    }

    #[test]
    fn malformed_lines_are_located() {
        let err = read_records(&b"\n{\"test_id\": 1}\n"[..]).unwrap_err();
        assert!(matches!(err, ResultsError::Malformed { line: 2, .. }));
    }
}
