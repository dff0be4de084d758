//! Embedding interchange files.
//!
//! Line-delimited UTF-8 JSON. The first line is the header
//! `{"dim", "model_id", "pooling", "layer", "cased"}`; every following line is
//! `{"text", "vector"}`. Numbers are written in shortest round-trip form, so
//! reading back a written store reproduces every component bit for bit.
//!
//! Writers that emit bare `NaN`/`Infinity` tokens (as Python's `json` module
//! does) are tolerated far enough to report the offending text.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use weat_core::embeddings::{EmbeddingError, EmbeddingStore, Provenance};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("cannot read embeddings: {0}")]
    Io(#[from] io::Error),
    #[error("embedding file has no header line with \"dim\" and \"model_id\"")]
    HeaderMissing,
    #[error("malformed header: {0}")]
    Header(String),
    #[error("line {line}: {message}")]
    Row { line: usize, message: String },
    #[error("line {line}: vector for {text:?} has {found} components, header dim is {expected}")]
    DimMismatch {
        line: usize,
        text: String,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: vector for {text:?} has a non-finite component")]
    NonFinite { line: usize, text: String },
    #[error("line {line}: duplicate text {text:?}")]
    DuplicateText { line: usize, text: String },
}

#[derive(Serialize)]
struct HeaderOut<'a> {
    dim: usize,
    model_id: &'a str,
    pooling: &'a str,
    layer: &'a str,
    cased: bool,
}

#[derive(Deserialize)]
struct HeaderIn {
    dim: usize,
    model_id: String,
    #[serde(default)]
    pooling: Option<String>,
    #[serde(default)]
    layer: Option<Value>,
    #[serde(default)]
    cased: Option<bool>,
}

#[derive(Serialize)]
struct RowOut<'a> {
    text: &'a str,
    vector: &'a [f64],
}

#[derive(Deserialize)]
struct RowIn {
    text: String,
    vector: Vec<Value>,
}

pub fn load_store(path: impl AsRef<Path>) -> Result<EmbeddingStore, StoreError> {
    read_store(BufReader::new(File::open(path)?))
}

pub fn read_store<R: BufRead>(reader: R) -> Result<EmbeddingStore, StoreError> {
    let mut lines = reader
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !matches!(l, Ok(s) if s.trim().is_empty()));

    let header_line = match lines.next() {
        Some((_, line)) => line?,
        None => return Err(StoreError::HeaderMissing),
    };
    let header_value: Value = serde_json::from_str(header_line.trim_start_matches('\u{feff}'))
        .map_err(|e| StoreError::Header(e.to_string()))?;
    if header_value.get("dim").is_none() || header_value.get("model_id").is_none() {
        return Err(StoreError::HeaderMissing);
    }
    let header: HeaderIn =
        serde_json::from_value(header_value).map_err(|e| StoreError::Header(e.to_string()))?;
    let layer = match header.layer {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s,
        Some(other) => other.to_string(),
    };
    let provenance = Provenance {
        model_id: header.model_id,
        pooling: header.pooling.unwrap_or_default(),
        layer,
        cased: header.cased.unwrap_or(true),
    };
    let mut store = EmbeddingStore::new(header.dim, provenance)
        .map_err(|e| StoreError::Header(e.to_string()))?;

    for (line_no, line) in lines {
        let line = line?;
        let row = parse_row(&line).map_err(|e| StoreError::Row {
            line: line_no,
            message: e.to_string(),
        })?;
        let mut components = Vec::with_capacity(row.vector.len());
        let mut non_finite = false;
        for value in &row.vector {
            match value {
                Value::Number(n) => components.push(n.as_f64().unwrap_or(f64::NAN)),
                Value::String(s) if is_non_finite_token(s) => non_finite = true,
                other => {
                    return Err(StoreError::Row {
                        line: line_no,
                        message: format!("vector for {:?} contains non-numeric {other}", row.text),
                    })
                }
            }
        }
        if non_finite {
            return Err(StoreError::NonFinite { line: line_no, text: row.text });
        }
        store
            .insert(&row.text, components)
            .map_err(|e| match e {
                EmbeddingError::DimensionMismatch { text, expected, found } => StoreError::DimMismatch {
                    line: line_no,
                    text,
                    expected,
                    found,
                },
                EmbeddingError::NonFinite { text, .. } => StoreError::NonFinite { line: line_no, text },
                EmbeddingError::DuplicateText(text) => StoreError::DuplicateText { line: line_no, text },
                other => StoreError::Row {
                    line: line_no,
                    message: other.to_string(),
                },
            })?;
    }
    Ok(store)
}

fn is_non_finite_token(s: &str) -> bool {
    matches!(
        s.to_ascii_lowercase().as_str(),
        "nan" | "-nan" | "inf" | "-inf" | "+inf" | "infinity" | "-infinity" | "+infinity"
    )
}

fn parse_row(line: &str) -> Result<RowIn, serde_json::Error> {
    serde_json::from_str(line).or_else(|err| {
        let quoted = quote_bare_non_finite(line);
        if quoted == line {
            Err(err)
        } else {
            serde_json::from_str(&quoted).map_err(|_| err)
        }
    })
}

/// Wraps bare `NaN`, `Infinity` and `-Infinity` tokens outside string
/// literals in quotes.
fn quote_bare_non_finite(line: &str) -> String {
    let mut out = String::with_capacity(line.len() + 8);
    let mut in_string = false;
    let mut escaped = false;
    let mut rest = line;
    while let Some(c) = rest.chars().next() {
        if in_string {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
            rest = &rest[c.len_utf8()..];
            continue;
        }
        if c == '"' {
            in_string = true;
        }
        if let Some(token) = ["-Infinity", "Infinity", "NaN"].into_iter().find(|t| rest.starts_with(t)) {
            out.push('"');
            out.push_str(token);
            out.push('"');
            rest = &rest[token.len()..];
            continue;
        }
        out.push(c);
        rest = &rest[c.len_utf8()..];
    }
    out
}

pub fn write_store<W: Write>(store: &EmbeddingStore, writer: W) -> io::Result<()> {
    let mut w = BufWriter::new(writer);
    let p = store.provenance();
    let header = HeaderOut {
        dim: store.dim(),
        model_id: &p.model_id,
        pooling: &p.pooling,
        layer: &p.layer,
        cased: p.cased,
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for (text, vector) in store.iter() {
        serde_json::to_writer(&mut w, &RowOut { text, vector })?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn save_store(store: &EmbeddingStore, path: impl AsRef<Path>) -> io::Result<()> {
    write_store(store, File::create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = r#"{"dim": 4, "model_id": "toy/bert", "pooling": "mean", "layer": "last", "cased": false}"#;

    fn read(body: &str) -> Result<EmbeddingStore, StoreError> {
        read_store(format!("{HEADER}\n{body}").as_bytes())
    }

    #[test]
    fn loads_rows() {
        let s = read(
            "{\"text\": \"ev\", \"vector\": [1, 0, 0, 0]}\n\
             {\"text\": \"aile\", \"vector\": [0.5, -1e-3, 2.25, 0]}\n\n\
             {\"text\": \"iş\", \"vector\": [0, 0, 0, 1]}\n",
        )
        .unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.dim(), 4);
        assert_eq!(s.model_id(), "toy/bert");
        assert!(!s.provenance().cased);
        assert_eq!(s.provenance().layer, "last");
        assert_eq!(&**s.lookup("aile").unwrap(), &[0.5, -1e-3, 2.25, 0.0]);
    }

    #[test]
    fn dim_mismatch_names_the_text() {
        let err = read("{\"text\": \"ev\", \"vector\": [1, 0, 0]}\n").unwrap_err();
        match err {
            StoreError::DimMismatch { line, text, expected, found } => {
                assert_eq!((line, text.as_str(), expected, found), (2, "ev", 4, 3));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn non_finite_components_are_rejected() {
        for body in [
            "{\"text\": \"ev\", \"vector\": [1, \"NaN\", 0, 0]}",
            "{\"text\": \"ev\", \"vector\": [1, NaN, 0, 0]}",
            "{\"text\": \"ev\", \"vector\": [1, -Infinity, 0, 0]}",
        ] {
            assert!(
                matches!(read(body), Err(StoreError::NonFinite { ref text, .. }) if text == "ev"),
                "{body}"
            );
        }
        // a literal NaN inside the text does not confuse the fallback
        let err = read("{\"text\": \"NaN ev\", \"vector\": [NaN, 0, 0, 0]}").unwrap_err();
        assert!(matches!(err, StoreError::NonFinite { ref text, .. } if text == "NaN ev"));
    }

    #[test]
    fn header_and_duplicates() {
        assert!(matches!(read_store(&b""[..]), Err(StoreError::HeaderMissing)));
        assert!(matches!(
            read_store(&b"{\"text\": \"ev\", \"vector\": [1]}\n"[..]),
            Err(StoreError::HeaderMissing)
        ));
        assert!(matches!(
            read_store(&b"{\"dim\": 0, \"model_id\": \"m\"}\n"[..]),
            Err(StoreError::Header(_))
        ));
        let err = read(
            "{\"text\": \"şeker\", \"vector\": [1, 0, 0, 0]}\n\
             {\"text\": \"s\u{0327}eker\", \"vector\": [1, 0, 0, 0]}",
        )
        .unwrap_err();
        assert!(matches!(err, StoreError::DuplicateText { line: 3, .. }));
        assert!(matches!(read("not json"), Err(StoreError::Row { line: 2, .. })));
    }

    #[test]
    fn write_then_read_is_identity() {
        let mut s = EmbeddingStore::new(
            3,
            Provenance {
                model_id: "m".into(),
                pooling: "cls".into(),
                layer: "-1".into(),
                cased: true,
            },
        )
        .unwrap();
        s.insert("Bu bir ev.", vec![0.1, 1.0 / 3.0, -2.5e-300]).unwrap();
        s.insert("İş burada.", vec![f64::MAX, f64::MIN_POSITIVE, -0.0]).unwrap();
        let mut buf = Vec::new();
        write_store(&s, &mut buf).unwrap();
        let back = read_store(buf.as_slice()).unwrap();
        assert_eq!(back, s);
        for ((t1, v1), (t2, v2)) in s.iter().zip(back.iter()) {
            assert_eq!(t1, t2);
            assert!(v1.iter().zip(v2.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
    }
}
