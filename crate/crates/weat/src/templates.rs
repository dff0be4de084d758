//! Template-set documents: a JSON array of `{"pattern", "casing"}` objects.
//! `casing` is `as_is` (default) or `sentence_initial`.

use serde::{Deserialize, Serialize};
use weat_core::templating::{Casing, Template, TemplateError, TemplateSet};

#[derive(Debug, thiserror::Error)]
pub enum TemplateFileError {
    #[error("malformed template document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("template {index}: {source}")]
    Template {
        index: usize,
        #[source]
        source: TemplateError,
    },
    #[error(transparent)]
    Set(TemplateError),
}

#[derive(Serialize, Deserialize)]
struct TemplateDoc {
    pattern: String,
    #[serde(default)]
    casing: Option<String>,
}

pub fn parse_templates(bytes: &[u8]) -> Result<TemplateSet, TemplateFileError> {
    let docs: Vec<TemplateDoc> = serde_json::from_slice(bytes)?;
    let templates = docs
        .into_iter()
        .enumerate()
        .map(|(index, doc)| {
            let casing = match doc.casing.as_deref() {
                None => Ok(Casing::AsIs),
                Some(s) => s.parse(),
            };
            casing
                .and_then(|casing| Template::new(&doc.pattern, casing))
                .map_err(|source| TemplateFileError::Template { index, source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    TemplateSet::new(templates).map_err(TemplateFileError::Set)
}

pub fn serialize_templates(set: &TemplateSet) -> String {
    let docs: Vec<TemplateDoc> = set
        .templates()
        .iter()
        .map(|t| TemplateDoc {
            pattern: t.pattern().to_owned(),
            casing: Some(t.casing().as_str().to_owned()),
        })
        .collect();
    let mut out = serde_json::to_string_pretty(&docs).expect("templates always serialize");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_round_trips() {
        let doc = r#"[
            {"pattern": "Bu bir {word}.", "casing": "as_is"},
            {"pattern": "{word} burada.", "casing": "sentence_initial"},
            {"pattern": "Orada bir {word} var."}
        ]"#;
        let set = parse_templates(doc.as_bytes()).unwrap();
        assert_eq!(set.len(), 3);
        assert_eq!(set.templates()[1].casing(), Casing::SentenceInitial);
        assert_eq!(set.templates()[2].casing(), Casing::AsIs);
        assert_eq!(parse_templates(serialize_templates(&set).as_bytes()).unwrap(), set);
    }

    #[test]
    fn rejects_bad_templates() {
        assert!(matches!(
            parse_templates(br#"[{"pattern": "Bu bir ev."}]"#),
            Err(TemplateFileError::Template { index: 0, .. })
        ));
        assert!(matches!(
            parse_templates(br#"[{"pattern": "{word}", "casing": "title"}]"#),
            Err(TemplateFileError::Template { source: TemplateError::UnknownCasing(_), .. })
        ));
        assert!(matches!(
            parse_templates(b"[]"),
            Err(TemplateFileError::Set(TemplateError::EmptySet))
        ));
        assert!(matches!(parse_templates(b"{}"), Err(TemplateFileError::Json(_))));
    }
}
