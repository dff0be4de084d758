//! Test documents: one JSON object per test with `targ1`, `targ2`, `attr1`
//! and `attr2` concept sets (each `{"category", "examples"}`), plus optional
//! `id`, `level`, `bleaching` and `variants`.
//!
//! This is the layout of the public sent-bias test files, which carry only
//! the four sets. When `level` is absent it is inferred: `sentence` if any
//! item contains whitespace, `word` otherwise.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use weat_core::testspec::{BiasTest, Bleaching, ConceptSet, Level, Role, TestSpecError, Variant};

#[derive(Debug, thiserror::Error)]
pub enum TestFileError {
    #[error("test document is not valid UTF-8")]
    Utf8,
    #[error("malformed test document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("test document must be a single JSON object")]
    NotObject,
    #[error("missing concept set {0:?}")]
    MissingKey(&'static str),
    #[error("malformed {key:?}: {message}")]
    Field { key: &'static str, message: String },
    #[error("{key}: {source}")]
    Set {
        key: &'static str,
        #[source]
        source: TestSpecError,
    },
    #[error(transparent)]
    Tag(TestSpecError),
    #[error("test has no \"id\" and no file name to derive one from")]
    MissingId,
}

#[derive(Debug, Serialize, Deserialize)]
struct ConceptSetDoc {
    category: String,
    examples: Vec<String>,
}

#[derive(Serialize)]
struct TestDoc<'a> {
    id: &'a str,
    level: &'static str,
    bleaching: &'static str,
    variants: Vec<&'static str>,
    targ1: ConceptSetDoc,
    targ2: ConceptSetDoc,
    attr1: ConceptSetDoc,
    attr2: ConceptSetDoc,
}

fn field<T: serde::de::DeserializeOwned>(
    obj: &Map<String, Value>,
    key: &'static str,
) -> Result<Option<T>, TestFileError> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => T::deserialize(v).map(Some).map_err(|e| TestFileError::Field {
            key,
            message: e.to_string(),
        }),
    }
}

/// Parses one test document. `fallback_id` (normally the file stem) is used
/// when the document carries no `id`.
pub fn parse_test(bytes: &[u8], fallback_id: Option<&str>) -> Result<BiasTest, TestFileError> {
    let text = std::str::from_utf8(bytes).map_err(|_| TestFileError::Utf8)?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let Value::Object(obj) = serde_json::from_str::<Value>(text)? else {
        return Err(TestFileError::NotObject);
    };

    let mut sets = Vec::with_capacity(4);
    for role in Role::ALL {
        let key = role.key();
        let doc: ConceptSetDoc = field(&obj, key)?.ok_or(TestFileError::MissingKey(key))?;
        let set = ConceptSet::new(doc.category, &doc.examples)
            .map_err(|source| TestFileError::Set { key, source })?;
        sets.push(set);
    }
    let [target1, target2, attr1, attr2]: [ConceptSet; 4] =
        sets.try_into().expect("four roles");

    let id = match field::<String>(&obj, "id")? {
        Some(id) => id,
        None => fallback_id.ok_or(TestFileError::MissingId)?.to_owned(),
    };
    let level = match field::<String>(&obj, "level")? {
        Some(s) => s.parse().map_err(TestFileError::Tag)?,
        None => {
            let multi_word = [&target1, &target2, &attr1, &attr2]
                .iter()
                .any(|s| s.iter().any(|t| t.chars().any(char::is_whitespace)));
            if multi_word {
                Level::Sentence
            } else {
                Level::Word
            }
        }
    };
    let bleaching = match field::<String>(&obj, "bleaching")? {
        Some(s) => s.parse().map_err(TestFileError::Tag)?,
        None => Bleaching::NotApplicable,
    };
    let variants = field::<Vec<String>>(&obj, "variants")?
        .unwrap_or_default()
        .iter()
        .map(|s| s.parse::<Variant>())
        .collect::<Result<BTreeSet<_>, _>>()
        .map_err(TestFileError::Tag)?;

    Ok(BiasTest {
        id,
        level,
        bleaching,
        variants,
        target1,
        target2,
        attr1,
        attr2,
    })
}

/// Serializes a test with every optional key written out.
pub fn serialize_test(test: &BiasTest) -> String {
    let doc = |set: &ConceptSet| ConceptSetDoc {
        category: set.category.clone(),
        examples: set.items.clone(),
    };
    let doc = TestDoc {
        id: &test.id,
        level: test.level.as_str(),
        bleaching: test.bleaching.as_str(),
        variants: test.variants.iter().map(|v| v.as_str()).collect(),
        targ1: doc(&test.target1),
        targ2: doc(&test.target2),
        attr1: doc(&test.attr1),
        attr2: doc(&test.attr2),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("test documents always serialize");
    out.push('\n');
    out
}
