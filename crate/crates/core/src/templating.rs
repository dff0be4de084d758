//! Sentence templates for lifting word tests to sentence tests, and
//! Turkish-locale casing.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::str::FromStr;

use crate::testspec::{BiasTest, Bleaching, ConceptSet, Level, Role, TestSpecError};
use crate::text::nfc;

pub const PLACEHOLDER: &str = "{word}";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("template {pattern:?} must contain exactly one {{word}} placeholder, found {found}")]
    PlaceholderCount { pattern: String, found: usize },
    #[error("template {0:?} is blank apart from its placeholder")]
    BlankPattern(String),
    #[error("template set is empty")]
    EmptySet,
    #[error("template set repeats pattern {0:?}")]
    DuplicatePattern(String),
    #[error("unknown casing {0:?} (expected \"as_is\" or \"sentence_initial\")")]
    UnknownCasing(String),
    #[error("no words to expand")]
    NoWords,
    #[error("test {0:?} is not a word-level test")]
    NotWordLevel(String),
    #[error("{role} set {category:?} collapses from {before} to {after} item(s) when lowercased")]
    CollapsedSet {
        role: Role,
        category: String,
        before: usize,
        after: usize,
    },
    #[error(transparent)]
    Spec(#[from] TestSpecError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Casing {
    #[default]
    AsIs,
    /// Capitalize the first letter of the produced sentence (Turkish rules).
    SentenceInitial,
}

impl Casing {
    pub fn as_str(self) -> &'static str {
        match self {
            Casing::AsIs => "as_is",
            Casing::SentenceInitial => "sentence_initial",
        }
    }
}

impl FromStr for Casing {
    type Err = TemplateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "as_is" => Ok(Casing::AsIs),
            "sentence_initial" => Ok(Casing::SentenceInitial),
            other => Err(TemplateError::UnknownCasing(String::from(other))),
        }
    }
}

/// A sentence pattern with exactly one `{word}` slot.
///
/// The bare identity pattern `{word}` is accepted and passes words through
/// unchanged; any other pattern must carry visible text besides the slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pattern: String,
    casing: Casing,
}

impl Template {
    pub fn new(pattern: impl AsRef<str>, casing: Casing) -> Result<Self, TemplateError> {
        let pattern = nfc(pattern.as_ref());
        let found = pattern.matches(PLACEHOLDER).count();
        if found != 1 {
            return Err(TemplateError::PlaceholderCount { pattern, found });
        }
        let rest = pattern.replacen(PLACEHOLDER, "", 1);
        if !rest.is_empty() && rest.trim().is_empty() {
            return Err(TemplateError::BlankPattern(pattern));
        }
        Ok(Self { pattern, casing })
    }

    pub fn identity() -> Self {
        Self {
            pattern: String::from(PLACEHOLDER),
            casing: Casing::AsIs,
        }
    }

    pub fn pattern(&self) -> &str {
        &self.pattern
    }

    pub fn casing(&self) -> Casing {
        self.casing
    }

    pub fn apply(&self, word: &str) -> String {
        let sentence = self.pattern.replacen(PLACEHOLDER, word, 1);
        let sentence = match self.casing {
            Casing::AsIs => sentence,
            Casing::SentenceInitial => capitalize_first_letter(&sentence),
        };
        nfc(&sentence)
    }
}

/// Non-empty ordered list of templates with distinct patterns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    templates: Vec<Template>,
}

impl TemplateSet {
    pub fn new(templates: Vec<Template>) -> Result<Self, TemplateError> {
        if templates.is_empty() {
            return Err(TemplateError::EmptySet);
        }
        let mut seen = BTreeSet::new();
        for t in &templates {
            if !seen.insert(t.pattern.as_str()) {
                return Err(TemplateError::DuplicatePattern(t.pattern.clone()));
            }
        }
        Ok(Self { templates })
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }
}

/// Substitutes every word into every template, word-major.
pub fn expand<S: AsRef<str>>(
    words: &[S],
    templates: &TemplateSet,
) -> Result<Vec<String>, TemplateError> {
    if words.is_empty() {
        return Err(TemplateError::NoWords);
    }
    let mut out = Vec::with_capacity(words.len() * templates.len());
    for word in words {
        let word = nfc(word.as_ref());
        out.extend(templates.templates.iter().map(|t| t.apply(&word)));
    }
    Ok(out)
}

/// Builds the sentence-level counterpart of a word-level test.
///
/// Targets are expanded with `target_templates`, attributes with
/// `attribute_templates`. The id gains a `_sent` suffix. A test without a
/// bleaching annotation is marked `bleached`; an explicit annotation is kept.
pub fn build_sentence_test(
    word_test: &BiasTest,
    target_templates: &TemplateSet,
    attribute_templates: &TemplateSet,
) -> Result<BiasTest, TemplateError> {
    if word_test.level != Level::Word {
        return Err(TemplateError::NotWordLevel(word_test.id.clone()));
    }
    let lift = |set: &ConceptSet, templates: &TemplateSet| -> Result<ConceptSet, TemplateError> {
        Ok(ConceptSet::new(set.category.clone(), expand(&set.items, templates)?)?)
    };
    Ok(BiasTest {
        id: format!("{}_sent", word_test.id),
        level: Level::Sentence,
        bleaching: match word_test.bleaching {
            Bleaching::NotApplicable => Bleaching::Bleached,
            other => other,
        },
        variants: word_test.variants.clone(),
        target1: lift(&word_test.target1, target_templates)?,
        target2: lift(&word_test.target2, target_templates)?,
        attr1: lift(&word_test.attr1, attribute_templates)?,
        attr2: lift(&word_test.attr2, attribute_templates)?,
    })
}

/// Lowercases with Turkish rules (`İ`→`i`, `I`→`ı`); other characters use the
/// default Unicode lowercase mapping. Input and output are NFC.
pub fn turkish_lowercase(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in nfc(text).chars() {
        match c {
            'İ' => out.push('i'),
            'I' => out.push('ı'),
            c => out.extend(c.to_lowercase()),
        }
    }
    nfc(&out)
}

fn push_turkish_upper(out: &mut String, c: char) {
    match c {
        'i' => out.push('İ'),
        'ı' => out.push('I'),
        c => out.extend(c.to_uppercase()),
    }
}

fn capitalize_first_letter(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 1);
    let mut done = false;
    for c in text.chars() {
        if !done && c.is_alphabetic() {
            push_turkish_upper(&mut out, c);
            done = true;
        } else {
            out.push(c);
        }
    }
    out
}

/// Lowercases every item of every set (Turkish rules), merging case
/// collisions, and suffixes the id with `_uncased`.
///
/// A set that loses items to merging and ends up with fewer than two is an
/// error.
pub fn make_uncased_variant(test: &BiasTest) -> Result<BiasTest, TemplateError> {
    let mut out = test.clone();
    out.id = format!("{}_uncased", test.id);
    for role in Role::ALL {
        let set = out.set_mut(role);
        let before = set.items.len();
        let mut seen = BTreeSet::new();
        let items: Vec<String> = set
            .items
            .iter()
            .map(|item| turkish_lowercase(item))
            .filter(|item| seen.insert(item.clone()))
            .collect();
        if items.len() < before && items.len() < 2 {
            return Err(TemplateError::CollapsedSet {
                role,
                category: set.category.clone(),
                before,
                after: items.len(),
            });
        }
        set.items = items;
    }
    Ok(out)
}
