//! Bias test definitions: concept sets, tests, suites, and their validation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::text::nfc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TestSpecError {
    #[error("concept set has an empty category label")]
    EmptyCategory,
    #[error("concept set {category:?} has no items")]
    EmptyItems { category: String },
    #[error("concept set {category:?} contains duplicate item {text:?}")]
    DuplicateItem { category: String, text: String },
    #[error("duplicate test id {0:?}")]
    DuplicateTestId(String),
    #[error("unknown {kind} value {value:?}")]
    UnknownTag { kind: &'static str, value: String },
}

/// Position of a concept set inside a [`BiasTest`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Target1,
    Target2,
    Attribute1,
    Attribute2,
}

impl Role {
    pub const ALL: [Role; 4] = [Role::Target1, Role::Target2, Role::Attribute1, Role::Attribute2];

    /// Key used for this role in test documents.
    pub fn key(self) -> &'static str {
        match self {
            Role::Target1 => "targ1",
            Role::Target2 => "targ2",
            Role::Attribute1 => "attr1",
            Role::Attribute2 => "attr2",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// A labelled, ordered list of texts standing for one concept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptSet {
    pub category: String,
    pub items: Vec<String>,
}

impl ConceptSet {
    /// Builds a set, NFC-normalizing every item and enforcing the set invariants.
    pub fn new<I, S>(category: impl Into<String>, items: I) -> Result<Self, TestSpecError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let category = category.into();
        if category.trim().is_empty() {
            return Err(TestSpecError::EmptyCategory);
        }
        let items: Vec<String> = items.into_iter().map(|s| nfc(s.as_ref())).collect();
        if items.is_empty() {
            return Err(TestSpecError::EmptyItems { category });
        }
        if let Some(text) = first_duplicate(&items) {
            return Err(TestSpecError::DuplicateItem { category, text });
        }
        Ok(Self { category, items })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(String::as_str)
    }
}

fn first_duplicate(items: &[String]) -> Option<String> {
    let mut seen = BTreeSet::new();
    items
        .iter()
        .map(|item| nfc(item))
        .find(|item| !seen.insert(item.clone()))
}

macro_rules! tag_enum {
    ($(#[$meta:meta])* $name:ident, $kind:literal { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl FromStr for $name {
            type Err = TestSpecError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(TestSpecError::UnknownTag {
                        kind: $kind,
                        value: String::from(other),
                    }),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

tag_enum!(
    /// Whether a test compares bare words or whole sentences.
    Level, "level" {
        Word => "word",
        Sentence => "sentence",
    }
);

tag_enum!(
    Bleaching, "bleaching" {
        Bleached => "bleached",
        Unbleached => "unbleached",
        NotApplicable => "not_applicable",
    }
);

tag_enum!(
    /// Free-form variant annotation. The engine never branches on these.
    Variant, "variant" {
        Religious => "religious",
        GroupTermsB => "group_terms_b",
        DoubleBindCompetent => "double_bind_competent",
        DoubleBindLikable => "double_bind_likable",
        Verbosity1 => "verbosity_1",
        Verbosity1Plus3 => "verbosity_1plus3",
    }
);

/// Two target concepts and two attribute concepts: the unit of evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiasTest {
    pub id: String,
    pub level: Level,
    pub bleaching: Bleaching,
    pub variants: BTreeSet<Variant>,
    pub target1: ConceptSet,
    pub target2: ConceptSet,
    pub attr1: ConceptSet,
    pub attr2: ConceptSet,
}

impl BiasTest {
    pub fn set(&self, role: Role) -> &ConceptSet {
        match role {
            Role::Target1 => &self.target1,
            Role::Target2 => &self.target2,
            Role::Attribute1 => &self.attr1,
            Role::Attribute2 => &self.attr2,
        }
    }

    pub fn set_mut(&mut self, role: Role) -> &mut ConceptSet {
        match role {
            Role::Target1 => &mut self.target1,
            Role::Target2 => &mut self.target2,
            Role::Attribute1 => &mut self.attr1,
            Role::Attribute2 => &mut self.attr2,
        }
    }

    /// Every item of the four sets in role order, duplicates across sets kept.
    pub fn texts(&self) -> impl Iterator<Item = &str> {
        Role::ALL.into_iter().flat_map(move |role| self.set(role).iter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TestSuite {
    pub name: String,
    pub tests: Vec<BiasTest>,
    pub provenance: BTreeMap<String, String>,
}

impl TestSuite {
    pub fn new(name: impl Into<String>, tests: Vec<BiasTest>) -> Result<Self, TestSpecError> {
        let mut ids = BTreeSet::new();
        for test in &tests {
            if !ids.insert(test.id.as_str()) {
                return Err(TestSpecError::DuplicateTestId(test.id.clone()));
            }
        }
        Ok(Self {
            name: name.into(),
            tests,
            provenance: BTreeMap::new(),
        })
    }

    pub fn is_empty(&self) -> bool {
        self.tests.is_empty()
    }

    pub fn len(&self) -> usize {
        self.tests.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagnosticKind {
    EmptyCategory,
    EmptyItems,
    DuplicateItem,
    UnequalTargetSizes,
    MultiWordItem,
    DuplicateTestId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub kind: DiagnosticKind,
    pub test_id: String,
    pub message: String,
}

impl Diagnostic {
    fn new(severity: Severity, kind: DiagnosticKind, test_id: &str, message: String) -> Self {
        Self {
            severity,
            kind,
            test_id: String::from(test_id),
            message,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: [{}] {}", self.severity, self.test_id, self.message)
    }
}

/// Checks every invariant of a test. An empty result means the test is valid.
pub fn validate(test: &BiasTest) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let id = test.id.as_str();
    for role in Role::ALL {
        let set = test.set(role);
        if set.category.trim().is_empty() {
            out.push(Diagnostic::new(
                Severity::Error,
                DiagnosticKind::EmptyCategory,
                id,
                format!("{role}: empty category label"),
            ));
        }
        if set.items.is_empty() {
            out.push(Diagnostic::new(
                Severity::Error,
                DiagnosticKind::EmptyItems,
                id,
                format!("{role}: empty item list"),
            ));
        }
        if let Some(text) = first_duplicate(&set.items) {
            out.push(Diagnostic::new(
                Severity::Error,
                DiagnosticKind::DuplicateItem,
                id,
                format!("{role}: duplicate item {text:?}"),
            ));
        }
    }
    if test.target1.len() != test.target2.len() {
        out.push(Diagnostic::new(
            Severity::Warning,
            DiagnosticKind::UnequalTargetSizes,
            id,
            format!(
                "unequal target sizes: targ1 has {}, targ2 has {}",
                test.target1.len(),
                test.target2.len()
            ),
        ));
    }
    if test.level == Level::Word {
        for role in Role::ALL {
            for item in test.set(role).iter() {
                if item.chars().any(char::is_whitespace) {
                    out.push(Diagnostic::new(
                        Severity::Warning,
                        DiagnosticKind::MultiWordItem,
                        id,
                        format!("multi-word item in word-level test: {role} {item:?}"),
                    ));
                }
            }
        }
    }
    out
}

/// Validates every test and checks id uniqueness across the suite.
pub fn validate_suite(suite: &TestSuite) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut ids = BTreeSet::new();
    for test in &suite.tests {
        if !ids.insert(test.id.as_str()) {
            out.push(Diagnostic::new(
                Severity::Error,
                DiagnosticKind::DuplicateTestId,
                &test.id,
                format!("duplicate test id {:?}", test.id),
            ));
        }
        out.extend(validate(test));
    }
    out
}

/// Deduplicated union of all items in the suite, NFC-normalized, in
/// first-occurrence order (tests in suite order, sets in role order).
pub fn collect_texts(suite: &TestSuite) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for text in suite.tests.iter().flat_map(BiasTest::texts) {
        let text = nfc(text);
        if seen.insert(text.clone()) {
            out.push(text);
        }
    }
    out
}
