//! Line-delimited JSON dataset files.
//!
//! Each line holds one object with `prompt`, `code` and an optional
//! `language_tag`. Unknown fields ride along untouched. A record with empty
//! `code` must carry `"empty": true`; generators emit that marker so a blank
//! generation survives the file boundary and can be classified later.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: missing field `{field}`")]
    MissingField { line: usize, field: &'static str },
    #[error("line {line}: field `{field}` must be {expected}")]
    InvalidField {
        line: usize,
        field: &'static str,
        expected: &'static str,
    },
    #[error("line {line}: empty `code` without an `\"empty\": true` marker")]
    EmptyCode { line: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum LanguageTag {
    #[default]
    MiniLang,
    Other(String),
}

impl From<String> for LanguageTag {
    fn from(s: String) -> Self {
        if s == "MiniLang" {
            LanguageTag::MiniLang
        } else {
            LanguageTag::Other(s)
        }
    }
}

impl From<LanguageTag> for String {
    fn from(t: LanguageTag) -> Self {
        t.to_string()
    }
}

impl fmt::Display for LanguageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LanguageTag::MiniLang => f.write_str("MiniLang"),
            LanguageTag::Other(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSnippet {
    pub source: String,
    pub language_tag: LanguageTag,
}

impl CodeSnippet {
    pub fn minilang(source: impl Into<String>) -> Self {
        Self {
            source: source.into(),
            language_tag: LanguageTag::MiniLang,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }
}

/// A public prompt and the code snippet it asks for. Only the snippet is
/// protected; nothing in the crate rewrites the prompt.
///
/// Serializes as one dataset record: `prompt`, `code`, `language_tag` and
/// any extra fields side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Value", into = "Value")]
pub struct PromptCodePair {
    pub prompt: String,
    pub snippet: CodeSnippet,
    /// Fields this crate does not interpret, kept in file order.
    pub extra: Map<String, Value>,
}

impl PromptCodePair {
    pub fn new(prompt: impl Into<String>, code: impl Into<String>) -> Self {
        Self {
            prompt: prompt.into(),
            snippet: CodeSnippet::minilang(code),
            extra: Map::new(),
        }
    }

    pub fn code(&self) -> &str {
        &self.snippet.source
    }

    fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("prompt".into(), Value::String(self.prompt.clone()));
        obj.insert("code".into(), Value::String(self.snippet.source.clone()));
        obj.insert(
            "language_tag".into(),
            Value::String(self.snippet.language_tag.to_string()),
        );
        if self.snippet.is_empty() {
            obj.insert("empty".into(), Value::Bool(true));
        }
        for (k, v) in &self.extra {
            obj.insert(k.clone(), v.clone());
        }
        Value::Object(obj)
    }

    fn from_json(line: usize, value: Value) -> Result<Self, DatasetError> {
        let Value::Object(mut obj) = value else {
            return Err(DatasetError::Parse {
                line,
                message: "record is not a JSON object".into(),
            });
        };
        let prompt = take_string(&mut obj, line, "prompt")?.ok_or(DatasetError::MissingField {
            line,
            field: "prompt",
        })?;
        let code = take_string(&mut obj, line, "code")?.ok_or(DatasetError::MissingField {
            line,
            field: "code",
        })?;
        let language_tag = take_string(&mut obj, line, "language_tag")?
            .map(LanguageTag::from)
            .unwrap_or_default();
        let empty = match obj.shift_remove("empty") {
            None => false,
            Some(Value::Bool(b)) => b,
            Some(_) => {
                return Err(DatasetError::InvalidField {
                    line,
                    field: "empty",
                    expected: "a boolean",
                })
            }
        };
        if code.is_empty() && !empty {
            return Err(DatasetError::EmptyCode { line });
        }
        Ok(Self {
            prompt,
            snippet: CodeSnippet {
                source: code,
                language_tag,
            },
            extra: obj,
        })
    }
}

impl TryFrom<Value> for PromptCodePair {
    type Error = String;

    fn try_from(value: Value) -> Result<Self, String> {
        Self::from_json(0, value).map_err(|e| e.to_string().trim_start_matches("line 0: ").to_string())
    }
}

impl From<PromptCodePair> for Value {
    fn from(pair: PromptCodePair) -> Value {
        pair.to_json()
    }
}

fn take_string(
    obj: &mut Map<String, Value>,
    line: usize,
    field: &'static str,
) -> Result<Option<String>, DatasetError> {
    match obj.shift_remove(field) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(_) => Err(DatasetError::InvalidField {
            line,
            field,
            expected: "a string",
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub id: String,
    pub pairs: Vec<PromptCodePair>,
}

impl Dataset {
    pub fn new(id: impl Into<String>, pairs: Vec<PromptCodePair>) -> Self {
        Self {
            id: id.into(),
            pairs,
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, PromptCodePair> {
        self.pairs.iter()
    }

    pub fn prompts(&self) -> Vec<String> {
        self.pairs.iter().map(|p| p.prompt.clone()).collect()
    }

    pub fn from_jsonl_str(id: impl Into<String>, text: &str) -> Result<Self, DatasetError> {
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let value: Value = serde_json::from_str(raw).map_err(|e| DatasetError::Parse {
                line,
                message: e.to_string(),
            })?;
            pairs.push(PromptCodePair::from_json(line, value)?);
        }
        Ok(Self::new(id, pairs))
    }

    /// Canonical form: one compact object per line, newline-terminated.
    pub fn to_jsonl_string(&self) -> String {
        let mut out = String::new();
        for pair in &self.pairs {
            out.push_str(&pair.to_json().to_string());
            out.push('\n');
        }
        out
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a PromptCodePair;
    type IntoIter = std::slice::Iter<'a, PromptCodePair>;

    fn into_iter(self) -> Self::IntoIter {
        self.pairs.iter()
    }
}

/// Load a dataset; its id is the file stem.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset, DatasetError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Dataset::from_jsonl_str(id, &text)
}

pub fn save_dataset(ds: &Dataset, path: impl AsRef<Path>) -> Result<(), DatasetError> {
    let path = path.as_ref();
    fs::write(path, ds.to_jsonl_string()).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_line_loads() {
        let ds = Dataset::from_jsonl_str("t", r#"{"prompt":"p","code":"x = 1"}"#).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.pairs[0].snippet.language_tag, LanguageTag::MiniLang);
    }

    #[test]
    fn missing_code_reports_line() {
        let text = "{\"prompt\":\"a\",\"code\":\"b\"}\n{\"prompt\":\"p\"}\n";
        match Dataset::from_jsonl_str("t", text) {
            Err(DatasetError::MissingField { line: 2, field: "code" }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        let err = Dataset::from_jsonl_str("t", "{\"prompt\": ").unwrap_err();
        assert!(matches!(err, DatasetError::Parse { line: 1, .. }));
    }

    #[test]
    fn empty_code_needs_marker() {
        let err = Dataset::from_jsonl_str("t", r#"{"prompt":"p","code":""}"#).unwrap_err();
        assert!(matches!(err, DatasetError::EmptyCode { line: 1 }));
        let ds = Dataset::from_jsonl_str("t", r#"{"prompt":"p","code":"","empty":true}"#).unwrap();
        assert!(ds.pairs[0].snippet.is_empty());
        assert!(ds.to_jsonl_string().contains("\"empty\":true"));
    }

    #[test]
    fn unknown_fields_survive() {
        let line = r#"{"prompt":"p","code":"c","language_tag":"Java","source_repo":"x/y","n":3}"#;
        let ds = Dataset::from_jsonl_str("t", line).unwrap();
        assert_eq!(ds.pairs[0].snippet.language_tag, LanguageTag::Other("Java".into()));
        assert_eq!(ds.to_jsonl_string().trim_end(), line);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("set.jsonl");
        let ds = Dataset::new(
            "set",
            vec![
                PromptCodePair::new("say \"hi\"", "print(\"hi\")\n"),
                PromptCodePair::new("üñí", "x = 1"),
            ],
        );
        save_dataset(&ds, &path).unwrap();
        let back = load_dataset(&path).unwrap();
        assert_eq!(back, ds);
    }
}
