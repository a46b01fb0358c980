//! Rule-based PII detection and masking.

use regex::Regex;
use serde::Serialize;

use crate::evaluation::PiiCategory;

#[derive(Debug, Clone)]
struct Rule {
    category: PiiCategory,
    pattern: Regex,
    /// Capture group holding the sensitive value; 0 for the whole match.
    group: usize,
}

/// Ordered per-category patterns with one mask token per category.
///
/// Email and IP address rules match anywhere. Password, username and name
/// rules match string literals assigned to suggestively named keys, e.g.
/// `password = "..."`; values that are already mask tokens are left alone,
/// which is what makes masking idempotent.
#[derive(Debug, Clone)]
pub struct SecretDetector {
    rules: Vec<Rule>,
    mask_token: Regex,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SecretMatch {
    pub category: PiiCategory,
    pub start: usize,
    pub end: usize,
}

pub fn mask_token(category: PiiCategory) -> &'static str {
    match category {
        PiiCategory::Email => "<EMAIL>",
        PiiCategory::Name => "<NAME>",
        PiiCategory::IpAddress => "<IP_ADDRESS>",
        PiiCategory::Password => "<PASSWORD>",
        PiiCategory::Username => "<USERNAME>",
    }
}

fn key_value(keys: &str) -> Regex {
    // the key, optional spaces, '=' or ':', then a single- or double-quoted value
    Regex::new(&format!(r#"(?i)\b(?:{keys})\s*[=:]\s*(?:"([^"\n]*)"|'([^'\n]*)')"#)).expect("valid rule")
}

impl Default for SecretDetector {
    fn default() -> Self {
        let rule = |category, pattern: Regex, group| Rule {
            category,
            pattern,
            group,
        };
        Self {
            rules: vec![
                rule(
                    PiiCategory::Email,
                    Regex::new(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}").unwrap(),
                    0,
                ),
                rule(PiiCategory::IpAddress, Regex::new(r"\b\d{1,3}(?:\.\d{1,3}){3}\b").unwrap(), 0),
                rule(PiiCategory::Password, key_value(r"\w*(?:password|passwd|pwd|secret|passphrase)\w*"), 1),
                rule(PiiCategory::Username, key_value(r"\w*(?:user_?name|login|handle)\w*|user"), 1),
                rule(PiiCategory::Name, key_value(r"(?:\w*_)?name|identifier|author|owner"), 1),
            ],
            mask_token: Regex::new(r"^<[A-Z_]+>$").unwrap(),
        }
    }
}

impl SecretDetector {
    fn rule_matches(&self, rule: &Rule, text: &str) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for caps in rule.pattern.captures_iter(text) {
            let m = if rule.group == 0 {
                caps.get(0)
            } else {
                // double-quoted value in group 1, single-quoted in group 2
                caps.get(rule.group).or_else(|| caps.get(rule.group + 1))
            };
            if let Some(m) = m {
                if !m.as_str().is_empty() && !self.mask_token.is_match(m.as_str()) {
                    out.push((m.start(), m.end()));
                }
            }
        }
        out
    }

    /// Unmasked PII occurrences, in rule order then position.
    pub fn find(&self, text: &str) -> Vec<SecretMatch> {
        self.rules
            .iter()
            .flat_map(|r| {
                self.rule_matches(r, text).into_iter().map(|(start, end)| SecretMatch {
                    category: r.category,
                    start,
                    end,
                })
            })
            .collect()
    }

    /// Applies the rules in order, each to the output of the previous one.
    pub fn mask(&self, text: &str) -> String {
        let mut current = text.to_string();
        for rule in &self.rules {
            let spans = self.rule_matches(rule, &current);
            if spans.is_empty() {
                continue;
            }
            let token = mask_token(rule.category);
            let mut out = String::with_capacity(current.len());
            let mut last = 0;
            for (s, e) in spans {
                out.push_str(&current[last..s]);
                out.push_str(token);
                last = e;
            }
            out.push_str(&current[last..]);
            current = out;
        }
        current
    }
}

pub fn mask_pii(text: &str, det: &SecretDetector) -> String {
    det.mask(text)
}
