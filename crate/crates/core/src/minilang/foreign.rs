//! Heuristic detection of code written in some other language, and of
//! sources that carry no code at all.

const LINE_PREFIXES: &[&str] = &[
    "public ",
    "private ",
    "protected ",
    "#include",
    "function ",
    "fn ",
    "let ",
    "const ",
    "var ",
    "package ",
    "using ",
    "import java",
    "int main",
    "void ",
    "func ",
    "//",
    "/*",
];

const SUBSTRINGS: &[&str] = &["console.log", "System.out", "=>", "::", "&&", "||", "++"];

/// Code outside string literals and `#` comments, one entry per line.
fn code_lines(source: &str) -> Vec<String> {
    source
        .lines()
        .map(|line| {
            let mut out = String::new();
            let mut quote: Option<char> = None;
            let mut escaped = false;
            for c in line.chars() {
                match quote {
                    Some(q) => {
                        if escaped {
                            escaped = false;
                        } else if c == '\\' {
                            escaped = true;
                        } else if c == q {
                            quote = None;
                            out.push(c);
                        }
                    }
                    None => {
                        if c == '#' && !line.trim_start().starts_with("#include") {
                            break;
                        }
                        if c == '"' || c == '\'' {
                            quote = Some(c);
                        }
                        out.push(c);
                    }
                }
            }
            out
        })
        .collect()
}

/// The first marker of a foreign language found in `source`, if any.
pub fn foreign_marker(source: &str) -> Option<&'static str> {
    for line in code_lines(source) {
        let trimmed = line.trim_start();
        if let Some(p) = LINE_PREFIXES.iter().find(|p| trimmed.starts_with(**p)) {
            return Some(p);
        }
        if let Some(s) = SUBSTRINGS.iter().find(|s| line.contains(**s)) {
            return Some(s);
        }
        for (c, name) in [('{', "{"), ('}', "}"), (';', ";")] {
            if line.contains(c) {
                return Some(name);
            }
        }
    }
    None
}

/// True when nothing but whitespace, comments and markdown fences remains.
pub fn is_blank_source(source: &str) -> bool {
    code_lines(source)
        .iter()
        .all(|l| l.chars().all(|c| c.is_whitespace() || c == '`'))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_common_markers() {
        assert_eq!(foreign_marker("public static void main"), Some("public "));
        assert_eq!(foreign_marker("int x = 1;"), Some(";"));
        assert_eq!(foreign_marker("if (x) {\n}"), Some("{"));
        assert_eq!(foreign_marker("#include <stdio.h>"), Some("#include"));
        assert_eq!(foreign_marker("console.log(1)"), Some("console.log"));
    }

    #[test]
    fn strings_and_comments_are_ignored() {
        assert_eq!(foreign_marker("x = \"{a; b}\"  # c; {d}"), None);
        assert_eq!(foreign_marker("def f(a, b):\n    return a + b"), None);
    }

    #[test]
    fn blankness() {
        assert!(is_blank_source(""));
        assert!(is_blank_source("\n   \n# only a comment\n```\n"));
        assert!(!is_blank_source("x"));
        assert!(!is_blank_source("#include <x>"));
    }
}
