//! Regenerates the synthetic corpora under `data/`.
//!
//! Run with `cargo run -p privforge-core --example gen_data`. Output is a
//! pure function of the seeds below, so the committed files can be checked
//! by re-running and diffing.

use std::path::Path;

use privforge::corpus::{save_dataset, Dataset, PromptCodePair};
use privforge::minilang::summarize_ast;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VERBS: &[&str] = &["get", "calc", "make", "find", "count", "check", "scale", "step", "pick", "sum"];
const NOUNS: &[&str] = &["total", "score", "limit", "rate", "size", "index", "value", "width", "level", "price"];
const OPS: &[&str] = &["+", "-", "*"];

const FIRST: &[&str] = &["Alma", "Boris", "Cleo", "Dario", "Edda", "Farid", "Greta", "Hugo", "Ines", "Jonas"];
const LAST: &[&str] = &["Brandt", "Castell", "Dorn", "Eckhart", "Falk", "Gruber", "Hollis", "Ivers", "Janssen", "Kroll"];
const DOMAINS: &[&str] = &["mailhub.test", "corpnet.test", "example.test"];

fn name(rng: &mut ChaCha8Rng) -> String {
    format!("{}_{}", VERBS.choose(rng).unwrap(), NOUNS.choose(rng).unwrap())
}

/// A line assigning a PII-looking literal, and the variable it binds.
fn pii_line(rng: &mut ChaCha8Rng) -> (String, &'static str) {
    let first = FIRST.choose(rng).unwrap();
    let last = LAST.choose(rng).unwrap();
    match rng.random_range(0..5) {
        0 => (
            format!(
                "email = \"{}.{}@{}\"",
                first.to_lowercase(),
                last.to_lowercase(),
                DOMAINS.choose(rng).unwrap()
            ),
            "email",
        ),
        1 => (format!("owner = \"{first} {last}\""), "owner"),
        2 => (
            format!(
                "host = \"10.{}.{}.{}\"",
                rng.random_range(0..256),
                rng.random_range(0..256),
                rng.random_range(1..255)
            ),
            "host",
        ),
        3 => (
            format!("password = \"{}{}{}\"", last.to_lowercase(), rng.random_range(10..99), "!x"),
            "password",
        ),
        _ => (
            format!("username = \"{}{}\"", &first.to_lowercase()[..3], rng.random_range(100..999)),
            "username",
        ),
    }
}

/// Parameter names follow one house style: `a`, `b` for two parameters,
/// `n` for one and `s` for an accumulator.
fn snippet(rng: &mut ChaCha8Rng, with_pii: bool) -> String {
    let f = name(rng);
    let mut body = match rng.random_range(0..7) {
        0 => format!("def {f}(a, b):\n    return a {} b\n", OPS.choose(rng).unwrap()),
        1 => format!("def {f}(n):\n    s = 0\n    for i in range(n):\n        s = s + i\n    return s\n"),
        2 => format!("def {f}(a, b):\n    if a > b:\n        return a\n    return b\n"),
        3 => format!(
            "def {f}(n):\n    while n > {}:\n        n = n - {}\n    return n\n",
            rng.random_range(0..5),
            rng.random_range(1..4)
        ),
        4 => format!("def {f}():\n    return {}\n", rng.random_range(0..100)),
        5 => format!("def {f}(n):\n    if n % 2 == 0:\n        return n / 2\n    else:\n        return n * 3 + 1\n"),
        _ => format!("def {f}(n):\n    return n * {}\n", rng.random_range(2..10)),
    };
    if with_pii {
        let (line, var) = pii_line(rng);
        let mut lines: Vec<String> = body.lines().map(str::to_string).collect();
        lines.insert(1, format!("    {line}"));
        lines.insert(2, format!("    print({var})"));
        body = lines.join("\n") + "\n";
    }
    body
}

/// Prompts are the structural summary of the code, sometimes reworded so
/// that round-trip scores spread out instead of all being 1.
fn pair(rng: &mut ChaCha8Rng, code: String) -> PromptCodePair {
    let summary = summarize_ast(&code).expect("generated code parses");
    let prompt = match rng.random_range(0..4) {
        0 => format!("write a helper that {summary}"),
        1 => match summary.split_once("; ") {
            Some((_, rest)) => format!("a function that {rest}"),
            None => summary,
        },
        _ => summary,
    };
    PromptCodePair::new(prompt, code)
}

fn corpus(id: &str, seed: u64, n: usize, pii_rate: f64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = (0..n)
        .map(|_| {
            let pii = rng.random_bool(pii_rate);
            let code = snippet(&mut rng, pii);
            pair(&mut rng, code)
        })
        .collect();
    Dataset::new(id, pairs)
}

fn short_corpus(seed: u64, n: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = (0..n)
        .map(|_| {
            let f = name(&mut rng);
            let code = match rng.random_range(0..3) {
                0 => format!("def {f}(a, b):\n    return a {} b\n", OPS.choose(&mut rng).unwrap()),
                1 => format!("def {f}():\n    return {}\n", rng.random_range(0..100)),
                _ => format!("def {f}(n):\n    return n * {}\n", rng.random_range(2..10)),
            };
            pair(&mut rng, code)
        })
        .collect();
    Dataset::new("audit_mini", pairs)
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    std::fs::create_dir_all(&dir).unwrap();
    save_dataset(&corpus("sensitive", 11, 240, 0.3), dir.join("sensitive.jsonl")).unwrap();
    save_dataset(&corpus("public", 23, 300, 0.0), dir.join("public.jsonl")).unwrap();
    save_dataset(&short_corpus(37, 200), dir.join("audit_mini.jsonl")).unwrap();
}
