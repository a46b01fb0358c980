use serde::{Deserialize, Serialize};

use super::ast::{NodeKind, Span};
use super::{parse, ParseError};

/// A structural node together with the exact source slice it covers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuralSpan {
    pub node_kind: NodeKind,
    pub span: Span,
    pub tokens: String,
}

/// One span per `FunctionDef`, `If`, `For`, `While` and `Return` node, in
/// source (pre-order) order.
pub fn extract_structural_tokens(source: &str) -> Result<Vec<StructuralSpan>, ParseError> {
    let tree = parse(source)?;
    let mut out = Vec::new();
    tree.walk(&mut |node| {
        if node.kind.is_structural() {
            out.push(StructuralSpan {
                node_kind: node.kind,
                span: node.span,
                tokens: source[node.span.range()].to_string(),
            });
        }
    });
    Ok(out)
}

/// Sorted, de-duplicated byte offsets covered by any of `spans`.
pub fn structural_offsets(spans: &[StructuralSpan]) -> Vec<usize> {
    let mut offsets: Vec<usize> = spans.iter().flat_map(|s| s.span.range()).collect();
    offsets.sort_unstable();
    offsets.dedup();
    offsets
}
