use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Max,
    Min,
    Success,
    Failure,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeKind::Max => "max",
            NodeKind::Min => "min",
            NodeKind::Success => "success",
            NodeKind::Failure => "failure",
        })
    }
}

/// A node of a min/max tree or proof tree. `clause` is the 1-based clause
/// number applied at a min-node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofNode {
    pub kind: NodeKind,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clause: Option<usize>,
    pub value: Value,
    #[serde(default)]
    pub truncated: bool,
    #[serde(default)]
    pub children: Vec<ProofNode>,
}

impl ProofNode {
    pub fn success(label: impl Into<String>) -> ProofNode {
        ProofNode {
            kind: NodeKind::Success,
            label: label.into(),
            clause: None,
            value: Value::one(),
            truncated: false,
            children: Vec::new(),
        }
    }

    pub fn failure(label: impl Into<String>, truncated: bool) -> ProofNode {
        ProofNode {
            kind: NodeKind::Failure,
            label: label.into(),
            clause: None,
            value: Value::zero(),
            truncated,
            children: Vec::new(),
        }
    }

    /// Whether this node or any descendant carries the truncation flag.
    pub fn any_truncated(&self) -> bool {
        self.truncated || self.children.iter().any(ProofNode::any_truncated)
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(ProofNode::size).sum::<usize>()
    }

    /// Preorder traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a ProofNode, usize)) {
        self.walk_at(0, f)
    }

    fn walk_at<'a>(&'a self, depth: usize, f: &mut impl FnMut(&'a ProofNode, usize)) {
        f(self, depth);
        for c in &self.children {
            c.walk_at(depth + 1, f);
        }
    }

    /// Indented text form, one node per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.walk(&mut |node, depth| {
            let _ = write!(out, "{:indent$}{}", "", node.kind, indent = depth * 2);
            if let Some(c) = node.clause {
                let _ = write!(out, " #{c}");
            }
            let _ = write!(out, " {} [{}]", node.label, node.value);
            if node.truncated {
                out.push_str(" (truncated)");
            }
            out.push('\n');
        });
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("proof trees always serialize")
    }

    pub fn from_json(text: &str) -> Result<ProofNode, serde_json::Error> {
        serde_json::from_str(text)
    }
}

impl fmt::Display for ProofNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
