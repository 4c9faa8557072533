//! Text form of a genome.
//!
//! A genome is stored as a single-line JSON document:
//!
//! ```text
//! {"version":1,"root":{"kind":"brick","orientation":0,"children":[null,{"kind":"servo",
//!   "orientation":2,"genes":{"alpha":0.5,"omega":1.0,"phi":0.0,"offset":0.0},
//!   "children":[null,null,null]},null,null,null]}}
//! ```
//!
//! `children` always has one entry per connection slot (5 for a brick, 3 for
//! a servo); `genes` is present exactly on servos. Floats are written in
//! shortest round-trip form, so a decoded genome is bit-identical.

use serde::{Deserialize, Serialize};

use super::{ControllerGenes, Genome, GenomeError, Module, ModuleKind, MorphNode, Orientation};

pub const GENOME_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum GenomeParseError {
    #[error("malformed genome text at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unsupported genome schema version {0} (expected {GENOME_SCHEMA_VERSION})")]
    Version(u32),
    #[error("invalid genome: {0}")]
    Invalid(#[from] GenomeError),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    version: u32,
    root: NodeRepr,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRepr {
    kind: ModuleKind,
    orientation: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    genes: Option<ControllerGenes>,
    children: Vec<Option<NodeRepr>>,
}

impl From<&MorphNode> for NodeRepr {
    fn from(node: &MorphNode) -> Self {
        NodeRepr {
            kind: node.kind(),
            orientation: node.orientation.quarter_turns(),
            genes: node.module.genes().copied(),
            children: node.children().iter().map(|c| c.as_ref().map(NodeRepr::from)).collect(),
        }
    }
}

impl TryFrom<NodeRepr> for MorphNode {
    type Error = GenomeError;

    fn try_from(repr: NodeRepr) -> Result<Self, Self::Error> {
        let orientation = Orientation::new(repr.orientation).ok_or(GenomeError::BadOrientation(repr.orientation))?;
        let module = match (repr.kind, repr.genes) {
            (ModuleKind::Brick, None) => Module::Brick,
            (ModuleKind::Brick, Some(_)) => return Err(GenomeError::UnexpectedGenes),
            (ModuleKind::Servo, Some(g)) => Module::Servo(g),
            (ModuleKind::Servo, None) => return Err(GenomeError::MissingGenes),
        };
        let children = repr
            .children
            .into_iter()
            .map(|c| c.map(MorphNode::try_from).transpose())
            .collect::<Result<Vec<_>, _>>()?;
        MorphNode::from_parts(module, orientation, children)
    }
}

impl Genome {
    pub fn to_text(&self) -> String {
        let doc = Document { version: GENOME_SCHEMA_VERSION, root: NodeRepr::from(self.root()) };
        serde_json::to_string(&doc).expect("genome documents always serialize")
    }

    pub fn from_text(text: &str) -> Result<Genome, GenomeParseError> {
        let doc: Document = serde_json::from_str(text).map_err(|e| GenomeParseError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if doc.version != GENOME_SCHEMA_VERSION {
            return Err(GenomeParseError::Version(doc.version));
        }
        let root = MorphNode::try_from(doc.root)?;
        Ok(Genome::new(root)?)
    }
}
