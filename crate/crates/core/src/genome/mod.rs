//! Genotype model: a tree of modules rooted at a brick, with the oscillator
//! parameters of every servo stored on the servo node itself.

mod codec;

pub use codec::{GenomeParseError, GENOME_SCHEMA_VERSION};

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::sim::build_phenotype;

/// Joint set-point limit in radians, shared by amplitude, offset and the
/// clamped controller output.
pub const ANGLE_LIMIT: f64 = 1.57;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModuleKind {
    /// Passive rectangular module.
    Brick,
    /// Hinged module driven by a sinusoidal controller.
    Servo,
}

impl ModuleKind {
    pub const fn slot_count(self) -> usize {
        match self {
            ModuleKind::Brick => 5,
            ModuleKind::Servo => 3,
        }
    }

    pub const fn is_joint(self) -> bool {
        matches!(self, ModuleKind::Servo)
    }
}

/// Rotation about the connection axis in quarter turns.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Orientation(u8);

impl Orientation {
    pub const ALL: [Orientation; 4] = [Orientation(0), Orientation(1), Orientation(2), Orientation(3)];

    pub fn new(quarter_turns: u8) -> Option<Self> {
        (quarter_turns < 4).then_some(Orientation(quarter_turns))
    }

    pub fn quarter_turns(self) -> u8 {
        self.0
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Orientation(rng.random_range(0..4))
    }
}

/// Closed interval a controller parameter must stay inside.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamRange {
    pub min: f64,
    pub max: f64,
}

impl ParamRange {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }
}

/// Oscillator parameters of one servo: `angle(t) = alpha * sin(omega * t + phi) + offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControllerGenes {
    pub alpha: f64,
    pub omega: f64,
    pub phi: f64,
    pub offset: f64,
}

impl ControllerGenes {
    pub const ALPHA: ParamRange = ParamRange::new(-ANGLE_LIMIT, ANGLE_LIMIT);
    pub const OMEGA: ParamRange = ParamRange::new(0.2, 2.0);
    pub const PHI: ParamRange = ParamRange::new(-2.0 * PI, 2.0 * PI);
    pub const OFFSET: ParamRange = ParamRange::new(-ANGLE_LIMIT, ANGLE_LIMIT);

    /// Parameter ranges in `[alpha, omega, phi, offset]` order.
    pub const RANGES: [ParamRange; 4] = [Self::ALPHA, Self::OMEGA, Self::PHI, Self::OFFSET];
    pub const NAMES: [&'static str; 4] = ["alpha", "omega", "phi", "offset"];

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let [a, w, p, o] = Self::RANGES.map(|r| rng.random_range(r.min..=r.max));
        Self { alpha: a, omega: w, phi: p, offset: o }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.alpha, self.omega, self.phi, self.offset]
    }

    pub fn from_array([alpha, omega, phi, offset]: [f64; 4]) -> Self {
        Self { alpha, omega, phi, offset }
    }

    pub fn validate(&self) -> Result<(), GenomeError> {
        for ((value, range), name) in self.to_array().into_iter().zip(Self::RANGES).zip(Self::NAMES) {
            if !range.contains(value) {
                return Err(GenomeError::ParameterOutOfRange { name, value, min: range.min, max: range.max });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenomeError {
    #[error("controller parameter `{name}` = {value} outside [{min}, {max}]")]
    ParameterOutOfRange { name: &'static str, value: f64, min: f64, max: f64 },
    #[error("{kind:?} node has {found} child slots, expected {expected}")]
    WrongArity { kind: ModuleKind, found: usize, expected: usize },
    #[error("root module must be a brick")]
    ServoRoot,
    #[error("orientation {0} is not a quarter turn in 0..=3")]
    BadOrientation(u8),
    #[error("servo node is missing controller genes")]
    MissingGenes,
    #[error("brick node must not carry controller genes")]
    UnexpectedGenes,
}

/// Module payload. Servos own their controller genes so that subtree
/// exchange moves control along with morphology.
#[derive(Clone, Debug, PartialEq)]
pub enum Module {
    Brick,
    Servo(ControllerGenes),
}

impl Module {
    pub fn kind(&self) -> ModuleKind {
        match self {
            Module::Brick => ModuleKind::Brick,
            Module::Servo(_) => ModuleKind::Servo,
        }
    }

    pub fn genes(&self) -> Option<&ControllerGenes> {
        match self {
            Module::Brick => None,
            Module::Servo(g) => Some(g),
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.random_bool(0.5) {
            Module::Brick
        } else {
            Module::Servo(ControllerGenes::random(rng))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MorphNode {
    pub module: Module,
    pub orientation: Orientation,
    children: Vec<Option<MorphNode>>,
}

impl MorphNode {
    pub fn new(module: Module, orientation: Orientation) -> Self {
        let arity = module.kind().slot_count();
        Self { module, orientation, children: vec![None; arity] }
    }

    pub fn brick() -> Self {
        Self::new(Module::Brick, Orientation::default())
    }

    pub fn servo(genes: ControllerGenes) -> Self {
        Self::new(Module::Servo(genes), Orientation::default())
    }

    /// Builder-style child attachment. Panics on an out-of-range slot.
    pub fn with_child(mut self, slot: usize, child: MorphNode) -> Self {
        self.children[slot] = Some(child);
        self
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let module = Module::random(rng);
        Self::new(module, Orientation::random(rng))
    }

    pub fn kind(&self) -> ModuleKind {
        self.module.kind()
    }

    pub fn children(&self) -> &[Option<MorphNode>] {
        &self.children
    }

    pub fn child(&self, slot: usize) -> Option<&MorphNode> {
        self.children.get(slot).and_then(Option::as_ref)
    }

    /// Replaces the content of `slot`, returning the previous occupant.
    pub fn set_child(&mut self, slot: usize, child: Option<MorphNode>) -> Option<MorphNode> {
        std::mem::replace(&mut self.children[slot], child)
    }

    pub(crate) fn children_mut(&mut self) -> impl Iterator<Item = &mut MorphNode> {
        self.children.iter_mut().flatten()
    }

    pub(crate) fn from_parts(
        module: Module,
        orientation: Orientation,
        children: Vec<Option<MorphNode>>,
    ) -> Result<Self, GenomeError> {
        let expected = module.kind().slot_count();
        if children.len() != expected {
            return Err(GenomeError::WrongArity { kind: module.kind(), found: children.len(), expected });
        }
        if let Module::Servo(genes) = &module {
            genes.validate()?;
        }
        Ok(Self { module, orientation, children })
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().flatten().map(MorphNode::size).sum::<usize>()
    }
}

/// Slot indices leading from the root to a node; the root is the empty path.
pub type SlotPath = Vec<usize>;

#[derive(Clone, Debug, PartialEq)]
pub struct Genome {
    root: MorphNode,
}

impl Default for Genome {
    fn default() -> Self {
        Self::root_only()
    }
}

impl Genome {
    pub fn new(root: MorphNode) -> Result<Self, GenomeError> {
        if root.kind() != ModuleKind::Brick {
            return Err(GenomeError::ServoRoot);
        }
        Ok(Self { root })
    }

    pub fn root_only() -> Self {
        Self { root: MorphNode::brick() }
    }

    pub fn root(&self) -> &MorphNode {
        &self.root
    }

    /// Number of genotype nodes, realized or not.
    pub fn node_count(&self) -> usize {
        self.root.size()
    }

    pub fn node(&self, path: &[usize]) -> Option<&MorphNode> {
        path.iter().try_fold(&self.root, |node, &slot| node.child(slot))
    }

    pub(crate) fn node_mut(&mut self, path: &[usize]) -> Option<&mut MorphNode> {
        let mut node = &mut self.root;
        for &slot in path {
            node = node.children.get_mut(slot)?.as_mut()?;
        }
        Some(node)
    }

    /// Pre-order list of every node path, root first.
    pub fn paths(&self) -> Vec<SlotPath> {
        fn walk(node: &MorphNode, path: &mut SlotPath, out: &mut Vec<SlotPath>) {
            out.push(path.clone());
            for (slot, child) in node.children.iter().enumerate() {
                if let Some(child) = child {
                    path.push(slot);
                    walk(child, path, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut Vec::new(), &mut out);
        out
    }

    /// Every empty child slot in the genotype as `(parent path, slot)`, pre-order.
    pub fn free_slots(&self) -> Vec<(SlotPath, usize)> {
        self.paths()
            .into_iter()
            .flat_map(|path| {
                let node = self.node(&path).expect("path from traversal");
                node.children
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.is_none())
                    .map(|(slot, _)| (path.clone(), slot))
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    /// Inserts `node` into an empty slot. Returns false if the parent does
    /// not exist or the slot is taken.
    pub fn attach(&mut self, parent: &[usize], slot: usize, node: MorphNode) -> bool {
        match self.node_mut(parent) {
            Some(p) if slot < p.children.len() && p.children[slot].is_none() => {
                p.children[slot] = Some(node);
                true
            }
            _ => false,
        }
    }

    /// Detaches the subtree at a non-root path.
    pub fn detach(&mut self, path: &[usize]) -> Option<MorphNode> {
        let (&slot, parent) = path.split_last()?;
        self.node_mut(parent)?.children.get_mut(slot)?.take()
    }

    /// Swaps the subtree at a non-root `path` for `node`, returning the old one.
    pub(crate) fn replace_subtree(&mut self, path: &[usize], node: MorphNode) -> Option<MorphNode> {
        let (&slot, parent) = path.split_last()?;
        let cell = self.node_mut(parent)?.children.get_mut(slot)?;
        cell.replace(node)
    }

    /// Controller genes of every servo in pre-order.
    pub fn controllers(&self) -> Vec<ControllerGenes> {
        self.paths()
            .iter()
            .filter_map(|p| self.node(p).and_then(|n| n.module.genes().copied()))
            .collect()
    }

    pub(crate) fn for_each_node_mut(&mut self, f: &mut impl FnMut(&mut MorphNode)) {
        fn walk(node: &mut MorphNode, f: &mut impl FnMut(&mut MorphNode)) {
            f(node);
            for child in node.children_mut() {
                walk(child, f);
            }
        }
        walk(&mut self.root, f);
    }

    /// Structural and range check of every node.
    pub fn validate(&self) -> Result<(), GenomeError> {
        fn check(node: &MorphNode) -> Result<(), GenomeError> {
            let expected = node.kind().slot_count();
            if node.children.len() != expected {
                return Err(GenomeError::WrongArity { kind: node.kind(), found: node.children.len(), expected });
            }
            if let Module::Servo(g) = &node.module {
                g.validate()?;
            }
            node.children.iter().flatten().try_for_each(check)
        }
        if self.root.kind() != ModuleKind::Brick {
            return Err(GenomeError::ServoRoot);
        }
        check(&self.root)
    }

    pub fn descriptor(&self, limits: &MorphLimits) -> Descriptor {
        build_phenotype(self, limits).descriptor
    }
}

/// Morphological feature descriptor: `(bricks, servos)` of the realized body.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Descriptor {
    pub m: usize,
    pub j: usize,
}

impl Descriptor {
    pub const fn new(m: usize, j: usize) -> Self {
        Self { m, j }
    }

    pub const fn total(&self) -> usize {
        self.m + self.j
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.m, self.j)
    }
}

/// Size and depth caps on the realized morphology.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphLimits {
    /// Maximum module count.
    pub eta: usize,
    /// Maximum depth below the root.
    pub delta: usize,
}

impl Default for MorphLimits {
    fn default() -> Self {
        Self { eta: 20, delta: 4 }
    }
}

impl MorphLimits {
    pub fn validate(&self) -> Result<(), String> {
        if self.eta < 1 {
            return Err("limits.eta must be at least 1".into());
        }
        Ok(())
    }
}

/// Grows a random morphology to a uniformly drawn size in `1..=eta`.
///
/// Modules are attached one at a time at a uniformly chosen free slot among
/// those that the phenotype builder would realize (inside the depth cap and
/// onto an unoccupied lattice cell), so the realized size equals the drawn
/// size unless the body runs out of such slots.
pub fn random_genome<R: Rng + ?Sized>(rng: &mut R, limits: &MorphLimits) -> Genome {
    let target = rng.random_range(1..=limits.eta);
    random_genome_with_size(rng, limits, target)
}

pub(crate) fn random_genome_with_size<R: Rng + ?Sized>(rng: &mut R, limits: &MorphLimits, target: usize) -> Genome {
    let mut genome = Genome { root: MorphNode::brick().with_orientation(Orientation::random(rng)) };
    let mut size = 1;
    while size < target {
        let phenotype = build_phenotype(&genome, limits);
        let open = phenotype.open_slots();
        if open.is_empty() {
            break;
        }
        let (parent, slot) = open[rng.random_range(0..open.len())].clone();
        let attached = genome.attach(&parent, slot, MorphNode::random(rng));
        debug_assert!(attached);
        size += 1;
    }
    genome
}
