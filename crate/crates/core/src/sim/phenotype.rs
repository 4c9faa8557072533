use std::collections::{HashSet, VecDeque};

use crate::genome::{ControllerGenes, Descriptor, Genome, ModuleKind, MorphLimits, MorphNode, SlotPath};

use super::geometry::{IVec3, Rot};

/// Face directions of the child slots in a module's local frame.
/// Local +X points away from the parent.
pub const BRICK_SLOTS: [IVec3; 5] = [[1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]];
pub const SERVO_SLOTS: [IVec3; 3] = [[1, 0, 0], [0, 1, 0], [0, -1, 0]];

/// Servo hinge axis in the servo's local frame.
pub const HINGE_AXIS: IVec3 = [0, 1, 0];

pub fn slot_faces(kind: ModuleKind) -> &'static [IVec3] {
    match kind {
        ModuleKind::Brick => &BRICK_SLOTS,
        ModuleKind::Servo => &SERVO_SLOTS,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlacedModule {
    pub kind: ModuleKind,
    /// Genotype path of the node this module realizes.
    pub path: SlotPath,
    pub parent: Option<usize>,
    pub depth: usize,
    pub cell: IVec3,
    /// Rest orientation of the local frame in body coordinates.
    pub frame: Rot,
    /// Attachment face in the parent's local frame (zero for the root).
    pub face: IVec3,
    /// Rest rotation relative to the parent frame (slot face then orientation).
    pub relative: Rot,
    /// Rigid segment id; every servo starts a new segment.
    pub segment: usize,
    /// Index into [`Phenotype::joints`] for servos.
    pub joint: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Joint {
    pub module: usize,
    /// Hinge axis in body coordinates at rest.
    pub axis: IVec3,
    pub genes: ControllerGenes,
}

/// The realized robot. Modules are listed in breadth-first placement order,
/// so every parent precedes its children.
#[derive(Clone, Debug, PartialEq)]
pub struct Phenotype {
    pub modules: Vec<PlacedModule>,
    pub joints: Vec<Joint>,
    pub descriptor: Descriptor,
    open_slots: Vec<(SlotPath, usize)>,
}

impl Phenotype {
    pub fn len(&self) -> usize {
        self.modules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modules.is_empty()
    }

    /// Empty genotype slots on placed modules where a new module would be
    /// realized: inside the depth cap, onto a free cell, with room under the
    /// size cap. Listed in placement order.
    pub fn open_slots(&self) -> &[(SlotPath, usize)] {
        &self.open_slots
    }

    pub fn segment_count(&self) -> usize {
        self.modules.iter().map(|m| m.segment + 1).max().unwrap_or(0)
    }
}

/// Places the genotype on the unit lattice breadth-first from a root at the
/// origin. A node is skipped, together with its subtree, when it lies deeper
/// than `delta`, when `eta` modules are already placed, or when its cell is
/// taken by an earlier module.
pub fn build_phenotype(genome: &Genome, limits: &MorphLimits) -> Phenotype {
    struct Pending<'a> {
        node: &'a MorphNode,
        path: SlotPath,
        parent: Option<usize>,
        depth: usize,
        face: IVec3,
    }

    let mut modules: Vec<PlacedModule> = Vec::new();
    let mut joints = Vec::new();
    let mut occupied: HashSet<IVec3> = HashSet::new();
    let mut candidates: Vec<(usize, usize, IVec3)> = Vec::new();
    let mut segments = 0;

    let mut queue = VecDeque::new();
    queue.push_back(Pending { node: genome.root(), path: Vec::new(), parent: None, depth: 0, face: [0, 0, 0] });

    while let Some(item) = queue.pop_front() {
        if modules.len() >= limits.eta || item.depth > limits.delta {
            continue;
        }
        let twist = Rot::about_x(item.node.orientation.quarter_turns());
        let (cell, relative, frame) = match item.parent {
            None => ([0, 0, 0], twist, twist),
            Some(p) => {
                let parent = &modules[p];
                let step = parent.frame.apply(item.face);
                let cell = [parent.cell[0] + step[0], parent.cell[1] + step[1], parent.cell[2] + step[2]];
                let relative = Rot::onto_face(item.face).compose(&twist);
                (cell, relative, parent.frame.compose(&relative))
            }
        };
        if !occupied.insert(cell) {
            continue;
        }
        let segment = match item.parent {
            None => 0,
            Some(_) if item.node.kind().is_joint() => {
                segments += 1;
                segments
            }
            Some(p) => modules[p].segment,
        };
        let index = modules.len();
        let joint = match &item.node.module {
            crate::genome::Module::Servo(genes) => {
                joints.push(Joint { module: index, axis: frame.apply(HINGE_AXIS), genes: *genes });
                Some(joints.len() - 1)
            }
            crate::genome::Module::Brick => None,
        };
        for (slot, (child, &face)) in item.node.children().iter().zip(slot_faces(item.node.kind())).enumerate() {
            match child {
                Some(child) => {
                    let mut path = item.path.clone();
                    path.push(slot);
                    queue.push_back(Pending { node: child, path, parent: Some(index), depth: item.depth + 1, face });
                }
                None if item.depth < limits.delta => {
                    let step = frame.apply(face);
                    candidates.push((index, slot, [cell[0] + step[0], cell[1] + step[1], cell[2] + step[2]]));
                }
                None => {}
            }
        }
        modules.push(PlacedModule {
            kind: item.node.kind(),
            path: item.path,
            parent: item.parent,
            depth: item.depth,
            cell,
            frame,
            face: item.face,
            relative,
            segment,
            joint,
        });
    }

    let open_slots = if modules.len() < limits.eta {
        candidates
            .into_iter()
            .filter(|(_, _, cell)| !occupied.contains(cell))
            .map(|(module, slot, _)| (modules[module].path.clone(), slot))
            .collect()
    } else {
        Vec::new()
    };

    let j = joints.len();
    Phenotype { descriptor: Descriptor::new(modules.len() - j, j), modules, joints, open_slots }
}
