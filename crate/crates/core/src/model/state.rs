use std::fmt;

use serde::{Deserialize, Serialize};

/// Number of direction sectors (lines) / tangent sectors (arcs).
pub const SECTORS: u8 = 8;
pub const NUM_BASIC: usize = 24;
pub const CONNECTOR1: usize = 24;
pub const CONNECTOR2: usize = 25;
pub const FIRST_CORNER: usize = 26;
pub const NUM_CORNERS: usize = (SECTORS as usize) * (SECTORS as usize - 1);
/// Emitting states of the structured model.
pub const NUM_STRUCTURED: usize = FIRST_CORNER + NUM_CORNERS;

/// What an HMM state models. Directions and sectors count anticlockwise in
/// steps of 45°, sector 0 being the +x axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateKind {
    /// Anticlockwise arc whose tangent lies in `sector`.
    ArcCcw { sector: u8 },
    /// Clockwise arc whose tangent lies in `sector`.
    ArcCw { sector: u8 },
    Line { direction: u8 },
    /// Junction point, first position.
    Connector1,
    /// Junction point, second position.
    Connector2,
    /// Corner where a line of direction `from` meets one of direction `to`.
    LineCorner { from: u8, to: u8 },
}

impl StateKind {
    /// Dense index: arcs anticlockwise 0-7, clockwise 8-15, lines 16-23,
    /// connectors 24-25, line corners 26-81 in `(from, to)` order.
    pub fn index(self) -> usize {
        match self {
            StateKind::ArcCcw { sector } => sector as usize,
            StateKind::ArcCw { sector } => 8 + sector as usize,
            StateKind::Line { direction } => 16 + direction as usize,
            StateKind::Connector1 => CONNECTOR1,
            StateKind::Connector2 => CONNECTOR2,
            StateKind::LineCorner { from, to } => {
                let to_slot = if to < from { to } else { to - 1 };
                FIRST_CORNER + from as usize * 7 + to_slot as usize
            }
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Some(match index {
            0..=7 => StateKind::ArcCcw { sector: index as u8 },
            8..=15 => StateKind::ArcCw { sector: (index - 8) as u8 },
            16..=23 => StateKind::Line { direction: (index - 16) as u8 },
            CONNECTOR1 => StateKind::Connector1,
            CONNECTOR2 => StateKind::Connector2,
            i if i < NUM_STRUCTURED => {
                let k = i - FIRST_CORNER;
                let from = (k / 7) as u8;
                let slot = (k % 7) as u8;
                let to = if slot < from { slot } else { slot + 1 };
                StateKind::LineCorner { from, to }
            }
            _ => return None,
        })
    }

    pub fn is_basic(self) -> bool {
        self.index() < NUM_BASIC
    }

    pub fn is_boundary(self) -> bool {
        matches!(self, StateKind::Connector1 | StateKind::Connector2 | StateKind::LineCorner { .. })
    }

    /// Direction / sector of basic states.
    pub fn sector(self) -> Option<u8> {
        match self {
            StateKind::ArcCcw { sector } | StateKind::ArcCw { sector } => Some(sector),
            StateKind::Line { direction } => Some(direction),
            _ => None,
        }
    }

    /// The same state with every direction index advanced by `steps` sectors.
    pub fn rotated(self, steps: u8) -> Self {
        let r = |s: u8| (s + steps) % SECTORS;
        match self {
            StateKind::ArcCcw { sector } => StateKind::ArcCcw { sector: r(sector) },
            StateKind::ArcCw { sector } => StateKind::ArcCw { sector: r(sector) },
            StateKind::Line { direction } => StateKind::Line { direction: r(direction) },
            StateKind::LineCorner { from, to } => StateKind::LineCorner { from: r(from), to: r(to) },
            other => other,
        }
    }

    pub fn basic_states() -> impl Iterator<Item = StateKind> {
        (0..NUM_BASIC).filter_map(StateKind::from_index)
    }
}

impl fmt::Display for StateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateKind::ArcCcw { sector } => write!(f, "arc_ccw[{sector}]"),
            StateKind::ArcCw { sector } => write!(f, "arc_cw[{sector}]"),
            StateKind::Line { direction } => write!(f, "line[{direction}]"),
            StateKind::Connector1 => f.write_str("connector1"),
            StateKind::Connector2 => f.write_str("connector2"),
            StateKind::LineCorner { from, to } => write!(f, "corner[{from}->{to}]"),
        }
    }
}

/// A state of a built model: its position in the model plus what it models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateId {
    pub index: usize,
    pub kind: StateKind,
}

impl StateId {
    pub fn of(kind: StateKind) -> Self {
        Self { index: kind.index(), kind }
    }
}
