use serde::{Deserialize, Serialize};

use super::{TileAddress, TileBox};
use crate::error::{Error, Result};
use crate::pillow::{Color, MapSpec};

/// The four 0-edges of the equator, each joining two corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeLabel {
    Bottom,
    Right,
    Top,
    Left,
}

impl EdgeLabel {
    pub const ALL: [EdgeLabel; 4] = [EdgeLabel::Bottom, EdgeLabel::Right, EdgeLabel::Top, EdgeLabel::Left];

    /// Corner endpoints in face coordinates.
    pub fn endpoints(self) -> ((f64, f64), (f64, f64)) {
        match self {
            EdgeLabel::Bottom => ((0.0, 0.0), (1.0, 0.0)),
            EdgeLabel::Right => ((1.0, 0.0), (1.0, 1.0)),
            EdgeLabel::Top => ((0.0, 1.0), (1.0, 1.0)),
            EdgeLabel::Left => ((0.0, 0.0), (0.0, 1.0)),
        }
    }

    fn horizontal(self) -> bool {
        matches!(self, EdgeLabel::Bottom | EdgeLabel::Top)
    }

    fn at_one(self) -> bool {
        matches!(self, EdgeLabel::Top | EdgeLabel::Right)
    }
}

/// A segment on one face. Segments on the equator are reported on the white
/// face.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub face: Color,
    pub start: (f64, f64),
    pub end: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairPartner {
    pub white: TileAddress,
    pub white_box: TileBox,
    pub shared_edge: Segment,
}

/// Box-level partner of a black tile: the white tile across the side that
/// `fⁿ` maps onto `e0`, and that side.
pub fn partner_box(spec: MapSpec, e0: EdgeLabel, black: &TileBox) -> Result<(TileBox, Segment)> {
    if black.level == 0 || black.color() != Color::Black {
        return Err(Error::Precondition(format!("{black:?} is not a black tile of positive level")));
    }
    let side = spec.side_count(black.level)?;
    let (even_a, even_b) = black.orientation();
    let even = if e0.horizontal() { even_b } else { even_a };
    // local coordinate of the preimage side: equal to the image one when the
    // axis keeps its orientation
    let local_one = e0.at_one() == even;
    let idx = if e0.horizontal() { black.b } else { black.a };
    let (neighbor_idx, face) = if local_one {
        if idx + 1 == side {
            (idx, black.face.opposite())
        } else {
            (idx + 1, black.face)
        }
    } else if idx == 0 {
        (0, black.face.opposite())
    } else {
        (idx - 1, black.face)
    };
    let partner = if e0.horizontal() {
        TileBox { b: neighbor_idx, face, ..*black }
    } else {
        TileBox { a: neighbor_idx, face, ..*black }
    };
    if partner.color() != Color::White {
        return Err(Error::Internal(format!("partner {partner:?} of {black:?} is not white")));
    }
    let s = side as f64;
    let fixed = (idx + local_one as u64) as f64 / s;
    let (lo, hi) = if e0.horizontal() {
        ((black.a as f64 / s, fixed), ((black.a + 1) as f64 / s, fixed))
    } else {
        ((fixed, black.b as f64 / s), (fixed, (black.b + 1) as f64 / s))
    };
    let on_equator = fixed == 0.0 || fixed == 1.0;
    let seg_face = if on_equator { Color::White } else { black.face };
    Ok((partner, Segment { face: seg_face, start: lo, end: hi }))
}

/// The white tile paired with a black tile of the full map for the edge `e0`.
pub fn pair_partner(spec: MapSpec, e0: EdgeLabel, black: &TileAddress) -> Result<PairPartner> {
    let bx = black.tile_box(spec);
    let (white_box, shared_edge) = partner_box(spec, e0, &bx)?;
    let white = white_box
        .address(spec)
        .ok_or_else(|| Error::Internal("partner at level 0".into()))?;
    Ok(PairPartner { white, white_box, shared_edge })
}
