//! Unit-height tiles as boundary-profile pairs with exact areas, and tile
//! sets with an offset epsilon.
//!
//! A boundary profile is a step function over rational breakpoint heights
//! `0 = h_0 < h_1 < ... < h_m = 1`, with one horizontal offset per height
//! interval. Canonical form shifts the minimum offset to 0 and merges
//! adjacent intervals with equal offsets, so profile equality is exact and
//! translation-invariant.
//!
//! Tile sets have multiset semantics: duplicate tiles stay as parallel
//! edges of the transfer multigraph and are counted with multiplicity, so
//! no reshaping into uniquely-fitting pairs is ever needed.

use std::sync::Arc;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exactnum::{FieldElement, IrrationalBasis, Rat, Sign, DEFAULT_SIGN_BUDGET};

/// A height-1 boundary curve as a step function.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Profile {
    /// `m + 1` heights, first 0 and last 1, strictly increasing.
    heights: Vec<Rat>,
    /// `m` horizontal offsets, one per interval `[h_j, h_{j+1}]`.
    offsets: Vec<FieldElement>,
}

impl Profile {
    pub fn new(heights: Vec<Rat>, offsets: Vec<FieldElement>) -> Result<Self> {
        if heights.len() < 2 || offsets.len() + 1 != heights.len() {
            return Err(Error::InconsistentProfile);
        }
        if !heights.first().unwrap().is_zero() || *heights.last().unwrap() != Rat::from_integer(1.into()) {
            return Err(Error::InconsistentProfile);
        }
        if heights.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InconsistentProfile);
        }
        let dim = offsets[0].dim();
        if offsets.iter().any(|o| o.dim() != dim) {
            return Err(Error::BasisMismatch { left_dim: dim, right_dim: 0 });
        }
        Ok(Profile { heights, offsets })
    }

    /// The vertical line: one interval, offset 0.
    pub fn vertical(dim: usize) -> Self {
        Profile {
            heights: vec![Rat::zero(), Rat::from_integer(1.into())],
            offsets: vec![FieldElement::zero(dim)],
        }
    }

    pub fn is_vertical(&self) -> bool {
        self.offsets.len() == 1 && self.offsets[0].is_zero()
    }

    pub fn heights(&self) -> &[Rat] {
        &self.heights
    }

    pub fn offsets(&self) -> &[FieldElement] {
        &self.offsets
    }

    pub fn dim(&self) -> usize {
        self.offsets[0].dim()
    }

    /// Canonical form: minimum offset shifted to 0, equal neighbours merged.
    pub fn canonical(&self, basis: &IrrationalBasis, budget: u32) -> Result<Profile> {
        let mut min = self.offsets[0].clone();
        for o in &self.offsets[1..] {
            if basis.sign_budget(&o.checked_sub(&min)?, budget)? == Sign::Negative {
                min = o.clone();
            }
        }
        let mut heights = vec![self.heights[0].clone()];
        let mut offsets: Vec<FieldElement> = Vec::new();
        for (j, o) in self.offsets.iter().enumerate() {
            let shifted = o.checked_sub(&min)?;
            if let Some(last) = offsets.last() {
                if *last == shifted {
                    heights.pop();
                }
            }
            if offsets.last() != Some(&shifted) {
                offsets.push(shifted);
            } else {
                // merged: extend the previous interval
            }
            heights.push(self.heights[j + 1].clone());
        }
        Ok(Profile { heights, offsets })
    }

    /// Offset at a given height interval of a common refinement grid.
    fn offset_at(&self, h: &Rat) -> &FieldElement {
        // h is the lower end of some refined interval; find the segment
        // containing it.
        let mut idx = 0;
        for (j, w) in self.heights.windows(2).enumerate() {
            if &w[0] <= h && h < &w[1] {
                idx = j;
                break;
            }
        }
        &self.offsets[idx]
    }
}

/// An axis-parallel simply connected polygon of height 1, described by its
/// left and right boundary profiles and exact area.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Tile {
    pub left: Profile,
    pub right: Profile,
    pub area: FieldElement,
}

impl Tile {
    pub fn new(left: Profile, right: Profile, area: FieldElement) -> Self {
        Tile { left, right, area }
    }

    /// A rectangle `[1 x area]`.
    pub fn rect(dim: usize, area: FieldElement) -> Self {
        Tile { left: Profile::vertical(dim), right: Profile::vertical(dim), area }
    }
}

/// Diagnostics from [`validate_tile`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TileDiagnostics {
    Ok,
    NonpositiveArea,
    InconsistentProfile,
}

/// Check area positivity and geometric consistency.
///
/// The horizontal placement `s` of the right profile is determined by the
/// area; the tile is consistent iff the width `right_j + s - left_j` is
/// positive at every height interval of the merged breakpoint grid.
pub fn validate_tile(basis: &IrrationalBasis, tile: &Tile, budget: u32) -> Result<TileDiagnostics> {
    if basis.sign_budget(&tile.area, budget)? != Sign::Positive {
        return Ok(TileDiagnostics::NonpositiveArea);
    }
    // Merge the two breakpoint grids.
    let mut grid: Vec<Rat> = tile.left.heights.iter().chain(tile.right.heights.iter()).cloned().collect();
    grid.sort();
    grid.dedup();
    // area = s + sum_j len_j * (r_j - l_j), since the interval lengths sum to 1.
    let dim = tile.area.dim();
    let mut integral = FieldElement::zero(dim);
    for w in grid.windows(2) {
        let len = &w[1] - &w[0];
        let diff = tile.right.offset_at(&w[0]).checked_sub(tile.left.offset_at(&w[0]))?;
        integral = integral.checked_add(&diff.scale(&len))?;
    }
    let shift = tile.area.checked_sub(&integral)?;
    for w in grid.windows(2) {
        let width = tile
            .right
            .offset_at(&w[0])
            .checked_add(&shift)?
            .checked_sub(tile.left.offset_at(&w[0]))?;
        if basis.sign_budget(&width, budget)? != Sign::Positive {
            return Ok(TileDiagnostics::InconsistentProfile);
        }
    }
    Ok(TileDiagnostics::Ok)
}

/// A finite multiset of tiles sharing one basis, plus the rectangle offset.
#[derive(Clone, Debug)]
pub struct TileSet {
    pub basis: Arc<IrrationalBasis>,
    pub tiles: Vec<Tile>,
    pub epsilon: FieldElement,
}

impl TileSet {
    pub fn new(basis: Arc<IrrationalBasis>, tiles: Vec<Tile>, epsilon: FieldElement) -> Result<Self> {
        let dim = basis.dim();
        if epsilon.dim() != dim {
            return Err(Error::BasisMismatch { left_dim: epsilon.dim(), right_dim: dim });
        }
        for t in &tiles {
            if t.area.dim() != dim || t.left.dim() != dim || t.right.dim() != dim {
                return Err(Error::BasisMismatch { left_dim: t.area.dim(), right_dim: dim });
            }
        }
        if !epsilon.is_zero() && basis.sign_budget(&epsilon, DEFAULT_SIGN_BUDGET)? == Sign::Negative {
            return Err(Error::NonpositiveArea);
        }
        Ok(TileSet { basis, tiles, epsilon })
    }

    /// Validate every tile, reporting the first violation.
    pub fn validate(&self, budget: u32) -> Result<()> {
        for t in &self.tiles {
            match validate_tile(&self.basis, t, budget)? {
                TileDiagnostics::Ok => {}
                TileDiagnostics::NonpositiveArea => return Err(Error::NonpositiveArea),
                TileDiagnostics::InconsistentProfile => return Err(Error::InconsistentProfile),
            }
        }
        Ok(())
    }
}

/// All distinct boundary profiles of a tile set, canonicalized, with the
/// vertical-line profile first and the rest in a deterministic order
/// (breakpoint count, then breakpoints, then offsets).
pub fn canonical_profiles(ts: &TileSet, budget: u32) -> Result<Vec<Profile>> {
    let dim = ts.basis.dim();
    let mut out: Vec<Profile> = vec![Profile::vertical(dim)];
    let mut rest: Vec<Profile> = Vec::new();
    for t in &ts.tiles {
        for p in [&t.left, &t.right] {
            let c = p.canonical(&ts.basis, budget)?;
            if !c.is_vertical() && !rest.contains(&c) {
                rest.push(c);
            }
        }
    }
    rest.sort_by(|a, b| {
        (a.heights.len(), &a.heights, &a.offsets).cmp(&(b.heights.len(), &b.heights, &b.offsets))
    });
    out.extend(rest);
    Ok(out)
}
