//! The acting group (Z or Z^2) and its box Folner windows.
//!
//! Elements compose by coordinate-wise addition. Windows keep their elements
//! sorted lexicographically so every sweep over a window visits the group in
//! the same order.

use std::fmt;

use num_rational::Ratio;

use crate::error::{Error, Result};

/// An element of Z^d, d in {1, 2}.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    dim: u8,
    coords: [i64; 2],
}

impl GroupElement {
    pub fn new(coords: &[i64]) -> Result<Self> {
        match *coords {
            [a] => Ok(Self::z(a)),
            [a, b] => Ok(Self::z2(a, b)),
            _ => Err(Error::UnsupportedDimension(coords.len())),
        }
    }

    pub const fn z(a: i64) -> Self {
        Self {
            dim: 1,
            coords: [a, 0],
        }
    }

    pub const fn z2(a: i64, b: i64) -> Self {
        Self {
            dim: 2,
            coords: [a, b],
        }
    }

    pub fn identity(dim: usize) -> Result<Self> {
        match dim {
            1 => Ok(Self::z(0)),
            2 => Ok(Self::z2(0, 0)),
            d => Err(Error::UnsupportedDimension(d)),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords[..self.dim as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.coords == [0, 0]
    }

    /// True when every coordinate is nonnegative (the forward monoid).
    pub fn is_forward(&self) -> bool {
        self.coords().iter().all(|&c| c >= 0)
    }

    pub fn inverse(&self) -> Self {
        Self {
            dim: self.dim,
            coords: [-self.coords[0], -self.coords[1]],
        }
    }

    /// The group law `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(Self {
            dim: self.dim,
            coords: [
                self.coords[0] + other.coords[0],
                self.coords[1] + other.coords[1],
            ],
        })
    }
}

/// Free-function form of [`GroupElement::compose`].
pub fn compose(g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
    g.compose(h)
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.dim {
            1 => write!(f, "({})", self.coords[0]),
            _ => write!(f, "({},{})", self.coords[0], self.coords[1]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    /// `[0, n)^dim`
    Box { dim: usize },
    /// Any other finite set, e.g. a translated box or a hand-picked window.
    Custom { dim: usize },
}

/// A finite nonempty subset of the group, sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FolnerWindow {
    elements: Vec<GroupElement>,
    index_n: usize,
    kind: WindowKind,
}

impl FolnerWindow {
    /// Builds an arbitrary window; duplicates are removed and elements sorted.
    pub fn from_elements(elements: impl IntoIterator<Item = GroupElement>) -> Result<Self> {
        let mut elements: Vec<GroupElement> = elements.into_iter().collect();
        let Some(first) = elements.first() else {
            return Err(Error::EmptyWindow);
        };
        let dim = first.dim();
        if let Some(bad) = elements.iter().find(|g| g.dim() != dim) {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: bad.dim(),
            });
        }
        elements.sort_unstable();
        elements.dedup();
        Ok(Self {
            index_n: elements.len(),
            elements,
            kind: WindowKind::Custom { dim },
        })
    }

    /// The window `{e}`.
    pub fn singleton(dim: usize) -> Result<Self> {
        Self::from_elements([GroupElement::identity(dim)?])
    }

    /// Forward interval `[0, n)` in Z as an integer list shorthand.
    pub fn interval(n: usize) -> Result<Self> {
        folner_box(1, n)
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn iter(&self) -> impl Iterator<Item = &GroupElement> {
        self.elements.iter()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_n(&self) -> usize {
        self.index_n
    }

    pub fn kind(&self) -> WindowKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.elements.binary_search(g).is_ok()
    }

    pub fn is_subset_of(&self, other: &FolnerWindow) -> bool {
        self.elements.iter().all(|g| other.contains(g))
    }

    pub fn is_forward(&self) -> bool {
        self.elements.iter().all(GroupElement::is_forward)
    }

    /// The translate `gF = {g ∘ f : f ∈ F}`.
    pub fn translate(&self, g: &GroupElement) -> Result<Self> {
        let shifted = self
            .elements
            .iter()
            .map(|f| g.compose(f))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Self::from_elements(shifted)?;
        out.index_n = self.index_n;
        Ok(out)
    }

    /// `|gF Δ F| / |F|`, by enumerating both sets.
    pub fn defect(&self, g: &GroupElement) -> Result<Ratio<usize>> {
        let shifted = self.translate(g)?;
        let only_shifted = shifted.iter().filter(|h| !self.contains(h)).count();
        let only_self = self.iter().filter(|h| !shifted.contains(h)).count();
        Ok(Ratio::new(only_shifted + only_self, self.len()))
    }
}

/// The box `[0, n)^d` listed in lexicographic order.
pub fn folner_box(d: usize, n: usize) -> Result<FolnerWindow> {
    if n == 0 {
        return Err(Error::EmptyWindow);
    }
    let side = n as i64;
    let elements: Vec<GroupElement> = match d {
        1 => (0..side).map(GroupElement::z).collect(),
        2 => (0..side)
            .flat_map(|a| (0..side).map(move |b| GroupElement::z2(a, b)))
            .collect(),
        d => return Err(Error::UnsupportedDimension(d)),
    };
    Ok(FolnerWindow {
        elements,
        index_n: n,
        kind: WindowKind::Box { dim: d },
    })
}

pub fn folner_defect(window: &FolnerWindow, g: &GroupElement) -> Result<Ratio<usize>> {
    window.defect(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_examples() {
        let z = GroupElement::z;
        assert_eq!(compose(&z(0), &z(5)).unwrap(), z(5));
        assert_eq!(compose(&z(2), &z(3)).unwrap(), z(5));
        assert_eq!(
            compose(&GroupElement::z2(1, -1), &GroupElement::z2(2, 2)).unwrap(),
            GroupElement::z2(3, 1)
        );
    }

    #[test]
    fn compose_rejects_mixed_dimensions() {
        let err = compose(&GroupElement::z(1), &GroupElement::z2(1, 1)).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { left: 1, right: 2 });
        assert!(GroupElement::new(&[1, 2, 3]).is_err());
    }

    #[test]
    fn box_examples() {
        let w = folner_box(1, 3).unwrap();
        assert_eq!(
            w.elements(),
            &[GroupElement::z(0), GroupElement::z(1), GroupElement::z(2)]
        );
        assert_eq!(folner_box(1, 1).unwrap().elements(), &[GroupElement::z(0)]);
        let w2 = folner_box(2, 2).unwrap();
        assert_eq!(
            w2.elements(),
            &[
                GroupElement::z2(0, 0),
                GroupElement::z2(0, 1),
                GroupElement::z2(1, 0),
                GroupElement::z2(1, 1)
            ]
        );
        assert_eq!(folner_box(2, 5).unwrap().len(), 25);
        assert_eq!(folner_box(1, 0).unwrap_err(), Error::EmptyWindow);
        assert!(folner_box(3, 2).is_err());
    }

    #[test]
    fn defect_examples() {
        let w = folner_box(1, 10).unwrap();
        assert_eq!(w.defect(&GroupElement::z(1)).unwrap(), Ratio::new(2, 10));
        assert_eq!(w.defect(&GroupElement::z(0)).unwrap(), Ratio::new(0, 1));
        let sq = folner_box(2, 4).unwrap();
        assert_eq!(sq.defect(&GroupElement::z2(1, 0)).unwrap(), Ratio::new(1, 2));
        assert_eq!(
            sq.defect(&GroupElement::identity(2).unwrap()).unwrap(),
            Ratio::from_integer(0)
        );
    }

    #[test]
    fn custom_window_sorts_and_dedups() {
        let w = FolnerWindow::from_elements([
            GroupElement::z(3),
            GroupElement::z(-1),
            GroupElement::z(3),
        ])
        .unwrap();
        assert_eq!(w.elements(), &[GroupElement::z(-1), GroupElement::z(3)]);
        assert!(!w.is_forward());
        assert!(FolnerWindow::from_elements([]).is_err());
    }
}
