//! Axis-aligned boxes, IoU and COCO area buckets.

use alloc::vec::Vec;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Axis-aligned rectangle in pixel coordinates, `(x, y)` is the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub const fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    pub fn from_corners(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        Self::new(x1, y1, x2 - x1, y2 - y1)
    }

    pub fn from_center(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        Self::new(cx - 0.5 * w, cy - 0.5 * h, w, h)
    }

    /// Finite coordinates and strictly positive size.
    pub fn is_valid(&self) -> bool {
        self.x.is_finite()
            && self.y.is_finite()
            && self.w.is_finite()
            && self.h.is_finite()
            && self.w > 0.0
            && self.h > 0.0
    }

    #[inline]
    pub fn x2(&self) -> f64 {
        self.x + self.w
    }

    #[inline]
    pub fn y2(&self) -> f64 {
        self.y + self.h
    }

    #[inline]
    pub fn center(&self) -> (f64, f64) {
        (self.x + 0.5 * self.w, self.y + 0.5 * self.h)
    }

    #[inline]
    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    /// Width over height.
    #[inline]
    pub fn aspect_ratio(&self) -> f64 {
        self.w / self.h
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        Self::new(self.x + dx, self.y + dy, self.w, self.h)
    }

    /// Scale about the origin, independently per axis.
    pub fn scale(&self, sx: f64, sy: f64) -> Self {
        Self::new(self.x * sx, self.y * sy, self.w * sx, self.h * sy)
    }

    /// Intersection with `[0, width] x [0, height]`, `None` when nothing is left.
    pub fn clip(&self, width: f64, height: f64) -> Option<Self> {
        let x1 = self.x.max(0.0);
        let y1 = self.y.max(0.0);
        let x2 = self.x2().min(width);
        let y2 = self.y2().min(height);
        if x2 > x1 && y2 > y1 {
            Some(Self::from_corners(x1, y1, x2, y2))
        } else {
            None
        }
    }

    /// True when the box lies entirely inside `[0, width] x [0, height]`.
    pub fn within(&self, width: f64, height: f64) -> bool {
        self.x >= 0.0 && self.y >= 0.0 && self.x2() <= width && self.y2() <= height
    }

    /// `(x2 - x1) * (y2 - y1)`, consistent with [`BBox::intersection_area`].
    #[inline]
    pub fn corner_area(&self) -> f64 {
        (self.x2() - self.x) * (self.y2() - self.y)
    }

    pub fn intersection_area(&self, other: &Self) -> f64 {
        let iw = self.x2().min(other.x2()) - self.x.max(other.x);
        let ih = self.y2().min(other.y2()) - self.y.max(other.y);
        if iw <= 0.0 || ih <= 0.0 {
            0.0
        } else {
            iw * ih
        }
    }
}

/// Continuous intersection-over-union (no pixel-inclusive `+1`).
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection_area(b);
    if inter <= 0.0 {
        return 0.0;
    }
    // corner-form areas so that identical boxes give exactly 1
    let union = a.corner_area() + b.corner_area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).min(1.0)
    }
}

/// Row-major `rows x cols` IoU matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct IouMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl IouMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

pub fn pairwise_iou(lhs: &[BBox], rhs: &[BBox]) -> Result<IouMatrix> {
    if lhs.is_empty() || rhs.is_empty() {
        return Err(Error::EmptyInput("pairwise_iou needs two non-empty box lists"));
    }
    let mut data = Vec::with_capacity(lhs.len() * rhs.len());
    for a in lhs {
        data.extend(rhs.iter().map(|b| iou(a, b)));
    }
    Ok(IouMatrix {
        rows: lhs.len(),
        cols: rhs.len(),
        data,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AreaBucket {
    All,
    Small,
    Medium,
    Large,
}

impl AreaBucket {
    pub fn name(self) -> &'static str {
        match self {
            AreaBucket::All => "all",
            AreaBucket::Small => "small",
            AreaBucket::Medium => "medium",
            AreaBucket::Large => "large",
        }
    }
}

/// Half-open area interval `[lo, hi)` in square pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaRange {
    pub bucket: AreaBucket,
    pub lo: f64,
    /// `null` on the wire when unbounded.
    #[serde(with = "unbounded")]
    pub hi: f64,
}

mod unbounded {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> core::result::Result<S::Ok, S::Error> {
        if *v == f64::INFINITY {
            s.serialize_none()
        } else {
            s.serialize_some(v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> core::result::Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

impl AreaRange {
    pub const ALL: AreaRange = AreaRange::new(AreaBucket::All, 0.0, f64::INFINITY);
    pub const SMALL: AreaRange = AreaRange::new(AreaBucket::Small, 0.0, 32.0 * 32.0);
    pub const MEDIUM: AreaRange = AreaRange::new(AreaBucket::Medium, 32.0 * 32.0, 96.0 * 96.0);
    pub const LARGE: AreaRange = AreaRange::new(AreaBucket::Large, 96.0 * 96.0, f64::INFINITY);

    pub const fn new(bucket: AreaBucket, lo: f64, hi: f64) -> Self {
        Self { bucket, lo, hi }
    }

    /// all, small, medium, large.
    pub fn coco() -> Vec<AreaRange> {
        alloc::vec![Self::ALL, Self::SMALL, Self::MEDIUM, Self::LARGE]
    }

    #[inline]
    pub fn contains(&self, area: f64) -> bool {
        area >= self.lo && area < self.hi
    }
}

/// The bucket whose `[lo, hi)` holds the box area. `All` ranges are skipped so
/// passing [`AreaRange::coco`] works.
pub fn area_bucket(b: &BBox, ranges: &[AreaRange]) -> Option<AreaBucket> {
    let area = b.area();
    ranges
        .iter()
        .filter(|r| r.bucket != AreaBucket::All)
        .find(|r| r.contains(area))
        .map(|r| r.bucket)
}
