//! Domains, compact sets, and their grid discretizations.
//!
//! A [`Grid`] is a uniform lattice over the bounding box of a planar domain,
//! with every node classified as exterior, boundary (inside, touching the
//! exterior), or interior. A [`SetMask`] is the node set of a compact set
//! rasterized onto such a grid. Thin sets (segments, Cantor iterates) are
//! fattened to one node width so their masks are non-empty; the fattening
//! error is O(h) and shows up in the capacity diagnostics downstream.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Highest supported Cantor iteration level; below grid resolution the mask
/// saturates, so deeper levels only waste work.
pub const MAX_CANTOR_LEVEL: u32 = 8;

/// Clearance (in grid spacings) that a rasterized set must keep from the
/// domain boundary, so the envelope solver has a collar of free nodes.
pub const CONTAINMENT_MARGIN_CELLS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bbox {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Bbox {
    pub fn expand(&self, pad: f64) -> Bbox {
        Bbox { x0: self.x0 - pad, x1: self.x1 + pad, y0: self.y0 - pad, y1: self.y1 + pad }
    }

    pub fn diameter(&self) -> f64 {
        ((self.x1 - self.x0).powi(2) + (self.y1 - self.y0).powi(2)).sqrt()
    }
}

/// A planar (or, for polydisks, product) region.
///
/// `Disk` is the Euclidean ball `B_c(center, radius)`: a disk in the plane,
/// and the round ball when an operation interprets it in higher dimension
/// (toric and product compositions do).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainSpec {
    Disk {
        center: Complex64,
        radius: f64,
        #[serde(default)]
        label: String,
    },
    Polydisk {
        centers: Vec<Complex64>,
        radii: Vec<f64>,
        #[serde(default)]
        label: String,
    },
    Rectangle {
        corner_a: Complex64,
        corner_b: Complex64,
        #[serde(default)]
        label: String,
    },
}

impl DomainSpec {
    pub fn disk(center: Complex64, radius: f64) -> DomainSpec {
        DomainSpec::Disk { center, radius, label: format!("disk({center},{radius})") }
    }

    pub fn polydisk(radii: &[f64]) -> DomainSpec {
        DomainSpec::Polydisk {
            centers: vec![Complex64::new(0.0, 0.0); radii.len()],
            radii: radii.to_vec(),
            label: format!("polydisk({radii:?})"),
        }
    }

    pub fn rectangle(corner_a: Complex64, corner_b: Complex64) -> DomainSpec {
        DomainSpec::Rectangle { corner_a, corner_b, label: String::new() }
    }

    pub fn label(&self) -> &str {
        match self {
            DomainSpec::Disk { label, .. }
            | DomainSpec::Polydisk { label, .. }
            | DomainSpec::Rectangle { label, .. } => label,
        }
    }

    /// Ambient complex dimension (1 for disks and rectangles).
    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Polydisk { radii, .. } => radii.len(),
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DomainSpec::Disk { radius, .. } => {
                if !radius.is_finite() || *radius <= 0.0 {
                    return Err(Error::InvalidDomain(format!("disk radius {radius} must be > 0")));
                }
            }
            DomainSpec::Polydisk { centers, radii, .. } => {
                if radii.is_empty() || centers.len() != radii.len() {
                    return Err(Error::InvalidDomain(
                        "polydisk needs one center per radius and dimension >= 1".into(),
                    ));
                }
                if radii.iter().any(|r| !r.is_finite() || *r <= 0.0) {
                    return Err(Error::InvalidDomain("polydisk radii must be > 0".into()));
                }
            }
            DomainSpec::Rectangle { corner_a, corner_b, .. } => {
                if corner_a.re == corner_b.re || corner_a.im == corner_b.im {
                    return Err(Error::InvalidDomain("rectangle is degenerate".into()));
                }
            }
        }
        Ok(())
    }

    /// Strict interior membership for the planar kinds.
    pub fn contains_open(&self, z: Complex64) -> bool {
        match self {
            DomainSpec::Disk { center, radius, .. } => (z - center).norm() < *radius,
            DomainSpec::Polydisk { centers, radii, .. } if radii.len() == 1 => {
                (z - centers[0]).norm() < radii[0]
            }
            DomainSpec::Polydisk { .. } => false,
            DomainSpec::Rectangle { corner_a, corner_b, .. } => {
                let (x0, x1) = (corner_a.re.min(corner_b.re), corner_a.re.max(corner_b.re));
                let (y0, y1) = (corner_a.im.min(corner_b.im), corner_a.im.max(corner_b.im));
                z.re > x0 && z.re < x1 && z.im > y0 && z.im < y1
            }
        }
    }

    /// Closed membership, used when taking suprema over a region.
    pub fn contains_closed(&self, z: Complex64) -> bool {
        match self {
            DomainSpec::Disk { center, radius, .. } => (z - center).norm() <= *radius,
            DomainSpec::Polydisk { centers, radii, .. } if radii.len() == 1 => {
                (z - centers[0]).norm() <= radii[0]
            }
            DomainSpec::Polydisk { .. } => false,
            DomainSpec::Rectangle { corner_a, corner_b, .. } => {
                let (x0, x1) = (corner_a.re.min(corner_b.re), corner_a.re.max(corner_b.re));
                let (y0, y1) = (corner_a.im.min(corner_b.im), corner_a.im.max(corner_b.im));
                z.re >= x0 && z.re <= x1 && z.im >= y0 && z.im <= y1
            }
        }
    }

    /// Distance from an interior point to the domain boundary (0 outside).
    pub fn boundary_clearance(&self, z: Complex64) -> f64 {
        match self {
            DomainSpec::Disk { center, radius, .. } => (radius - (z - center).norm()).max(0.0),
            DomainSpec::Polydisk { centers, radii, .. } if radii.len() == 1 => {
                (radii[0] - (z - centers[0]).norm()).max(0.0)
            }
            DomainSpec::Polydisk { .. } => 0.0,
            DomainSpec::Rectangle { corner_a, corner_b, .. } => {
                let (x0, x1) = (corner_a.re.min(corner_b.re), corner_a.re.max(corner_b.re));
                let (y0, y1) = (corner_a.im.min(corner_b.im), corner_a.im.max(corner_b.im));
                let dx = (z.re - x0).min(x1 - z.re);
                let dy = (z.im - y0).min(y1 - z.im);
                dx.min(dy).max(0.0)
            }
        }
    }

    pub fn bbox(&self) -> Bbox {
        match self {
            DomainSpec::Disk { center, radius, .. } => Bbox {
                x0: center.re - radius,
                x1: center.re + radius,
                y0: center.im - radius,
                y1: center.im + radius,
            },
            DomainSpec::Polydisk { centers, radii, .. } => Bbox {
                x0: centers[0].re - radii[0],
                x1: centers[0].re + radii[0],
                y0: centers[0].im - radii[0],
                y1: centers[0].im + radii[0],
            },
            DomainSpec::Rectangle { corner_a, corner_b, .. } => Bbox {
                x0: corner_a.re.min(corner_b.re),
                x1: corner_a.re.max(corner_b.re),
                y0: corner_a.im.min(corner_b.im),
                y1: corner_a.im.max(corner_b.im),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum NodeClass {
    Exterior = 0,
    Boundary = 1,
    Interior = 2,
}

/// Uniform lattice covering a domain's bounding box plus one exterior ring.
///
/// Nodes sit at absolute multiples of the spacing `h`, so refining `h -> h/2`
/// nests the coarse lattice exactly in the fine one.
#[derive(Debug, Clone)]
pub struct Grid {
    pub domain: DomainSpec,
    pub h: f64,
    /// Absolute lattice index of the node at local (0, 0).
    pub i0: i64,
    pub j0: i64,
    pub nx: usize,
    pub ny: usize,
    class: Vec<NodeClass>,
    inside_count: usize,
}

impl Grid {
    #[inline]
    pub fn idx(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    #[inline]
    pub fn node(&self, ix: usize, iy: usize) -> Complex64 {
        Complex64::new((self.i0 + ix as i64) as f64 * self.h, (self.j0 + iy as i64) as f64 * self.h)
    }

    #[inline]
    pub fn class(&self, idx: usize) -> NodeClass {
        self.class[idx]
    }

    #[inline]
    pub fn is_inside(&self, idx: usize) -> bool {
        self.class[idx] != NodeClass::Exterior
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of nodes strictly inside the domain.
    pub fn inside_count(&self) -> usize {
        self.inside_count
    }

    pub fn classes(&self) -> &[NodeClass] {
        &self.class
    }

    /// Local index ranges of nodes whose coordinates fall in `bb` (clamped).
    pub fn index_range(&self, bb: &Bbox) -> (usize, usize, usize, usize) {
        let lo_x = ((bb.x0 / self.h).floor() as i64 - self.i0).max(0) as usize;
        let hi_x = (((bb.x1 / self.h).ceil() as i64 - self.i0).max(0) as usize).min(self.nx.saturating_sub(1));
        let lo_y = ((bb.y0 / self.h).floor() as i64 - self.j0).max(0) as usize;
        let hi_y = (((bb.y1 / self.h).ceil() as i64 - self.j0).max(0) as usize).min(self.ny.saturating_sub(1));
        (lo_x, hi_x, lo_y, hi_y)
    }
}

/// Builds the classified lattice for `domain` at `resolution` nodes per unit
/// length. The lattice covers the bounding box with one layer of exterior
/// padding; every node is classified exactly once.
pub fn build_grid(domain: &DomainSpec, resolution: u32) -> Result<Grid> {
    domain.validate()?;
    if domain.dim() != 1 {
        return Err(Error::InvalidDomain("grids are built for planar domains only".into()));
    }
    if resolution < 16 {
        return Err(Error::InvalidDomain(format!("resolution {resolution} must be >= 16")));
    }
    let h = 1.0 / f64::from(resolution);
    let bb = domain.bbox();
    let i0 = (bb.x0 / h).floor() as i64 - 1;
    let i1 = (bb.x1 / h).ceil() as i64 + 1;
    let j0 = (bb.y0 / h).floor() as i64 - 1;
    let j1 = (bb.y1 / h).ceil() as i64 + 1;
    let nx = (i1 - i0 + 1) as usize;
    let ny = (j1 - j0 + 1) as usize;

    let mut inside = vec![false; nx * ny];
    let mut inside_count = 0usize;
    for iy in 0..ny {
        let y = (j0 + iy as i64) as f64 * h;
        for ix in 0..nx {
            let x = (i0 + ix as i64) as f64 * h;
            if domain.contains_open(Complex64::new(x, y)) {
                inside[iy * nx + ix] = true;
                inside_count += 1;
            }
        }
    }

    let mut class = vec![NodeClass::Exterior; nx * ny];
    for iy in 0..ny {
        for ix in 0..nx {
            let k = iy * nx + ix;
            if !inside[k] {
                continue;
            }
            // The padding ring guarantees inside nodes are never on the lattice edge.
            let at_edge = ix == 0 || iy == 0 || ix + 1 == nx || iy + 1 == ny;
            let touches_exterior = at_edge
                || !inside[k - 1]
                || !inside[k + 1]
                || !inside[k - nx]
                || !inside[k + nx];
            class[k] = if touches_exterior { NodeClass::Boundary } else { NodeClass::Interior };
        }
    }

    Ok(Grid { domain: domain.clone(), h, i0, j0, nx, ny, class, inside_count })
}

/// Symbolic description of a compact planar set (or a coordinate product).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CompactSetSpec {
    Disk {
        center: Complex64,
        radius: f64,
        #[serde(default)]
        label: String,
    },
    /// Segment `[x0, x1]` on the real axis.
    RealSegment {
        x0: f64,
        x1: f64,
        #[serde(default)]
        label: String,
    },
    Union {
        parts: Vec<CompactSetSpec>,
        #[serde(default)]
        label: String,
    },
    /// Level-`level` middle-thirds iterate of the base segment `[x0, x1]`.
    Cantor {
        x0: f64,
        x1: f64,
        level: u32,
        #[serde(default)]
        label: String,
    },
    Annulus {
        center: Complex64,
        inner: f64,
        outer: f64,
        #[serde(default)]
        label: String,
    },
    /// Coordinate product of one-dimensional sets (not rasterizable on a
    /// planar grid; consumed by the product and toric paths).
    Product {
        factors: Vec<CompactSetSpec>,
        #[serde(default)]
        label: String,
    },
    /// Union of small closed disks around explicit sample points.
    Raster {
        points: Vec<Complex64>,
        radius: f64,
        #[serde(default)]
        label: String,
    },
}

impl CompactSetSpec {
    pub fn disk(center: Complex64, radius: f64) -> CompactSetSpec {
        CompactSetSpec::Disk { center, radius, label: format!("disk({center},{radius})") }
    }

    pub fn segment(x0: f64, x1: f64) -> CompactSetSpec {
        CompactSetSpec::RealSegment {
            x0: x0.min(x1),
            x1: x0.max(x1),
            label: format!("segment[{x0},{x1}]"),
        }
    }

    pub fn union(parts: Vec<CompactSetSpec>) -> CompactSetSpec {
        CompactSetSpec::Union { parts, label: String::new() }
    }

    pub fn cantor(x0: f64, x1: f64, level: u32) -> CompactSetSpec {
        CompactSetSpec::Cantor {
            x0: x0.min(x1),
            x1: x0.max(x1),
            level,
            label: format!("cantor[{x0},{x1}]@{level}"),
        }
    }

    pub fn annulus(center: Complex64, inner: f64, outer: f64) -> CompactSetSpec {
        CompactSetSpec::Annulus { center, inner, outer, label: String::new() }
    }

    pub fn label(&self) -> &str {
        match self {
            CompactSetSpec::Disk { label, .. }
            | CompactSetSpec::RealSegment { label, .. }
            | CompactSetSpec::Union { label, .. }
            | CompactSetSpec::Cantor { label, .. }
            | CompactSetSpec::Annulus { label, .. }
            | CompactSetSpec::Product { label, .. }
            | CompactSetSpec::Raster { label, .. } => label,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CompactSetSpec::Disk { radius, .. } => {
                if !radius.is_finite() || *radius <= 0.0 {
                    return Err(Error::InvalidDomain(format!("set disk radius {radius} must be > 0")));
                }
            }
            CompactSetSpec::RealSegment { x0, x1, .. } => {
                if !(x1 > x0) {
                    return Err(Error::InvalidDomain("segment is degenerate".into()));
                }
            }
            CompactSetSpec::Union { parts, .. } => {
                if parts.is_empty() {
                    return Err(Error::InvalidDomain("union of nothing".into()));
                }
                for p in parts {
                    p.validate()?;
                }
            }
            CompactSetSpec::Cantor { x0, x1, level, .. } => {
                if !(x1 > x0) {
                    return Err(Error::InvalidDomain("cantor base is degenerate".into()));
                }
                if *level > MAX_CANTOR_LEVEL {
                    return Err(Error::InvalidDomain(format!(
                        "cantor level {level} exceeds the supported maximum {MAX_CANTOR_LEVEL}"
                    )));
                }
            }
            CompactSetSpec::Annulus { inner, outer, .. } => {
                if !(*inner >= 0.0 && outer > inner) {
                    return Err(Error::InvalidRadii { inner: *inner, outer: *outer });
                }
            }
            CompactSetSpec::Product { factors, .. } => {
                if factors.is_empty() {
                    return Err(Error::InvalidDomain("empty product".into()));
                }
                for f in factors {
                    f.validate()?;
                }
            }
            CompactSetSpec::Raster { points, radius, .. } => {
                if points.is_empty() {
                    return Err(Error::InvalidDomain("raster set with no points".into()));
                }
                if !radius.is_finite() || *radius < 0.0 {
                    return Err(Error::InvalidDomain("raster radius must be >= 0".into()));
                }
            }
        }
        Ok(())
    }

    /// Euclidean distance from `z` to the set (0 on the set).
    pub fn distance(&self, z: Complex64) -> f64 {
        match self {
            CompactSetSpec::Disk { center, radius, .. } => ((z - center).norm() - radius).max(0.0),
            CompactSetSpec::RealSegment { x0, x1, .. } => {
                let dx = (x0 - z.re).max(0.0).max(z.re - x1);
                (dx * dx + z.im * z.im).sqrt()
            }
            CompactSetSpec::Union { parts, .. } => {
                parts.iter().map(|p| p.distance(z)).fold(f64::INFINITY, f64::min)
            }
            CompactSetSpec::Cantor { .. } => self
                .cantor_segments()
                .map(|segs| {
                    segs.iter()
                        .map(|&(a, b)| {
                            let dx = (a - z.re).max(0.0).max(z.re - b);
                            (dx * dx + z.im * z.im).sqrt()
                        })
                        .fold(f64::INFINITY, f64::min)
                })
                .unwrap_or(f64::INFINITY),
            CompactSetSpec::Annulus { center, inner, outer, .. } => {
                let r = (z - center).norm();
                if r < *inner {
                    inner - r
                } else if r > *outer {
                    r - outer
                } else {
                    0.0
                }
            }
            CompactSetSpec::Product { .. } => f64::INFINITY,
            CompactSetSpec::Raster { points, radius, .. } => points
                .iter()
                .map(|p| ((z - p).norm() - radius).max(0.0))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Membership rule used at spacing `h`: closed membership for sets with
    /// area, an `h/2` dilation for thin sets so one-node-wide masks survive.
    pub fn member(&self, z: Complex64, h: f64) -> bool {
        match self {
            CompactSetSpec::Union { parts, .. } => parts.iter().any(|p| p.member(z, h)),
            CompactSetSpec::RealSegment { .. }
            | CompactSetSpec::Cantor { .. }
            | CompactSetSpec::Raster { .. } => self.distance(z) <= 0.5 * h,
            _ => self.distance(z) == 0.0,
        }
    }

    pub fn bbox(&self) -> Bbox {
        match self {
            CompactSetSpec::Disk { center, radius, .. } => Bbox {
                x0: center.re - radius,
                x1: center.re + radius,
                y0: center.im - radius,
                y1: center.im + radius,
            },
            CompactSetSpec::RealSegment { x0, x1, .. } => Bbox { x0: *x0, x1: *x1, y0: 0.0, y1: 0.0 },
            CompactSetSpec::Union { parts, .. } => {
                let mut bb = parts[0].bbox();
                for p in &parts[1..] {
                    let b = p.bbox();
                    bb.x0 = bb.x0.min(b.x0);
                    bb.x1 = bb.x1.max(b.x1);
                    bb.y0 = bb.y0.min(b.y0);
                    bb.y1 = bb.y1.max(b.y1);
                }
                bb
            }
            CompactSetSpec::Cantor { x0, x1, .. } => Bbox { x0: *x0, x1: *x1, y0: 0.0, y1: 0.0 },
            CompactSetSpec::Annulus { center, outer, .. } => Bbox {
                x0: center.re - outer,
                x1: center.re + outer,
                y0: center.im - outer,
                y1: center.im + outer,
            },
            CompactSetSpec::Product { factors, .. } => factors[0].bbox(),
            CompactSetSpec::Raster { points, radius, .. } => {
                let mut bb = Bbox {
                    x0: f64::INFINITY,
                    x1: f64::NEG_INFINITY,
                    y0: f64::INFINITY,
                    y1: f64::NEG_INFINITY,
                };
                for p in points {
                    bb.x0 = bb.x0.min(p.re - radius);
                    bb.x1 = bb.x1.max(p.re + radius);
                    bb.y0 = bb.y0.min(p.im - radius);
                    bb.y1 = bb.y1.max(p.im + radius);
                }
                bb
            }
        }
    }

    /// The 2^level closed segments of a Cantor iterate.
    pub fn cantor_segments(&self) -> Option<Vec<(f64, f64)>> {
        if let CompactSetSpec::Cantor { x0, x1, level, .. } = self {
            let mut segs = vec![(*x0, *x1)];
            for _ in 0..*level {
                let mut next = Vec::with_capacity(segs.len() * 2);
                for (a, b) in segs {
                    let third = (b - a) / 3.0;
                    next.push((a, a + third));
                    next.push((b - third, b));
                }
                segs = next;
            }
            Some(segs)
        } else {
            None
        }
    }
}

/// Rasterization of a compact set on a grid.
#[derive(Debug, Clone)]
pub struct SetMask {
    pub grid: Arc<Grid>,
    pub member: Vec<bool>,
    pub count: usize,
}

impl SetMask {
    /// Member nodes that touch a non-member 4-neighbor.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        let g = &self.grid;
        let mut out = Vec::new();
        for iy in 0..g.ny {
            for ix in 0..g.nx {
                let k = g.idx(ix, iy);
                if !self.member[k] {
                    continue;
                }
                let edge = ix == 0 || iy == 0 || ix + 1 == g.nx || iy + 1 == g.ny;
                if edge
                    || !self.member[k - 1]
                    || !self.member[k + 1]
                    || !self.member[k - g.nx]
                    || !self.member[k + g.nx]
                {
                    out.push(k);
                }
            }
        }
        out
    }

    /// True if some member node is surrounded by members on all four sides.
    pub fn has_interior(&self) -> bool {
        let g = &self.grid;
        for iy in 1..g.ny.saturating_sub(1) {
            for ix in 1..g.nx.saturating_sub(1) {
                let k = g.idx(ix, iy);
                if self.member[k]
                    && self.member[k - 1]
                    && self.member[k + 1]
                    && self.member[k - g.nx]
                    && self.member[k + g.nx]
                {
                    return true;
                }
            }
        }
        false
    }

    pub fn member_nodes(&self) -> Vec<usize> {
        (0..self.member.len()).filter(|&k| self.member[k]).collect()
    }

    pub fn node_position(&self, k: usize) -> Complex64 {
        let g = &self.grid;
        g.node(k % g.nx, k / g.nx)
    }

    /// Diameter of the member node cloud, from 64 support directions
    /// (underestimates by at most ~0.2%).
    pub fn diameter(&self) -> f64 {
        let g = &self.grid;
        let mut best = 0.0f64;
        for d in 0..64 {
            let th = std::f64::consts::PI * d as f64 / 64.0;
            let (c, s) = (th.cos(), th.sin());
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for iy in 0..g.ny {
                for ix in 0..g.nx {
                    if self.member[g.idx(ix, iy)] {
                        let z = g.node(ix, iy);
                        let t = c * z.re + s * z.im;
                        lo = lo.min(t);
                        hi = hi.max(t);
                    }
                }
            }
            best = best.max(hi - lo);
        }
        best
    }
}

fn mark(spec: &CompactSetSpec, grid: &Grid, flags: &mut [bool]) -> Result<()> {
    if let CompactSetSpec::Union { parts, .. } = spec {
        for p in parts {
            mark(p, grid, flags)?;
        }
        return Ok(());
    }
    if matches!(spec, CompactSetSpec::Product { .. }) {
        return Err(Error::UnsupportedRegion(
            "product sets have no planar rasterization; use the toric or product paths".into(),
        ));
    }
    let bb = spec.bbox().expand(grid.h);
    let (lx, hx, ly, hy) = grid.index_range(&bb);
    for iy in ly..=hy {
        for ix in lx..=hx {
            if spec.member(grid.node(ix, iy), grid.h) {
                flags[grid.idx(ix, iy)] = true;
            }
        }
    }
    Ok(())
}

/// Rasterizes `spec` on `grid`, requiring the mask to be non-empty and to
/// keep a `2h` clearance from the domain boundary.
pub fn rasterize_set(spec: &CompactSetSpec, grid: &Arc<Grid>) -> Result<SetMask> {
    spec.validate()?;
    let mut flags = vec![false; grid.len()];
    mark(spec, grid, &mut flags)?;

    let margin = CONTAINMENT_MARGIN_CELLS * grid.h;
    let mut count = 0usize;
    let mut worst = f64::INFINITY;
    for iy in 0..grid.ny {
        for ix in 0..grid.nx {
            let k = grid.idx(ix, iy);
            if !flags[k] {
                continue;
            }
            count += 1;
            let clearance = grid.domain.boundary_clearance(grid.node(ix, iy));
            worst = worst.min(clearance);
        }
    }
    if count == 0 {
        return Err(Error::EmptySet);
    }
    // Strict containment: tolerate half a cell of rounding in the clearance.
    if worst < margin - 0.5 * grid.h {
        return Err(Error::NotCompactlyContained { margin, worst });
    }
    Ok(SetMask { grid: Arc::clone(grid), member: flags, count })
}

fn merge_intervals(mut iv: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    iv.retain(|&(a, b)| b > a);
    iv.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(iv.len());
    for (a, b) in iv {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

fn collect_real_intervals(spec: &CompactSetSpec, out: &mut Vec<(f64, f64)>) -> Result<()> {
    match spec {
        CompactSetSpec::RealSegment { x0, x1, .. } => {
            out.push((*x0, *x1));
            Ok(())
        }
        CompactSetSpec::Cantor { .. } => {
            out.extend(spec.cantor_segments().unwrap());
            Ok(())
        }
        CompactSetSpec::Union { parts, .. } => {
            for p in parts {
                collect_real_intervals(p, out)?;
            }
            Ok(())
        }
        other => Err(Error::UnsupportedMeasure(format!("{:?}", other.label()))),
    }
}

/// Exact 1-d Lebesgue measure of a finite union of real segments and Cantor
/// iterates (overlaps merged).
pub fn measure_1d(spec: &CompactSetSpec) -> Result<f64> {
    spec.validate()?;
    let mut iv = Vec::new();
    collect_real_intervals(spec, &mut iv)?;
    Ok(merge_intervals(iv).iter().map(|&(a, b)| b - a).sum())
}

/// The merged list of real intervals underlying a 1-d spec.
pub fn real_intervals(spec: &CompactSetSpec) -> Result<Vec<(f64, f64)>> {
    let mut iv = Vec::new();
    collect_real_intervals(spec, &mut iv)?;
    Ok(merge_intervals(iv))
}

/// Draws a random compact set inside `disk(0, bound)`, resolvable at the
/// production grid resolutions (features are at least a few cells wide).
pub fn sample_compact_set<R: Rng>(rng: &mut R, bound: f64) -> CompactSetSpec {
    let min_feature = 0.03;
    let pick_center = |rng: &mut R, reach: f64| {
        let r = bound - reach;
        loop {
            let x = rng.gen_range(-r..=r);
            let y = rng.gen_range(-r..=r);
            if (x * x + y * y).sqrt() <= r {
                return Complex64::new(x, y);
            }
        }
    };
    match rng.gen_range(0..100u32) {
        0..=34 => {
            let radius = rng.gen_range(min_feature..=0.45);
            CompactSetSpec::disk(pick_center(rng, radius), radius)
        }
        35..=54 => {
            let r1 = rng.gen_range(min_feature..=0.2);
            let r2 = rng.gen_range(min_feature..=0.2);
            CompactSetSpec::union(vec![
                CompactSetSpec::disk(pick_center(rng, r1), r1),
                CompactSetSpec::disk(pick_center(rng, r2), r2),
            ])
        }
        55..=69 => {
            let len = rng.gen_range(0.15..=1.2f64);
            let x0 = rng.gen_range(-bound..=(bound - len));
            CompactSetSpec::segment(x0, x0 + len)
        }
        70..=79 => {
            let inner = rng.gen_range(0.05..=0.3);
            let outer = inner + rng.gen_range(min_feature..=0.25);
            CompactSetSpec::annulus(pick_center(rng, outer), inner, outer)
        }
        80..=89 => {
            let len = rng.gen_range(0.5..=1.2f64);
            let x0 = rng.gen_range(-bound..=(bound - len));
            CompactSetSpec::cantor(x0, x0 + len, rng.gen_range(1..=3))
        }
        _ => {
            let r1 = rng.gen_range(min_feature..=0.2);
            let len = rng.gen_range(0.15..=0.8f64);
            let x0 = rng.gen_range(-bound..=(bound - len));
            CompactSetSpec::union(vec![
                CompactSetSpec::disk(pick_center(rng, r1), r1),
                CompactSetSpec::segment(x0, x0 + len),
            ])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    #[test]
    fn grid_spacing_and_extent() {
        let g = build_grid(&DomainSpec::disk(c(0.0, 0.0), 2.0), 128).unwrap();
        assert_relative_eq!(g.h, 1.0 / 128.0);
        // Covers [-2, 2]^2 plus the padding ring.
        assert!(g.node(0, 0).re <= -2.0 && g.node(g.nx - 1, g.ny - 1).re >= 2.0);
        assert!(g.node(0, 0).im <= -2.0 && g.node(g.nx - 1, g.ny - 1).im >= 2.0);
    }

    #[test]
    fn grid_inside_fraction_matches_disk_area() {
        // Area oracle: the disk fills exactly pi/4 of its bounding box.
        let g = build_grid(&DomainSpec::disk(c(0.0, 0.0), 1.0), 256).unwrap();
        let ratio = g.inside_count() as f64 * g.h * g.h / 4.0;
        assert!((ratio - PI / 4.0).abs() / (PI / 4.0) < 0.01, "ratio {ratio}");
    }

    #[test]
    fn grid_rejects_degenerate_domains() {
        let r = build_grid(&DomainSpec::rectangle(c(1.0, 1.0), c(1.0, 1.0)), 64);
        assert!(matches!(r, Err(Error::InvalidDomain(_))));
        let r = build_grid(&DomainSpec::disk(c(0.0, 0.0), 1.0), 8);
        assert!(matches!(r, Err(Error::InvalidDomain(_))));
    }

    #[test]
    fn grid_classification_is_exclusive_and_nested() {
        let g = build_grid(&DomainSpec::disk(c(0.1, -0.2), 0.9), 64).unwrap();
        let mut seen = [0usize; 3];
        for k in 0..g.len() {
            seen[g.class(k) as usize] += 1;
        }
        assert_eq!(seen.iter().sum::<usize>(), g.len());
        assert!(seen[1] > 0 && seen[2] > 0);

        // Refining by 2 nests the coarse lattice in the fine one.
        let f = build_grid(&DomainSpec::disk(c(0.1, -0.2), 0.9), 128).unwrap();
        assert_eq!(f.i0 % 2, 0);
        let zc = g.node(3, 5);
        let fx = (2 * (g.i0 + 3) - f.i0) as usize;
        let fy = (2 * (g.j0 + 5) - f.j0) as usize;
        let zf = f.node(fx, fy);
        assert_relative_eq!(zc.re, zf.re, epsilon = 1e-12);
        assert_relative_eq!(zc.im, zf.im, epsilon = 1e-12);
    }

    #[test]
    fn rasterize_disk_area_count() {
        let omega = DomainSpec::disk(c(0.0, 0.0), 1.0);
        let g = Arc::new(build_grid(&omega, 128).unwrap());
        let mask = rasterize_set(&CompactSetSpec::disk(c(0.0, 0.0), 0.25), &g).unwrap();
        let expected = PI * 0.25 * 0.25 / (g.h * g.h);
        let got = mask.count as f64;
        assert!((got - expected).abs() / expected < 0.03, "count {got}, expected {expected}");
    }

    #[test]
    fn rasterize_segment_is_one_node_strip() {
        let omega = DomainSpec::disk(c(0.0, 0.0), 1.5);
        let g = Arc::new(build_grid(&omega, 128).unwrap());
        let mask = rasterize_set(&CompactSetSpec::segment(-1.0, 1.0), &g).unwrap();
        // One node thick: every member sits on the y = 0 row.
        for k in mask.member_nodes() {
            assert_eq!(mask.node_position(k).im, 0.0);
        }
        let expected = 2.0 / g.h;
        assert!((mask.count as f64 - expected).abs() <= 3.0, "count {}", mask.count);
    }

    #[test]
    fn rasterize_rejects_escaping_sets() {
        let omega = DomainSpec::disk(c(0.0, 0.0), 1.0);
        let g = Arc::new(build_grid(&omega, 64).unwrap());
        let r = rasterize_set(&CompactSetSpec::disk(c(0.0, 0.0), 1.5), &g);
        assert!(matches!(r, Err(Error::NotCompactlyContained { .. })));

        // A set fully outside the domain interior has an empty mask.
        let omega_rect = DomainSpec::rectangle(c(-1.0, -1.0), c(1.0, 1.0));
        let g2 = Arc::new(build_grid(&omega_rect, 64).unwrap());
        let far = rasterize_set(&CompactSetSpec::disk(c(10.0, 10.0), 0.1), &g2);
        assert!(matches!(far, Err(Error::EmptySet)));
    }

    #[test]
    fn mask_refinement_scales_like_area() {
        let omega = DomainSpec::disk(c(0.0, 0.0), 1.0);
        let specs = [
            CompactSetSpec::disk(c(0.1, 0.1), 0.3),
            CompactSetSpec::annulus(c(0.0, 0.0), 0.2, 0.45),
            CompactSetSpec::union(vec![
                CompactSetSpec::disk(c(-0.3, 0.0), 0.15),
                CompactSetSpec::disk(c(0.3, 0.1), 0.2),
            ]),
        ];
        for spec in &specs {
            let coarse = Arc::new(build_grid(&omega, 64).unwrap());
            let fine = Arc::new(build_grid(&omega, 128).unwrap());
            let mc = rasterize_set(spec, &coarse).unwrap().count as f64;
            let mf = rasterize_set(spec, &fine).unwrap().count as f64;
            let ratio = mf / mc;
            assert!((3.2..=4.8).contains(&ratio), "ratio {ratio} for {:?}", spec.label());
        }
    }

    #[test]
    fn mask_monotone_under_inclusion() {
        let omega = DomainSpec::disk(c(0.0, 0.0), 1.0);
        let g = Arc::new(build_grid(&omega, 64).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let r1 = rng.gen_range(0.05..0.3);
            let r2 = r1 + rng.gen_range(0.01..0.2);
            let cx = rng.gen_range(-0.3..0.3);
            let small = rasterize_set(&CompactSetSpec::disk(c(cx, 0.0), r1), &g).unwrap();
            let big = rasterize_set(&CompactSetSpec::disk(c(cx, 0.0), r2), &g).unwrap();
            for k in 0..small.member.len() {
                assert!(!small.member[k] || big.member[k]);
            }
        }
    }

    #[test]
    fn measure_basics() {
        assert_relative_eq!(measure_1d(&CompactSetSpec::segment(-1.0, 1.0)).unwrap(), 2.0);
        assert_relative_eq!(
            measure_1d(&CompactSetSpec::cantor(0.0, 1.0, 2)).unwrap(),
            4.0 / 9.0,
            epsilon = 1e-12
        );
        let u = CompactSetSpec::union(vec![
            CompactSetSpec::segment(0.0, 0.5),
            CompactSetSpec::segment(0.25, 1.0),
        ]);
        assert_relative_eq!(measure_1d(&u).unwrap(), 1.0, epsilon = 1e-12);
        assert!(matches!(
            measure_1d(&CompactSetSpec::disk(c(0.0, 0.0), 0.5)),
            Err(Error::UnsupportedMeasure(_))
        ));
    }

    #[test]
    fn cantor_measure_follows_two_thirds_law() {
        for level in 0..=4u32 {
            let m = measure_1d(&CompactSetSpec::cantor(-0.5, 1.5, level)).unwrap();
            assert_relative_eq!(m, 2.0 * (2.0f64 / 3.0).powi(level as i32), epsilon = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn measure_additive_and_monotone(
            segs in proptest::collection::vec((-10.0f64..10.0, 0.01f64..3.0), 1..8),
            extra in (-10.0f64..10.0, 0.01f64..3.0),
        ) {
            let parts: Vec<_> = segs.iter().map(|&(a, l)| CompactSetSpec::segment(a, a + l)).collect();
            let base = CompactSetSpec::union(parts.clone());
            let m_base = measure_1d(&base).unwrap();

            // Monotone under inclusion.
            let mut bigger = parts.clone();
            bigger.push(CompactSetSpec::segment(extra.0, extra.0 + extra.1));
            let m_big = measure_1d(&CompactSetSpec::union(bigger)).unwrap();
            prop_assert!(m_big >= m_base - 1e-12);

            // Additive on a disjoint far-away translate.
            let shifted: Vec<_> = segs
                .iter()
                .map(|&(a, l)| CompactSetSpec::segment(a + 100.0, a + 100.0 + l))
                .collect();
            let mut both = parts;
            both.extend(shifted);
            let m_both = measure_1d(&CompactSetSpec::union(both)).unwrap();
            prop_assert!((m_both - 2.0 * m_base).abs() < 1e-9);
        }
    }

    #[test]
    fn sampled_sets_are_valid_and_rasterizable() {
        let omega = DomainSpec::disk(c(0.0, 0.0), 2.0);
        let g = Arc::new(build_grid(&omega, 64).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let s = sample_compact_set(&mut rng, 0.85);
            s.validate().unwrap();
            let mask = rasterize_set(&s, &g).unwrap();
            assert!(mask.count > 0);
        }
    }
}
