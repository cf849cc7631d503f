//! Tracing the zero set of the Euler condition determinant in the (a, y)
//! plane with marching squares.
//!
//! Grid nodes sit at cell centres of a uniform partition of a in (0, pi) and
//! y in [-pi, pi), so no node lands on the lines a = 0, a = pi or on the
//! grid boundary. The y direction is periodic. Sign changes along cell edges
//! are refined by bisection; sign changes caused by poles (collisions and
//! antipodal pairs) are recognised by the size of the determinant at the
//! refined point and dropped.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{det_matrix, solve_euler, wrap_periodic, BranchSign, MeridianShape};
use crate::error::{Error, Result};
use crate::geometry::MassTriple;
use crate::potential::Potential;

/// Refined points are kept when |det| <= ACCEPT * max(1, |G row| |F row|).
const ACCEPT: f64 = 1e-8;
const ISOSCELES_TOL: f64 = 1e-9;
pub const MIN_RESOLUTION: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Nodes along a.
    pub n_a: usize,
    /// Nodes along y.
    pub n_y: usize,
}

impl GridSpec {
    pub fn square(n: usize) -> Self {
        Self { n_a: n, n_y: n }
    }

    pub fn a_at(&self, i: f64) -> f64 {
        PI * (i + 0.5) / self.n_a as f64
    }

    pub fn y_at(&self, j: f64) -> f64 {
        -PI + TAU * (j + 0.5) / self.n_y as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolylineKind {
    Isosceles,
    Scalene,
}

impl PolylineKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PolylineKind::Isosceles => "isosceles",
            PolylineKind::Scalene => "scalene",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourPoint {
    pub a: f64,
    /// In [-pi, pi).
    pub y: f64,
    pub det: f64,
    pub omega_sq: f64,
    pub s: Option<BranchSign>,
    pub kind: PolylineKind,
    /// Extended polar angles of the solved configuration.
    pub theta: [f64; 3],
}

impl ContourPoint {
    pub fn shape(&self) -> MeridianShape {
        MeridianShape {
            a: self.a,
            x: self.y + self.a / 2.0,
        }
    }

    /// Largest of the three arc angles.
    pub fn largest_arc(&self) -> f64 {
        self.shape().arc_angles().into_iter().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub kind: PolylineKind,
    pub closed: bool,
    pub points: Vec<ContourPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourSet {
    pub grid: GridSpec,
    pub polylines: Vec<Polyline>,
    /// Sign changes discarded as poles or unsolvable points.
    pub rejected: usize,
}

impl ContourSet {
    pub fn points(&self) -> impl Iterator<Item = &ContourPoint> {
        self.polylines.iter().flat_map(|p| p.points.iter())
    }

    pub fn points_of(&self, kind: PolylineKind) -> impl Iterator<Item = &ContourPoint> {
        self.polylines
            .iter()
            .filter(move |p| p.kind == kind)
            .flat_map(|p| p.points.iter())
    }
}

/// Cell edge: along a from node (i, j) to (i+1, j), or along y from (i, j)
/// to (i, j+1 mod n_y).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Edge {
    A(usize, usize),
    Y(usize, usize),
}

fn det_at(m: &MassTriple, p: &dyn Potential, a: f64, y: f64) -> Option<(f64, f64)> {
    let sh = MeridianShape::from_y(a, y).ok()?;
    let mat = det_matrix(m, &sh, p).ok()?;
    let d = mat.det();
    d.is_finite().then_some((d, mat.scale()))
}

fn classify(sh: &MeridianShape) -> PolylineKind {
    let s = sh.arc_angles();
    let iso = (0..3).any(|k| (s[k] - s[(k + 1) % 3]).abs() <= ISOSCELES_TOL);
    if iso {
        PolylineKind::Isosceles
    } else {
        PolylineKind::Scalene
    }
}

/// Traces det = 0 over the (a, y) plane and solves every point found.
pub fn contour_scan(m: &MassTriple, p: &dyn Potential, grid: GridSpec) -> Result<ContourSet> {
    if grid.n_a < MIN_RESOLUTION || grid.n_y < MIN_RESOLUTION {
        return Err(Error::InvalidArgument(format!(
            "grid resolution must be at least {MIN_RESOLUTION}, got {} x {}",
            grid.n_a, grid.n_y
        )));
    }
    let (na, ny) = (grid.n_a, grid.n_y);
    let values: Vec<f64> = (0..na * ny)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / ny, idx % ny);
            det_at(m, p, grid.a_at(i as f64), grid.y_at(j as f64)).map_or(f64::NAN, |v| v.0)
        })
        .collect();
    let val = |i: usize, j: usize| values[i * ny + (j % ny)];
    let positive = |v: f64| v >= 0.0;

    let endpoints = |e: Edge| -> ((f64, f64), (f64, f64)) {
        match e {
            Edge::A(i, j) => ((i as f64, j as f64), ((i + 1) as f64, j as f64)),
            Edge::Y(i, j) => ((i as f64, j as f64), (i as f64, (j + 1) as f64)),
        }
    };
    let edge_value = |e: Edge| match e {
        Edge::A(i, j) => (val(i, j), val(i + 1, j)),
        Edge::Y(i, j) => (val(i, j), val(i, j + 1)),
    };

    // Segments per cell, as pairs of crossed edges.
    let cells: Vec<(usize, usize)> = (0..na - 1)
        .flat_map(|i| (0..ny).map(move |j| (i, j)))
        .collect();
    let segments: Vec<(Edge, Edge)> = cells
        .par_iter()
        .flat_map_iter(|&(i, j)| {
            let corners = [val(i, j), val(i + 1, j), val(i + 1, j + 1), val(i, j + 1)];
            if corners.iter().any(|v| v.is_nan()) {
                return Vec::new();
            }
            // edges in cyclic order: bottom (y=j), right (a=i+1), top (y=j+1), left (a=i)
            let edges = [
                Edge::A(i, j),
                Edge::Y(i + 1, j),
                Edge::A(i, (j + 1) % ny),
                Edge::Y(i, j),
            ];
            let crossed: Vec<usize> = (0..4)
                .filter(|&k| positive(corners[k]) != positive(corners[(k + 1) % 4]))
                .collect();
            match crossed.len() {
                2 => vec![(edges[crossed[0]], edges[crossed[1]])],
                4 => {
                    let centre = det_at(m, p, grid.a_at(i as f64 + 0.5), grid.y_at(j as f64 + 0.5));
                    // corner 0 and the centre on the same side: corner 0 is
                    // connected to corner 2 through the middle
                    let joined = centre.is_some_and(|c| positive(c.0) == positive(corners[0]));
                    if joined {
                        vec![(edges[0], edges[1]), (edges[2], edges[3])]
                    } else {
                        vec![(edges[3], edges[0]), (edges[1], edges[2])]
                    }
                }
                _ => Vec::new(),
            }
        })
        .collect();

    let mut crossed: Vec<Edge> = segments.iter().flat_map(|&(e, f)| [e, f]).collect();
    crossed.sort();
    crossed.dedup();

    let roots: Vec<Option<ContourPoint>> = crossed
        .par_iter()
        .map(|&e| {
            let ((i0, j0), (i1, j1)) = endpoints(e);
            let (v0, _) = edge_value(e);
            let at = |t: f64| (grid.a_at(i0 + (i1 - i0) * t), grid.y_at(j0 + (j1 - j0) * t));
            let f = |t: f64| {
                let (a, y) = at(t);
                det_at(m, p, a, y).map_or(f64::NAN, |v| v.0)
            };
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            let lo_positive = positive(v0);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = f(mid);
                if fm.is_nan() {
                    return None;
                }
                if positive(fm) == lo_positive {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t = if f(lo).abs() <= f(hi).abs() { lo } else { hi };
            let (a, y) = at(t);
            let (det, scale) = det_at(m, p, a, y)?;
            if det.abs() > ACCEPT * scale.max(1.0) {
                return None;
            }
            let y = wrap_periodic(y);
            let sh = MeridianShape::from_y(a, y).ok()?;
            let sol = solve_euler(m, &sh, p, ACCEPT).ok()?;
            Some(ContourPoint {
                a,
                y,
                det,
                omega_sq: sol.omega.omega_sq()?,
                s: sol.s,
                kind: classify(&sh),
                theta: sol.theta,
            })
        })
        .collect();
    let root_of: BTreeMap<Edge, Option<ContourPoint>> =
        crossed.iter().copied().zip(roots).collect();
    let rejected = root_of.values().filter(|r| r.is_none()).count();

    // Chain segments whose both ends were accepted.
    let mut adjacency: BTreeMap<Edge, Vec<usize>> = BTreeMap::new();
    let kept: Vec<(Edge, Edge)> = segments
        .into_iter()
        .filter(|(e, f)| root_of[e].is_some() && root_of[f].is_some())
        .collect();
    for (k, &(e, f)) in kept.iter().enumerate() {
        adjacency.entry(e).or_default().push(k);
        adjacency.entry(f).or_default().push(k);
    }
    let mut used = vec![false; kept.len()];
    let mut chains: Vec<(Vec<Edge>, bool)> = Vec::new();
    let walk = |start: Edge, first: usize, used: &mut Vec<bool>| -> Vec<Edge> {
        let mut chain = vec![start];
        let mut cur = start;
        let mut seg = Some(first);
        while let Some(k) = seg {
            used[k] = true;
            let (e, f) = kept[k];
            let next = if e == cur { f } else { e };
            chain.push(next);
            cur = next;
            seg = adjacency[&cur].iter().copied().find(|&s| !used[s]);
        }
        chain
    };
    // open chains first, starting from their ends
    for (&edge, segs) in adjacency.iter() {
        if segs.len() == 1 && !used[segs[0]] {
            let chain = walk(edge, segs[0], &mut used);
            chains.push((chain, false));
        }
    }
    for k in 0..kept.len() {
        if !used[k] {
            let chain = walk(kept[k].0, k, &mut used);
            chains.push((chain, true));
        }
    }

    let mut polylines = Vec::new();
    for (chain, closed) in chains {
        let mut pts: Vec<ContourPoint> = chain.iter().filter_map(|e| root_of[e]).collect();
        if closed && pts.len() > 1 {
            pts.pop();
        }
        let uniform = pts.windows(2).all(|w| w[0].kind == w[1].kind);
        if uniform {
            if let Some(first) = pts.first() {
                polylines.push(Polyline {
                    kind: first.kind,
                    closed,
                    points: pts,
                });
            }
            continue;
        }
        let mut run: Vec<ContourPoint> = Vec::new();
        for pt in pts {
            if run.last().is_some_and(|l| l.kind != pt.kind) {
                let kind = run[0].kind;
                polylines.push(Polyline {
                    kind,
                    closed: false,
                    points: std::mem::take(&mut run),
                });
            }
            run.push(pt);
        }
        if !run.is_empty() {
            polylines.push(Polyline {
                kind: run[0].kind,
                closed: false,
                points: run,
            });
        }
    }
    Ok(ContourSet {
        grid,
        polylines,
        rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::{critical_angle_ac, equal_mass_scalene_cos2y};
    use crate::potential::{cotangent, negate, Cotangent};
    use std::f64::consts::FRAC_PI_2;

    fn scan(n: usize, p: &dyn Potential) -> ContourSet {
        contour_scan(&MassTriple::equal(1.0).unwrap(), p, GridSpec::square(n)).unwrap()
    }

    #[test]
    fn rejects_coarse_grid() {
        let m = MassTriple::equal(1.0).unwrap();
        assert!(contour_scan(&m, &Cotangent, GridSpec::square(16)).is_err());
    }

    #[test]
    fn equal_mass_scan_has_both_families() {
        let set = scan(96, &Cotangent);
        let iso = set.points_of(PolylineKind::Isosceles).count();
        let sca: Vec<_> = set.points_of(PolylineKind::Scalene).collect();
        assert!(iso > 100, "{iso}");
        assert!(!sca.is_empty());
        let ac = critical_angle_ac();
        for p in &sca {
            let l = p.largest_arc();
            assert!(l > FRAC_PI_2 && l < ac + 1e-3, "largest arc {l} at {p:?}");
        }
        for p in set.points() {
            assert!(p.det.abs() <= 1e-8 * 1e3, "{p:?}");
        }
    }

    #[test]
    fn scalene_points_match_closed_form() {
        let set = scan(128, &Cotangent);
        let mut checked = 0;
        for p in set.points_of(PolylineKind::Scalene) {
            if p.y.abs() < p.a / 2.0 {
                let c = equal_mass_scalene_cos2y(p.a).unwrap();
                assert!(((2.0 * p.y).cos() - c).abs() < 1e-6, "{p:?}");
                checked += 1;
            }
        }
        assert!(checked > 4);
    }

    #[test]
    fn repulsive_scan_flips_signs() {
        let a = scan(64, &Cotangent);
        let rep = negate(cotangent());
        let b = scan(64, rep.as_ref());
        // near collisions the determinant is tiny on both sides and the
        // accepted points there depend on rounding
        let away = |c: &&ContourPoint| {
            c.shape()
                .arc_angles()
                .iter()
                .all(|&t| t > 0.2 && t < PI - 0.2)
        };
        let pa: Vec<_> = a.points().filter(away).collect();
        let pb: Vec<_> = b.points().filter(away).collect();
        assert_eq!(pa.len(), pb.len());
        assert!(pa.len() > 10);
        // chaining order can differ, so match points by position
        for x in &pa {
            let y = pb
                .iter()
                .min_by(|u, v| {
                    let du = (u.a - x.a).abs() + (u.y - x.y).abs();
                    let dv = (v.a - x.a).abs() + (v.y - x.y).abs();
                    du.total_cmp(&dv)
                })
                .unwrap();
            assert!(
                (x.a - y.a).abs() < 1e-9 && (x.y - y.y).abs() < 1e-9,
                "{x:?} {y:?}"
            );
            assert_eq!(x.s.map(|s| s.flipped()), y.s);
        }
    }
}
