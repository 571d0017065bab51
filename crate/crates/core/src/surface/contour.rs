use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::AccuracySurface;
use crate::error::{Error, Result};

/// A regular grid in added-amount coordinates `(n_real+, n_syn+)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    /// Grid nodes along each axis, at least 2.
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn square(max: f64, resolution: usize) -> Self {
        GridSpec {
            x_min: 0.0,
            x_max: max,
            y_min: 0.0,
            y_max: max,
            nx: resolution,
            ny: resolution,
        }
    }

    /// `[0, extent * n_base]^2`.
    pub fn for_surface(surface: &AccuracySurface, extent: f64, resolution: usize) -> Self {
        Self::square(extent * surface.n_base as f64, resolution)
    }

    fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 2 nodes per axis, got {}x{}",
                self.nx, self.ny
            )));
        }
        let ok = |a: f64, b: f64| a.is_finite() && b.is_finite() && b > a;
        if !ok(self.x_min, self.x_max) || !ok(self.y_min, self.y_max) {
            return Err(Error::InvalidArgument("grid axis range is empty".into()));
        }
        Ok(())
    }

    fn x(&self, i: usize) -> f64 {
        self.x_min + (self.x_max - self.x_min) * i as f64 / (self.nx - 1) as f64
    }

    fn y(&self, j: usize) -> f64 {
        self.y_min + (self.y_max - self.y_min) * j as f64 / (self.ny - 1) as f64
    }

    /// Length of one cell diagonal.
    pub fn cell_diagonal(&self) -> f64 {
        let dx = (self.x_max - self.x_min) / (self.nx - 1) as f64;
        let dy = (self.y_max - self.y_min) / (self.ny - 1) as f64;
        dx.hypot(dy)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContourLevel {
    pub level: f64,
    /// Each polyline is an ordered vertex list; closed loops repeat their
    /// first vertex at the end.
    pub polylines: Vec<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContourSet {
    pub grid: GridSpec,
    pub levels: Vec<ContourLevel>,
}

impl ContourSet {
    pub fn polyline_count(&self) -> usize {
        self.levels.iter().map(|l| l.polylines.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.polyline_count() == 0
    }

    /// Vertex table: `level,polyline,vertex,n_real_plus,n_syn_plus`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,polyline,vertex,n_real_plus,n_syn_plus\n");
        for l in &self.levels {
            for (k, line) in l.polylines.iter().enumerate() {
                for (v, (x, y)) in line.iter().enumerate() {
                    let _ = writeln!(out, "{},{k},{v},{x:.6},{y:.6}", l.level);
                }
            }
        }
        out
    }
}

/// `count` levels evenly spaced strictly inside `(lo, hi)`.
pub fn default_levels(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (1..=count)
        .map(|k| lo + (hi - lo) * k as f64 / (count + 1) as f64)
        .collect()
}

/// Contours of a surface over added amounts: the value at `(x, y)` is
/// `Acc(n_base + x, y)`.
pub fn contour_grid(surface: &AccuracySurface, grid: &GridSpec, levels: &[f64]) -> Result<ContourSet> {
    let nb = surface.n_base as f64;
    trace_contours(|x, y| surface.eval(nb + x, y), grid, levels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Node(usize, usize),
    /// Edge from node `(i, j)` to `(i+1, j)` if horizontal, else `(i, j+1)`.
    Edge(usize, usize, bool),
}

/// Marching squares on `f` sampled over `grid`.
///
/// A node is inside a level when its value is strictly greater. Ambiguous
/// saddle cells are split by the mean of their corners. Each crossing is
/// located by bisection on `f` along its cell edge, so vertices lie on the
/// level to round-off rather than to interpolation error.
pub fn trace_contours<F>(f: F, grid: &GridSpec, levels: &[f64]) -> Result<ContourSet>
where
    F: Fn(f64, f64) -> f64,
{
    grid.validate()?;
    let (nx, ny) = (grid.nx, grid.ny);
    let mut v = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            v[j * nx + i] = f(grid.x(i), grid.y(j));
        }
    }
    let val = |i: usize, j: usize| v[j * nx + i];

    let mut out = Vec::with_capacity(levels.len());
    for &level in levels {
        let mut points: BTreeMap<Key, (f64, f64)> = BTreeMap::new();
        let mut crossing = |a: (usize, usize), b: (usize, usize)| -> Key {
            let (va, vb) = (val(a.0, a.1), val(b.0, b.1));
            if va == level {
                return node(&mut points, grid, a);
            }
            if vb == level {
                return node(&mut points, grid, b);
            }
            let key = if a.1 == b.1 {
                Key::Edge(a.0.min(b.0), a.1, true)
            } else {
                Key::Edge(a.0, a.1.min(b.1), false)
            };
            points.entry(key).or_insert_with(|| {
                let pa = (grid.x(a.0), grid.y(a.1));
                let pb = (grid.x(b.0), grid.y(b.1));
                refine(&f, pa, pb, va, level)
            });
            key
        };

        let mut segments: Vec<(Key, Key)> = Vec::new();
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let c = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
                let inside = c.map(|(a, b)| val(a, b) > level);
                let case = inside
                    .iter()
                    .enumerate()
                    .fold(0u8, |acc, (k, &x)| acc | ((x as u8) << k));
                if case == 0 || case == 15 {
                    continue;
                }
                // edges: 0 bottom c0-c1, 1 right c1-c2, 2 top c3-c2, 3 left c0-c3
                let edge = |e: usize| match e {
                    0 => (c[0], c[1]),
                    1 => (c[1], c[2]),
                    2 => (c[3], c[2]),
                    _ => (c[0], c[3]),
                };
                let center = (val(c[0].0, c[0].1) + val(c[1].0, c[1].1) + val(c[2].0, c[2].1) + val(c[3].0, c[3].1))
                    / 4.0
                    > level;
                let pairs: &[(usize, usize)] = match case {
                    1 | 14 => &[(3, 0)],
                    2 | 13 => &[(0, 1)],
                    3 | 12 => &[(3, 1)],
                    4 | 11 => &[(1, 2)],
                    6 | 9 => &[(0, 2)],
                    7 | 8 => &[(3, 2)],
                    // c0 and c2 inside
                    5 if center => &[(3, 2), (0, 1)],
                    5 => &[(3, 0), (1, 2)],
                    // c1 and c3 inside
                    10 if center => &[(3, 0), (1, 2)],
                    _ => &[(3, 2), (0, 1)],
                };
                for &(e1, e2) in pairs {
                    let (a1, b1) = edge(e1);
                    let (a2, b2) = edge(e2);
                    let k1 = crossing(a1, b1);
                    let k2 = crossing(a2, b2);
                    segments.push((k1, k2));
                }
            }
        }
        let polylines = chain(&segments)
            .into_iter()
            .map(|keys| keys.iter().map(|k| points[k]).collect())
            .collect();
        out.push(ContourLevel { level, polylines });
    }
    Ok(ContourSet {
        grid: *grid,
        levels: out,
    })
}

fn node(points: &mut BTreeMap<Key, (f64, f64)>, grid: &GridSpec, n: (usize, usize)) -> Key {
    let key = Key::Node(n.0, n.1);
    points.insert(key, (grid.x(n.0), grid.y(n.1)));
    key
}

/// Bisection for `f = level` on the segment `pa -> pb`, where `f(pa) = va`
/// lies above the level and `f(pb)` at or below it (or the reverse).
fn refine<F: Fn(f64, f64) -> f64>(f: &F, pa: (f64, f64), pb: (f64, f64), va: f64, level: f64) -> (f64, f64) {
    let at = |t: f64| (pa.0 + t * (pb.0 - pa.0), pa.1 + t * (pb.1 - pa.1));
    let a_above = va > level;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let p = at(mid);
        let g = f(p.0, p.1) - level;
        if g == 0.0 {
            return p;
        }
        if (g > 0.0) == a_above {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    at(0.5 * (lo + hi))
}

/// Joins segments sharing endpoints into polylines. Open chains are walked
/// from their odd-degree ends first, then closed loops. A segment that
/// touches the level at a single node becomes a one-vertex polyline unless
/// that node already belongs to another chain.
fn chain(segments: &[(Key, Key)]) -> Vec<Vec<Key>> {
    let mut adj: BTreeMap<Key, Vec<usize>> = BTreeMap::new();
    let mut touches = Vec::new();
    for (s, &(a, b)) in segments.iter().enumerate() {
        if a == b {
            touches.push(a);
            continue;
        }
        adj.entry(a).or_default().push(s);
        adj.entry(b).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    let odd: Vec<Key> = adj.iter().filter(|(_, s)| s.len() % 2 == 1).map(|(k, _)| *k).collect();
    let all: Vec<Key> = adj.keys().copied().collect();
    for start in odd.into_iter().chain(all) {
        while let Some(&first) = adj[&start].iter().find(|&&s| !used[s]) {
            let mut line = vec![start];
            let mut cur = start;
            let mut next_seg = Some(first);
            while let Some(s) = next_seg {
                used[s] = true;
                let (a, b) = segments[s];
                cur = if a == cur { b } else { a };
                line.push(cur);
                next_seg = adj[&cur].iter().copied().find(|&s| !used[s]);
            }
            lines.push(line);
        }
    }
    touches.sort();
    touches.dedup();
    for t in touches {
        if !adj.contains_key(&t) {
            lines.push(vec![t]);
        }
    }
    lines
}
