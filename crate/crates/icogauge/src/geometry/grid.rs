//! Refined icosahedral pixel grid.
//!
//! The grid `H_r` is obtained from the icosahedron by `r` refinement steps:
//! every triangular face is split into four by the edge midpoints, and the
//! new points are projected back onto the unit sphere. The result has
//! `N = 5 * 2^(2r+1) + 2` pixels, of which the 12 original vertices keep
//! degree 5 ("corner" pixels) while every other pixel has 6 neighbors.
//!
//! Construction works on the unfolded net rather than in 3D: every lattice
//! point is identified by an exact integer key (vertex, point on an edge, or
//! point inside a face), so pixels shared between faces and charts are
//! identified combinatorially instead of by floating-point matching. 3D
//! positions are then filled in by the midpoint recursion.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Sentinel for "no pixel" slots in neighbor tables and chart maps.
pub const INVALID_PIXEL: u32 = u32::MAX;

/// Largest supported resolution (memory guard).
pub const MAX_RESOLUTION: u32 = 10;

/// Offsets of the hexagonal 1-ring on the chart lattice, in cyclic order.
///
/// Slot `t` points `t` gauge steps (of 2*pi/6) counterclockwise from the
/// chart's `+j` axis when seen from outside the sphere. The two offsets
/// missing from the 3x3 stencil, `(-1,+1)` and `(+1,-1)`, are the masked
/// kernel entries.
pub const HEX_OFFSETS: [(i64, i64); 6] = [(0, 1), (-1, 0), (-1, -1), (0, -1), (1, 0), (1, 1)];

/// Golden ratio.
const PHI: f64 = 1.618033988749894848204586834365638118;

/// Exact lattice-point identity on the subdivided icosahedron at one level.
///
/// Barycentric coordinates are integers summing to `R = 2^r`. Points on
/// shared edges or vertices canonicalize to the same key regardless of the
/// face they were reached through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum PointKey {
    Vertex(u8),
    /// Point on the edge `lo -> hi` (vertex ids, `lo < hi`) at parameter
    /// `t/R`, i.e. `((R-t)*lo + t*hi)/R` before re-projection. `0 < t < R`.
    Edge { lo: u8, hi: u8, t: u32 },
    /// Interior point of base face `face` with barycentric `(a, b, R-a-b)`
    /// relative to that face's stored vertex order; all three positive.
    Face { face: u8, a: u32, b: u32 },
}

/// The base icosahedron with the vertex roles used by the chart layout.
#[derive(Debug, Clone)]
pub(crate) struct BaseIco {
    pub verts: [[f64; 3]; 12],
    pub north: u8,
    pub south: u8,
    /// Five vertices adjacent to the north pole. The ring is ordered so
    /// that the chart lattice is counterclockwise seen from outside.
    pub upper: [u8; 5],
    /// `lower[c]` is the vertex adjacent to both `upper[c]` and
    /// `upper[c+1]`; it is also adjacent to the south pole.
    pub lower: [u8; 5],
    /// 20 faces in fixed order: for c in 0..5 the strip
    /// `[n,u_c,u_{c+1}]`, `[u_c,l_c,u_{c+1}]`, `[l_c,u_{c+1},l_{c+1}]`,
    /// `[l_c,s,l_{c+1}]` (indices mod 5).
    pub faces: [[u8; 3]; 20],
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = sub(a, b);
    dot(d, d)
}

impl BaseIco {
    pub fn build() -> BaseIco {
        // Cyclic permutations of (0, +-1, +-phi), normalized.
        let mut verts = [[0.0f64; 3]; 12];
        let mut k = 0;
        for &s1 in &[1.0f64, -1.0] {
            for &s2 in &[1.0f64, -1.0] {
                verts[k] = normalize([0.0, s1, s2 * PHI]);
                verts[k + 1] = normalize([s2 * PHI, 0.0, s1]);
                verts[k + 2] = normalize([s1, s2 * PHI, 0.0]);
                k += 3;
            }
        }

        // Edges connect vertices at the minimal pairwise distance.
        let mut min_d2 = f64::MAX;
        for i in 0..12 {
            for j in (i + 1)..12 {
                min_d2 = min_d2.min(dist2(verts[i], verts[j]));
            }
        }
        let cutoff = min_d2 * 1.2;
        let adjacent = |i: usize, j: usize| i != j && dist2(verts[i], verts[j]) < cutoff;

        // North pole: the (0, 1, phi) vertex; its antipode is also a vertex.
        let north = (0..12)
            .max_by(|&a, &b| {
                let ka = (verts[a][2], verts[a][1], verts[a][0]);
                let kb = (verts[b][2], verts[b][1], verts[b][0]);
                ka.partial_cmp(&kb).unwrap()
            })
            .unwrap();
        let south = (0..12)
            .find(|&i| dist2(verts[i], [-verts[north][0], -verts[north][1], -verts[north][2]]) < 1e-12)
            .expect("icosahedron is centrally symmetric");

        // Ring of the north pole, ordered clockwise seen from outside so
        // that the hex slot cycle on the charts comes out counterclockwise.
        let n_hat = verts[north];
        let mut ring: Vec<usize> = (0..12).filter(|&i| adjacent(north, i)).collect();
        assert_eq!(ring.len(), 5);
        let anchor = ring[0];
        let e1 = normalize(sub(verts[anchor], {
            let c = dot(verts[anchor], n_hat);
            [n_hat[0] * c, n_hat[1] * c, n_hat[2] * c]
        }));
        let e2 = cross(n_hat, e1);
        let angle = |i: usize| -> f64 {
            let t = verts[i];
            // Clockwise from outside: negate the counterclockwise angle.
            -f64::atan2(dot(t, e2), dot(t, e1))
        };
        ring.sort_by(|&a, &b| angle(a).partial_cmp(&angle(b)).unwrap());
        let upper: [u8; 5] = std::array::from_fn(|i| ring[i] as u8);

        // lower[c]: the non-polar vertex adjacent to both u_c and u_{c+1}.
        let lower: [u8; 5] = std::array::from_fn(|c| {
            let a = upper[c] as usize;
            let b = upper[(c + 1) % 5] as usize;
            (0..12)
                .find(|&i| i != north && adjacent(a, i) && adjacent(b, i))
                .expect("adjacent upper vertices share a lower neighbor") as u8
        });

        let mut faces = [[0u8; 3]; 20];
        for c in 0..5 {
            let c1 = (c + 1) % 5;
            faces[4 * c] = [north as u8, upper[c], upper[c1]];
            faces[4 * c + 1] = [upper[c], lower[c], upper[c1]];
            faces[4 * c + 2] = [lower[c], upper[c1], lower[c1]];
            faces[4 * c + 3] = [lower[c], south as u8, lower[c1]];
        }

        BaseIco {
            verts,
            north: north as u8,
            south: south as u8,
            upper,
            lower,
            faces,
        }
    }

    /// Canonicalize integer barycentric coordinates on face `f`.
    fn canonical(&self, f: u8, bary: [i64; 3], res: u32) -> PointKey {
        let r = 1i64 << res;
        debug_assert_eq!(bary[0] + bary[1] + bary[2], r);
        debug_assert!(bary.iter().all(|&x| (0..=r).contains(&x)));
        let vs = self.faces[f as usize];
        let zeros = bary.iter().filter(|&&x| x == 0).count();
        match zeros {
            2 => {
                let i = bary.iter().position(|&x| x != 0).unwrap();
                PointKey::Vertex(vs[i])
            }
            1 => {
                let z = bary.iter().position(|&x| x == 0).unwrap();
                let (i, j) = match z {
                    0 => (1, 2),
                    1 => (0, 2),
                    _ => (0, 1),
                };
                let (va, ta) = (vs[i], bary[i] as u32);
                let (vb, tb) = (vs[j], bary[j] as u32);
                if va < vb {
                    PointKey::Edge { lo: va, hi: vb, t: tb }
                } else {
                    PointKey::Edge { lo: vb, hi: va, t: ta }
                }
            }
            _ => PointKey::Face {
                face: f,
                a: bary[0] as u32,
                b: bary[1] as u32,
            },
        }
    }

    /// Position of a lattice point via the midpoint-subdivision recursion:
    /// points of level `r-1` keep their positions, odd points are spherical
    /// midpoints of their two even lattice neighbors.
    fn position(&self, key: PointKey, res: u32, memo: &mut HashMap<(PointKey, u32), [f64; 3]>) -> [f64; 3] {
        if let Some(&p) = memo.get(&(key, res)) {
            return p;
        }
        let p = match key {
            PointKey::Vertex(v) => self.verts[v as usize],
            PointKey::Edge { lo, hi, t } => {
                if t % 2 == 0 {
                    self.position(PointKey::Edge { lo, hi, t: t / 2 }, res - 1, memo)
                } else {
                    let a = self.edge_point(lo, hi, t - 1, res, memo);
                    let b = self.edge_point(lo, hi, t + 1, res, memo);
                    normalize([a[0] + b[0], a[1] + b[1], a[2] + b[2]])
                }
            }
            PointKey::Face { face, a, b } => {
                let r = 1i64 << res;
                let (a, b) = (a as i64, b as i64);
                let c = r - a - b;
                let bary = [a, b, c];
                let odd: Vec<usize> = (0..3).filter(|&i| bary[i] % 2 == 1).collect();
                if odd.is_empty() {
                    let parent = self.canonical(face, [a / 2, b / 2, c / 2], res - 1);
                    self.position(parent, res - 1, memo)
                } else {
                    debug_assert_eq!(odd.len(), 2);
                    let mut b1 = bary;
                    let mut b2 = bary;
                    b1[odd[0]] += 1;
                    b1[odd[1]] -= 1;
                    b2[odd[0]] -= 1;
                    b2[odd[1]] += 1;
                    let p1 = self.position(self.canonical(face, b1, res), res, memo);
                    let p2 = self.position(self.canonical(face, b2, res), res, memo);
                    normalize([p1[0] + p2[0], p1[1] + p2[1], p1[2] + p2[2]])
                }
            }
        };
        memo.insert((key, res), p);
        p
    }

    fn edge_point(
        &self,
        lo: u8,
        hi: u8,
        t: u32,
        res: u32,
        memo: &mut HashMap<(PointKey, u32), [f64; 3]>,
    ) -> [f64; 3] {
        let r = 1u32 << res;
        let key = if t == 0 {
            PointKey::Vertex(lo)
        } else if t == r {
            PointKey::Vertex(hi)
        } else {
            PointKey::Edge { lo, hi, t }
        };
        self.position(key, res, memo)
    }
}

/// Chart-lattice coordinates. `i` is the row (down), `j` the column
/// (right); the interior of a chart is `0 <= i < 2^r`, `0 <= j < 2^(r+1)`,
/// and the padded array extends one pixel beyond on every side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChartPos {
    pub chart: u8,
    pub i: i64,
    pub j: i64,
}

/// Map an on-strip lattice position of chart `c` to a face and barycentric
/// coordinates. Valid for `0 <= i <= R`, `0 <= j <= 2R`.
///
/// Chart corners: `(0,0)=u_c`, `(R,0)=north`, `(0,R)=l_c`, `(R,R)=u_{c+1}`,
/// `(0,2R)=south`, `(R,2R)=l_{c+1}`.
fn strip_bary(res: u32, c: u8, i: i64, j: i64) -> (u8, [i64; 3]) {
    let r = 1i64 << res;
    debug_assert!((0..=r).contains(&i) && (0..=2 * r).contains(&j));
    let c = c as usize;
    if j <= r {
        if i >= j {
            // T(c) = [north, u_c, u_{c+1}]
            (4 * c as u8, [i - j, r - i, j])
        } else {
            // M1(c) = [u_c, l_c, u_{c+1}]
            (4 * c as u8 + 1, [r - j, j - i, i])
        }
    } else {
        let jj = j - r;
        if i >= jj {
            // M2(c) = [l_c, u_{c+1}, l_{c+1}]
            (4 * c as u8 + 2, [r - i, i - jj, jj])
        } else {
            // B(c) = [l_c, south, l_{c+1}]
            (4 * c as u8 + 3, [r - jj, jj - i, i])
        }
    }
}

/// Resolve any padded-array position of chart `c` (including the one-pixel
/// border) to an on-strip position of some chart, or `None` for the three
/// border corners that do not correspond to a grid point.
///
/// Border rows unfold into the neighboring strip: the top row and left
/// column continue into chart `c-1`, while the bottom row and right column
/// lie on this strip's own boundary edges.
pub(crate) fn resolve_position(res: u32, c: u8, i: i64, j: i64) -> Option<(u8, i64, i64)> {
    let r = 1i64 << res;
    let prev = (c + 4) % 5;
    match (i, j) {
        _ if (0..=r).contains(&i) && (0..=2 * r).contains(&j) => Some((c, i, j)),
        (-1, -1) => None,
        (-1, j) if (0..r).contains(&j) => Some((prev, r - 1, j + r)),
        (-1, j) if (r..2 * r).contains(&j) => Some((prev, 2 * r - 1 - j, 2 * r - 1)),
        (-1, _) => None, // top-right pad corner, never read
        (i, -1) if (0..r).contains(&i) => Some((prev, r - 1, r - 1 - i)),
        (_, -1) => None, // bottom-left pad corner, never read
        _ => None,
    }
}

/// Refined icosahedral grid.
#[derive(Debug, Clone)]
pub struct IcoGrid {
    resolution: u32,
    positions: Vec<[f64; 3]>,
    /// Six neighbor ids per pixel in counterclockwise cyclic order (seen
    /// from outside), starting from the home chart's `+j` direction.
    /// Corner pixels have exactly one `INVALID_PIXEL` slot.
    neighbors: Vec<[u32; 6]>,
    corners: Vec<u32>,
    is_corner: Vec<bool>,
    faces: Vec<[u32; 3]>,
    /// Unique interior chart position of every pixel; the poles, which lie
    /// in no interior, map to chart 5 (sentinel).
    home: Vec<ChartPos>,
    pub(crate) base: std::sync::Arc<BaseIco>,
}

impl IcoGrid {
    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    /// Number of pixels, `5 * 2^(2r+1) + 2`.
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn position(&self, p: u32) -> [f64; 3] {
        self.positions[p as usize]
    }

    pub fn neighbors(&self) -> &[[u32; 6]] {
        &self.neighbors
    }

    pub fn neighbor_ring(&self, p: u32) -> &[u32; 6] {
        &self.neighbors[p as usize]
    }

    pub fn corners(&self) -> &[u32] {
        &self.corners
    }

    pub fn is_corner(&self, p: u32) -> bool {
        self.is_corner[p as usize]
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    /// Interior chart position of a non-corner pixel (poles have none).
    pub(crate) fn home_of(&self, p: u32) -> ChartPos {
        self.home[p as usize]
    }
}

/// Everything the atlas needs that is produced alongside the grid.
pub(crate) struct GridBuild {
    pub grid: IcoGrid,
    /// Pixel id at every padded chart position, `INVALID_PIXEL` at the
    /// three unused border corners. Indexed `[chart][(i+1)*(w) + (j+1)]`.
    pub chart_pixels: Vec<Vec<u32>>,
}

pub(crate) fn construct(res: u32) -> Result<GridBuild> {
    if res > MAX_RESOLUTION {
        return Err(Error::Capacity {
            what: "grid resolution",
            got: res as usize,
            limit: MAX_RESOLUTION as usize,
        });
    }
    let base = BaseIco::build();
    let r = 1i64 << res;
    let n_pixels = 5 * (1usize << (2 * res + 1)) + 2;

    // Pass 1: assign ids in chart scan order; every non-pole pixel shows up
    // in exactly one interior.
    let mut ids: HashMap<PointKey, u32> = HashMap::with_capacity(n_pixels);
    let mut home: Vec<ChartPos> = Vec::with_capacity(n_pixels);
    for c in 0..5u8 {
        for i in 0..r {
            for j in 0..2 * r {
                let (f, bary) = strip_bary(res, c, i, j);
                let key = base.canonical(f, bary, res);
                if let Some(&prev) = ids.get(&key) {
                    return Err(Error::Construction {
                        pixel: prev,
                        detail: format!(
                            "pixel appears in two chart interiors: ({}, {}, {}) and ({}, {}, {})",
                            home[prev as usize].chart, home[prev as usize].i, home[prev as usize].j, c, i, j
                        ),
                    });
                }
                ids.insert(key, home.len() as u32);
                home.push(ChartPos { chart: c, i, j });
            }
        }
    }
    let north_id = home.len() as u32;
    ids.insert(PointKey::Vertex(base.north), north_id);
    home.push(ChartPos { chart: 5, i: 0, j: 0 });
    let south_id = home.len() as u32;
    ids.insert(PointKey::Vertex(base.south), south_id);
    home.push(ChartPos { chart: 5, i: 0, j: 0 });
    if home.len() != n_pixels {
        return Err(Error::Construction {
            pixel: 0,
            detail: format!("expected {} pixels, found {}", n_pixels, home.len()),
        });
    }

    // Positions via midpoint recursion.
    let mut memo = HashMap::new();
    let mut positions = vec![[0.0f64; 3]; n_pixels];
    for (key, &id) in &ids {
        positions[id as usize] = base.position(*key, res, &mut memo);
    }

    // Extended per-chart pixel maps over the padded array.
    let w = (2 * r + 2) as usize;
    let h = (r + 2) as usize;
    let mut chart_pixels = vec![vec![INVALID_PIXEL; h * w]; 5];
    for c in 0..5u8 {
        for ip in 0..h as i64 {
            for jp in 0..w as i64 {
                let (i, j) = (ip - 1, jp - 1);
                if let Some((cc, si, sj)) = resolve_position(res, c, i, j) {
                    let (f, bary) = strip_bary(res, cc, si, sj);
                    let key = base.canonical(f, bary, res);
                    chart_pixels[c as usize][(ip * w as i64 + jp) as usize] = ids[&key];
                }
            }
        }
    }

    // Corner bookkeeping.
    let mut is_corner = vec![false; n_pixels];
    let mut corners = Vec::with_capacity(12);
    for v in 0..12u8 {
        let id = ids[&PointKey::Vertex(v)];
        is_corner[id as usize] = true;
        corners.push(id);
    }
    corners.sort_unstable();

    // Neighbor rings. Non-corner pixels read their home-chart stencil;
    // corner rings are gathered from all stencil occurrences and ordered
    // counterclockwise geometrically.
    let mut neighbors = vec![[INVALID_PIXEL; 6]; n_pixels];
    for p in 0..n_pixels as u32 {
        if is_corner[p as usize] {
            continue;
        }
        let hp = home[p as usize];
        let table = &chart_pixels[hp.chart as usize];
        for (t, &(di, dj)) in HEX_OFFSETS.iter().enumerate() {
            let (ip, jp) = (hp.i + di + 1, hp.j + dj + 1);
            let q = table[(ip * w as i64 + jp) as usize];
            if q == INVALID_PIXEL {
                return Err(Error::Construction {
                    pixel: p,
                    detail: format!("missing stencil neighbor at slot {t}"),
                });
            }
            neighbors[p as usize][t] = q;
        }
    }
    for &cp in &corners {
        let mut ring: Vec<u32> = Vec::new();
        for table in &chart_pixels {
            for ip in 0..h as i64 {
                for jp in 0..w as i64 {
                    if table[(ip * w as i64 + jp) as usize] != cp {
                        continue;
                    }
                    for &(di, dj) in HEX_OFFSETS.iter() {
                        let (qi, qj) = (ip + di, jp + dj);
                        if (0..h as i64).contains(&qi) && (0..w as i64).contains(&qj) {
                            let q = table[(qi * w as i64 + qj) as usize];
                            if q != INVALID_PIXEL && q != cp && !ring.contains(&q) {
                                ring.push(q);
                            }
                        }
                    }
                }
            }
        }
        // Drop stencil artifacts: true ring members are at the minimal
        // distance from the corner.
        let pc = positions[cp as usize];
        let dmin = ring
            .iter()
            .map(|&q| dist2(pc, positions[q as usize]))
            .fold(f64::MAX, f64::min);
        ring.retain(|&q| dist2(pc, positions[q as usize]) < dmin * 1.7);
        if ring.len() != 5 {
            return Err(Error::Construction {
                pixel: cp,
                detail: format!("corner ring has {} members, expected 5", ring.len()),
            });
        }
        // Counterclockwise about the outward normal, anchored at the
        // smallest id for determinism.
        let anchor = *ring.iter().min().unwrap();
        let e1 = {
            let q = positions[anchor as usize];
            let c0 = dot(q, pc);
            normalize(sub(q, [pc[0] * c0, pc[1] * c0, pc[2] * c0]))
        };
        let e2 = cross(pc, e1);
        ring.sort_by(|&a, &b| {
            let ang = |q: u32| {
                let t = positions[q as usize];
                let a = f64::atan2(dot(t, e2), dot(t, e1));
                if a < -1e-9 {
                    a + std::f64::consts::TAU
                } else {
                    a
                }
            };
            ang(a).partial_cmp(&ang(b)).unwrap()
        });
        for (t, &q) in ring.iter().enumerate() {
            neighbors[cp as usize][t] = q;
        }
    }

    // Refined faces, enumerated per base face.
    let mut faces = Vec::with_capacity(20 << (2 * res));
    for f in 0..20u8 {
        for a in 0..r {
            for b in 0..r - a {
                let c0 = r - 1 - a - b;
                // Upward triangle.
                let k1 = base.canonical(f, [a + 1, b, c0], res);
                let k2 = base.canonical(f, [a, b + 1, c0], res);
                let k3 = base.canonical(f, [a, b, c0 + 1], res);
                faces.push([ids[&k1], ids[&k2], ids[&k3]]);
                // Downward triangle paired with it, when it exists.
                if a + b + 2 + c0 - 1 == r && c0 >= 1 {
                    let d1 = base.canonical(f, [a, b + 1, c0], res);
                    let d2 = base.canonical(f, [a + 1, b, c0], res);
                    let d3 = base.canonical(f, [a + 1, b + 1, c0 - 1], res);
                    faces.push([ids[&d1], ids[&d2], ids[&d3]]);
                }
            }
        }
    }

    let grid = IcoGrid {
        resolution: res,
        positions,
        neighbors,
        corners,
        is_corner,
        faces,
        home,
        base: std::sync::Arc::new(base),
    };
    Ok(GridBuild { grid, chart_pixels })
}

/// Build the refined icosahedral grid at resolution `r`.
pub fn build_grid(res: u32) -> Result<IcoGrid> {
    Ok(construct(res)?.grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pixel_counts_match_formula() {
        for r in 0..=5u32 {
            let grid = build_grid(r).unwrap();
            assert_eq!(grid.len(), 5 * (1 << (2 * r + 1)) + 2, "r={r}");
        }
    }

    #[test]
    fn r0_is_all_corners() {
        let grid = build_grid(0).unwrap();
        assert_eq!(grid.len(), 12);
        assert_eq!(grid.corners().len(), 12);
        for p in 0..12u32 {
            assert!(grid.is_corner(p));
            let valid = grid.neighbor_ring(p).iter().filter(|&&q| q != INVALID_PIXEL).count();
            assert_eq!(valid, 5);
        }
    }

    #[test]
    fn r1_has_30_hexagons() {
        let grid = build_grid(1).unwrap();
        assert_eq!(grid.len(), 42);
        let hexes = (0..42u32).filter(|&p| !grid.is_corner(p)).count();
        assert_eq!(hexes, 30);
    }

    #[test]
    fn resolution_guard() {
        assert!(matches!(build_grid(11), Err(Error::Capacity { .. })));
    }

    #[test]
    fn positions_are_unit() {
        let grid = build_grid(3).unwrap();
        for p in grid.positions() {
            assert!((dot(*p, *p).sqrt() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn neighbor_relation_is_symmetric_and_cyclic() {
        for r in 1..=3u32 {
            let grid = build_grid(r).unwrap();
            for p in 0..grid.len() as u32 {
                let ring = grid.neighbor_ring(p);
                let valid: Vec<u32> = ring.iter().copied().filter(|&q| q != INVALID_PIXEL).collect();
                let expected = if grid.is_corner(p) { 5 } else { 6 };
                assert_eq!(valid.len(), expected, "r={r} p={p}");
                let mut sorted = valid.clone();
                sorted.sort_unstable();
                sorted.dedup();
                assert_eq!(sorted.len(), expected, "duplicate neighbor r={r} p={p}");
                for &q in &valid {
                    assert!(
                        grid.neighbor_ring(q).contains(&p),
                        "asymmetric edge {p}->{q} at r={r}"
                    );
                }
            }
        }
    }

    #[test]
    fn neighbor_rings_are_counterclockwise() {
        // Consecutive valid ring entries must subtend a positive rotation
        // about the outward normal.
        for r in 1..=3u32 {
            let grid = build_grid(r).unwrap();
            for p in 0..grid.len() as u32 {
                if grid.is_corner(p) {
                    continue;
                }
                let c = grid.position(p);
                let ring = grid.neighbor_ring(p);
                for t in 0..6 {
                    let a = grid.position(ring[t]);
                    let b = grid.position(ring[(t + 1) % 6]);
                    let ta = sub(a, c);
                    let tb = sub(b, c);
                    assert!(
                        dot(cross(ta, tb), c) > 0.0,
                        "ring not CCW at r={r} p={p} slot {t}"
                    );
                }
            }
        }
    }

    #[test]
    fn deterministic_construction() {
        let g1 = build_grid(2).unwrap();
        let g2 = build_grid(2).unwrap();
        assert_eq!(g1.positions(), g2.positions());
        assert_eq!(g1.neighbors(), g2.neighbors());
    }

    #[test]
    fn refined_face_count() {
        for r in 0..=3u32 {
            let grid = build_grid(r).unwrap();
            assert_eq!(grid.faces().len(), 20 << (2 * r), "r={r}");
        }
    }

    #[test]
    fn coarse_pixels_embed_in_fine_grid() {
        // Stride-2 anchors: chart position (2a, 2b) at resolution r holds
        // the same point as (a, b) at resolution r-1.
        let fine = construct(3).unwrap();
        let coarse = construct(2).unwrap();
        let (rf, rc) = (3u32, 2u32);
        let wf = (2 * (1i64 << rf) + 2) as usize;
        let wc = (2 * (1i64 << rc) + 2) as usize;
        for c in 0..5usize {
            for a in 0..(1i64 << rc) {
                for b in 0..2 * (1i64 << rc) {
                    let pf = fine.chart_pixels[c][((2 * a + 1) * wf as i64 + 2 * b + 1) as usize];
                    let pc = coarse.chart_pixels[c][((a + 1) * wc as i64 + b + 1) as usize];
                    let xf = fine.grid.position(pf);
                    let xc = coarse.grid.position(pc);
                    assert!(dist2(xf, xc) < 1e-24, "chart {c} ({a},{b})");
                }
            }
        }
    }
}
