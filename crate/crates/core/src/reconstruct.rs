//! Face reconstruction from cell averages.
//!
//! Every kind maps a six-cell stencil `[q(i-2), .., q(i+3)]` to the pair of
//! left/right values at face `i+1/2`. The right value is always the left
//! reconstruction applied to the reversed stencil, which makes all kinds
//! mirror-symmetric by construction.

use std::fmt;
use std::str::FromStr;

use crate::mesh::{Axis, ConservedField, NCOMP};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReconstructionKind {
    Linear1,
    Linear3,
    Linear5,
    Weno5Component,
}

impl ReconstructionKind {
    pub fn is_linear(self) -> bool {
        !matches!(self, ReconstructionKind::Weno5Component)
    }
}

impl fmt::Display for ReconstructionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReconstructionKind::Linear1 => "linear1",
            ReconstructionKind::Linear3 => "linear3",
            ReconstructionKind::Linear5 => "linear5",
            ReconstructionKind::Weno5Component => "weno5_component",
        })
    }
}

impl FromStr for ReconstructionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear1" => Ok(ReconstructionKind::Linear1),
            "linear3" => Ok(ReconstructionKind::Linear3),
            "linear5" => Ok(ReconstructionKind::Linear5),
            "weno5_component" | "weno5" => Ok(ReconstructionKind::Weno5Component),
            other => Err(format!("unknown reconstruction `{other}`")),
        }
    }
}

/// Fifth-order left-biased weights on `q(i-2..=i+2)`.
pub const LINEAR5_LEFT: [f64; 5] = [2.0 / 60.0, -13.0 / 60.0, 47.0 / 60.0, 27.0 / 60.0, -3.0 / 60.0];
/// Fifth-order right-state weights on `q(i-1..=i+3)`.
pub const LINEAR5_RIGHT: [f64; 5] = [-3.0 / 60.0, 27.0 / 60.0, 47.0 / 60.0, -13.0 / 60.0, 2.0 / 60.0];
/// Third-order left-biased weights on `q(i-1..=i+1)`.
pub const LINEAR3_LEFT: [f64; 3] = [-1.0 / 6.0, 5.0 / 6.0, 2.0 / 6.0];

pub const WENO_EPS: f64 = 1e-6;
const WENO_LINEAR: [f64; 3] = [0.1, 0.6, 0.3];

/// Left value at `i+1/2` from `s = [q(i-2), q(i-1), q(i), q(i+1), q(i+2)]`.
#[inline]
fn left_value(s: [f64; 5], kind: ReconstructionKind) -> f64 {
    match kind {
        ReconstructionKind::Linear1 => s[2],
        ReconstructionKind::Linear3 => LINEAR3_LEFT[0] * s[1] + LINEAR3_LEFT[1] * s[2] + LINEAR3_LEFT[2] * s[3],
        ReconstructionKind::Linear5 => (2.0 * s[0] - 13.0 * s[1] + 47.0 * s[2] + 27.0 * s[3] - 3.0 * s[4]) / 60.0,
        ReconstructionKind::Weno5Component => weno5_left(s),
    }
}

/// WENO-JS (Jiang-Shu) left value.
#[inline]
pub fn weno5_left(s: [f64; 5]) -> f64 {
    let [a, b, c, d, e] = s;
    let p0 = (2.0 * a - 7.0 * b + 11.0 * c) / 6.0;
    let p1 = (-b + 5.0 * c + 2.0 * d) / 6.0;
    let p2 = (2.0 * c + 5.0 * d - e) / 6.0;

    let b0 = 13.0 / 12.0 * (a - 2.0 * b + c).powi(2) + 0.25 * (a - 4.0 * b + 3.0 * c).powi(2);
    let b1 = 13.0 / 12.0 * (b - 2.0 * c + d).powi(2) + 0.25 * (b - d).powi(2);
    let b2 = 13.0 / 12.0 * (c - 2.0 * d + e).powi(2) + 0.25 * (3.0 * c - 4.0 * d + e).powi(2);

    let w0 = WENO_LINEAR[0] / (WENO_EPS + b0).powi(2);
    let w1 = WENO_LINEAR[1] / (WENO_EPS + b1).powi(2);
    let w2 = WENO_LINEAR[2] / (WENO_EPS + b2).powi(2);
    (w0 * p0 + w1 * p1 + w2 * p2) / (w0 + w1 + w2)
}

/// Left and right values at face `i+1/2` from `stencil = [q(i-2), .., q(i+3)]`.
#[inline]
pub fn reconstruct_pair(stencil: &[f64; 6], kind: ReconstructionKind) -> (f64, f64) {
    let [a, b, c, d, e, f] = *stencil;
    (left_value([a, b, c, d, e], kind), left_value([f, e, d, c, b], kind))
}

/// Reconstruct `len` consecutive faces of one component: face `f` sits
/// between cells `base + f` and `base + f + stride` (padded indices), with its
/// stencil running along `stride`. Same values as [`reconstruct_pair`].
pub fn reconstruct_row(q: &[f64], base: usize, stride: usize, kind: ReconstructionKind, left: &mut [f64], right: &mut [f64]) {
    let len = left.len();
    assert_eq!(right.len(), len);
    let lane = |o: usize| &q[base + o * stride - 2 * stride..][..len];
    let (a, b, c, d, e, f) = (lane(0), lane(1), lane(2), lane(3), lane(4), lane(5));
    macro_rules! run {
        ($kind:expr) => {
            for k in 0..len {
                left[k] = left_value([a[k], b[k], c[k], d[k], e[k]], $kind);
                right[k] = left_value([f[k], e[k], d[k], c[k], b[k]], $kind);
            }
        };
    }
    match kind {
        ReconstructionKind::Linear1 => run!(ReconstructionKind::Linear1),
        ReconstructionKind::Linear3 => run!(ReconstructionKind::Linear3),
        ReconstructionKind::Linear5 => run!(ReconstructionKind::Linear5),
        ReconstructionKind::Weno5Component => run!(ReconstructionKind::Weno5Component),
    }
}

/// Face states along one axis: `left[comp][face]`, `right[comp][face]`.
///
/// Faces are ordered with the normal index fastest. Along x there are
/// `(nx + 1) * ny` faces, face `k` of row `j` sitting between interior cells
/// `k - 1` and `k`; along y there are `nx * (ny + 1)`, indexed `j * nx + i`
/// for the face below cell `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceStates {
    pub axis: Axis,
    pub left: [Vec<f64>; NCOMP],
    pub right: [Vec<f64>; NCOMP],
}

/// Reconstruct every conserved component at every interior face (boundary
/// faces included). Ghost cells must be filled.
pub fn reconstruct_field(field: &ConservedField, axis: Axis, kind: ReconstructionKind) -> FaceStates {
    let grid = &field.grid;
    let (nx, ny) = (grid.nx() as isize, grid.ny() as isize);
    let s = grid.stride(axis);
    let nfaces = match axis {
        Axis::X => (nx as usize + 1) * ny as usize,
        Axis::Y => nx as usize * (ny as usize + 1),
    };
    let mut left: [Vec<f64>; NCOMP] = std::array::from_fn(|_| Vec::with_capacity(nfaces));
    let mut right: [Vec<f64>; NCOMP] = std::array::from_fn(|_| Vec::with_capacity(nfaces));
    let faces: Vec<(isize, isize)> = match axis {
        Axis::X => (0..ny).flat_map(|j| (-1..nx).map(move |i| (i, j))).collect(),
        Axis::Y => (-1..ny).flat_map(|j| (0..nx).map(move |i| (i, j))).collect(),
    };
    for (i, j) in faces {
        let k = grid.idx(i, j);
        for c in 0..NCOMP {
            let q = &field.data[c];
            let st = [q[k - 2 * s], q[k - s], q[k], q[k + s], q[k + 2 * s], q[k + 3 * s]];
            let (l, r) = reconstruct_pair(&st, kind);
            left[c].push(l);
            right[c].push(r);
        }
    }
    FaceStates { axis, left, right }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{apply_boundary, BoundarySpec, ConservedState, EosParams, Grid, PrimitiveState};
    use proptest::prelude::*;

    const KINDS: [ReconstructionKind; 4] =
        [ReconstructionKind::Linear1, ReconstructionKind::Linear3, ReconstructionKind::Linear5, ReconstructionKind::Weno5Component];

    #[test]
    fn weights_sum_to_one() {
        // exact integer numerators
        assert_eq!(2 - 13 + 47 + 27 - 3, 60);
        assert_eq!(-1 + 5 + 2, 6);
        let s5: f64 = LINEAR5_LEFT.iter().sum();
        let s5r: f64 = LINEAR5_RIGHT.iter().sum();
        let s3: f64 = LINEAR3_LEFT.iter().sum();
        assert!((s5 - 1.0).abs() < 1e-15 && (s5r - 1.0).abs() < 1e-15 && (s3 - 1.0).abs() < 1e-15);
        let mut rev = LINEAR5_LEFT;
        rev.reverse();
        assert_eq!(rev, LINEAR5_RIGHT);
    }

    #[test]
    fn constant_stencil_is_reproduced() {
        for kind in KINDS {
            let (l, r) = reconstruct_pair(&[3.25; 6], kind);
            assert!((l - 3.25).abs() < 1e-14 && (r - 3.25).abs() < 1e-14, "{kind}");
        }
    }

    /// Exact cell averages of x^n over unit cells [k, k+1].
    fn averages(deg: i32, first: i32) -> [f64; 6] {
        std::array::from_fn(|k| {
            let a = (first + k as i32) as f64;
            ((a + 1.0).powi(deg + 1) - a.powi(deg + 1)) / (deg + 1) as f64
        })
    }

    #[test]
    fn linear_data_gives_exact_face_value() {
        // cells i-2..i+3 = [-2,-1], ..., [3,4]; face i+1/2 at x = 1
        let st = averages(1, -2);
        let (l, r) = reconstruct_pair(&st, ReconstructionKind::Linear5);
        assert!((l - 1.0).abs() < 1e-14 && (r - 1.0).abs() < 1e-14);
    }

    #[test]
    fn polynomial_exactness() {
        for deg in 0..=4 {
            for first in [-4, -2, 0, 3] {
                let st = averages(deg, first);
                let face = (first + 3) as f64;
                let exact = face.powi(deg);
                let scale = exact.abs().max(1.0) * 10f64.powi(deg);
                let (l, r) = reconstruct_pair(&st, ReconstructionKind::Linear5);
                assert!((l - exact).abs() <= 1e-12 * scale, "deg {deg}: {l} vs {exact}");
                assert!((r - exact).abs() <= 1e-12 * scale, "deg {deg}: {r} vs {exact}");
                if deg <= 2 {
                    let (l, r) = reconstruct_pair(&st, ReconstructionKind::Linear3);
                    assert!((l - exact).abs() <= 1e-12 * scale);
                    assert!((r - exact).abs() <= 1e-12 * scale);
                }
            }
        }
        // linear3 is not exact for cubics
        let st = averages(3, -2);
        let (l, _) = reconstruct_pair(&st, ReconstructionKind::Linear3);
        assert!((l - 1.0).abs() > 1e-3);
    }

    #[test]
    fn step_gibbs_versus_weno() {
        let st = [1.0, 1.0, 1.0, 0.0, 0.0, 0.0];
        let (l5, r5) = reconstruct_pair(&st, ReconstructionKind::Linear5);
        // the face sits on the jump: 36/60 from the left, 24/60 from the right
        assert!((l5 - 0.6).abs() < 1e-15 && (r5 - 0.4).abs() < 1e-15);
        // next face to the left sees the jump inside its stencil and overshoots
        let st = [1.0, 1.0, 1.0, 1.0, 0.0, 0.0];
        let (l5, r5) = reconstruct_pair(&st, ReconstructionKind::Linear5);
        assert!(l5 > 1.0 || r5 > 1.0 || l5 < 0.0 || r5 < 0.0, "{l5} {r5}");
        for st in [[1.0, 1.0, 1.0, 0.0, 0.0, 0.0], [1.0, 1.0, 1.0, 1.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0, 0.0, 0.0]] {
            let (l, r) = reconstruct_pair(&st, ReconstructionKind::Weno5Component);
            for v in [l, r] {
                assert!((-1e-12..=1.0 + 1e-12).contains(&v), "{v}");
            }
        }
    }

    #[test]
    fn weno_matches_linear5_on_smooth_data_with_refinement() {
        let mut errs = Vec::new();
        for n in [20, 40, 80, 160] {
            let h = 1.0 / n as f64;
            let mut max_diff: f64 = 0.0;
            for i in 0..n {
                let st: [f64; 6] = std::array::from_fn(|k| {
                    let a = (i as f64 + k as f64 - 2.0) * h;
                    // cell average of sin(2 pi x)
                    ((2.0 * std::f64::consts::PI * a).cos() - (2.0 * std::f64::consts::PI * (a + h)).cos()) / (2.0 * std::f64::consts::PI * h)
                });
                let (l5, r5) = reconstruct_pair(&st, ReconstructionKind::Linear5);
                let (lw, rw) = reconstruct_pair(&st, ReconstructionKind::Weno5Component);
                max_diff = max_diff.max((l5 - lw).abs()).max((r5 - rw).abs());
            }
            errs.push(max_diff);
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 3.0, "{errs:?}");
        }
    }

    fn sine_field(m: usize, shift: usize) -> ConservedField {
        let grid = Grid::new_1d(0.0, 1.0, m).unwrap();
        let eos = EosParams::new(1.4).unwrap();
        let mut f = ConservedField::zeros(grid, eos);
        let h = 1.0 / m as f64;
        for i in 0..m {
            let src = (i + m - shift) % m;
            let a = src as f64 * h;
            let avg = ((2.0 * std::f64::consts::PI * a).cos() - (2.0 * std::f64::consts::PI * (a + h)).cos()) / (2.0 * std::f64::consts::PI * h);
            f.set(i as isize, 0, ConservedState { rho: 1.0 + 0.2 * avg, mom: [0.3 * avg, 0.0], energy: 2.5 + avg });
        }
        apply_boundary(&mut f, &BoundarySpec::periodic(), 0.0);
        f
    }

    #[test]
    fn uniform_field_faces_equal_cells() {
        let grid = Grid::new_2d((0.0, 1.0), (0.0, 1.0), (8, 10)).unwrap();
        let eos = EosParams::new(1.4).unwrap();
        let mut f = ConservedField::from_fn(grid, eos, |_, _| PrimitiveState::new(1.3, [0.2, -0.4], 2.0).unwrap());
        apply_boundary(&mut f, &BoundarySpec::periodic(), 0.0);
        let u = f.get(0, 0).to_array();
        for axis in [Axis::X, Axis::Y] {
            for kind in KINDS {
                let fs = reconstruct_field(&f, axis, kind);
                for c in 0..NCOMP {
                    for (l, r) in fs.left[c].iter().zip(&fs.right[c]) {
                        assert!((l - u[c]).abs() < 1e-14 && (r - u[c]).abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn shifted_field_gives_shifted_faces() {
        let m = 24;
        for kind in KINDS {
            let a = reconstruct_field(&sine_field(m, 0), Axis::X, kind);
            let b = reconstruct_field(&sine_field(m, 5), Axis::X, kind);
            // face k sits at x_{k-1/2}; faces 0 and m coincide periodically
            for k in 0..m {
                let ks = (k + 5) % m;
                for c in 0..NCOMP {
                    assert_eq!(a.left[c][k], b.left[c][ks]);
                    assert_eq!(a.right[c][k], b.right[c][ks]);
                }
            }
        }
    }

    #[test]
    fn linear5_face_jump_decays_at_fifth_order() {
        let mut jumps = Vec::new();
        for m in [16, 32, 64, 128] {
            let fs = reconstruct_field(&sine_field(m, 0), Axis::X, ReconstructionKind::Linear5);
            let jump = fs.left[0].iter().zip(&fs.right[0]).map(|(l, r)| (l - r).abs()).fold(0.0, f64::max);
            jumps.push(jump);
        }
        let order = (jumps[2] / jumps[3]).log2();
        assert!((4.6..=5.6).contains(&order), "{jumps:?} order {order}");
    }

    proptest! {
        #[test]
        fn mirror_symmetry(st in prop::array::uniform6(-10.0f64..10.0), k in 0usize..4) {
            let kind = KINDS[k];
            let (l, r) = reconstruct_pair(&st, kind);
            let mut rev = st;
            rev.reverse();
            let (lr, rr) = reconstruct_pair(&rev, kind);
            prop_assert_eq!(l, rr);
            prop_assert_eq!(r, lr);
        }

        #[test]
        fn weno_bounded_on_steps(a in -5.0f64..5.0, jump in 0.1f64..5.0, up in any::<bool>(), pos in 1usize..6) {
            let b = if up { a + jump } else { a - jump };
            let st: [f64; 6] = std::array::from_fn(|k| if k < pos { a } else { b });
            let (l, r) = reconstruct_pair(&st, ReconstructionKind::Weno5Component);
            let (lo, hi) = (a.min(b), a.max(b));
            let margin = 1e-5 * jump;
            prop_assert!(l >= lo - margin && l <= hi + margin);
            prop_assert!(r >= lo - margin && r <= hi + margin);
        }

        #[test]
        fn linear_kinds_are_affine(st in prop::array::uniform6(-3.0f64..3.0), c in -2.0f64..2.0, s in 0.1f64..4.0, k in 0usize..3) {
            let kind = KINDS[k];
            let (l, r) = reconstruct_pair(&st, kind);
            let moved = st.map(|q| s * q + c);
            let (lm, rm) = reconstruct_pair(&moved, kind);
            prop_assert!((lm - (s * l + c)).abs() < 1e-12);
            prop_assert!((rm - (s * r + c)).abs() < 1e-12);
        }
    }
}
