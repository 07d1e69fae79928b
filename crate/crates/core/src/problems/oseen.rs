//! Oseen lid-driven cavity on a MAC grid, `n × n` cells of side `h = 1/n`.
//!
//! Unknowns: `u` on interior vertical faces (`x = i·h`, `i = 1..n-1`, row
//! `j`, index `j·(n-1) + i-1`), then `v` on interior horizontal faces
//! (`y = j·h`, `j = 1..n-1`, column `i`, index `n·(n-1) + i·(n-1) + j-1`),
//! then cell pressures (`j·n + i`) with the last cell pinned.
//!
//! Every equation is integrated over its `h × h` control volume: diffusion
//! `ν·(4φ_P − Σφ_nb)`, first-order upwind convection `Σ_inflow h·|w·n|·(φ_P − φ_nb)`,
//! pressure gradient `h·(p₊ − p₋)`, body force `h²·f`. The top wall moves with
//! unit tangential velocity; the other walls are no-slip. Tangential wall
//! values enter through mirror ghosts `φ_g = 2·φ_wall − φ_P`.

use std::f64::consts::PI;

use super::rng::SplitMix64;
use crate::layout::{BlockLayout, SplittableMatrix};
use crate::precond::PcdContext;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OseenParams {
    pub n: usize,
    pub viscosity: f64,
    pub seed: u64,
    /// Multiplies the frozen wind; `0` gives a Stokes problem.
    pub wind_scale: f64,
    /// Amplitude of the random body force.
    pub forcing: f64,
}

impl OseenParams {
    pub fn new(n: usize, viscosity: f64, seed: u64) -> Self {
        Self { n, viscosity, seed, wind_scale: 1.0, forcing: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct OseenSystem {
    /// Fields `v` (both velocity components) and `p`.
    pub k: SplittableMatrix,
    pub b: Vec<f64>,
    pub pcd: PcdContext,
    /// Body force `f` at each velocity unknown, before the `h²` scaling.
    pub body_force: Vec<f64>,
    pub n: usize,
    pub viscosity: f64,
}

/// Divergence-free vortex with zero normal component on the boundary.
pub fn wind(x: f64, y: f64) -> (f64, f64) {
    let (sx, sy) = ((PI * x).sin(), (PI * y).sin());
    (sx * sx * (2.0 * PI * y).sin(), -(2.0 * PI * x).sin() * sy * sy)
}

/// What sits across a control-volume face.
enum Nb {
    Dof(usize),
    /// Ghost mirrored across a wall: `2·wall − φ_P`.
    Mirror(f64),
    /// Normal velocity on a wall face.
    Fixed(f64),
}

struct Row<'a> {
    t: &'a mut Vec<(usize, usize, f64)>,
    i: usize,
    diag: f64,
    rhs: f64,
}

impl Row<'_> {
    /// Adds `c·(φ_P − φ_nb)`.
    fn couple(&mut self, c: f64, nb: Nb) {
        self.diag += c;
        match nb {
            Nb::Dof(j) => self.t.push((self.i, j, -c)),
            Nb::Mirror(wall) => {
                self.diag += c;
                self.rhs += 2.0 * c * wall;
            }
            Nb::Fixed(val) => self.rhs += c * val,
        }
    }

    fn finish(self) -> f64 {
        self.t.push((self.i, self.i, self.diag));
        self.rhs
    }
}

fn check(p: &OseenParams) -> Result<()> {
    if p.n < 4 {
        return Err(Error::Problem(format!("oseen-cavity needs n >= 4, got {}", p.n)));
    }
    if !(p.viscosity > 0.0) || !p.viscosity.is_finite() {
        return Err(Error::Problem(format!("viscosity must be positive, got {}", p.viscosity)));
    }
    if !p.wind_scale.is_finite() || !p.forcing.is_finite() {
        return Err(Error::Problem("wind scale and forcing must be finite".into()));
    }
    Ok(())
}

pub fn gen_oseen_cavity(n: usize, viscosity: f64, seed: u64) -> Result<OseenSystem> {
    gen_oseen_with(&OseenParams::new(n, viscosity, seed))
}

pub fn gen_oseen_with(p: &OseenParams) -> Result<OseenSystem> {
    check(p)?;
    let n = p.n;
    let h = 1.0 / n as f64;
    let nu = p.viscosity;
    let w = |x: f64, y: f64| {
        let (a, b) = wind(x, y);
        (p.wind_scale * a, p.wind_scale * b)
    };
    let line = n - 1;
    let n_u = n * line;
    let n_v = 2 * n_u;
    let np = n * n - 1;
    let uid = |i: usize, j: usize| j * line + i - 1;
    let vid = |i: usize, j: usize| n_u + i * line + j - 1;
    let cell = |i: usize, j: usize| j * n + i;

    let mut rng = SplitMix64::new(p.seed);
    let body_force: Vec<f64> = (0..n_v).map(|_| p.forcing * rng.uniform(-1.0, 1.0)).collect();
    let mut t = Vec::new();
    let mut b = vec![0.0; n_v + np];

    // u momentum at (i·h, (j+½)·h); outward faces E, W, N, S
    for j in 0..n {
        for i in 1..n {
            let (x, y) = (i as f64 * h, (j as f64 + 0.5) * h);
            let mut row = Row { t: &mut t, i: uid(i, j), diag: 0.0, rhs: 0.0 };
            let nbs = [
                (w(x + 0.5 * h, y).0, if i + 1 < n { Nb::Dof(uid(i + 1, j)) } else { Nb::Fixed(0.0) }),
                (-w(x - 0.5 * h, y).0, if i > 1 { Nb::Dof(uid(i - 1, j)) } else { Nb::Fixed(0.0) }),
                (w(x, y + 0.5 * h).1, if j + 1 < n { Nb::Dof(uid(i, j + 1)) } else { Nb::Mirror(1.0) }),
                (-w(x, y - 0.5 * h).1, if j > 0 { Nb::Dof(uid(i, j - 1)) } else { Nb::Mirror(0.0) }),
            ];
            for (wn, nb) in nbs {
                let c = nu + if wn < 0.0 { h * -wn } else { 0.0 };
                row.couple(c, nb);
            }
            let rhs = row.finish();
            let r = uid(i, j);
            b[r] = rhs + h * h * body_force[r];
            // h·(p_E − p_W)
            for (c, s) in [(cell(i, j), h), (cell(i - 1, j), -h)] {
                if c < np {
                    t.push((r, n_v + c, s));
                }
            }
        }
    }
    // v momentum at ((i+½)·h, j·h)
    for i in 0..n {
        for j in 1..n {
            let (x, y) = ((i as f64 + 0.5) * h, j as f64 * h);
            let mut row = Row { t: &mut t, i: vid(i, j), diag: 0.0, rhs: 0.0 };
            let nbs = [
                (w(x + 0.5 * h, y).0, if i + 1 < n { Nb::Dof(vid(i + 1, j)) } else { Nb::Mirror(0.0) }),
                (-w(x - 0.5 * h, y).0, if i > 0 { Nb::Dof(vid(i - 1, j)) } else { Nb::Mirror(0.0) }),
                (w(x, y + 0.5 * h).1, if j + 1 < n { Nb::Dof(vid(i, j + 1)) } else { Nb::Fixed(0.0) }),
                (-w(x, y - 0.5 * h).1, if j > 1 { Nb::Dof(vid(i, j - 1)) } else { Nb::Fixed(0.0) }),
            ];
            for (wn, nb) in nbs {
                let c = nu + if wn < 0.0 { h * -wn } else { 0.0 };
                row.couple(c, nb);
            }
            let rhs = row.finish();
            let r = vid(i, j);
            b[r] = rhs + h * h * body_force[r];
            for (c, s) in [(cell(i, j), h), (cell(i, j - 1), -h)] {
                if c < np {
                    t.push((r, n_v + c, s));
                }
            }
        }
    }
    // continuity: −h·(u_e − u_w + v_n − v_s) on unpinned cells
    for j in 0..n {
        for i in 0..n {
            let c = cell(i, j);
            if c >= np {
                continue;
            }
            let r = n_v + c;
            if i + 1 < n {
                t.push((r, uid(i + 1, j), -h));
            }
            if i > 0 {
                t.push((r, uid(i, j), h));
            }
            if j + 1 < n {
                t.push((r, vid(i, j + 1), -h));
            }
            if j > 0 {
                t.push((r, vid(i, j), h));
            }
        }
    }
    let k = CsrMatrix::from_triplets(n_v + np, n_v + np, &t)?;
    let layout = BlockLayout::contiguous(&[("v", n_v), ("p", np)])?;
    Ok(OseenSystem {
        k: SplittableMatrix::square(k, layout)?,
        b,
        pcd: pcd_operators(n, nu, &w)?,
        body_force,
        n,
        viscosity: nu,
    })
}

/// `Mp = h²·I`, `Ap` = cell graph Laplacian, `Fp = ν·Ap` + upwind convection
/// with the wind at cell faces; all with the pinned cell removed.
fn pcd_operators(n: usize, nu: f64, w: &dyn Fn(f64, f64) -> (f64, f64)) -> Result<PcdContext> {
    let h = 1.0 / n as f64;
    let np = n * n - 1;
    let mut ap = Vec::new();
    let mut fp = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let c = j * n + i;
            if c >= np {
                continue;
            }
            let (x, y) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            let faces = [
                (i + 1 < n, c + 1, w(x + 0.5 * h, y).0),
                (i > 0, c.wrapping_sub(1), -w(x - 0.5 * h, y).0),
                (j + 1 < n, c + n, w(x, y + 0.5 * h).1),
                (j > 0, c.wrapping_sub(n), -w(x, y - 0.5 * h).1),
            ];
            for (interior, nb, wn) in faces {
                if !interior {
                    continue;
                }
                let conv = if wn < 0.0 { h * -wn } else { 0.0 };
                ap.push((c, c, 1.0));
                fp.push((c, c, nu + conv));
                if nb < np {
                    ap.push((c, nb, -1.0));
                    fp.push((c, nb, -(nu + conv)));
                }
            }
        }
    }
    let mp = CsrMatrix::from_diagonal(&vec![h * h; np]);
    PcdContext::new(mp, CsrMatrix::from_triplets(np, np, &ap)?, CsrMatrix::from_triplets(np, np, &fp)?)
}
