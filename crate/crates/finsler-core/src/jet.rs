//! Forward-mode jet arithmetic for scalar programs on the slit tangent bundle.
//!
//! A [`Jet`] carries the value of a scalar function of `(x, y)` together with
//! a fixed family of partial derivatives: pure `y`-derivatives up to third
//! order, first `x`-derivatives, and mixed `x,y`-derivatives up to order
//! `(1, 2)`. Programs are written once against jet arithmetic and evaluated
//! with seeded coordinate jets, so every enabled slot is exact to rounding.
//!
//! The slot family is deliberately closed: products and smooth univariate
//! compositions of jets never need a derivative outside it. Anything deeper
//! (second base-point derivatives, fourth fiber derivatives) is out of
//! contract and handled by finite differences at the call sites that need it.

use crate::error::{FinslerError, Result};

/// Directions below this norm are rejected: the programs live on the slit
/// tangent bundle and must never be evaluated at y = 0.
pub const DEGENERATE_Y_NORM: f64 = 1e-12;

/// Which derivative slots a jet evaluation carries.
///
/// `y_order` is the pure fiber depth (0..=3), `x_order` enables first
/// base-point derivatives (0..=1), and `mixed_order` is the fiber depth
/// combined with the single base derivative (0..=2, requires `x_order = 1`).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Profile {
    y_order: u8,
    x_order: u8,
    mixed_order: u8,
}

impl Profile {
    pub fn new(y_order: u8, x_order: u8, mixed_order: u8) -> Self {
        assert!(y_order <= 3, "y-order capped at 3");
        assert!(x_order <= 1, "x-order capped at 1");
        assert!(mixed_order <= 2, "mixed order capped at (1,2)");
        assert!(
            mixed_order == 0 || x_order == 1,
            "mixed slots require the x slot"
        );
        // The Leibniz expansion of a mixed slot consumes pure fiber slots of
        // the same depth.
        assert!(
            y_order >= mixed_order,
            "mixed order cannot exceed the fiber order"
        );
        Profile {
            y_order,
            x_order,
            mixed_order,
        }
    }

    /// Value only; turns jet evaluation into a plain evaluator.
    pub fn value() -> Self {
        Profile::new(0, 0, 0)
    }

    /// Pure fiber derivatives up to `k`.
    pub fn fiber(k: u8) -> Self {
        Profile::new(k, 0, 0)
    }

    /// Fiber derivatives up to `y_order` plus one base derivative mixed with
    /// up to `mixed_order` fiber derivatives.
    pub fn mixed(y_order: u8, mixed_order: u8) -> Self {
        Profile::new(y_order.max(mixed_order), 1, mixed_order)
    }

    /// Every slot the engine supports.
    pub fn full() -> Self {
        Profile::new(3, 1, 2)
    }

    pub fn has_dy(&self) -> bool {
        self.y_order >= 1
    }
    pub fn has_dyy(&self) -> bool {
        self.y_order >= 2
    }
    pub fn has_dyyy(&self) -> bool {
        self.y_order >= 3
    }
    pub fn has_dx(&self) -> bool {
        self.x_order >= 1
    }
    pub fn has_dxdy(&self) -> bool {
        self.mixed_order >= 1
    }
    pub fn has_dxdydy(&self) -> bool {
        self.mixed_order >= 2
    }
}

/// Truncated Taylor data of a scalar function at a point `(x, y)`.
///
/// Slots disabled by the [`Profile`] are stored empty. Within the `y` index
/// group every slot is symmetric under index permutation by construction:
/// the arithmetic only ever writes symmetric expressions.
#[derive(Clone, Debug)]
pub struct Jet {
    n: usize,
    prof: Profile,
    /// Function value.
    pub v: f64,
    /// ∂/∂y^i, length n.
    pub dy: Vec<f64>,
    /// ∂²/∂y^i∂y^j, row-major n×n, symmetric.
    pub dyy: Vec<f64>,
    /// ∂³/∂y^i∂y^j∂y^k, n×n×n, symmetric.
    pub dyyy: Vec<f64>,
    /// ∂/∂x^j, length n.
    pub dx: Vec<f64>,
    /// ∂²/∂x^j∂y^k, row-major (j, k).
    pub dxdy: Vec<f64>,
    /// ∂³/∂x^j∂y^k∂y^l, (j, k, l), symmetric in (k, l).
    pub dxdydy: Vec<f64>,
}

impl Jet {
    fn zeroed(n: usize, prof: Profile) -> Self {
        let vec_if = |on: bool, len: usize| if on { vec![0.0; len] } else { Vec::new() };
        Jet {
            n,
            prof,
            v: 0.0,
            dy: vec_if(prof.has_dy(), n),
            dyy: vec_if(prof.has_dyy(), n * n),
            dyyy: vec_if(prof.has_dyyy(), n * n * n),
            dx: vec_if(prof.has_dx(), n),
            dxdy: vec_if(prof.has_dxdy(), n * n),
            dxdydy: vec_if(prof.has_dxdydy(), n * n * n),
        }
    }

    /// All-zero jet with the given shape; callers fill slots directly when a
    /// primitive has hand-derived derivatives (e.g. the polar angle).
    pub fn raw(n: usize, prof: Profile) -> Self {
        Jet::zeroed(n, prof)
    }

    pub fn constant(n: usize, prof: Profile, c: f64) -> Self {
        let mut j = Jet::zeroed(n, prof);
        j.v = c;
        j
    }

    /// Seed for the i-th fiber coordinate y^i.
    pub fn y_var(n: usize, prof: Profile, i: usize, val: f64) -> Self {
        let mut j = Jet::zeroed(n, prof);
        j.v = val;
        if prof.has_dy() {
            j.dy[i] = 1.0;
        }
        j
    }

    /// Seed for the j-th base coordinate x^j.
    pub fn x_var(n: usize, prof: Profile, j: usize, val: f64) -> Self {
        let mut jet = Jet::zeroed(n, prof);
        jet.v = val;
        if prof.has_dx() {
            jet.dx[j] = 1.0;
        }
        jet
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn profile(&self) -> Profile {
        self.prof
    }

    #[inline]
    pub fn dyy_at(&self, i: usize, j: usize) -> f64 {
        self.dyy[i * self.n + j]
    }

    #[inline]
    pub fn dyyy_at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.dyyy[(i * self.n + j) * self.n + k]
    }

    #[inline]
    pub fn dxdy_at(&self, j: usize, k: usize) -> f64 {
        self.dxdy[j * self.n + k]
    }

    #[inline]
    pub fn dxdydy_at(&self, j: usize, k: usize, l: usize) -> f64 {
        self.dxdydy[(j * self.n + k) * self.n + l]
    }

    fn assert_compatible(&self, other: &Jet) {
        debug_assert_eq!(self.n, other.n, "jet dimension mismatch");
        debug_assert_eq!(self.prof, other.prof, "jet profile mismatch");
    }

    pub fn add(&self, o: &Jet) -> Jet {
        self.assert_compatible(o);
        let mut r = self.clone();
        r.v += o.v;
        for (a, b) in r.dy.iter_mut().zip(&o.dy) {
            *a += b;
        }
        for (a, b) in r.dyy.iter_mut().zip(&o.dyy) {
            *a += b;
        }
        for (a, b) in r.dyyy.iter_mut().zip(&o.dyyy) {
            *a += b;
        }
        for (a, b) in r.dx.iter_mut().zip(&o.dx) {
            *a += b;
        }
        for (a, b) in r.dxdy.iter_mut().zip(&o.dxdy) {
            *a += b;
        }
        for (a, b) in r.dxdydy.iter_mut().zip(&o.dxdydy) {
            *a += b;
        }
        r
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> Jet {
        let mut r = self.clone();
        r.v *= c;
        for a in r
            .dy
            .iter_mut()
            .chain(r.dyy.iter_mut())
            .chain(r.dyyy.iter_mut())
            .chain(r.dx.iter_mut())
            .chain(r.dxdy.iter_mut())
            .chain(r.dxdydy.iter_mut())
        {
            *a *= c;
        }
        r
    }

    pub fn add_scalar(&self, c: f64) -> Jet {
        let mut r = self.clone();
        r.v += c;
        r
    }

    /// Leibniz product over every enabled slot.
    pub fn mul(&self, o: &Jet) -> Jet {
        self.assert_compatible(o);
        let n = self.n;
        let prof = self.prof;
        let mut r = Jet::zeroed(n, prof);
        r.v = self.v * o.v;
        if prof.has_dy() {
            for i in 0..n {
                r.dy[i] = self.dy[i] * o.v + self.v * o.dy[i];
            }
        }
        if prof.has_dx() {
            for j in 0..n {
                r.dx[j] = self.dx[j] * o.v + self.v * o.dx[j];
            }
        }
        // Symmetric slots are computed once per canonical index tuple and
        // mirrored, so permuted entries are bit-identical.
        if prof.has_dyy() {
            for i in 0..n {
                for j in i..n {
                    let v = self.dyy_at(i, j) * o.v
                        + self.dy[i] * o.dy[j]
                        + self.dy[j] * o.dy[i]
                        + self.v * o.dyy_at(i, j);
                    r.dyy[i * n + j] = v;
                    r.dyy[j * n + i] = v;
                }
            }
        }
        if prof.has_dxdy() {
            for j in 0..n {
                for k in 0..n {
                    r.dxdy[j * n + k] = self.dxdy_at(j, k) * o.v
                        + self.dx[j] * o.dy[k]
                        + self.dy[k] * o.dx[j]
                        + self.v * o.dxdy_at(j, k);
                }
            }
        }
        if prof.has_dyyy() {
            for i in 0..n {
                for j in i..n {
                    for k in j..n {
                        let v = self.dyyy_at(i, j, k) * o.v
                            + self.dyy_at(i, j) * o.dy[k]
                            + self.dyy_at(i, k) * o.dy[j]
                            + self.dyy_at(j, k) * o.dy[i]
                            + self.dy[i] * o.dyy_at(j, k)
                            + self.dy[j] * o.dyy_at(i, k)
                            + self.dy[k] * o.dyy_at(i, j)
                            + self.v * o.dyyy_at(i, j, k);
                        for (a, b, c) in permutations3(i, j, k) {
                            r.dyyy[(a * n + b) * n + c] = v;
                        }
                    }
                }
            }
        }
        if prof.has_dxdydy() {
            for j in 0..n {
                for k in 0..n {
                    for l in k..n {
                        let v = self.dxdydy_at(j, k, l) * o.v
                            + self.dxdy_at(j, k) * o.dy[l]
                            + self.dxdy_at(j, l) * o.dy[k]
                            + self.dyy_at(k, l) * o.dx[j]
                            + self.dx[j] * o.dyy_at(k, l)
                            + self.dy[k] * o.dxdy_at(j, l)
                            + self.dy[l] * o.dxdy_at(j, k)
                            + self.v * o.dxdydy_at(j, k, l);
                        r.dxdydy[(j * n + k) * n + l] = v;
                        r.dxdydy[(j * n + l) * n + k] = v;
                    }
                }
            }
        }
        r
    }

    /// Composition with a smooth univariate function given by its value and
    /// first three derivatives at `self.v` (Faà di Bruno up to the slot depth).
    fn compose(&self, u0: f64, u1: f64, u2: f64, u3: f64) -> Jet {
        let n = self.n;
        let prof = self.prof;
        let mut r = Jet::zeroed(n, prof);
        r.v = u0;
        if prof.has_dy() {
            for i in 0..n {
                r.dy[i] = u1 * self.dy[i];
            }
        }
        if prof.has_dx() {
            for j in 0..n {
                r.dx[j] = u1 * self.dx[j];
            }
        }
        if prof.has_dyy() {
            for i in 0..n {
                for j in i..n {
                    let v = u2 * self.dy[i] * self.dy[j] + u1 * self.dyy_at(i, j);
                    r.dyy[i * n + j] = v;
                    r.dyy[j * n + i] = v;
                }
            }
        }
        if prof.has_dxdy() {
            for j in 0..n {
                for k in 0..n {
                    r.dxdy[j * n + k] = u2 * self.dx[j] * self.dy[k] + u1 * self.dxdy_at(j, k);
                }
            }
        }
        if prof.has_dyyy() {
            for i in 0..n {
                for j in i..n {
                    for k in j..n {
                        let v = u3 * self.dy[i] * self.dy[j] * self.dy[k]
                            + u2 * (self.dyy_at(i, j) * self.dy[k]
                                + self.dyy_at(i, k) * self.dy[j]
                                + self.dyy_at(j, k) * self.dy[i])
                            + u1 * self.dyyy_at(i, j, k);
                        for (a, b, c) in permutations3(i, j, k) {
                            r.dyyy[(a * n + b) * n + c] = v;
                        }
                    }
                }
            }
        }
        if prof.has_dxdydy() {
            for j in 0..n {
                for k in 0..n {
                    for l in k..n {
                        let v = u3 * self.dx[j] * self.dy[k] * self.dy[l]
                            + u2 * (self.dxdy_at(j, k) * self.dy[l]
                                + self.dxdy_at(j, l) * self.dy[k]
                                + self.dyy_at(k, l) * self.dx[j])
                            + u1 * self.dxdydy_at(j, k, l);
                        r.dxdydy[(j * n + k) * n + l] = v;
                        r.dxdydy[(j * n + l) * n + k] = v;
                    }
                }
            }
        }
        r
    }

    /// Public chain rule: compose with a univariate function given by value
    /// and derivatives at `self.v`. `u3` may be NaN when no third-order slot
    /// is enabled.
    pub fn univariate(&self, u0: f64, u1: f64, u2: f64, u3: f64) -> Jet {
        self.compose(u0, u1, u2, u3)
    }

    pub fn recip(&self) -> Jet {
        let t = self.v;
        debug_assert!(t != 0.0, "jet reciprocal at zero");
        let t2 = t * t;
        self.compose(1.0 / t, -1.0 / t2, 2.0 / (t2 * t), -6.0 / (t2 * t2))
    }

    pub fn div(&self, o: &Jet) -> Jet {
        self.mul(&o.recip())
    }

    pub fn sqrt(&self) -> Jet {
        let t = self.v;
        debug_assert!(t > 0.0, "jet sqrt of non-positive value");
        let s = t.sqrt();
        self.compose(s, 0.5 / s, -0.25 / (s * t), 0.375 / (s * t * t))
    }

    pub fn exp(&self) -> Jet {
        let e = self.v.exp();
        self.compose(e, e, e, e)
    }

    pub fn ln(&self) -> Jet {
        let t = self.v;
        debug_assert!(t > 0.0, "jet ln of non-positive value");
        self.compose(t.ln(), 1.0 / t, -1.0 / (t * t), 2.0 / (t * t * t))
    }

    pub fn squared(&self) -> Jet {
        self.mul(self)
    }

    /// Relative Euler residual |dy·y − k·v| / (1 + |v|) for a positively
    /// k-homogeneous function; 0-flagged slots make this meaningless.
    pub fn euler_residual(&self, y: &[f64], k: f64) -> f64 {
        let radial: f64 = self.dy.iter().zip(y).map(|(d, yi)| d * yi).sum();
        (radial - k * self.v).abs() / (1.0 + self.v.abs())
    }
}

/// A scalar program of `(x, y)` evaluated in jet arithmetic. The slices hold
/// one seeded jet per coordinate; programs must treat `x.len()` as the
/// ambient dimension (the jets' internal variable count may differ, e.g.
/// when a plane restriction embeds 2-jet coordinates into a 3-dimensional
/// formula).
pub type GlobalProgram = dyn Fn(&[Jet], &[Jet]) -> Result<Jet> + Send + Sync;

/// A scalar program of `y` alone (pointwise metric data at the origin).
pub type FiberProgram = dyn Fn(&[Jet]) -> Result<Jet> + Send + Sync;

fn permutations3(i: usize, j: usize, k: usize) -> [(usize, usize, usize); 6] {
    [
        (i, j, k),
        (i, k, j),
        (j, i, k),
        (j, k, i),
        (k, i, j),
        (k, j, i),
    ]
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Seed coordinate jets and run the program, returning every slot the
/// profile requests. Rejects numerically zero fiber directions.
pub fn lift_eval<F>(program: &F, x: &[f64], y: &[f64], prof: Profile) -> Result<Jet>
where
    F: Fn(&[Jet], &[Jet]) -> Result<Jet> + ?Sized,
{
    let ny = norm(y);
    if ny < DEGENERATE_Y_NORM {
        return Err(FinslerError::DegenerateDirection { norm: ny });
    }
    let n = y.len();
    let xs: Vec<Jet> = (0..x.len())
        .map(|j| Jet::x_var(n, prof, j, x[j]))
        .collect();
    let ys: Vec<Jet> = (0..n).map(|i| Jet::y_var(n, prof, i, y[i])).collect();
    program(&xs, &ys)
}

/// Same for a fiber-only program.
pub fn lift_eval_fiber<F>(program: &F, y: &[f64], prof: Profile) -> Result<Jet>
where
    F: Fn(&[Jet]) -> Result<Jet> + ?Sized,
{
    let ny = norm(y);
    if ny < DEGENERATE_Y_NORM {
        return Err(FinslerError::DegenerateDirection { norm: ny });
    }
    let n = y.len();
    let ys: Vec<Jet> = (0..n).map(|i| Jet::y_var(n, prof, i, y[i])).collect();
    program(&ys)
}

/// One variable of a finite-difference multi-index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    X(usize),
    Y(usize),
}

/// Independent finite-difference oracle for the derivatives [`lift_eval`]
/// produces. Central differences with one Richardson level per variable;
/// step sizes grow with the total order to keep cancellation noise below
/// the documented 1e-5 agreement tolerance. Test-support code, not a fast
/// path.
pub fn fd_oracle<F>(program: &F, x: &[f64], y: &[f64], vars: &[Var]) -> Result<f64>
where
    F: Fn(&[Jet], &[Jet]) -> Result<Jet> + ?Sized,
{
    assert!(vars.len() <= 3, "oracle supports total order <= 3");
    let scale = norm(y).max(1.0);
    let h0 = match vars.len() {
        0 | 1 => 1e-4,
        2 => 4e-4,
        _ => 2e-3,
    } * scale;
    fd_recursive(program, x, y, vars, h0)
}

fn fd_recursive<F>(program: &F, x: &[f64], y: &[f64], vars: &[Var], h: f64) -> Result<f64>
where
    F: Fn(&[Jet], &[Jet]) -> Result<Jet> + ?Sized,
{
    if vars.is_empty() {
        return Ok(lift_eval(program, x, y, Profile::value())?.v);
    }
    let (first, rest) = (vars[0], &vars[1..]);
    let eval_shift = |delta: f64| -> Result<f64> {
        let mut xs = x.to_vec();
        let mut ys = y.to_vec();
        match first {
            Var::X(j) => xs[j] += delta,
            Var::Y(i) => ys[i] += delta,
        }
        fd_recursive(program, &xs, &ys, rest, h)
    };
    let central = |step: f64| -> Result<f64> {
        Ok((eval_shift(step)? - eval_shift(-step)?) / (2.0 * step))
    };
    // One Richardson level: (4 D(h/2) − D(h)) / 3 cancels the h² term.
    let coarse = central(h)?;
    let fine = central(0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}
