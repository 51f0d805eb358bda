//! Perturbation unknowns, the `phi`/`delta` reformulation and right-hand sides.
//!
//! Primitive unknowns `(a, u, theta, b)` are perturbations of the constant
//! equilibrium `(1, 0, 1, 1)`. The reformulated unknowns are
//! `phi = a (theta + 1) + (b + 1)^2 / 2 - 1/2`, `u`, `theta`, together with the
//! transported quantity `delta = phi - 2a` that closes the system.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{gradient, Grid, SpectralField, VectorField};
use crate::kernel;
use crate::math::sqrt;

/// Physical coefficients. Backgrounds other than 1 are rejected.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct Params {
    pub mu: f64,
    pub lambda: f64,
    pub c_v: f64,
    pub kappa: f64,
    pub gas_constant: f64,
    pub rho_bar: f64,
    pub theta_bar: f64,
    pub b_bar: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            mu: 1.0,
            lambda: -1.0,
            c_v: 1.0,
            kappa: 1.0,
            gas_constant: 1.0,
            rho_bar: 1.0,
            theta_bar: 1.0,
            b_bar: 1.0,
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.mu,
            self.lambda,
            self.c_v,
            self.kappa,
            self.gas_constant,
            self.rho_bar,
            self.theta_bar,
            self.b_bar,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("parameters must be finite"));
        }
        if self.mu <= 0.0 {
            return Err(Error::InvalidParams("mu must be positive"));
        }
        if self.lambda + 2.0 * self.mu <= 0.0 {
            return Err(Error::InvalidParams("lambda + 2 mu must be positive"));
        }
        if self.c_v <= 0.0 || self.kappa <= 0.0 || self.gas_constant <= 0.0 {
            return Err(Error::InvalidParams("c_v, kappa and R must be positive"));
        }
        if self.rho_bar != 1.0 || self.theta_bar != 1.0 || self.b_bar != 1.0 {
            return Err(Error::InvalidParams("only unit backgrounds are supported"));
        }
        Ok(())
    }

    /// True for `mu = c_v = R = kappa = 1`, `lambda = -1`, where the
    /// reformulated system applies.
    pub fn is_reference(&self) -> bool {
        *self == Self::default()
    }

    pub(crate) fn require_reference(&self) -> Result<()> {
        if !self.is_reference() {
            return Err(Error::InvalidParams("the reformulated system needs the reference parameters"));
        }
        Ok(())
    }
}

fn same_grid(fields: &[&SpectralField]) -> Result<Grid> {
    let g = fields[0].grid();
    if fields.iter().any(|f| f.grid() != g) {
        return Err(Error::GridMismatch);
    }
    Ok(g.clone())
}

#[derive(Debug, Clone)]
pub struct MhdState {
    pub a: SpectralField,
    pub u: VectorField,
    pub theta: SpectralField,
    pub b: SpectralField,
    pub time: f64,
}

impl MhdState {
    pub fn new(a: SpectralField, u: VectorField, theta: SpectralField, b: SpectralField, time: f64) -> Result<Self> {
        same_grid(&[&a, &u[0], &u[1], &theta, &b])?;
        Ok(Self { a, u, theta, b, time })
    }

    pub fn equilibrium(grid: &Grid) -> Self {
        let z = SpectralField::zeros(grid);
        Self {
            a: z.clone(),
            u: [z.clone(), z.clone()],
            theta: z.clone(),
            b: z,
            time: 0.0,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.a.grid()
    }

    /// Every field multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            a: self.a.scale(c),
            u: [self.u[0].scale(c), self.u[1].scale(c)],
            theta: self.theta.scale(c),
            b: self.b.scale(c),
            time: self.time,
        }
    }

    /// Fields in snapshot order `a, u1, u2, theta, b`.
    pub fn fields(&self) -> [&SpectralField; 5] {
        [&self.a, &self.u[0], &self.u[1], &self.theta, &self.b]
    }

    pub fn from_fields(fields: [SpectralField; 5], time: f64) -> Result<Self> {
        let [a, u1, u2, theta, b] = fields;
        Self::new(a, [u1, u2], theta, b, time)
    }

    pub fn min_density(&self) -> f64 {
        1.0 + self.a.min_value()
    }

    pub fn phi(&self) -> Result<SpectralField> {
        compute_phi(&self.a, &self.theta, &self.b)
    }

    pub fn is_finite(&self) -> bool {
        self.fields().iter().all(|f| f.values().iter().all(|v| v.is_finite()))
    }
}

#[derive(Debug, Clone)]
pub struct ReformulatedState {
    pub phi: SpectralField,
    pub u: VectorField,
    pub theta: SpectralField,
    pub delta: SpectralField,
    pub time: f64,
}

impl ReformulatedState {
    pub fn new(
        phi: SpectralField,
        u: VectorField,
        theta: SpectralField,
        delta: SpectralField,
        time: f64,
    ) -> Result<Self> {
        same_grid(&[&phi, &u[0], &u[1], &theta, &delta])?;
        Ok(Self {
            phi,
            u,
            theta,
            delta,
            time,
        })
    }

    pub fn from_primitive(state: &MhdState) -> Result<Self> {
        let phi = state.phi()?;
        let delta = compute_delta(&phi, &state.a)?;
        Self::new(phi, state.u.clone(), state.theta.clone(), delta, state.time)
    }

    pub fn grid(&self) -> &Grid {
        self.phi.grid()
    }

    /// `a = (phi - delta)/2` and `b = sqrt(2 phi + 1 - 2a(1 + theta)) - 1`.
    pub fn to_primitive(&self) -> Result<MhdState> {
        let a = recover_density(&self.phi, &self.delta)?;
        let grid = self.grid();
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let w = 2.0 * self.phi.values()[i] + 1.0 - 2.0 * a.values()[i] * (1.0 + self.theta.values()[i]);
            if !(w > 0.0) {
                return Err(Error::NonFinite("magnetic pressure lost positivity"));
            }
            values.push(sqrt(w) - 1.0);
        }
        let b = SpectralField::from_values(grid, values)?;
        MhdState::new(a, self.u.clone(), self.theta.clone(), b, self.time)
    }

    pub fn fields(&self) -> [&SpectralField; 5] {
        [&self.phi, &self.u[0], &self.u[1], &self.theta, &self.delta]
    }
}

/// `a / (1 + a)` evaluated pointwise.
pub fn rational_i(a: &SpectralField) -> Result<SpectralField> {
    let min = a.min_value();
    if !(1.0 + min > 0.0) {
        return Err(Error::Vacuum {
            min_density: 1.0 + min,
            threshold: 0.0,
        });
    }
    Ok(a.map(|v| v / (1.0 + v)))
}

/// `a (theta + 1) + (b + 1)^2 / 2 - 1/2`.
pub fn compute_phi(a: &SpectralField, theta: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    let grid = same_grid(&[a, theta, b])?;
    let values = (0..grid.len())
        .map(|i| {
            let (a, t, b) = (a.values()[i], theta.values()[i], b.values()[i]);
            a * (t + 1.0) + 0.5 * (b + 1.0) * (b + 1.0) - 0.5
        })
        .collect();
    SpectralField::from_values(&grid, values)
}

/// Expanded initial form `a + a theta + b^2/2 + b`; algebraically equal to
/// [`compute_phi`] and better conditioned for tiny perturbations.
pub fn compute_phi_expanded(a: &SpectralField, theta: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    let grid = same_grid(&[a, theta, b])?;
    let values = (0..grid.len())
        .map(|i| {
            let (a, t, b) = (a.values()[i], theta.values()[i], b.values()[i]);
            a + a * t + 0.5 * b * b + b
        })
        .collect();
    SpectralField::from_values(&grid, values)
}

pub fn compute_delta(phi: &SpectralField, a: &SpectralField) -> Result<SpectralField> {
    phi.axpby(1.0, a, -2.0)
}

pub fn recover_density(phi: &SpectralField, delta: &SpectralField) -> Result<SpectralField> {
    phi.axpby(0.5, delta, -0.5)
}

/// Residual between the planar slice of `(curl B) x B` for `B = (0, 0, m)` and
/// `-grad(m^2)/2`, both from spectral derivatives.
pub fn lorentz_reduction_check(m: &SpectralField) -> f64 {
    let [dm1, dm2] = gradient(m);
    let n = m.grid().len();
    let mut force = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
    for i in 0..n {
        let bv = [0.0, 0.0, m.values()[i]];
        // curl of (0, 0, m(x1, x2)) = (d2 m, -d1 m, 0)
        let j = [dm2.values()[i], -dm1.values()[i], 0.0];
        let f = [
            j[1] * bv[2] - j[2] * bv[1],
            j[2] * bv[0] - j[0] * bv[2],
            j[0] * bv[1] - j[1] * bv[0],
        ];
        for c in 0..3 {
            force[c].push(f[c]);
        }
    }
    let half_sq = m.map(|v| 0.5 * v * v);
    let [g1, g2] = gradient(&half_sq);
    let mut worst = 0.0f64;
    for i in 0..n {
        worst = worst
            .max((force[0][i] + g1.values()[i]).abs())
            .max((force[1][i] + g2.values()[i]).abs())
            .max(force[2][i].abs());
    }
    worst
}

/// Which terms a right-hand side includes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terms {
    Full,
    LinearOnly,
}

/// Tendency of the primitive unknowns; `time` is unused.
pub type PrimitiveTendency = MhdState;

/// Right-hand side of the primitive system for general parameters.
pub fn rhs_primitive(state: &MhdState, params: &Params, terms: Terms, dealias: bool) -> Result<PrimitiveTendency> {
    params.validate()?;
    let grid = state.grid().clone();
    let c = state.fields().map(|f| f.coefficients());
    let (out, _) = kernel::primitive_tendency(&grid, params, c, terms == Terms::Full, dealias)?;
    let fields = SpectralField::from_coefficients_many(&grid, out.into())?;
    MhdState::from_fields(fields.try_into().expect("five fields"), state.time)
}

/// `F1 .. F5`.
#[derive(Debug, Clone)]
pub struct NonlinearTerms {
    pub f1: SpectralField,
    pub f2: VectorField,
    pub f3: SpectralField,
    pub f4: SpectralField,
    pub f5: VectorField,
}

/// Nonlinear terms of the reformulated system; `I(a)` is evaluated from `a`.
pub fn nonlinear_f(phi: &SpectralField, a: &SpectralField, u: &VectorField, theta: &SpectralField) -> Result<NonlinearTerms> {
    let grid = same_grid(&[phi, a, &u[0], &u[1], theta])?;
    let delta = compute_delta(phi, a)?;
    let t = kernel::reformulated_terms(
        &grid,
        [
            phi.coefficients(),
            u[0].coefficients(),
            u[1].coefficients(),
            theta.coefficients(),
            delta.coefficients(),
        ],
    )?;
    let [f2a, f2b] = t.f2;
    let [f5a, f5b] = t.f5;
    let mut v = SpectralField::from_values_many(&grid, alloc::vec![t.f1, f2a, f2b, t.f3, t.f4, f5a, f5b])?.into_iter();
    let mut next = || v.next().expect("seven fields");
    Ok(NonlinearTerms {
        f1: next(),
        f2: [next(), next()],
        f3: next(),
        f4: next(),
        f5: [next(), next()],
    })
}

/// Right-hand side forcing `(F1, F2, F3)` of the reformulated system.
#[derive(Debug, Clone)]
pub struct Forcing {
    pub f1: SpectralField,
    pub f2: VectorField,
    pub f3: SpectralField,
}

impl Forcing {
    pub fn zero(grid: &Grid) -> Self {
        let z = SpectralField::zeros(grid);
        Self {
            f1: z.clone(),
            f2: [z.clone(), z.clone()],
            f3: z,
        }
    }
}

/// Forcing supplier using the full nonlinear terms.
pub fn nonlinear_forcing(state: &ReformulatedState) -> Result<Forcing> {
    let a = recover_density(&state.phi, &state.delta)?;
    let t = nonlinear_f(&state.phi, &a, &state.u, &state.theta)?;
    Ok(Forcing {
        f1: t.f1,
        f2: t.f2,
        f3: t.f3,
    })
}

/// Tendency of `(phi, u, theta)`.
#[derive(Debug, Clone)]
pub struct ReformulatedTendency {
    pub phi: SpectralField,
    pub u: VectorField,
    pub theta: SpectralField,
}

/// `phi_t = -2 div u + F1`, `u_t = Lap u - grad(phi + theta) + F2`,
/// `theta_t = Lap theta - div u + F3`.
pub fn rhs_reformulated(
    state: &ReformulatedState,
    forcing: impl FnOnce(&ReformulatedState) -> Result<Forcing>,
) -> Result<ReformulatedTendency> {
    let grid = state.grid().clone();
    let f = forcing(state)?;
    same_grid(&[&state.phi, &f.f1, &f.f2[0], &f.f2[1], &f.f3])?;
    let (cp, cu1, cu2, ct) = (
        state.phi.coefficients(),
        state.u[0].coefficients(),
        state.u[1].coefficients(),
        state.theta.coefficients(),
    );
    let dv = kernel::div(&grid, cu1, cu2);
    let s: Vec<Complex64> = cp.iter().zip(ct).map(|(p, t)| p + t).collect();
    let gs1 = kernel::d1(&grid, &s);
    let gs2 = kernel::d2(&grid, &s);
    let lu1 = kernel::lap(&grid, cu1);
    let lu2 = kernel::lap(&grid, cu2);
    let lt = kernel::lap(&grid, ct);
    let n = grid.len();
    let mut out = [
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    ];
    for i in 0..n {
        out[0].push(dv[i] * -2.0 + f.f1.coefficients()[i]);
        out[1].push(lu1[i] - gs1[i] + f.f2[0].coefficients()[i]);
        out[2].push(lu2[i] - gs2[i] + f.f2[1].coefficients()[i]);
        out[3].push(lt[i] - dv[i] + f.f3.coefficients()[i]);
    }
    let mut v = SpectralField::from_coefficients_many(&grid, out.into())?.into_iter();
    let mut next = || v.next().expect("four fields");
    Ok(ReformulatedTendency {
        phi: next(),
        u: [next(), next()],
        theta: next(),
    })
}

/// Largest pointwise gap between `d/dt phi(a, theta, b)` along the primitive
/// right-hand side and the `phi` component of the reformulated one.
/// Products are not truncated; both sides see the same samples.
pub fn chain_rule_residual(state: &MhdState) -> Result<f64> {
    let params = Params::default();
    let tendency = rhs_primitive(state, &params, Terms::Full, false)?;
    let reformulated = ReformulatedState::from_primitive(state)?;
    let rhs = rhs_reformulated(&reformulated, |s| {
        let t = nonlinear_f(&s.phi, &state.a, &s.u, &s.theta)?;
        Ok(Forcing {
            f1: t.f1,
            f2: t.f2,
            f3: t.f3,
        })
    })?;
    let mut worst = 0.0f64;
    for i in 0..state.grid().len() {
        let (a, t, b) = (state.a.values()[i], state.theta.values()[i], state.b.values()[i]);
        let chain = (1.0 + t) * tendency.a.values()[i]
            + a * tendency.theta.values()[i]
            + (1.0 + b) * tendency.b.values()[i];
        worst = worst.max((chain - rhs.phi.values()[i]).abs());
    }
    Ok(worst)
}

/// Domain average of `(1+a)|u|^2/2 + c_v (1+a)(1+theta) + (1+b)^2/2`.
pub fn total_energy(state: &MhdState, params: &Params) -> f64 {
    let n = state.grid().len();
    let (a, u1, u2, t, b) = (
        state.a.values(),
        state.u[0].values(),
        state.u[1].values(),
        state.theta.values(),
        state.b.values(),
    );
    let sum: f64 = (0..n)
        .map(|i| {
            let rho = 1.0 + a[i];
            0.5 * rho * (u1[i] * u1[i] + u2[i] * u2[i])
                + params.c_v * rho * (1.0 + t[i])
                + 0.5 * (1.0 + b[i]) * (1.0 + b[i])
        })
        .sum();
    sum / n as f64
}

/// Time derivative of [`total_energy`] along the undealiased primitive
/// right-hand side, by the chain rule at the samples.
pub fn total_energy_rate(state: &MhdState, params: &Params) -> Result<f64> {
    let d = rhs_primitive(state, params, Terms::Full, false)?;
    let n = state.grid().len();
    let (a, u1, u2, t, b) = (
        state.a.values(),
        state.u[0].values(),
        state.u[1].values(),
        state.theta.values(),
        state.b.values(),
    );
    let sum: f64 = (0..n)
        .map(|i| {
            let rho = 1.0 + a[i];
            let ke = 0.5 * (u1[i] * u1[i] + u2[i] * u2[i]);
            (ke + params.c_v * (1.0 + t[i])) * d.a.values()[i]
                + rho * (u1[i] * d.u[0].values()[i] + u2[i] * d.u[1].values()[i])
                + params.c_v * rho * d.theta.values()[i]
                + (1.0 + b[i]) * d.b.values()[i]
        })
        .sum();
    Ok(sum / n as f64)
}

/// Pointwise `2|D(u)|^2 - (div u)^2`.
pub fn viscous_heating(u: &VectorField) -> Result<SpectralField> {
    let grid = same_grid(&[&u[0], &u[1]])?;
    let [d11, d21] = gradient(&u[0]);
    let [d12, d22] = gradient(&u[1]);
    let values = (0..grid.len())
        .map(|i| kernel::heating(d11.values()[i], d21.values()[i], d12.values()[i], d22.values()[i]))
        .collect();
    SpectralField::from_values(&grid, values)
}
