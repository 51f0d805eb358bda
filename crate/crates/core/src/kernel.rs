//! Physical-space evaluation of the right-hand sides on raw coefficient
//! arrays. Shared by the public state API and the time stepper.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{multiplied, Grid, SpectralOp};
use crate::state::Params;

pub(crate) type Coeffs = Vec<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

pub(crate) fn d1(grid: &Grid, c: &[Complex64]) -> Coeffs {
    multiplied(grid, c, |k1, _| I * k1)
}

pub(crate) fn d2(grid: &Grid, c: &[Complex64]) -> Coeffs {
    multiplied(grid, c, |_, k2| I * k2)
}

pub(crate) fn lap(grid: &Grid, c: &[Complex64]) -> Coeffs {
    multiplied(grid, c, |k1, k2| Complex64::new(-(k1 * k1 + k2 * k2), 0.0))
}

pub(crate) fn div(grid: &Grid, c1: &[Complex64], c2: &[Complex64]) -> Coeffs {
    let mut out = d1(grid, c1);
    for (o, v) in out.iter_mut().zip(d2(grid, c2)) {
        *o += v;
    }
    out
}

/// Zeroes every coefficient outside the 2/3-rule band.
pub(crate) fn mask_dealias(grid: &Grid, c: &mut [Complex64]) {
    for (idx, v) in c.iter_mut().enumerate() {
        if !grid.dealias_keeps(idx) {
            *v = Complex64::new(0.0, 0.0);
        }
    }
}

/// Pointwise facts gathered while evaluating a right-hand side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SampleStats {
    pub min_density: f64,
    pub max_abs_a: f64,
}

fn check_finite(arrays: &[&[f64]]) -> Result<()> {
    if arrays.iter().any(|a| a.iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFinite("state"));
    }
    Ok(())
}

fn density_stats(a: &[f64]) -> Result<SampleStats> {
    let mut min_density = f64::INFINITY;
    let mut max_abs_a = 0.0f64;
    for &v in a {
        min_density = min_density.min(1.0 + v);
        max_abs_a = max_abs_a.max(v.abs());
    }
    if min_density <= 0.0 {
        return Err(Error::Vacuum {
            min_density,
            threshold: 0.0,
        });
    }
    Ok(SampleStats {
        min_density,
        max_abs_a,
    })
}

/// `2|D(u)|^2 - (div u)^2` from the four velocity derivatives
/// `d11 = d1 u1, d21 = d2 u1, d12 = d1 u2, d22 = d2 u2`.
#[inline]
pub(crate) fn heating(d11: f64, d21: f64, d12: f64, d22: f64) -> f64 {
    let shear = d12 + d21;
    let diff = d11 - d22;
    diff * diff + shear * shear
}

/// Tendencies of `(a, u1, u2, theta, b)` for the primitive system.
pub(crate) fn primitive_tendency(
    grid: &Grid,
    params: &Params,
    c: [&[Complex64]; 5],
    nonlinear: bool,
    dealias: bool,
) -> Result<([Coeffs; 5], SampleStats)> {
    let [ca, cu1, cu2, ct, cb] = c;
    let Params {
        mu,
        lambda,
        c_v,
        kappa,
        gas_constant: r,
        ..
    } = *params;
    let bulk = lambda + mu;
    if !nonlinear {
        let a = grid.inverse(ca)?;
        check_finite(&[&a])?;
        let stats = density_stats(&a)?;
        let dv = div(grid, cu1, cu2);
        let n = grid.len();
        let mut out: [Coeffs; 5] = core::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); n]);
        let lu1 = lap(grid, cu1);
        let lu2 = lap(grid, cu2);
        let lt = lap(grid, ct);
        let gd1 = d1(grid, &dv);
        let gd2 = d2(grid, &dv);
        let p: Coeffs = (0..n).map(|i| ca[i] * r + ct[i] * r + cb[i]).collect();
        let gp1 = d1(grid, &p);
        let gp2 = d2(grid, &p);
        for i in 0..n {
            out[0][i] = -dv[i];
            out[1][i] = lu1[i] * mu + gd1[i] * bulk - gp1[i];
            out[2][i] = lu2[i] * mu + gd2[i] * bulk - gp2[i];
            out[3][i] = lt[i] * (kappa / c_v) - dv[i] * (r / c_v);
            out[4][i] = -dv[i];
        }
        if dealias {
            out.iter_mut().for_each(|o| mask_dealias(grid, o));
        }
        return Ok((out, stats));
    }

    use SpectralOp::{Id, Lap, D1, D2};
    let dv = if bulk != 0.0 { div(grid, cu1, cu2) } else { Vec::new() };
    let mut items: Vec<(&[Complex64], SpectralOp)> = vec![
        (ca, Id),
        (cu1, Id),
        (cu2, Id),
        (ct, Id),
        (cb, Id),
        (cu1, D1),
        (cu1, D2),
        (cu2, D1),
        (cu2, D2),
        (cu1, Lap),
        (cu2, Lap),
        (ct, Lap),
        (ct, D1),
        (ct, D2),
    ];
    if bulk != 0.0 {
        items.push((&dv, D1));
        items.push((&dv, D2));
    }
    let phys = grid.inverse_ops(&items)?;
    let (a, u1, u2, th, b) = (&phys[0], &phys[1], &phys[2], &phys[3], &phys[4]);
    check_finite(&[a, u1, u2, th, b])?;
    let stats = density_stats(a)?;
    let (d11, d21, d12, d22) = (&phys[5], &phys[6], &phys[7], &phys[8]);
    let (lu1, lu2, lt, t1, t2) = (&phys[9], &phys[10], &phys[11], &phys[12], &phys[13]);
    let n = grid.len();

    // pressure plus magnetic pressure, differentiated spectrally
    let pi: Vec<f64> = (0..n)
        .map(|i| r * (1.0 + a[i]) * (1.0 + th[i]) + 0.5 * (1.0 + b[i]) * (1.0 + b[i]))
        .collect();
    let cpi = grid.forward(&pi)?;
    let gpi = grid.inverse_ops(&[(&cpi, D1), (&cpi, D2)])?;

    let mut fa1 = vec![0.0; n];
    let mut fa2 = vec![0.0; n];
    let mut fb1 = vec![0.0; n];
    let mut fb2 = vec![0.0; n];
    let mut m1 = vec![0.0; n];
    let mut m2 = vec![0.0; n];
    let mut te = vec![0.0; n];
    for i in 0..n {
        let rho = 1.0 + a[i];
        let inv = 1.0 / rho;
        fa1[i] = rho * u1[i];
        fa2[i] = rho * u2[i];
        fb1[i] = (1.0 + b[i]) * u1[i];
        fb2[i] = (1.0 + b[i]) * u2[i];
        let (gd1, gd2) = if bulk != 0.0 { (phys[14][i], phys[15][i]) } else { (0.0, 0.0) };
        m1[i] = -(u1[i] * d11[i] + u2[i] * d21[i]) + (mu * lu1[i] + bulk * gd1 - gpi[0][i]) * inv;
        m2[i] = -(u1[i] * d12[i] + u2[i] * d22[i]) + (mu * lu2[i] + bulk * gd2 - gpi[1][i]) * inv;
        let dv = d11[i] + d22[i];
        let sym = d11[i] * d11[i] + d22[i] * d22[i] + 0.5 * (d12[i] + d21[i]) * (d12[i] + d21[i]);
        let source = kappa * lt[i] + 2.0 * mu * sym + lambda * dv * dv;
        te[i] = -(u1[i] * t1[i] + u2[i] * t2[i]) + source * inv / c_v - (r / c_v) * (1.0 + th[i]) * dv;
    }
    let mut f = grid.forward_many(&[&fa1, &fa2, &fb1, &fb2, &m1, &m2, &te])?;
    let mut out: [Coeffs; 5] = [
        div(grid, &f[0], &f[1]),
        core::mem::take(&mut f[4]),
        core::mem::take(&mut f[5]),
        core::mem::take(&mut f[6]),
        div(grid, &f[2], &f[3]),
    ];
    out[0].iter_mut().for_each(|v| *v = -*v);
    out[4].iter_mut().for_each(|v| *v = -*v);
    if dealias {
        out.iter_mut().for_each(|o| mask_dealias(grid, o));
    }
    Ok((out, stats))
}

/// All nonlinear terms of the reformulated system in physical space.
pub(crate) struct ReformulatedTerms {
    pub f1: Vec<f64>,
    pub f2: [Vec<f64>; 2],
    pub f3: Vec<f64>,
    pub f4: Vec<f64>,
    pub f5: [Vec<f64>; 2],
    /// Source of the transported quantity `delta = phi - 2a`.
    pub fdelta: Vec<f64>,
    pub stats: SampleStats,
}

/// Nonlinear terms from `(phi, u1, u2, theta, delta)`; `a = (phi - delta)/2`.
pub(crate) fn reformulated_terms(grid: &Grid, c: [&[Complex64]; 5]) -> Result<ReformulatedTerms> {
    let [cp, cu1, cu2, ct, cd] = c;
    use SpectralOp::{Id, Lap, D1, D2};
    let p = grid.inverse_ops(&[
        (cp, Id),
        (cu1, Id),
        (cu2, Id),
        (ct, Id),
        (cd, Id),
        (cp, D1),
        (cp, D2),
        (cu1, D1),
        (cu1, D2),
        (cu2, D1),
        (cu2, D2),
        (ct, Lap),
        (cu1, Lap),
        (cu2, Lap),
        (ct, D1),
        (ct, D2),
        (cd, D1),
        (cd, D2),
    ])?;
    let (phi, u1, u2, th, de) = (&p[0], &p[1], &p[2], &p[3], &p[4]);
    check_finite(&[phi, u1, u2, th, de])?;
    let n = grid.len();
    let a: Vec<f64> = (0..n).map(|i| 0.5 * (phi[i] - de[i])).collect();
    let stats = density_stats(&a)?;
    let (p1, p2, d11, d21, d12, d22) = (&p[5], &p[6], &p[7], &p[8], &p[9], &p[10]);
    let (lt, lu1, lu2, t1, t2, e1, e2) = (&p[11], &p[12], &p[13], &p[14], &p[15], &p[16], &p[17]);
    let mut out = ReformulatedTerms {
        f1: vec![0.0; n],
        f2: [vec![0.0; n], vec![0.0; n]],
        f3: vec![0.0; n],
        f4: vec![0.0; n],
        f5: [vec![0.0; n], vec![0.0; n]],
        fdelta: vec![0.0; n],
        stats,
    };
    for i in 0..n {
        let rho = 1.0 + a[i];
        let ia = a[i] / rho;
        let dv = d11[i] + d22[i];
        let q = heating(d11[i], d21[i], d12[i], d22[i]);
        let adv_phi = u1[i] * p1[i] + u2[i] * p2[i];
        let f4 = -2.0 * phi[i] * dv - th[i] * dv + ia * lt[i] + ia * q;
        let f5_1 = ia * (p1[i] + t1[i] - lu1[i]);
        let f5_2 = ia * (p2[i] + t2[i] - lu2[i]);
        out.f4[i] = f4;
        out.f1[i] = f4 - adv_phi;
        out.f5[0][i] = f5_1;
        out.f5[1][i] = f5_2;
        out.f2[0][i] = f5_1 - (u1[i] * d11[i] + u2[i] * d21[i]);
        out.f2[1][i] = f5_2 - (u1[i] * d12[i] + u2[i] * d22[i]);
        out.f3[i] = -(u1[i] * t1[i] + u2[i] * t2[i]) - th[i] * dv - ia * lt[i] + q / rho;
        out.fdelta[i] = -(u1[i] * e1[i] + u2[i] * e2[i]) + 2.0 * a[i] * dv + f4;
    }
    Ok(out)
}
