//! Radix-2 complex FFT in one and two dimensions.
//!
//! Sizes are powers of two. Transforms are unnormalized; scaling is the
//! caller's job (see [`crate::grid`]).

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::math::{cos, sin};

/// Columns processed together in the second pass of the 2D transform.
const STRIP: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Precomputed tables for a length-`n` transform.
#[derive(Debug, Clone)]
pub struct Fft1d {
    n: usize,
    bitrev: Vec<u32>,
    // stage-contiguous twiddles: stage with half-width m uses [m-1, 2m-1)
    fwd: Vec<Complex64>,
    inv: Vec<Complex64>,
}

impl Fft1d {
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two() && n >= 2, "fft length must be a power of two");
        let bits = n.trailing_zeros();
        let bitrev = (0..n as u32)
            .map(|i| i.reverse_bits() >> (32 - bits))
            .collect();
        let mut fwd = Vec::with_capacity(n - 1);
        let mut m = 1;
        while m < n {
            for k in 0..m {
                let ang = -PI * k as f64 / m as f64;
                fwd.push(Complex64::new(cos(ang), sin(ang)));
            }
            m *= 2;
        }
        let inv = fwd.iter().map(|w| w.conj()).collect();
        Self { n, bitrev, fwd, inv }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn table(&self, dir: Direction) -> &[Complex64] {
        match dir {
            Direction::Forward => &self.fwd,
            Direction::Inverse => &self.inv,
        }
    }

    /// In-place transform of one contiguous sequence.
    pub fn process(&self, data: &mut [Complex64], dir: Direction) {
        let n = self.n;
        debug_assert_eq!(data.len(), n);
        for i in 0..n {
            let j = self.bitrev[i] as usize;
            if i < j {
                data.swap(i, j);
            }
        }
        let tw = self.table(dir);
        let rot = quarter_turn(dir);
        let mut m = 1;
        while 4 * m <= n {
            let w1 = &tw[m - 1..2 * m - 1];
            let w2 = &tw[2 * m - 1..4 * m - 1];
            for chunk in data.chunks_exact_mut(4 * m) {
                for k in 0..m {
                    let (x0, x1, x2, x3) = (chunk[k], chunk[k + m], chunk[k + 2 * m], chunk[k + 3 * m]);
                    let [y0, y1, y2, y3] = radix4(x0, x1, x2, x3, w1[k], w2[k], rot);
                    chunk[k] = y0;
                    chunk[k + m] = y1;
                    chunk[k + 2 * m] = y2;
                    chunk[k + 3 * m] = y3;
                }
            }
            m *= 4;
        }
        if m < n {
            let w = &tw[m - 1..2 * m - 1];
            let (lo, hi) = data.split_at_mut(m);
            for k in 0..m {
                let t = hi[k] * w[k];
                hi[k] = lo[k] - t;
                lo[k] += t;
            }
        }
    }

    /// Transforms `width` interleaved sequences at once. Element `i` of
    /// sequence `c` lives at `data[i * width + c]`.
    fn process_strided(&self, data: &mut [Complex64], width: usize, dir: Direction) {
        let n = self.n;
        debug_assert_eq!(data.len(), n * width);
        for i in 0..n {
            let j = self.bitrev[i] as usize;
            if i < j {
                let (a, b) = data.split_at_mut(j * width);
                a[i * width..(i + 1) * width].swap_with_slice(&mut b[..width]);
            }
        }
        let tw = self.table(dir);
        let rot = quarter_turn(dir);
        let mut m = 1;
        while 4 * m <= n {
            let w1 = &tw[m - 1..2 * m - 1];
            let w2 = &tw[2 * m - 1..4 * m - 1];
            for chunk in data.chunks_exact_mut(4 * m * width) {
                let (q01, q23) = chunk.split_at_mut(2 * m * width);
                let (q0, q1) = q01.split_at_mut(m * width);
                let (q2, q3) = q23.split_at_mut(m * width);
                for k in 0..m {
                    let r = k * width..(k + 1) * width;
                    let (a, b, c, d) = (&mut q0[r.clone()], &mut q1[r.clone()], &mut q2[r.clone()], &mut q3[r]);
                    for c_ in 0..width {
                        let [y0, y1, y2, y3] = radix4(a[c_], b[c_], c[c_], d[c_], w1[k], w2[k], rot);
                        a[c_] = y0;
                        b[c_] = y1;
                        c[c_] = y2;
                        d[c_] = y3;
                    }
                }
            }
            m *= 4;
        }
        if m < n {
            let w = &tw[m - 1..2 * m - 1];
            let (lo, hi) = data.split_at_mut(m * width);
            for k in 0..m {
                let wk = w[k];
                let l = &mut lo[k * width..(k + 1) * width];
                let h = &mut hi[k * width..(k + 1) * width];
                for (x, y) in l.iter_mut().zip(h.iter_mut()) {
                    let t = *y * wk;
                    *y = *x - t;
                    *x += t;
                }
            }
        }
    }
}

/// `-i` for the forward transform, `+i` for the inverse.
fn quarter_turn(dir: Direction) -> f64 {
    match dir {
        Direction::Forward => -1.0,
        Direction::Inverse => 1.0,
    }
}

/// Two consecutive radix-2 stages fused: half-widths `m` (twiddle `w1`) and
/// `2m` (twiddle `w2`, rotated by a quarter turn for the odd pair).
#[inline(always)]
fn radix4(
    x0: Complex64,
    x1: Complex64,
    x2: Complex64,
    x3: Complex64,
    w1: Complex64,
    w2: Complex64,
    rot: f64,
) -> [Complex64; 4] {
    let t1 = x1 * w1;
    let t3 = x3 * w1;
    let (a0, a1, a2, a3) = (x0 + t1, x0 - t1, x2 + t3, x2 - t3);
    let b2 = a2 * w2;
    let c3 = a3 * w2;
    let b3 = Complex64::new(-rot * c3.im, rot * c3.re);
    [a0 + b2, a1 + b3, a0 - b2, a1 - b3]
}

/// Square 2D transform over row-major `n x n` data.
#[derive(Debug, Clone)]
pub struct Fft2d {
    line: Fft1d,
}

impl Fft2d {
    pub fn new(n: usize) -> Self {
        Self { line: Fft1d::new(n) }
    }

    pub fn size(&self) -> usize {
        self.line.len()
    }

    pub fn process(&self, data: &mut [Complex64], dir: Direction) {
        let n = self.line.len();
        assert_eq!(data.len(), n * n, "2D fft buffer has wrong length");
        for row in data.chunks_exact_mut(n) {
            self.line.process(row, dir);
        }
        let width = STRIP.min(n);
        let mut strip = vec![Complex64::new(0.0, 0.0); n * width];
        let mut c0 = 0;
        while c0 < n {
            for r in 0..n {
                strip[r * width..(r + 1) * width]
                    .copy_from_slice(&data[r * n + c0..r * n + c0 + width]);
            }
            self.line.process_strided(&mut strip, width, dir);
            for r in 0..n {
                data[r * n + c0..r * n + c0 + width]
                    .copy_from_slice(&strip[r * width..(r + 1) * width]);
            }
            c0 += width;
        }
    }
}
