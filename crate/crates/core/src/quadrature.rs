//! Globally adaptive Gauss-Kronrod (7/15) quadrature.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-14,
            max_subdivisions: 2000,
        }
    }
}

struct Segment<T> {
    a: T,
    b: T,
    value: Complex<T>,
    error: T,
}

fn gk15<T: Scalar, F: Fn(T) -> Complex<T>>(f: &F, a: T, b: T) -> (Complex<T>, T) {
    let half = T::of(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let fc = f(center);
    let mut kronrod = fc * T::of(WGK[7]);
    let mut gauss = fc * T::of(WG[3]);
    for j in 0..7 {
        let dx = half_len * T::of(XGK[j]);
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + pair * T::of(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + pair * T::of(WG[j / 2]);
        }
    }
    let value = kronrod * half_len;
    let error = ((kronrod - gauss) * half_len).norm();
    (value, error)
}

/// Integrates a complex-valued `f` over the finite interval `[a, b]`.
pub fn integrate_complex_finite<T: Scalar>(
    f: impl Fn(T) -> Complex<T>,
    a: T,
    b: T,
    opts: &QuadratureOptions,
) -> Result<Complex<T>> {
    if a == b {
        return Ok(Complex::new(T::zero(), T::zero()));
    }
    let rel_tol = T::of(opts.rel_tol).max(T::epsilon() * T::of(50.0));
    let abs_tol = T::of(opts.abs_tol);
    let (v0, e0) = gk15(&f, a, b);
    let mut segments = vec![Segment {
        a,
        b,
        value: v0,
        error: e0,
    }];
    loop {
        let total: Complex<T> = segments
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |acc, s| acc + s.value);
        let err: T = segments.iter().fold(T::zero(), |acc, s| acc + s.error);
        if !(total.re.is_finite() && total.im.is_finite()) {
            return Err(Error::QuadratureNonConvergence {
                estimate: total.norm().to_f64_lossy(),
                error: err.to_f64_lossy(),
                subdivisions: segments.len(),
            });
        }
        if err <= abs_tol.max(rel_tol * total.norm()) {
            return Ok(total);
        }
        if segments.len() >= opts.max_subdivisions {
            return Err(Error::QuadratureNonConvergence {
                estimate: total.norm().to_f64_lossy(),
                error: err.to_f64_lossy(),
                subdivisions: segments.len(),
            });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |(bi, be), (i, s)| {
                if s.error > be {
                    (i, s.error)
                } else {
                    (bi, be)
                }
            });
        let seg = segments.swap_remove(worst);
        let mid = T::of(0.5) * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // Interval can no longer be split in this precision.
            return Err(Error::QuadratureNonConvergence {
                estimate: total.norm().to_f64_lossy(),
                error: err.to_f64_lossy(),
                subdivisions: segments.len() + 1,
            });
        }
        let (vl, el) = gk15(&f, seg.a, mid);
        let (vr, er) = gk15(&f, mid, seg.b);
        segments.push(Segment {
            a: seg.a,
            b: mid,
            value: vl,
            error: el,
        });
        segments.push(Segment {
            a: mid,
            b: seg.b,
            value: vr,
            error: er,
        });
    }
}

/// Integrates a complex-valued `f` over `[a, b]`; either end may be infinite.
pub fn integrate_complex<T: Scalar>(
    f: impl Fn(T) -> Complex<T>,
    a: T,
    b: T,
    opts: &QuadratureOptions,
) -> Result<Complex<T>> {
    let one = T::one();
    match (a.is_finite(), b.is_finite()) {
        (true, true) => integrate_complex_finite(f, a, b, opts),
        (true, false) => integrate_complex_finite(
            |u: T| {
                let w = one - u;
                f(a + u / w) / (w * w)
            },
            T::zero(),
            one,
            opts,
        ),
        (false, true) => integrate_complex_finite(
            |u: T| {
                let w = one - u;
                f(b - u / w) / (w * w)
            },
            T::zero(),
            one,
            opts,
        ),
        (false, false) => {
            let f = &f;
            let left = integrate_complex_finite(
                |u: T| {
                    let w = one - u;
                    f(-u / w) / (w * w)
                },
                T::zero(),
                one,
                opts,
            )?;
            let right = integrate_complex_finite(
                |u: T| {
                    let w = one - u;
                    f(u / w) / (w * w)
                },
                T::zero(),
                one,
                opts,
            )?;
            Ok(left + right)
        }
    }
}

/// Real-valued convenience wrapper around [`integrate_complex`].
pub fn integrate<T: Scalar>(f: impl Fn(T) -> T, a: T, b: T, opts: &QuadratureOptions) -> Result<T> {
    integrate_complex(|x| Complex::new(f(x), T::zero()), a, b, opts).map(|c| c.re)
}
