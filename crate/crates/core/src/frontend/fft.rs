// SPDX-License-Identifier: Apache-2.0
//! Radix-2² single-path delay-feedback FFT, modelled stage by stage.
//!
//! Each butterfly stage owns a feedback FIFO of length L = N / 2^s. During
//! the first L cycles of every 2L-sample block the input is pushed into the
//! FIFO while the FIFO drains the previous block's differences; during the
//! next L cycles the stage emits `fifo + x` and stores `fifo - x`. Stages come
//! in pairs (BF2I, BF2II): BF2II rotates the last quarter of each block by
//! -j, and a twiddle multiplier follows the pair. N = 32 and 128 end with a
//! lone radix-2 stage. The output stream is in bit-reversed order and is
//! reordered before returning.

use std::collections::VecDeque;

use num_complex::Complex;

use super::{FrontendError, FFT_SIZES};
use crate::fixedpoint::{round_shift, QFormat};
use crate::Real;

/// Complex fixed-point sample; both parts share the datapath format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FixedComplex {
    pub re: i64,
    pub im: i64,
}

impl FixedComplex {
    pub fn new(re: i64, im: i64) -> Self {
        FixedComplex { re, im }
    }

    pub fn to_complex(self, fmt: QFormat) -> Complex<f64> {
        Complex::new(self.re as f64 * fmt.ulp(), self.im as f64 * fmt.ulp())
    }
}

/// Arithmetic of one FFT datapath.
trait Datapath {
    type Sample: Copy;

    fn zero(&self) -> Self::Sample;
    fn sum(&self, a: Self::Sample, b: Self::Sample) -> Self::Sample;
    fn diff(&self, a: Self::Sample, b: Self::Sample) -> Self::Sample;
    fn neg_j(&self, a: Self::Sample) -> Self::Sample;
    /// Multiplies by W_m^exp = exp(-2 pi i exp / m); exp is never zero.
    fn twiddle(&self, a: Self::Sample, exp: usize, m: usize) -> Self::Sample;
}

struct FloatPath;

impl<T: Real> Datapath for (FloatPath, std::marker::PhantomData<T>) {
    type Sample = Complex<T>;

    fn zero(&self) -> Complex<T> {
        Complex::new(T::zero(), T::zero())
    }

    fn sum(&self, a: Complex<T>, b: Complex<T>) -> Complex<T> {
        a + b
    }

    fn diff(&self, a: Complex<T>, b: Complex<T>) -> Complex<T> {
        a - b
    }

    fn neg_j(&self, a: Complex<T>) -> Complex<T> {
        Complex::new(a.im, -a.re)
    }

    fn twiddle(&self, a: Complex<T>, exp: usize, m: usize) -> Complex<T> {
        let ang = -T::TAU() * T::of(exp as f64) / T::of(m as f64);
        a * Complex::new(ang.cos(), ang.sin())
    }
}

/// Fixed datapath: butterfly outputs are halved (round to nearest even) and
/// twiddles are quantized to the data format.
struct FixedPath {
    fmt: QFormat,
}

impl FixedPath {
    fn sat(&self, v: i128) -> i64 {
        self.fmt.saturate(v)
    }

    fn coeff(&self, v: f64) -> i128 {
        crate::fixedpoint::quantize(v, self.fmt).raw() as i128
    }
}

impl Datapath for FixedPath {
    type Sample = FixedComplex;

    fn zero(&self) -> FixedComplex {
        FixedComplex::default()
    }

    fn sum(&self, a: FixedComplex, b: FixedComplex) -> FixedComplex {
        FixedComplex::new(
            self.sat(round_shift(a.re as i128 + b.re as i128, 1)),
            self.sat(round_shift(a.im as i128 + b.im as i128, 1)),
        )
    }

    fn diff(&self, a: FixedComplex, b: FixedComplex) -> FixedComplex {
        FixedComplex::new(
            self.sat(round_shift(a.re as i128 - b.re as i128, 1)),
            self.sat(round_shift(a.im as i128 - b.im as i128, 1)),
        )
    }

    fn neg_j(&self, a: FixedComplex) -> FixedComplex {
        FixedComplex::new(a.im, self.sat(-(a.re as i128)))
    }

    fn twiddle(&self, a: FixedComplex, exp: usize, m: usize) -> FixedComplex {
        let ang = -std::f64::consts::TAU * exp as f64 / m as f64;
        let (wr, wi) = (self.coeff(ang.cos()), self.coeff(ang.sin()));
        let (ar, ai) = (a.re as i128, a.im as i128);
        let f = self.fmt.frac_bits();
        FixedComplex::new(
            self.sat(round_shift(ar * wr - ai * wi, f)),
            self.sat(round_shift(ar * wi + ai * wr, f)),
        )
    }
}

/// One delay-feedback butterfly with a FIFO of length `l`.
struct Butterfly<S> {
    l: usize,
    fifo: VecDeque<S>,
}

impl<S: Copy> Butterfly<S> {
    fn new<D: Datapath<Sample = S>>(l: usize, dp: &D) -> Self {
        Butterfly {
            l,
            fifo: std::iter::repeat_n(dp.zero(), l).collect(),
        }
    }

    fn clock<D: Datapath<Sample = S>>(&mut self, dp: &D, t: usize, x: S) -> S {
        let head = self.fifo.pop_front().expect("fifo holds l entries");
        if t % (2 * self.l) < self.l {
            self.fifo.push_back(x);
            head
        } else {
            self.fifo.push_back(dp.diff(head, x));
            dp.sum(head, x)
        }
    }

    /// Streams one frame through the stage; the first `l` outputs are the
    /// pipeline fill and are dropped, the tail is flushed with zeros.
    fn run<D: Datapath<Sample = S>>(&mut self, dp: &D, input: &[S]) -> Vec<S> {
        let (n, l) = (input.len(), self.l);
        (0..n + l)
            .map(|t| {
                let x = if t < n { input[t] } else { dp.zero() };
                self.clock(dp, t, x)
            })
            .skip(l)
            .collect()
    }
}

fn bit_reverse(i: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS - bits)
    }
}

fn run_sdf<D: Datapath>(dp: &D, frame: &[D::Sample]) -> Result<Vec<D::Sample>, FrontendError> {
    let n = frame.len();
    if !FFT_SIZES.contains(&n) {
        return Err(FrontendError::InvalidSize(n));
    }
    let mut stream = frame.to_vec();
    let mut m = n;
    while m >= 4 {
        // BF2I: pairs n and n + m/2
        stream = Butterfly::new(m / 2, dp).run(dp, &stream);
        // -j on the last quarter of each m-block, then BF2II
        for (p, s) in stream.iter_mut().enumerate() {
            if p % m >= 3 * m / 4 {
                *s = dp.neg_j(*s);
            }
        }
        stream = Butterfly::new(m / 4, dp).run(dp, &stream);
        if m > 4 {
            let q = m / 4;
            for (p, s) in stream.iter_mut().enumerate() {
                let g = (p % m) / q;
                let exp = (p % q) * ((g >> 1) + 2 * (g & 1));
                if exp != 0 {
                    *s = dp.twiddle(*s, exp, m);
                }
            }
        }
        m /= 4;
    }
    if m == 2 {
        stream = Butterfly::new(1, dp).run(dp, &stream);
    }
    let bits = n.trailing_zeros();
    let mut out = vec![dp.zero(); n];
    for (p, s) in stream.into_iter().enumerate() {
        out[bit_reverse(p, bits)] = s;
    }
    Ok(out)
}

/// Floating-point R2²SDF FFT (unscaled), output in natural order.
pub fn fft_r22sdf<T: Real>(frame: &[Complex<T>]) -> Result<Vec<Complex<T>>, FrontendError> {
    run_sdf(&(FloatPath, std::marker::PhantomData::<T>), frame)
}

/// Fixed-point R2²SDF FFT; every stage halves its output, for a total gain of 1/N.
pub fn fft_r22sdf_fixed(
    frame: &[FixedComplex],
    fmt: QFormat,
) -> Result<Vec<FixedComplex>, FrontendError> {
    run_sdf(&FixedPath { fmt }, frame)
}

/// Direct O(N²) DFT, the exactness oracle for the FFT.
pub fn dft_reference<T: Real>(frame: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = frame.len();
    let nt = T::of(n as f64);
    (0..n)
        .map(|k| {
            frame
                .iter()
                .enumerate()
                .fold(Complex::new(T::zero(), T::zero()), |acc, (i, &x)| {
                    let ang = -T::TAU() * T::of(((i * k) % n) as f64) / nt;
                    acc + x * Complex::new(ang.cos(), ang.sin())
                })
        })
        .collect()
}
