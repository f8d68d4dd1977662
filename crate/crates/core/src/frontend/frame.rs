// SPDX-License-Identifier: Apache-2.0
//! Framing into full, overlapping frames and windowing.

use super::{FrontendError, Window};
use crate::fixedpoint::FixedValue;
use crate::Real;

/// Number of full frames of length `n` starting at 0, hop, 2 hop, ...
pub fn frame_count(len: usize, n: usize, hop: usize) -> usize {
    if len < n || hop == 0 {
        0
    } else {
        (len - n) / hop + 1
    }
}

fn frames<S: Copy, O>(
    x: &[S],
    n: usize,
    hop: usize,
    mut f: impl FnMut(&[S]) -> O,
) -> Result<Vec<O>, FrontendError> {
    if hop == 0 {
        return Err(FrontendError::InvalidConfig(
            "hop must be at least 1".into(),
        ));
    }
    if x.len() < n {
        return Err(FrontendError::SignalTooShort {
            len: x.len(),
            frame: n,
        });
    }
    Ok((0..frame_count(x.len(), n, hop))
        .map(|i| f(&x[i * hop..i * hop + n]))
        .collect())
}

/// Float framing; the frame length is the window length.
pub fn frame_float<T: Real>(
    x: &[T],
    window: &Window,
    hop: usize,
) -> Result<Vec<Vec<T>>, FrontendError> {
    frames(x, window.len(), hop, |fr| window.apply_float(fr))
}

/// Fixed framing; windowing goes through the shift-add datapath where the policy has one.
pub fn frame_fixed(
    x: &[FixedValue],
    window: &Window,
    hop: usize,
) -> Result<Vec<Vec<FixedValue>>, FrontendError> {
    frames(x, window.len(), hop, |fr| window.apply_fixed(fr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixedpoint::{quantize, QFormat};
    use crate::frontend::{window_coefficients, WindowPolicy};

    #[test]
    fn counts() {
        assert_eq!(frame_count(64, 32, 16), 3);
        assert_eq!(frame_count(31, 32, 16), 0);
        assert_eq!(frame_count(32, 32, 16), 1);
        assert_eq!(frame_count(47, 32, 16), 1);
        assert_eq!(frame_count(48, 32, 16), 2);
    }

    #[test]
    fn frame_starts_and_window() {
        let w = window_coefficients(32, WindowPolicy::Exact, 7).unwrap();
        let x: Vec<f64> = vec![1.0; 64];
        let fr = frame_float(&x, &w, 16).unwrap();
        assert_eq!(fr.len(), 3);
        assert!(fr.iter().all(|f| *f == w.values));

        let r = window_coefficients(32, WindowPolicy::Rectangular, 7).unwrap();
        let ramp: Vec<f64> = (0..64).map(|i| i as f64).collect();
        let fr = frame_float(&ramp, &r, 16).unwrap();
        assert_eq!(fr[1][0], 16.0);
        assert_eq!(fr[2][31], 63.0);
    }

    #[test]
    fn too_short() {
        let w = window_coefficients(32, WindowPolicy::Exact, 7).unwrap();
        assert_eq!(
            frame_float(&[0.0f64; 20], &w, 16),
            Err(FrontendError::SignalTooShort { len: 20, frame: 32 })
        );
        let f = QFormat::data(7).unwrap();
        let xq = vec![quantize(0.0, f); 20];
        assert!(frame_fixed(&xq, &w, 16).is_err());
        assert!(frame_float(&[0.0f64; 64], &w, 0).is_err());
    }
}
