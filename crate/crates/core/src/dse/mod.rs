// SPDX-License-Identifier: Apache-2.0
//! Design-space exploration: one greedy decision per front-end parameter,
//! each taking the cheapest candidate that meets its criterion, followed by
//! the cost proxies.
//!
//! Decisions run in a fixed order (bandwidth, bit width, pre-emphasis,
//! window, FFT size, mel shape) and each one is evaluated at the point the
//! earlier ones produced. Interactions are not revisited.

mod corpus;
mod point;
mod report;
mod select;

pub use corpus::{ClipSource, Corpus, CorpusEntry, BUNDLED_VERSION, SOURCE_RATE};
pub use point::{cost_model, pareto_front, Cost, DesignMetrics, DesignPoint, SAMPLE_RATES};
pub use report::{
    evaluate_point, ideal_reference, quantization_error, run_dse, DseConfig, DseReport,
};
pub use select::{
    aligned_distance, alpha_metric, bitwidth_metric, retention, select_alpha, select_bandwidth,
    select_bitwidth, select_fft_size, select_mel_shape, select_window_policy, significant_peaks,
    Candidate, Decision, PeakCriterion, Selection,
};

use thiserror::Error;

use crate::frontend::FrontendError;
use crate::signal::SignalError;

#[derive(Debug, Error)]
pub enum DseError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("invalid corpus: {0}")]
    InvalidCorpus(String),
    #[error("clip {clip} at {native} Hz cannot be brought to {rate} Hz by integer decimation")]
    UnsupportedRate {
        clip: String,
        native: f64,
        rate: f64,
    },
    #[error("no candidate satisfies the {} criterion", .0.decision)]
    NoFeasiblePoint(Box<Decision>),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("invalid DSE configuration: {0}")]
    InvalidConfig(String),
    /// A decision failed; the report holds every decision taken before it.
    #[error("{source}")]
    Aborted {
        #[source]
        source: Box<DseError>,
        report: Box<DseReport>,
    },
}

/// Order-preserving map over `items` on up to `jobs` threads.
pub(crate) fn par_map<T: Sync, R: Send>(
    items: &[T],
    jobs: usize,
    f: impl Fn(&T) -> R + Sync,
) -> Vec<R> {
    let jobs = jobs.clamp(1, items.len().max(1));
    if jobs == 1 {
        return items.iter().map(f).collect();
    }
    let f = &f;
    let mut slots: Vec<Option<R>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|j| {
                scope.spawn(move || {
                    items
                        .iter()
                        .enumerate()
                        .skip(j)
                        .step_by(jobs)
                        .map(|(i, x)| (i, f(x)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        let mut slots: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
        for h in handles {
            for (i, r) in h.join().expect("worker panicked") {
                slots[i] = Some(r);
            }
        }
        slots
    });
    slots
        .iter_mut()
        .map(|s| s.take().expect("every index filled"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_map_keeps_order() {
        let xs: Vec<u64> = (0..37).collect();
        for jobs in [0, 1, 3, 8, 64] {
            assert_eq!(
                par_map(&xs, jobs, |x| x * x),
                xs.iter().map(|x| x * x).collect::<Vec<_>>()
            );
        }
        assert!(par_map(&Vec::<u8>::new(), 4, |x| *x).is_empty());
    }
}
