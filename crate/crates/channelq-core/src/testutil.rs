//! Shared fixtures for the unit tests.

use alloc::vec;

use crate::channel::Channel;

/// The running 2x4 example channel: W(.|0) = [0, 1/6, 1/3, 1/2], W(.|1)
/// reversed, uniform input. Letters are conventionally called a, b, c, d.
pub(crate) fn example_channel() -> Channel {
    Channel::new(
        vec![
            vec![0.0, 1.0 / 6.0, 1.0 / 3.0, 0.5],
            vec![0.5, 1.0 / 3.0, 1.0 / 6.0, 0.0],
        ],
        vec![0.5, 0.5],
        None,
    )
    .unwrap()
}

/// Binary erasure channel with erasure probability `eps` and uniform input;
/// letters: (clean 0, clean 1, erasure).
pub(crate) fn bec(eps: f64) -> Channel {
    Channel::new(
        vec![
            vec![1.0 - eps, 0.0, eps],
            vec![0.0, 1.0 - eps, eps],
        ],
        vec![0.5, 0.5],
        None,
    )
    .unwrap()
}

/// Binary symmetric channel with crossover `p` and uniform input.
pub(crate) fn bsc(p: f64) -> Channel {
    Channel::new(
        vec![vec![1.0 - p, p], vec![p, 1.0 - p]],
        vec![0.5, 0.5],
        None,
    )
    .unwrap()
}
