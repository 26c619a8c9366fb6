//! The Fibonacci word and the aperiodic A/B gate schedule it induces.
//!
//! Words are built from `W_0 = "1"`, `W_1 = "0"` by `W_{j+1} = W_j W_{j-1}`,
//! so every `W_j` (j >= 1) is a prefix of the limit word `W_inf`. Letters
//! are 1-indexed: the first applied propagator corresponds to letter 1,
//! which is '0', i.e. the A propagator. A step `t >= 1` of the evolution
//! consumes schedule label `t - 1`, which keeps the temporal ensemble
//! `{psi(0), ..., psi(T-1)}` aligned with ensemble-size checkpoints.
//!
//! Reading note: figure captions list operator products such as
//! "U^(A) U^(A) U^(B) U^(A)" in operator order, i.e. the rightmost factor
//! acts first; that matches the schedule [A, B, A, A].

use alloc::string::String;
use alloc::vec::Vec;

/// Which of the two propagators a time-step uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Brick {
    A,
    B,
}

/// Aperiodic drive program for a finite horizon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DriveSchedule {
    horizon: usize,
    symbols: Vec<Brick>,
}

impl DriveSchedule {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn symbols(&self) -> &[Brick] {
        &self.symbols
    }

    /// Brick consumed by step `t` (1-indexed step, so label `t - 1`).
    pub fn brick_for_step(&self, t: usize) -> Brick {
        self.symbols[t - 1]
    }
}

/// Fibonacci numbers with `F(0) = F(1) = 1`, so `F(j) = len(W_j)`.
fn fib_lengths_up_to(limit: u64) -> Vec<u64> {
    let mut f = alloc::vec![1u64, 1u64];
    while *f.last().unwrap() < limit {
        let n = f[f.len() - 1] + f[f.len() - 2];
        f.push(n);
    }
    f
}

/// The j-th Fibonacci word over {'0', '1'}.
pub fn fibonacci_word(j: usize) -> String {
    match j {
        0 => String::from("1"),
        1 => String::from("0"),
        _ => {
            let mut prev = String::from("1");
            let mut cur = String::from("0");
            for _ in 2..=j {
                let next = alloc::format!("{cur}{prev}");
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Letter of `W_inf` at 1-indexed position `t`, in `O(log t)` by walking
/// the prefix structure `W_j = W_{j-1} W_{j-2}` down the length ladder.
pub fn symbol_at(t: u64) -> u8 {
    assert!(t >= 1, "letters are 1-indexed");
    let fibs = fib_lengths_up_to(t);
    let mut j = fibs.len() - 1;
    let mut pos = t;
    while j > 1 {
        let left_len = fibs[j - 1];
        if pos <= left_len {
            j -= 1;
        } else {
            pos -= left_len;
            j -= 2;
        }
    }
    match j {
        1 => b'0',
        _ => b'1',
    }
}

/// Drive program of length `horizon`: label `k` (0-based) is A when letter
/// `k + 1` of `W_inf` is '0', else B.
pub fn schedule(horizon: usize) -> DriveSchedule {
    let symbols = (0..horizon)
        .map(|k| match symbol_at(k as u64 + 1) {
            b'0' => Brick::A,
            _ => Brick::B,
        })
        .collect();
    DriveSchedule { horizon, symbols }
}
