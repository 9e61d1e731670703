//! Shared helpers for the acceptance suite.

use std::time::{Duration, Instant};

use dshi_core::lineshape::SampledSpectrum;

/// Collects one PASS/FAIL line per criterion.
#[derive(Default)]
pub struct Scoreboard {
    failures: Vec<String>,
    total: usize,
}

impl Scoreboard {
    pub fn record(&mut self, name: &str, pass: bool, elapsed: Duration, detail: &str) {
        self.total += 1;
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("{tag} {name} [{:.2}s] {detail}", elapsed.as_secs_f64());
        if !pass {
            self.failures.push(name.to_string());
        }
    }

    /// Runs `f`, which returns `(pass, detail)`, and records it. A run over
    /// `budget` fails regardless of its result.
    pub fn run(&mut self, name: &str, budget: Duration, f: impl FnOnce() -> (bool, String)) {
        let start = Instant::now();
        let (pass, detail) = f();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let detail = if in_time { detail } else { format!("{detail}; over the {:.0}s budget", budget.as_secs_f64()) };
        self.record(name, pass && in_time, elapsed, &detail);
    }

    pub fn failures(&self) -> &[String] {
        &self.failures
    }

    pub fn total(&self) -> usize {
        self.total
    }
}

/// RMS of `10 log10(a / b)` over the bins more than `exclude` bins from
/// `center_index`.
pub fn rms_db<A, B>(a: &A, b: &B, center_index: usize, exclude: usize) -> f64
where
    A: SampledSpectrum + ?Sized,
    B: SampledSpectrum + ?Sized,
{
    let (a, b) = (a.linear_values(), b.linear_values());
    let devs: Vec<f64> = a
        .iter()
        .zip(b.iter())
        .enumerate()
        .filter(|(i, _)| i.abs_diff(center_index) > exclude)
        .map(|(_, (x, y))| 10.0 * (x / y).log10())
        .collect();
    (devs.iter().map(|d| d * d).sum::<f64>() / devs.len() as f64).sqrt()
}

pub fn relative_error(estimate: f64, truth: f64) -> f64 {
    (estimate / truth - 1.0).abs()
}
