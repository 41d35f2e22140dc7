/// Truncation rule shared by every infinite series in the crate.
///
/// A series stops once `|term| <= abs_tol + rel_tol * |partial_sum|` holds for
/// three consecutive, non-increasing terms. Reaching `max_terms` first is a
/// `NoConvergence` error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_terms: usize,
}

/// Environment variable that overrides the default term cap.
pub const MAX_TERMS_ENV: &str = "MLKCALC_MAX_TERMS";

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy { abs_tol: 0.0, rel_tol: 1e-16, max_terms: 10_000 }
    }
}

impl TruncationPolicy {
    pub fn new(abs_tol: f64, rel_tol: f64, max_terms: usize) -> Self {
        TruncationPolicy { abs_tol, rel_tol, max_terms }
    }

    /// Default policy with `max_terms` taken from `MLKCALC_MAX_TERMS` when set.
    pub fn from_env() -> Self {
        let mut pol = TruncationPolicy::default();
        if let Some(cap) = std::env::var(MAX_TERMS_ENV).ok().and_then(|v| v.trim().parse().ok()) {
            pol.max_terms = cap;
        }
        pol
    }

    pub fn threshold(&self, partial: f64) -> f64 {
        self.abs_tol + self.rel_tol * partial.abs()
    }
}

/// Tracks the "three consecutive small terms" stopping rule.
#[derive(Debug, Default)]
pub(crate) struct StopRule {
    small_run: usize,
    last_abs: f64,
    started: bool,
}

impl StopRule {
    /// Feed the magnitude of the latest term; returns true when the series may stop.
    pub(crate) fn update(&mut self, term_abs: f64, threshold: f64) -> bool {
        let non_increasing = !self.started || term_abs <= self.last_abs;
        self.started = true;
        self.last_abs = term_abs;
        if term_abs <= threshold && non_increasing {
            self.small_run += 1;
        } else {
            self.small_run = 0;
        }
        self.small_run >= 3
    }
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
