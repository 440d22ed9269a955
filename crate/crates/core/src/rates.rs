//! Empirical convergence rates and the verdict taxonomy.

use std::fmt;

use crate::error::{Error, Result};

/// Default width of the consecutive-rate jump that marks a series as
/// fluctuating.
pub const FLUCTUATION_BAND: f64 = 3.0;

/// Fraction of the expected rate that still counts as a pass.
pub const PASS_FRACTION: f64 = 0.9;

/// Values measured on a sequence of meshes with decreasing meshwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSeries {
    hs: Vec<f64>,
    values: Vec<f64>,
}

impl RateSeries {
    pub fn new(hs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if hs.len() != values.len() {
            return Err(Error::RateSeries(format!("{} meshwidths but {} values", hs.len(), values.len())));
        }
        if hs.len() < 2 {
            return Err(Error::RateSeries("at least two levels are needed".into()));
        }
        if hs.iter().any(|h| !(*h > 0.0)) || hs.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::RateSeries("meshwidths must be positive and strictly decreasing".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::RateSeries("values must be finite and nonnegative".into()));
        }
        Ok(Self { hs, values })
    }

    pub fn hs(&self) -> &[f64] {
        &self.hs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn require_positive(&self) -> Result<()> {
        if self.values.iter().any(|v| *v <= 0.0) {
            return Err(Error::RateSeries("rates need strictly positive values".into()));
        }
        Ok(())
    }
}

/// Least-squares slope of `log(value)` against `log(h)`.
pub fn fit_rate(s: &RateSeries) -> Result<f64> {
    s.require_positive()?;
    let n = s.hs.len() as f64;
    let lx: Vec<f64> = s.hs.iter().map(|h| h.ln()).collect();
    let ly: Vec<f64> = s.values.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Rates between neighbouring levels, `log(v_k / v_{k+1}) / log(h_k / h_{k+1})`.
pub fn consecutive_rates(s: &RateSeries) -> Result<Vec<f64>> {
    s.require_positive()?;
    Ok(s.hs
        .windows(2)
        .zip(s.values.windows(2))
        .map(|(h, v)| (v[0] / v[1]).ln() / (h[0] / h[1]).ln())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VerdictKind {
    Pass,
    Fail,
    MachinePrecision,
    Fluctuating,
    SolverFailure,
}

impl VerdictKind {
    /// The table symbol.
    pub fn symbol(&self) -> &'static str {
        match self {
            VerdictKind::Pass => "✓",
            VerdictKind::Fail => "✗",
            VerdictKind::MachinePrecision => "*",
            VerdictKind::Fluctuating => "⊛",
            VerdictKind::SolverFailure => "solver-failure",
        }
    }

    /// Plain ASCII name used in CSV output.
    pub fn name(&self) -> &'static str {
        match self {
            VerdictKind::Pass => "pass",
            VerdictKind::Fail => "fail",
            VerdictKind::MachinePrecision => "machine-precision",
            VerdictKind::Fluctuating => "fluctuating",
            VerdictKind::SolverFailure => "solver-failure",
        }
    }
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub fitted_rate: Option<f64>,
    pub consecutive_rates: Vec<f64>,
    pub expected_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub machine_floor: f64,
    pub fluctuation_band: f64,
}

impl ClassifyOptions {
    pub fn with_floor(machine_floor: f64) -> Self {
        Self { machine_floor, fluctuation_band: FLUCTUATION_BAND }
    }
}

/// Classifies a convergence series.
///
/// * every value below the floor → machine precision;
/// * consecutive rates that change sign or jump by more than the band →
///   fluctuating;
/// * otherwise pass when the governing rate reaches 90% of the expected
///   one. The fitted rate governs unless it and the consecutive rates
///   disagree on the verdict, in which case the latest consecutive rate
///   governs.
pub fn classify(s: &RateSeries, expected: f64, opts: ClassifyOptions) -> Verdict {
    let threshold = PASS_FRACTION * expected;
    if s.values.iter().all(|v| *v < opts.machine_floor) {
        let fitted = fit_rate(s).ok();
        let consecutive = consecutive_rates(s).unwrap_or_default();
        return Verdict { kind: VerdictKind::MachinePrecision, fitted_rate: fitted, consecutive_rates: consecutive, expected_rate: expected };
    }
    if s.values.contains(&0.0) {
        // an exact zero above the floor cannot be rated; only a zero series
        // is meaningful and that is below any positive floor
        return Verdict { kind: VerdictKind::MachinePrecision, fitted_rate: None, consecutive_rates: Vec::new(), expected_rate: expected };
    }
    let fitted = fit_rate(s).expect("positive series");
    let consecutive = consecutive_rates(s).expect("positive series");
    let fluctuating = consecutive.windows(2).any(|w| {
        (w[0] * w[1] < 0.0) || (w[0] - w[1]).abs() > opts.fluctuation_band
    });
    let kind = if fluctuating {
        VerdictKind::Fluctuating
    } else {
        let fit_pass = fitted >= threshold;
        let last = *consecutive.last().expect("at least one consecutive rate");
        let cons_pass = last >= threshold;
        let pass = if fit_pass == cons_pass { fit_pass } else { cons_pass };
        if pass {
            VerdictKind::Pass
        } else {
            VerdictKind::Fail
        }
    };
    Verdict { kind, fitted_rate: Some(fitted), consecutive_rates: consecutive, expected_rate: expected }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn series(hs: &[f64], vs: &[f64]) -> RateSeries {
        RateSeries::new(hs.to_vec(), vs.to_vec()).unwrap()
    }

    #[test]
    fn fit_examples() {
        let s = series(&[1.0, 0.5, 0.25], &[1.0, 0.125, 1.0 / 64.0]);
        assert_relative_eq!(fit_rate(&s).unwrap(), 3.0, epsilon = 1e-12);
        let s = series(&[1.0, 0.5, 0.25], &[2.0, 2.0, 2.0]);
        assert_relative_eq!(fit_rate(&s).unwrap(), 0.0, epsilon = 1e-12);
        assert!(fit_rate(&series(&[1.0, 0.5], &[1.0, 0.0])).is_err());
    }

    #[test]
    fn consecutive_examples() {
        let s = series(&[1.0, 0.5, 0.25, 0.125], &[1.0, 0.25, 0.0625, 0.015625]);
        for r in consecutive_rates(&s).unwrap() {
            assert_relative_eq!(r, 2.0, epsilon = 1e-12);
        }
        let bump = series(&[1.0, 0.5, 0.25], &[1.0, 0.5, 0.7]);
        assert!(consecutive_rates(&bump).unwrap()[1] < 0.0);
    }

    #[test]
    fn invalid_series() {
        assert!(RateSeries::new(vec![1.0], vec![1.0]).is_err());
        assert!(RateSeries::new(vec![1.0, 2.0], vec![1.0, 1.0]).is_err());
        assert!(RateSeries::new(vec![1.0, 0.5], vec![1.0]).is_err());
        assert!(RateSeries::new(vec![1.0, 0.5], vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn classify_examples() {
        let opts = ClassifyOptions::with_floor(1e-12);
        let hs = [1.0, 0.5, 0.25, 0.125];
        let pass = series(&hs, &hs.map(|h: f64| h.powf(3.89)));
        assert_eq!(classify(&pass, 3.0, opts).kind, VerdictKind::Pass);
        let fail = series(&hs, &hs.map(|h: f64| h.powf(-0.13)));
        assert_eq!(classify(&fail, 2.0, opts).kind, VerdictKind::Fail);
        let tiny = series(&hs, &[4e-8, 4.1e-8, 3.9e-8, 4e-8]);
        assert_eq!(classify(&tiny, 1.0, ClassifyOptions::with_floor(1e-6)).kind, VerdictKind::MachinePrecision);
        // within 10% below the expected rate still passes
        let near = series(&hs, &hs.map(|h: f64| h.powf(2.75)));
        assert_eq!(classify(&near, 3.0, opts).kind, VerdictKind::Pass);
        let zigzag = series(&hs, &[1.0, 0.3, 40.0, 0.01]);
        assert_eq!(classify(&zigzag, 1.0, opts).kind, VerdictKind::Fluctuating);
    }

    #[test]
    fn consecutive_rates_govern_on_disagreement() {
        // steep early decay, then stagnation: fitted rate passes, last does not
        let hs = [1.0, 0.5, 0.25, 0.125];
        let s = series(&hs, &[1.0, 0.125, 0.0156, 0.0150]);
        let v = classify(&s, 1.0, ClassifyOptions { machine_floor: 0.0, fluctuation_band: 10.0 });
        assert!(v.fitted_rate.unwrap() > 1.0);
        assert_eq!(v.kind, VerdictKind::Fail);
    }

    #[test]
    fn scale_invariance() {
        let hs = [1.0, 0.5, 0.25];
        let base = [3.0, 0.9, 0.2];
        let opts = ClassifyOptions::with_floor(1e-9);
        let v0 = classify(&series(&hs, &base), 1.5, opts);
        for c in [1e-3, 7.0, 1e4] {
            let scaled = base.map(|v| v * c);
            let v = classify(&series(&hs, &scaled), 1.5, ClassifyOptions::with_floor(1e-9 * c));
            assert_eq!(v.kind, v0.kind);
            assert_relative_eq!(v.fitted_rate.unwrap(), v0.fitted_rate.unwrap(), epsilon = 1e-12);
        }
    }
}
