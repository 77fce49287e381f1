//! Casimir functions `Q` and the maps `Q`, `Q'`, `(Q')^{-1}`.

use std::f64::consts::PI;
use std::fmt::Debug;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::registry::Registry;
use crate::roots::brent;

/// Constants of the growth assumptions on `Q`:
/// `Q(f) >= c1 f^{1+1/k1}` for `f >= f0`, `Q(f) <= c2 f^{1+1/k2}` for `f <= f0`,
/// `Q(λf) >= λ^{1+1/k3} Q(f)` for `λ ∈ [0,1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthConstants {
    pub f0: f64,
    pub c1: f64,
    pub c2: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

pub trait Casimir: Debug + Send + Sync {
    fn kind(&self) -> &'static str;
    fn q(&self, f: f64) -> f64;
    fn dq(&self, f: f64) -> f64;
    /// `(Q')^{-1}(s)` for `s > 0`, zero for `s <= 0`.
    fn qprime_inverse(&self, s: f64) -> Result<f64>;
    fn constants(&self) -> GrowthConstants;
    /// The exponent `k` when `Q(f) = f^{1+1/k}`.
    fn polytropic_exponent(&self) -> Option<f64> {
        None
    }
    fn params(&self) -> Value;
}

/// `Q(f) = f^{1+1/k}`, `0 < k < 3/2`.
#[derive(Debug, Clone, Copy)]
pub struct Polytropic {
    k: f64,
}

impl Polytropic {
    pub fn new(k: f64) -> Result<Self> {
        if !(k > 0.0 && k < 1.5) {
            return Err(Error::invalid("k", format!("polytropic exponent must lie in (0, 3/2), got {k}")));
        }
        Ok(Polytropic { k })
    }

    pub fn k(&self) -> f64 {
        self.k
    }
}

impl Casimir for Polytropic {
    fn kind(&self) -> &'static str {
        "polytropic"
    }

    fn q(&self, f: f64) -> f64 {
        if f <= 0.0 {
            0.0
        } else {
            f.powf(1.0 + 1.0 / self.k)
        }
    }

    fn dq(&self, f: f64) -> f64 {
        if f <= 0.0 {
            0.0
        } else {
            (1.0 + 1.0 / self.k) * f.powf(1.0 / self.k)
        }
    }

    fn qprime_inverse(&self, s: f64) -> Result<f64> {
        if s <= 0.0 {
            return Ok(0.0);
        }
        Ok((self.k * s / (self.k + 1.0)).powf(self.k))
    }

    fn constants(&self) -> GrowthConstants {
        let k = self.k;
        GrowthConstants { f0: 1.0, c1: 1.0, c2: 1.0, k1: k, k2: k, k3: k }
    }

    fn polytropic_exponent(&self) -> Option<f64> {
        Some(self.k)
    }

    fn params(&self) -> Value {
        json!({ "kind": "polytropic", "k": self.k })
    }
}

/// `Q(f) = a f^{1+1/ka} + b f^{1+1/kb}`: a genuinely non-polytropic Casimir
/// whose inverse derivative has no closed form.
#[derive(Debug, Clone, Copy)]
pub struct TwoPower {
    a: f64,
    ka: f64,
    b: f64,
    kb: f64,
}

impl TwoPower {
    pub fn new(a: f64, ka: f64, b: f64, kb: f64) -> Result<Self> {
        for (name, k) in [("ka", ka), ("kb", kb)] {
            if !(k > 0.0 && k < 1.5) {
                return Err(Error::invalid(name, format!("exponent must lie in (0, 3/2), got {k}")));
            }
        }
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::invalid("a", "coefficients must be positive"));
        }
        Ok(TwoPower { a, ka, b, kb })
    }
}

impl Casimir for TwoPower {
    fn kind(&self) -> &'static str {
        "two-power"
    }

    fn q(&self, f: f64) -> f64 {
        if f <= 0.0 {
            return 0.0;
        }
        self.a * f.powf(1.0 + 1.0 / self.ka) + self.b * f.powf(1.0 + 1.0 / self.kb)
    }

    fn dq(&self, f: f64) -> f64 {
        if f <= 0.0 {
            return 0.0;
        }
        self.a * (1.0 + 1.0 / self.ka) * f.powf(1.0 / self.ka)
            + self.b * (1.0 + 1.0 / self.kb) * f.powf(1.0 / self.kb)
    }

    fn qprime_inverse(&self, s: f64) -> Result<f64> {
        if s <= 0.0 {
            return Ok(0.0);
        }
        // Each term alone already reaches s, so the smaller single-term inverse bounds the root.
        let ha = (s / (self.a * (1.0 + 1.0 / self.ka))).powf(self.ka);
        let hb = (s / (self.b * (1.0 + 1.0 / self.kb))).powf(self.kb);
        let hi = ha.min(hb);
        // Work in log space: the root can span many decades.
        let g = |lf: f64| (self.dq(lf.exp()) / s).ln();
        let lhi = hi.ln();
        let llo = lhi - 60.0;
        if g(lhi) <= 0.0 {
            return Ok(hi);
        }
        brent(g, llo, lhi, 1e-15, 200).map(f64::exp)
    }

    fn constants(&self) -> GrowthConstants {
        let (c_small_k, k_min, k_max) =
            if self.ka <= self.kb { (self.a, self.ka, self.kb) } else { (self.b, self.kb, self.ka) };
        GrowthConstants { f0: 1.0, c1: c_small_k, c2: self.a + self.b, k1: k_min, k2: k_max, k3: k_min }
    }

    fn params(&self) -> Value {
        json!({ "kind": "two-power", "a": self.a, "ka": self.ka, "b": self.b, "kb": self.kb })
    }
}

/// A shareable handle on a Casimir function.
#[derive(Debug, Clone)]
pub struct CasimirFunction(Arc<dyn Casimir>);

impl std::ops::Deref for CasimirFunction {
    type Target = dyn Casimir;
    fn deref(&self) -> &Self::Target {
        &*self.0
    }
}

impl CasimirFunction {
    pub fn new(c: impl Casimir + 'static) -> Self {
        CasimirFunction(Arc::new(c))
    }

    pub fn polytropic(k: f64) -> Result<Self> {
        Polytropic::new(k).map(Self::new)
    }

    /// Builds from a `{"kind": ..., ...}` description.
    pub fn from_params(params: &Value) -> Result<Self> {
        let kind = params
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Config("casimir description needs a string `kind`".into()))?;
        let registry = registry();
        let build = registry.get(kind)?;
        build(params)
    }
}

pub type CasimirBuilder = fn(&Value) -> Result<CasimirFunction>;

fn number(params: &Value, key: &'static str) -> Result<f64> {
    params
        .get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::Config(format!("casimir field `{key}` must be a number")))
}

pub fn registry() -> Registry<CasimirBuilder> {
    Registry::<CasimirBuilder>::new("casimir")
        .with("polytropic", "Q(f) = f^(1+1/k), 0 < k < 3/2", |p| {
            CasimirFunction::polytropic(number(p, "k")?)
        })
        .with("two-power", "Q(f) = a f^(1+1/ka) + b f^(1+1/kb)", |p| {
            Ok(CasimirFunction::new(TwoPower::new(
                number(p, "a")?,
                number(p, "ka")?,
                number(p, "b")?,
                number(p, "kb")?,
            )?))
        })
}

/// `(Q')^{-1}(s)`, zero for `s <= 0`.
pub fn qprime_inverse(casimir: &CasimirFunction, s: f64) -> Result<f64> {
    casimir.qprime_inverse(s)
}

/// Checks the structural assumptions on `Q` on a log-spaced sample of f-values:
/// `Q(0) = Q'(0) = 0`, `Q'` strictly increasing, and the three growth bounds.
pub fn check_assumptions(casimir: &CasimirFunction) -> Result<()> {
    let c = casimir.constants();
    if casimir.q(0.0) != 0.0 || casimir.dq(0.0) != 0.0 {
        return Err(Error::invalid("casimir", "Q(0) and Q'(0) must vanish"));
    }
    for (name, k) in [("k1", c.k1), ("k2", c.k2), ("k3", c.k3)] {
        if !(k > 0.0 && k < 1.5) {
            return Err(Error::invalid(name, format!("must lie in (0, 3/2), got {k}")));
        }
    }
    let grid: Vec<f64> = (0..=240).map(|i| 10f64.powf(-6.0 + 12.0 * i as f64 / 240.0)).collect();
    let slack = 1e-12;
    let mut prev = 0.0;
    for &f in &grid {
        let d = casimir.dq(f);
        if d <= prev {
            return Err(Error::invalid("casimir", format!("Q' not strictly increasing near f = {f:e}")));
        }
        prev = d;
        let q = casimir.q(f);
        if f >= c.f0 && q < c.c1 * f.powf(1.0 + 1.0 / c.k1) * (1.0 - slack) {
            return Err(Error::invalid("casimir", format!("lower growth bound fails at f = {f:e}")));
        }
        if f <= c.f0 && q > c.c2 * f.powf(1.0 + 1.0 / c.k2) * (1.0 + slack) {
            return Err(Error::invalid("casimir", format!("upper growth bound fails at f = {f:e}")));
        }
        for lambda in [0.01, 0.1, 0.5, 0.9, 0.999] {
            if casimir.q(lambda * f) < lambda.powf(1.0 + 1.0 / c.k3) * q * (1.0 - slack) {
                return Err(Error::invalid("casimir", format!("scaling bound fails at f = {f:e}, λ = {lambda}")));
            }
        }
    }
    Ok(())
}

/// The constant `c_k` with `4π h_φ(u) = c_k (E0 - u)_+^{k+3/2}` for the
/// polytropic profile `φ(E) = (Q')^{-1}(E0 - E)`, `Q(f) = f^{1+1/k}`.
///
/// With `φ(E) = (k/(k+1))^k (E0-E)^k` the velocity integral reduces to a Beta
/// function: `∫_u^{E0} (E0-E)^k (E-u)^{1/2} dE = B(k+1, 3/2) (E0-u)^{k+3/2}`,
/// so `c_k = 16 √2 π² (k/(k+1))^k B(k+1, 3/2)`.
pub fn polytrope_constant(k: f64) -> Result<f64> {
    if !(k > 0.0 && k < 1.5) {
        return Err(Error::invalid("k", format!("polytropic exponent must lie in (0, 3/2), got {k}")));
    }
    let amplitude = (k / (k + 1.0)).powf(k);
    let beta = statrs::function::beta::beta(k + 1.0, 1.5);
    Ok(16.0 * 2f64.sqrt() * PI * PI * amplitude * beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn polytropic_inverse_examples() {
        let q = CasimirFunction::polytropic(1.0).unwrap();
        assert_eq!(qprime_inverse(&q, 3.0).unwrap(), 1.5);
        assert_eq!(qprime_inverse(&q, -2.0).unwrap(), 0.0);
        let half = CasimirFunction::polytropic(0.5).unwrap();
        let f = qprime_inverse(&half, 1.0).unwrap();
        assert_relative_eq!(f, (0.5f64 / 1.5).powf(0.5), max_relative = 1e-15);
        assert_relative_eq!(half.dq(f), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn range_checked() {
        assert!(CasimirFunction::polytropic(1.5).is_err());
        assert!(CasimirFunction::polytropic(0.0).is_err());
        assert!(polytrope_constant(2.0).is_err());
    }

    #[test]
    fn assumptions_hold_for_builtins() {
        for k in [0.1, 0.5, 1.0, 1.4] {
            check_assumptions(&CasimirFunction::polytropic(k).unwrap()).unwrap();
        }
        let two = CasimirFunction::from_params(&json!({"kind": "two-power", "a": 1.0, "ka": 1.0, "b": 0.5, "kb": 0.5}))
            .unwrap();
        check_assumptions(&two).unwrap();
    }

    #[test]
    fn registry_builds_by_name() {
        let q = CasimirFunction::from_params(&json!({"kind": "polytropic", "k": 0.75})).unwrap();
        assert_eq!(q.polytropic_exponent(), Some(0.75));
        assert!(CasimirFunction::from_params(&json!({"kind": "nope"})).is_err());
        assert!(CasimirFunction::from_params(&json!({"k": 1.0})).is_err());
    }

    #[test]
    fn polytrope_constant_k1() {
        // B(2, 3/2) = 4/15, (1/2)^1: c_1 = 16 √2 π² · 2/15.
        let c1 = polytrope_constant(1.0).unwrap();
        assert_relative_eq!(c1, 32.0 * 2f64.sqrt() * PI * PI / 15.0, max_relative = 1e-14);
    }

    proptest! {
        #[test]
        fn two_power_inverse_composes(s in 1e-8f64..1e6, ka in 0.2f64..1.4, kb in 0.2f64..1.4) {
            let q = TwoPower::new(0.7, ka, 1.3, kb).unwrap();
            let f = q.qprime_inverse(s).unwrap();
            prop_assert!((q.dq(f) - s).abs() <= 1e-12 * s);
        }

        #[test]
        fn inverse_is_monotone(s1 in -5f64..50.0, s2 in -5f64..50.0, k in 0.05f64..1.45) {
            let q = Polytropic::new(k).unwrap();
            let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
            prop_assert!(q.qprime_inverse(lo).unwrap() <= q.qprime_inverse(hi).unwrap());
        }
    }
}
