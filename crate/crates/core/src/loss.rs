//! Scalar losses `g` with the growth constants the column-subset bounds use.
//!
//! Losses are trait objects looked up by name, so a config string such as
//! `"fair:2"` selects the implementation at runtime.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// Growth metadata of a loss.
///
/// * `ati_exponent`: `g(Σ_{i≤t} x_i) ≤ t^e · Σ g(x_i)`.
/// * `mon`: `g(x) ≤ mon · g(y)` whenever `|x| ≤ |y|`.
/// * `lin`: `g(y)/g(x) ≥ lin · |y|/|x|` whenever `0 < |x| ≤ |y|`, on
///   `|y| ≤ lin_domain` when that is set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LossMeta {
    pub ati_exponent: f64,
    pub mon: f64,
    pub lin: f64,
    pub lin_domain: Option<f64>,
}

impl LossMeta {
    pub fn ati(&self, t: f64) -> f64 {
        t.max(1.0).powf(self.ati_exponent)
    }
}

pub trait Loss: Send + Sync {
    fn name(&self) -> &'static str;
    fn params(&self) -> Vec<f64> {
        Vec::new()
    }
    fn eval(&self, x: f64) -> f64;
    /// `g'(x)`.
    fn deriv(&self, x: f64) -> f64;
    /// `g'(r)/r`, the IRLS weight; finite at `r = 0`.
    fn irls_weight(&self, r: f64) -> f64 {
        if r.abs() < 1e-12 {
            self.deriv(1e-12) / 1e-12
        } else {
            self.deriv(r) / r
        }
    }
    fn meta(&self) -> LossMeta;
}

impl fmt::Debug for dyn Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.name(), self.params())
    }
}

pub type LossSpec = Arc<dyn Loss>;

/// `Σ_ij g(M_ij)` for a flat slice of entries.
pub fn total(loss: &dyn Loss, xs: &[f64]) -> f64 {
    xs.iter().map(|&x| loss.eval(x)).sum()
}

#[derive(Clone, Copy, Debug)]
pub struct Huber;

impl Loss for Huber {
    fn name(&self) -> &'static str {
        "huber"
    }
    fn eval(&self, x: f64) -> f64 {
        let a = x.abs();
        if a <= 1.0 {
            0.5 * a * a
        } else {
            a - 0.5
        }
    }
    fn deriv(&self, x: f64) -> f64 {
        x.clamp(-1.0, 1.0)
    }
    fn irls_weight(&self, r: f64) -> f64 {
        1.0 / r.abs().max(1.0)
    }
    fn meta(&self) -> LossMeta {
        LossMeta { ati_exponent: 1.0, mon: 1.0, lin: 1.0, lin_domain: None }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AbsP {
    pub p: f64,
}

impl Loss for AbsP {
    fn name(&self) -> &'static str {
        "abs_p"
    }
    fn params(&self) -> Vec<f64> {
        vec![self.p]
    }
    fn eval(&self, x: f64) -> f64 {
        x.abs().powf(self.p)
    }
    fn deriv(&self, x: f64) -> f64 {
        self.p * x.signum() * x.abs().powf(self.p - 1.0)
    }
    fn irls_weight(&self, r: f64) -> f64 {
        // floor keeps p < 2 weights bounded near zero residuals
        self.p * r.abs().max(1e-12).powf(self.p - 2.0)
    }
    fn meta(&self) -> LossMeta {
        LossMeta { ati_exponent: self.p - 1.0, mon: 1.0, lin: 1.0, lin_domain: None }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct L1L2;

impl Loss for L1L2 {
    fn name(&self) -> &'static str {
        "l1_l2"
    }
    fn eval(&self, x: f64) -> f64 {
        2.0 * ((1.0 + 0.5 * x * x).sqrt() - 1.0)
    }
    fn deriv(&self, x: f64) -> f64 {
        x / (1.0 + 0.5 * x * x).sqrt()
    }
    fn irls_weight(&self, r: f64) -> f64 {
        1.0 / (1.0 + 0.5 * r * r).sqrt()
    }
    fn meta(&self) -> LossMeta {
        LossMeta { ati_exponent: 1.0, mon: 1.0, lin: 1.0, lin_domain: None }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Fair {
    pub c: f64,
}

impl Loss for Fair {
    fn name(&self) -> &'static str {
        "fair"
    }
    fn params(&self) -> Vec<f64> {
        vec![self.c]
    }
    fn eval(&self, x: f64) -> f64 {
        let a = x.abs() / self.c;
        self.c * self.c * (a - a.ln_1p())
    }
    fn deriv(&self, x: f64) -> f64 {
        x / (1.0 + x.abs() / self.c)
    }
    fn irls_weight(&self, r: f64) -> f64 {
        1.0 / (1.0 + r.abs() / self.c)
    }
    fn meta(&self) -> LossMeta {
        LossMeta { ati_exponent: 1.0, mon: 1.0, lin: 1.0, lin_domain: None }
    }
}

/// Cauchy grows logarithmically, so at-least-linear growth only holds on a
/// bounded range; `lin` is measured on `|x| ≤ 10c`.
#[derive(Clone, Copy, Debug)]
pub struct Cauchy {
    pub c: f64,
}

impl Cauchy {
    fn measured_lin(&self) -> f64 {
        let r = 10.0 * self.c;
        let steps = 4000;
        let mut best_h: f64 = 0.0;
        let mut lin: f64 = 1.0;
        for s in 1..=steps {
            let x = r * s as f64 / steps as f64;
            let h = self.eval(x) / x;
            best_h = best_h.max(h);
            lin = lin.min(h / best_h);
        }
        lin
    }
}

impl Loss for Cauchy {
    fn name(&self) -> &'static str {
        "cauchy"
    }
    fn params(&self) -> Vec<f64> {
        vec![self.c]
    }
    fn eval(&self, x: f64) -> f64 {
        0.5 * self.c * self.c * (x * x / (self.c * self.c)).ln_1p()
    }
    fn deriv(&self, x: f64) -> f64 {
        x / (1.0 + x * x / (self.c * self.c))
    }
    fn irls_weight(&self, r: f64) -> f64 {
        1.0 / (1.0 + r * r / (self.c * self.c))
    }
    fn meta(&self) -> LossMeta {
        LossMeta { ati_exponent: 2.0, mon: 1.0, lin: self.measured_lin(), lin_domain: Some(10.0 * self.c) }
    }
}

type LossFactory = fn(&[f64]) -> Result<LossSpec>;

fn one_param(name: &str, params: &[f64], default: f64) -> Result<f64> {
    match params {
        [] => Ok(default),
        [v] if v.is_finite() && *v > 0.0 => Ok(*v),
        _ => Err(Error::InvalidInput(format!("{name} takes one positive parameter"))),
    }
}

/// Name → constructor table for losses.
pub struct LossRegistry {
    factories: BTreeMap<&'static str, LossFactory>,
}

impl Default for LossRegistry {
    fn default() -> Self {
        let mut r = Self { factories: BTreeMap::new() };
        r.register("huber", |p| {
            if !p.is_empty() {
                return Err(Error::InvalidInput("huber takes no parameters".into()));
            }
            Ok(Arc::new(Huber))
        });
        r.register("abs_p", |p| {
            let v = one_param("abs_p", p, 2.0)?;
            if v < 1.0 {
                return Err(Error::InvalidInput("abs_p needs p >= 1".into()));
            }
            Ok(Arc::new(AbsP { p: v }))
        });
        r.register("l1_l2", |p| {
            if !p.is_empty() {
                return Err(Error::InvalidInput("l1_l2 takes no parameters".into()));
            }
            Ok(Arc::new(L1L2))
        });
        r.register("fair", |p| Ok(Arc::new(Fair { c: one_param("fair", p, 1.0)? })));
        r.register("cauchy", |p| Ok(Arc::new(Cauchy { c: one_param("cauchy", p, 1.0)? })));
        r
    }
}

impl LossRegistry {
    pub fn register(&mut self, name: &'static str, f: LossFactory) {
        self.factories.insert(name, f);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.factories.keys().copied().collect()
    }

    pub fn build(&self, name: &str, params: &[f64]) -> Result<LossSpec> {
        let f = self.factories.get(name).ok_or_else(|| Error::UnknownName(name.to_string()))?;
        f(params)
    }

    /// Parses `name` or `name:v1,v2`.
    pub fn parse(&self, spec: &str) -> Result<LossSpec> {
        let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let params = rest
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse::<f64>().map_err(|_| Error::InvalidInput(format!("bad loss parameter `{s}`"))))
            .collect::<Result<Vec<_>>>()?;
        self.build(name.trim(), &params)
    }
}
