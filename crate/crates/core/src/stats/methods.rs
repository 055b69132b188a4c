use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{pfail_one_beta, pfail_one_exact, pfail_one_gauss, EXACT_BINOMIAL_MAX_M};
use crate::error::{Error, Result};

/// One way of evaluating the single-bit failure probability `p_fail_one(eps_eff, M)`.
pub trait FailureMethod: Send + Sync {
    /// Registry key, also used as the tag on reported values.
    fn name(&self) -> &'static str;

    /// Largest ensemble size the method accepts, if limited.
    fn max_ensemble(&self) -> Option<u64> {
        None
    }

    fn evaluate(&self, eps_eff: f64, m: u64) -> Result<f64>;

    /// Value plus the name of the concrete method that produced it. Only
    /// dispatchers need to override this.
    fn evaluate_tagged(&self, eps_eff: f64, m: u64) -> Result<(f64, &'static str)> {
        Ok((self.evaluate(eps_eff, m)?, self.name()))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExactBinomial;

impl FailureMethod for ExactBinomial {
    fn name(&self) -> &'static str {
        "exact-binomial"
    }

    fn max_ensemble(&self) -> Option<u64> {
        Some(EXACT_BINOMIAL_MAX_M)
    }

    fn evaluate(&self, eps_eff: f64, m: u64) -> Result<f64> {
        pfail_one_exact(eps_eff, m)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IncompleteBeta;

impl FailureMethod for IncompleteBeta {
    fn name(&self) -> &'static str {
        "incomplete-beta"
    }

    fn evaluate(&self, eps_eff: f64, m: u64) -> Result<f64> {
        pfail_one_beta(eps_eff, m)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Gaussian;

impl FailureMethod for Gaussian {
    fn name(&self) -> &'static str {
        "gaussian"
    }

    fn evaluate(&self, eps_eff: f64, m: u64) -> Result<f64> {
        pfail_one_gauss(eps_eff, m)
    }
}

/// Picks the binomial sum for small ensembles, the incomplete beta function
/// for medium ones and the Gaussian form above that.
#[derive(Debug, Clone, Copy)]
pub struct Auto {
    pub exact_max_m: u64,
    pub beta_max_m: u64,
}

impl Default for Auto {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl Auto {
    pub const DEFAULT: Auto = Auto {
        exact_max_m: 2_000,
        beta_max_m: 100_000_000,
    };

    fn pick(&self, m: u64) -> &'static dyn FailureMethod {
        if m <= self.exact_max_m.min(EXACT_BINOMIAL_MAX_M) {
            &ExactBinomial
        } else if m <= self.beta_max_m {
            &IncompleteBeta
        } else {
            &Gaussian
        }
    }
}

impl FailureMethod for Auto {
    fn name(&self) -> &'static str {
        "auto"
    }

    fn evaluate(&self, eps_eff: f64, m: u64) -> Result<f64> {
        self.pick(m).evaluate(eps_eff, m)
    }

    fn evaluate_tagged(&self, eps_eff: f64, m: u64) -> Result<(f64, &'static str)> {
        let method = self.pick(m);
        Ok((method.evaluate(eps_eff, m)?, method.name()))
    }
}

/// Built-in method selector used by requests and configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactBinomial,
    IncompleteBeta,
    Gaussian,
    Auto,
}

impl Method {
    pub fn implementation(self) -> &'static dyn FailureMethod {
        static AUTO: Auto = Auto::DEFAULT;
        match self {
            Method::ExactBinomial => &ExactBinomial,
            Method::IncompleteBeta => &IncompleteBeta,
            Method::Gaussian => &Gaussian,
            Method::Auto => &AUTO,
        }
    }
}

/// Failure-probability methods registered by name.
#[derive(Clone)]
pub struct MethodRegistry {
    methods: BTreeMap<&'static str, Arc<dyn FailureMethod>>,
}

impl MethodRegistry {
    pub fn empty() -> Self {
        Self {
            methods: BTreeMap::new(),
        }
    }

    /// Registry holding the binomial, beta, Gaussian and auto methods.
    pub fn builtin() -> Self {
        Self::with_auto(Auto::default())
    }

    /// Built-in registry with custom dispatch thresholds for `auto`.
    pub fn with_auto(auto: Auto) -> Self {
        let mut registry = Self::empty();
        registry.register(Arc::new(ExactBinomial));
        registry.register(Arc::new(IncompleteBeta));
        registry.register(Arc::new(Gaussian));
        registry.register(Arc::new(auto));
        registry
    }

    /// Adds a method, replacing any previous one with the same name.
    pub fn register(&mut self, method: Arc<dyn FailureMethod>) -> Option<Arc<dyn FailureMethod>> {
        self.methods.insert(method.name(), method)
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn FailureMethod>> {
        self.methods
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownMethod(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.methods.keys().copied()
    }
}

impl Default for MethodRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl std::fmt::Debug for MethodRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.methods.keys()).finish()
    }
}
