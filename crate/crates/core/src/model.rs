//! Birth–death models, truncation policy and the JSON config format.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::mm1m::{analytic_zeta, Mm1mParams};

/// Preset tag of a model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "mm1m")]
    Mm1m,
    #[serde(rename = "mserver-balk-abandon")]
    MServer,
    #[serde(rename = "linear-immigration")]
    LinearImmigration,
    #[serde(rename = "tabulated")]
    Tabulated,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Mm1m => "mm1m",
            ModelKind::MServer => "mserver-balk-abandon",
            ModelKind::LinearImmigration => "linear-immigration",
            ModelKind::Tabulated => "tabulated",
        }
    }
}

/// m-server queue with state-dependent balking and exponential abandonment.
///
/// `λ_n = λ (1 - α_n)`, `μ_n = min(m, n) μ + g(m, n) θ` and
/// `c_n = c_ab g(m, n) θ + h(n)`, where `g(m, n)` counts customers that may
/// abandon (`n` if service can be abandoned, `(n - m)^+` otherwise) and `h`
/// is a holding-cost polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MServer {
    pub lambda: f64,
    /// Balking probabilities `α_0, α_1, ...`; the last entry repeats.
    #[serde(default)]
    pub balking: Vec<f64>,
    pub servers: usize,
    pub mu: f64,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub abandon_in_service: bool,
    /// Cost per abandonment `c_ab`.
    #[serde(default)]
    pub abandonment_cost: f64,
    /// Holding-cost polynomial coefficients, constant term first.
    #[serde(default)]
    pub holding: Vec<f64>,
}

impl MServer {
    fn abandoning(&self, n: usize) -> f64 {
        if self.abandon_in_service {
            n as f64
        } else {
            n.saturating_sub(self.servers) as f64
        }
    }

    fn balk(&self, n: usize) -> f64 {
        match self.balking.len() {
            0 => 0.0,
            len => self.balking[n.min(len - 1)],
        }
    }
}

/// Linear birth with immigration: `λ_n = nλ + α`, `μ_n = nμ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearImmigration {
    pub birth: f64,
    pub immigration: f64,
    pub death: f64,
    #[serde(default)]
    pub holding: Vec<f64>,
}

/// Explicit finite arrays. Requests beyond the arrays are errors, never extrapolated.
#[derive(Clone, Debug, PartialEq)]
pub struct Tabulated {
    pub lambda: Vec<f64>,
    /// `mu[0]` must be 0.
    pub mu: Vec<f64>,
    pub cost: Vec<f64>,
}

impl Tabulated {
    fn len(&self) -> usize {
        self.lambda.len().min(self.mu.len()).min(self.cost.len())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Rates {
    Mm1m(Mm1mParams),
    MServer(MServer),
    LinearImmigration(LinearImmigration),
    Tabulated(Tabulated),
}

/// Verdict on convergence of a positive series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convergence {
    Convergent,
    Divergent,
    Unknown,
}

/// Rates `λ_n`, `μ_n` and cost rates `c_n` of a birth–death chain.
#[derive(Clone, Debug, PartialEq)]
pub struct BirthDeathModel {
    rates: Rates,
    analytic_zeta: Option<f64>,
}

fn poly(coef: &[f64], n: usize) -> f64 {
    let x = n as f64;
    coef.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} = {v} must be positive and finite")))
    }
}

fn nonneg(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} = {v} must be nonnegative and finite")))
    }
}

fn finite_all(name: &str, v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::Config(format!("{name}[{i}] is not finite"))),
        None => Ok(()),
    }
}

impl BirthDeathModel {
    /// M/M/1+M with `c_n = nθ`; the closed-form ζ is attached.
    pub fn mm1m(lambda: f64, mu: f64, theta: f64) -> Result<Self> {
        let p = Mm1mParams::new(lambda, mu, theta).map_err(|e| Error::Config(e.to_string()))?;
        Ok(BirthDeathModel {
            rates: Rates::Mm1m(p),
            analytic_zeta: Some(analytic_zeta(&p)?),
        })
    }

    /// M/M/1 with `c_n = n`; the closed-form `ζ = ρ/(1-ρ)` is attached.
    pub fn mm1(lambda: f64, mu: f64) -> Result<Self> {
        let m = Self::mserver(MServer {
            lambda,
            balking: vec![],
            servers: 1,
            mu,
            theta: 0.0,
            abandon_in_service: false,
            abandonment_cost: 0.0,
            holding: vec![0.0, 1.0],
        })?;
        Ok(m.with_analytic_zeta(lambda / (mu - lambda)))
    }

    pub fn mserver(params: MServer) -> Result<Self> {
        positive("lambda", params.lambda)?;
        positive("mu", params.mu)?;
        nonneg("theta", params.theta)?;
        nonneg("abandonment_cost", params.abandonment_cost)?;
        finite_all("holding", &params.holding)?;
        if params.servers == 0 {
            return Err(Error::Config("servers must be at least 1".into()));
        }
        if let Some(i) = params.balking.iter().position(|a| !(0.0..1.0).contains(a)) {
            return Err(Error::Config(format!("balking[{i}] must lie in [0, 1)")));
        }
        Ok(BirthDeathModel {
            rates: Rates::MServer(params),
            analytic_zeta: None,
        })
    }

    pub fn linear_immigration(params: LinearImmigration) -> Result<Self> {
        positive("birth", params.birth)?;
        positive("immigration", params.immigration)?;
        positive("death", params.death)?;
        finite_all("holding", &params.holding)?;
        Ok(BirthDeathModel {
            rates: Rates::LinearImmigration(params),
            analytic_zeta: None,
        })
    }

    pub fn tabulated(lambda: Vec<f64>, mu: Vec<f64>, cost: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() || mu.len() != lambda.len() || cost.len() != lambda.len() {
            return Err(Error::Config(
                "tabulated lambda, mu and cost must be nonempty and of equal length".into(),
            ));
        }
        if mu[0] != 0.0 {
            return Err(Error::Config("tabulated mu[0] must be 0".into()));
        }
        finite_all("cost", &cost)?;
        for (n, &l) in lambda.iter().enumerate() {
            positive(&format!("lambda[{n}]"), l)?;
        }
        for (n, &m) in mu.iter().enumerate().skip(1) {
            positive(&format!("mu[{n}]"), m)?;
        }
        Ok(BirthDeathModel {
            rates: Rates::Tabulated(Tabulated { lambda, mu, cost }),
            analytic_zeta: None,
        })
    }

    /// Tabulates `n -> (λ_n, μ_n, c_n)` for `n < len`.
    pub fn tabulate<F>(len: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize) -> (f64, f64, f64),
    {
        let (mut l, mut m, mut c) = (Vec::with_capacity(len), Vec::with_capacity(len), Vec::with_capacity(len));
        for n in 0..len {
            let (a, b, d) = f(n);
            l.push(a);
            m.push(if n == 0 { 0.0 } else { b });
            c.push(d);
        }
        Self::tabulated(l, m, c)
    }

    pub fn with_analytic_zeta(mut self, zeta: f64) -> Self {
        self.analytic_zeta = Some(zeta);
        self
    }

    pub fn rates(&self) -> &Rates {
        &self.rates
    }

    pub fn analytic_zeta(&self) -> Option<f64> {
        self.analytic_zeta
    }

    pub fn kind(&self) -> ModelKind {
        match self.rates {
            Rates::Mm1m(_) => ModelKind::Mm1m,
            Rates::MServer(_) => ModelKind::MServer,
            Rates::LinearImmigration(_) => ModelKind::LinearImmigration,
            Rates::Tabulated(_) => ModelKind::Tabulated,
        }
    }

    /// Number of states with defined rates, if finite.
    pub fn available_states(&self) -> Option<usize> {
        match &self.rates {
            Rates::Tabulated(t) => Some(t.len()),
            _ => None,
        }
    }

    fn check_index(&self, n: usize) -> Result<()> {
        match self.available_states() {
            Some(len) if n >= len => Err(Error::TabulatedTooShort {
                needed: n + 1,
                available: len,
            }),
            _ => Ok(()),
        }
    }

    /// Birth rate `λ_n`.
    pub fn lambda(&self, n: usize) -> Result<f64> {
        self.check_index(n)?;
        let v = match &self.rates {
            Rates::Mm1m(p) => p.lambda,
            Rates::MServer(s) => s.lambda * (1.0 - s.balk(n)),
            Rates::LinearImmigration(li) => n as f64 * li.birth + li.immigration,
            Rates::Tabulated(t) => t.lambda[n],
        };
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::RateDomain {
                state: n,
                detail: format!("birth rate {v}"),
            })
        }
    }

    /// Death rate `μ_n`, with `μ_0 = 0`.
    pub fn mu(&self, n: usize) -> Result<f64> {
        self.check_index(n)?;
        if n == 0 {
            return Ok(0.0);
        }
        let v = match &self.rates {
            Rates::Mm1m(p) => p.mu + n as f64 * p.theta,
            Rates::MServer(s) => n.min(s.servers) as f64 * s.mu + s.abandoning(n) * s.theta,
            Rates::LinearImmigration(li) => n as f64 * li.death,
            Rates::Tabulated(t) => t.mu[n],
        };
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::RateDomain {
                state: n,
                detail: format!("death rate {v}"),
            })
        }
    }

    /// Cost rate `c_n`.
    pub fn cost(&self, n: usize) -> Result<f64> {
        self.check_index(n)?;
        let v = match &self.rates {
            Rates::Mm1m(p) => n as f64 * p.theta,
            Rates::MServer(s) => s.abandonment_cost * s.abandoning(n) * s.theta + poly(&s.holding, n),
            Rates::LinearImmigration(li) => poly(&li.holding, n),
            Rates::Tabulated(t) => t.cost[n],
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::RateDomain {
                state: n,
                detail: format!("cost rate {v}"),
            })
        }
    }

    /// Convergence of `Σ 1/μ_n`.
    ///
    /// Presets have linear or bounded death rates, so the series diverges.
    /// Tabulated rates are judged by the growth exponent of `μ_n` over the
    /// last quarter of the table.
    pub fn inverse_mu_series(&self) -> Convergence {
        match &self.rates {
            Rates::Tabulated(t) => {
                let len = t.len();
                if len < 16 {
                    return Convergence::Unknown;
                }
                let (a, b) = (3 * len / 4, len - 1);
                let slope = (t.mu[b] / t.mu[a]).ln() / (b as f64 / a as f64).ln();
                if slope > 1.2 {
                    Convergence::Convergent
                } else if slope < 1.05 {
                    Convergence::Divergent
                } else {
                    Convergence::Unknown
                }
            }
            _ => Convergence::Divergent,
        }
    }

    /// Parses an inline preset such as `mm1m(0.9,1,0.5)` or `mm1(1,2)`.
    pub fn parse_inline(spec: &str) -> Result<Self> {
        let s = spec.trim();
        let (name, rest) = s
            .split_once('(')
            .ok_or_else(|| Error::Config(format!("not an inline preset: {spec}")))?;
        let body = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::Config(format!("missing ')' in {spec}")))?;
        let args = body
            .split(',')
            .map(|a| a.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Config(format!("{spec}: {e}")))?;
        match (name.trim(), args.as_slice()) {
            ("mm1m", [l, m, t]) => Self::mm1m(*l, *m, *t),
            ("mm1", [l, m]) => Self::mm1(*l, *m),
            _ => Err(Error::Config(format!("unknown inline preset {spec}"))),
        }
    }
}

/// Adaptive truncation settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationPolicy {
    /// Stop at the first `n` with `π_n / Σ_{j≤n} π_j` below this.
    pub tail_mass_tol: f64,
    /// Relative size below which series increments are negligible.
    pub term_rel_tol: f64,
    pub max_states: usize,
    /// Build tables even when the ergodicity check fails.
    pub assume_ergodic: bool,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            tail_mass_tol: 1e-60,
            term_rel_tol: 1e-18,
            max_states: 1_000_000,
            assume_ergodic: false,
        }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.tail_mass_tol > 0.0 && self.tail_mass_tol < 1.0) {
            return Err(Error::Config("tail_mass_tol must lie in (0, 1)".into()));
        }
        if !(self.term_rel_tol > 0.0 && self.term_rel_tol < 1.0) {
            return Err(Error::Config("term_rel_tol must lie in (0, 1)".into()));
        }
        if self.max_states < 2 {
            return Err(Error::Config("max_states must be at least 2".into()));
        }
        Ok(())
    }
}

/// A parsed config file: the model plus its truncation policy.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub model: BirthDeathModel,
    pub truncation: TruncationPolicy,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kind: ModelKind,
    params: Value,
    #[serde(default)]
    cost: Option<Value>,
    #[serde(default)]
    truncation: Option<TruncationPolicy>,
    #[serde(default)]
    analytic_zeta: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Mm1mRaw {
    lambda: f64,
    mu: f64,
    theta: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MServerRaw {
    lambda: f64,
    #[serde(default)]
    balking: Vec<f64>,
    servers: usize,
    mu: f64,
    #[serde(default)]
    theta: f64,
    #[serde(default)]
    abandon_in_service: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LinearRaw {
    birth: f64,
    immigration: f64,
    death: f64,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct CostRaw {
    #[serde(default)]
    abandonment: f64,
    #[serde(default)]
    holding: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TabulatedRaw {
    lambda: Vec<f64>,
    mu: Vec<f64>,
    tail: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TabulatedCostRaw {
    values: Vec<f64>,
}

fn from_value<T: serde::de::DeserializeOwned>(what: &str, v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::Config(format!("{what}: {e}")))
}

impl ModelConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let cost = raw.cost.unwrap_or(Value::Object(Default::default()));
        let model = match raw.kind {
            ModelKind::Mm1m => {
                let p: Mm1mRaw = from_value("params", raw.params)?;
                if cost.as_object().is_none_or(|o| !o.is_empty()) {
                    return Err(Error::Config("mm1m has the fixed cost n*theta; omit \"cost\"".into()));
                }
                BirthDeathModel::mm1m(p.lambda, p.mu, p.theta)?
            }
            ModelKind::MServer => {
                let p: MServerRaw = from_value("params", raw.params)?;
                let c: CostRaw = from_value("cost", cost)?;
                BirthDeathModel::mserver(MServer {
                    lambda: p.lambda,
                    balking: p.balking,
                    servers: p.servers,
                    mu: p.mu,
                    theta: p.theta,
                    abandon_in_service: p.abandon_in_service,
                    abandonment_cost: c.abandonment,
                    holding: c.holding,
                })?
            }
            ModelKind::LinearImmigration => {
                let p: LinearRaw = from_value("params", raw.params)?;
                let c: CostRaw = from_value("cost", cost)?;
                if c.abandonment != 0.0 {
                    return Err(Error::Config("linear-immigration has no abandonment cost".into()));
                }
                BirthDeathModel::linear_immigration(LinearImmigration {
                    birth: p.birth,
                    immigration: p.immigration,
                    death: p.death,
                    holding: c.holding,
                })?
            }
            ModelKind::Tabulated => {
                let p: TabulatedRaw = from_value("params", raw.params)?;
                if p.tail != "error" {
                    return Err(Error::Config(format!(
                        "tabulated tail rule must be \"error\" (no extrapolation), got {:?}",
                        p.tail
                    )));
                }
                let c: TabulatedCostRaw = from_value("cost", cost)?;
                BirthDeathModel::tabulated(p.lambda, p.mu, c.values)?
            }
        };
        let model = match raw.analytic_zeta {
            Some(z) if z.is_finite() => model.with_analytic_zeta(z),
            Some(z) => return Err(Error::Config(format!("analytic_zeta = {z} is not finite"))),
            None => model,
        };
        let truncation = raw.truncation.unwrap_or_default();
        truncation.validate()?;
        Ok(ModelConfig { model, truncation })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// Accepts an inline preset or a path to a JSON config.
    pub fn load(spec: &str) -> Result<Self> {
        if spec.trim_end().ends_with(')') && !Path::new(spec).exists() {
            Ok(ModelConfig {
                model: BirthDeathModel::parse_inline(spec)?,
                truncation: TruncationPolicy::default(),
            })
        } else {
            Self::from_path(Path::new(spec))
        }
    }
}
