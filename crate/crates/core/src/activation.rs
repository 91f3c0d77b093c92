//! Closed-form activation functions and their analytic derivatives.
//!
//! The two hybrid functions blend the logistic sigmoid (left side) with
//! softsign (right side):
//!
//! ```text
//! S3(x) = σ(x)                     x ≤ 0
//!         x / (1 + |x|)            x > 0
//!
//! S4(x) = α_k(x)·softsign(x) + (1 − α_k(x))·σ(x),   α_k(x) = 1 / (1 + e^(−kx))
//! ```
//!
//! Each hybrid comes in two variants. The `Literal` variants evaluate the
//! formulas above exactly as written, which makes S3 jump from 0.5 to 0 at the
//! origin and puts S4(0) at 0.25. The `Continuous` / `Rescaled` variants use
//! `0.5·(1 + softsign(x))` for the right-hand component, so S3 is continuous
//! and S4(0) = 0.5.
//!
//! Every transcendental is evaluated once per element, and the scalar and batch
//! entry points share one kernel per kind, so [`eval_batch`] is bit-identical
//! to repeated [`eval`] calls.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Steepness used when none is given.
pub const DEFAULT_K: f64 = 15.0;

/// The steepness grid used by the sweep and the derivative checks.
pub const K_GRID: [f64; 7] = [5.0, 10.0, 15.0, 20.0, 30.0, 40.0, 50.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationKind {
    S3Literal,
    S3Continuous,
    S4Literal,
    S4Rescaled,
    Sigmoid,
    Tanh,
    Relu,
    LeakyRelu,
    Elu,
    Swish,
    Softsign,
    Softplus,
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 12] = [
        ActivationKind::S3Literal,
        ActivationKind::S3Continuous,
        ActivationKind::S4Literal,
        ActivationKind::S4Rescaled,
        ActivationKind::Sigmoid,
        ActivationKind::Tanh,
        ActivationKind::Relu,
        ActivationKind::LeakyRelu,
        ActivationKind::Elu,
        ActivationKind::Swish,
        ActivationKind::Softsign,
        ActivationKind::Softplus,
    ];

    /// The nine comparison functions, with S3 in its continuous form.
    pub const BASELINES: [ActivationKind; 9] = [
        ActivationKind::Sigmoid,
        ActivationKind::Tanh,
        ActivationKind::Relu,
        ActivationKind::LeakyRelu,
        ActivationKind::Elu,
        ActivationKind::Swish,
        ActivationKind::Softsign,
        ActivationKind::Softplus,
        ActivationKind::S3Continuous,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::S3Literal => "s3-literal",
            ActivationKind::S3Continuous => "s3-continuous",
            ActivationKind::S4Literal => "s4-literal",
            ActivationKind::S4Rescaled => "s4-rescaled",
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::Tanh => "tanh",
            ActivationKind::Relu => "relu",
            ActivationKind::LeakyRelu => "leaky_relu",
            ActivationKind::Elu => "elu",
            ActivationKind::Swish => "swish",
            ActivationKind::Softsign => "softsign",
            ActivationKind::Softplus => "softplus",
        }
    }

    /// True for the S4 family, whose output depends on `k`.
    pub fn uses_k(self) -> bool {
        matches!(self, ActivationKind::S4Literal | ActivationKind::S4Rescaled)
    }

    pub fn is_s3(self) -> bool {
        matches!(self, ActivationKind::S3Literal | ActivationKind::S3Continuous)
    }

    /// Points where the first derivative does not exist (or, for ELU with
    /// α ≠ 1, where the one-sided derivatives differ).
    pub fn kink_points(self) -> &'static [f64] {
        match self {
            ActivationKind::S3Literal
            | ActivationKind::S3Continuous
            | ActivationKind::Relu
            | ActivationKind::LeakyRelu
            | ActivationKind::Elu => &[0.0],
            _ => &[],
        }
    }

    /// Points where the function is C¹ but its second derivative jumps.
    ///
    /// `|x|` in softsign makes the curvature discontinuous at the origin, so a
    /// central difference there carries an O(h) bias instead of O(h²).
    pub fn curvature_breaks(self) -> &'static [f64] {
        match self {
            ActivationKind::S4Literal | ActivationKind::S4Rescaled | ActivationKind::Softsign => {
                &[0.0]
            }
            _ => &[],
        }
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which form of the hybrid functions a bare `s3` / `s4` name resolves to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Literal,
    #[default]
    Rescaled,
}

impl Variant {
    pub fn s3(self) -> ActivationKind {
        match self {
            Variant::Literal => ActivationKind::S3Literal,
            Variant::Rescaled => ActivationKind::S3Continuous,
        }
    }

    pub fn s4(self) -> ActivationKind {
        match self {
            Variant::Literal => ActivationKind::S4Literal,
            Variant::Rescaled => ActivationKind::S4Rescaled,
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(Variant::Literal),
            "rescaled" | "continuous" => Ok(Variant::Rescaled),
            other => Err(Error::InvalidParameter(format!(
                "unknown variant `{other}` (expected literal or rescaled)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivationParams {
    /// Gate steepness, dimensionless, must be positive.
    pub k: f64,
    pub leaky_slope: f64,
    pub elu_alpha: f64,
}

impl Default for ActivationParams {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            leaky_slope: 0.01,
            elu_alpha: 1.0,
        }
    }
}

impl ActivationParams {
    pub fn with_k(k: f64) -> Self {
        Self {
            k,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "steepness k must be positive and finite, got {}",
                self.k
            )));
        }
        if !(self.leaky_slope > 0.0 && self.leaky_slope < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "leaky slope must lie in (0, 1), got {}",
                self.leaky_slope
            )));
        }
        if !(self.elu_alpha.is_finite() && self.elu_alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "ELU alpha must be positive, got {}",
                self.elu_alpha
            )));
        }
        Ok(())
    }
}

/// An activation together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Activation {
    pub kind: ActivationKind,
    pub params: ActivationParams,
}

impl Activation {
    pub fn new(kind: ActivationKind, params: ActivationParams) -> Self {
        Self { kind, params }
    }

    pub fn plain(kind: ActivationKind) -> Self {
        Self::new(kind, ActivationParams::default())
    }

    pub fn s4(variant: Variant, k: f64) -> Self {
        Self::new(variant.s4(), ActivationParams::with_k(k))
    }

    /// Stable identifier, e.g. `s4-rescaled:k=10` or `relu`.
    pub fn id(&self) -> String {
        let defaults = ActivationParams::default();
        match self.kind {
            k if k.uses_k() => format!("{}:k={}", k, self.params.k),
            ActivationKind::LeakyRelu if self.params.leaky_slope != defaults.leaky_slope => {
                format!("leaky_relu:slope={}", self.params.leaky_slope)
            }
            ActivationKind::Elu if self.params.elu_alpha != defaults.elu_alpha => {
                format!("elu:alpha={}", self.params.elu_alpha)
            }
            k => k.name().to_string(),
        }
    }

    /// Parses `name[:key=value[:key=value]]`. Bare `s3` / `s4` resolve
    /// through `variant`.
    pub fn parse(text: &str, variant: Variant) -> Result<Self> {
        let mut parts = text.trim().split(':');
        let name = parts.next().unwrap_or_default().to_ascii_lowercase();
        let kind = match name.as_str() {
            "s3" => variant.s3(),
            "s4" => variant.s4(),
            "s3-literal" | "s3_literal" => ActivationKind::S3Literal,
            "s3-continuous" | "s3_continuous" => ActivationKind::S3Continuous,
            "s4-literal" | "s4_literal" => ActivationKind::S4Literal,
            "s4-rescaled" | "s4_rescaled" => ActivationKind::S4Rescaled,
            "sigmoid" => ActivationKind::Sigmoid,
            "tanh" => ActivationKind::Tanh,
            "relu" => ActivationKind::Relu,
            "leaky_relu" | "leaky-relu" | "leakyrelu" => ActivationKind::LeakyRelu,
            "elu" => ActivationKind::Elu,
            "swish" => ActivationKind::Swish,
            "softsign" => ActivationKind::Softsign,
            "softplus" => ActivationKind::Softplus,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown activation `{other}`"
                )))
            }
        };
        let mut params = ActivationParams::default();
        for part in parts {
            let (key, value) = part.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!("expected key=value, got `{part}`"))
            })?;
            let value: f64 = value.trim().parse().map_err(|_| {
                Error::InvalidParameter(format!("`{value}` is not a number in `{text}`"))
            })?;
            match key.trim() {
                "k" => params.k = value,
                "slope" => params.leaky_slope = value,
                "alpha" => params.elu_alpha = value,
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown activation parameter `{other}`"
                    )))
                }
            }
        }
        params.validate()?;
        Ok(Self { kind, params })
    }

    /// Parses a comma-separated activation list.
    pub fn parse_list(text: &str, variant: Variant) -> Result<Vec<Self>> {
        text.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| Self::parse(s, variant))
            .collect()
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        eval(self.kind, &self.params, x)
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        eval_derivative(self.kind, &self.params, x)
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// Static shape properties of an activation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionProperties {
    /// Infimum of the range; `-inf` when unbounded.
    pub range_lo: f64,
    /// Supremum of the range; `+inf` when unbounded.
    pub range_hi: f64,
    pub monotonic: bool,
    pub zero_centered: bool,
}

pub fn properties_table(kind: ActivationKind) -> FunctionProperties {
    use ActivationKind::*;
    let inf = f64::INFINITY;
    let (range_lo, range_hi, monotonic, zero_centered) = match kind {
        S3Literal | S3Continuous | Sigmoid => (0.0, 1.0, true, false),
        // Non-monotonic near the origin once k > 5.
        S4Literal => (0.0, 1.0, false, false),
        S4Rescaled => (0.0, 1.0, true, false),
        Tanh | Softsign => (-1.0, 1.0, true, true),
        Relu => (0.0, inf, true, false),
        LeakyRelu => (-inf, inf, true, false),
        // Lower bound is -alpha; reported for the default alpha = 1.
        Elu => (-1.0, inf, true, false),
        Swish => (-inf, inf, false, false),
        Softplus => (0.0, inf, true, false),
    };
    FunctionProperties {
        range_lo,
        range_hi,
        monotonic,
        zero_centered,
    }
}

// Kernels. `logistic_pair` returns (σ(z), 1 − σ(z)) from a single exp, with
// both halves accurate in the far tails.

#[inline(always)]
fn logistic_pair(z: f64) -> (f64, f64) {
    let t = (-z.abs()).exp();
    let denom = 1.0 + t;
    if z >= 0.0 {
        (1.0 / denom, t / denom)
    } else {
        (t / denom, 1.0 / denom)
    }
}

#[inline(always)]
fn softsign(x: f64) -> f64 {
    x / (1.0 + x.abs())
}

#[inline(always)]
fn softsign_slope(x: f64) -> f64 {
    let d = 1.0 + x.abs();
    1.0 / (d * d)
}

#[inline(always)]
fn s4_literal(k: f64, x: f64) -> f64 {
    let (a, a_c) = logistic_pair(k * x);
    let (s, _) = logistic_pair(x);
    a * softsign(x) + a_c * s
}

#[inline(always)]
fn s4_rescaled(k: f64, x: f64) -> f64 {
    let (a, a_c) = logistic_pair(k * x);
    let (s, _) = logistic_pair(x);
    a * (0.5 * (1.0 + softsign(x))) + a_c * s
}

#[inline(always)]
fn kernel(kind: ActivationKind, p: &ActivationParams, x: f64) -> f64 {
    use ActivationKind::*;
    match kind {
        S3Literal => {
            if x <= 0.0 {
                logistic_pair(x).0
            } else {
                softsign(x)
            }
        }
        S3Continuous => {
            if x <= 0.0 {
                logistic_pair(x).0
            } else {
                0.5 + 0.5 * (x / (1.0 + x))
            }
        }
        S4Literal => s4_literal(p.k, x),
        S4Rescaled => s4_rescaled(p.k, x),
        Sigmoid => logistic_pair(x).0,
        Tanh => x.tanh(),
        Relu => {
            if x > 0.0 {
                x
            } else {
                0.0
            }
        }
        LeakyRelu => {
            if x > 0.0 {
                x
            } else {
                p.leaky_slope * x
            }
        }
        Elu => {
            if x > 0.0 {
                x
            } else {
                p.elu_alpha * x.exp_m1()
            }
        }
        Swish => x * logistic_pair(x).0,
        Softsign => softsign(x),
        Softplus => x.max(0.0) + (-x.abs()).exp().ln_1p(),
    }
}

/// Derivative kernel. Returns `None` exactly at a declared kink.
#[inline(always)]
fn derivative_kernel(kind: ActivationKind, p: &ActivationParams, x: f64) -> Option<f64> {
    use ActivationKind::*;
    let d = match kind {
        S3Literal | S3Continuous => {
            if x < 0.0 {
                let (s, s_c) = logistic_pair(x);
                s * s_c
            } else if x > 0.0 {
                let slope = softsign_slope(x);
                if kind == S3Literal {
                    slope
                } else {
                    0.5 * slope
                }
            } else {
                return None;
            }
        }
        S4Literal | S4Rescaled => {
            let k = p.k;
            let (a, a_c) = logistic_pair(k * x);
            let (s, s_c) = logistic_pair(x);
            let (right, right_slope) = if kind == S4Literal {
                (softsign(x), softsign_slope(x))
            } else {
                (0.5 * (1.0 + softsign(x)), 0.5 * softsign_slope(x))
            };
            k * a * a_c * (right - s) + a * right_slope + a_c * s * s_c
        }
        Sigmoid => {
            let (s, s_c) = logistic_pair(x);
            s * s_c
        }
        Tanh => {
            let t = x.tanh();
            1.0 - t * t
        }
        Relu => {
            if x > 0.0 {
                1.0
            } else if x < 0.0 {
                0.0
            } else {
                return None;
            }
        }
        LeakyRelu => {
            if x > 0.0 {
                1.0
            } else if x < 0.0 {
                p.leaky_slope
            } else {
                return None;
            }
        }
        Elu => {
            if x > 0.0 {
                1.0
            } else if x < 0.0 {
                p.elu_alpha * x.exp()
            } else {
                return None;
            }
        }
        Swish => {
            let (s, s_c) = logistic_pair(x);
            s + x * s * s_c
        }
        Softsign => softsign_slope(x),
        Softplus => logistic_pair(x).0,
    };
    Some(d)
}

/// The left-hand derivative at a kink, used during training where an exact
/// zero pre-activation is a measure-zero event.
fn left_derivative_at_kink(kind: ActivationKind, p: &ActivationParams) -> f64 {
    match kind {
        ActivationKind::S3Literal | ActivationKind::S3Continuous => 0.25,
        ActivationKind::LeakyRelu => p.leaky_slope,
        ActivationKind::Elu => p.elu_alpha,
        _ => 0.0,
    }
}

fn check_input(x: f64) -> Result<()> {
    if x.is_nan() {
        return Err(Error::NonFinite {
            value: x,
            context: "activation input",
        });
    }
    if x.is_infinite() {
        return Err(Error::InvalidParameter(format!(
            "activation input must be finite, got {x}"
        )));
    }
    Ok(())
}

/// The S4 gate `1 / (1 + e^(−kx))`, computed without overflow.
pub fn gate_alpha(k: f64, x: f64) -> Result<f64> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "steepness k must be positive and finite, got {k}"
        )));
    }
    if !x.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gate input must be finite, got {x}"
        )));
    }
    Ok(logistic_pair(k * x).0)
}

/// Numerically stable logistic sigmoid.
pub fn sigmoid(x: f64) -> f64 {
    logistic_pair(x).0
}

pub fn eval(kind: ActivationKind, params: &ActivationParams, x: f64) -> Result<f64> {
    params.validate()?;
    check_input(x)?;
    Ok(kernel(kind, params, x))
}

pub fn eval_derivative(kind: ActivationKind, params: &ActivationParams, x: f64) -> Result<f64> {
    params.validate()?;
    check_input(x)?;
    derivative_kernel(kind, params, x).ok_or(Error::NonDifferentiable { kind, x })
}

/// Derivative used by backpropagation: identical to [`eval_derivative`] away
/// from kinks, and the left derivative at a kink. The second value reports
/// whether the kink policy was applied.
#[inline]
pub(crate) fn training_derivative(
    kind: ActivationKind,
    params: &ActivationParams,
    x: f64,
) -> (f64, bool) {
    match derivative_kernel(kind, params, x) {
        Some(d) => (d, false),
        None => (left_derivative_at_kink(kind, params), true),
    }
}

/// Evaluates `kind` over `xs` into `out` in one pass.
///
/// NaN inputs produce NaN outputs rather than an error.
pub fn eval_batch(
    kind: ActivationKind,
    params: &ActivationParams,
    xs: &[f64],
    out: &mut [f64],
) -> Result<()> {
    if xs.len() != out.len() {
        return Err(Error::contract(format!(
            "eval_batch: input has {} elements but output has {}",
            xs.len(),
            out.len()
        )));
    }
    params.validate()?;
    // Match once, then run a monomorphic loop per kind.
    macro_rules! run {
        ($kind:expr) => {
            for (o, &x) in out.iter_mut().zip(xs) {
                *o = kernel($kind, params, x);
            }
        };
    }
    use ActivationKind::*;
    match kind {
        S3Literal => run!(S3Literal),
        S3Continuous => run!(S3Continuous),
        S4Literal => run!(S4Literal),
        S4Rescaled => run!(S4Rescaled),
        Sigmoid => run!(Sigmoid),
        Tanh => run!(Tanh),
        Relu => run!(Relu),
        LeakyRelu => run!(LeakyRelu),
        Elu => run!(Elu),
        Swish => run!(Swish),
        Softsign => run!(Softsign),
        Softplus => run!(Softplus),
    }
    Ok(())
}

/// In-place batch evaluation used by the network forward pass.
pub(crate) fn apply_in_place(kind: ActivationKind, params: &ActivationParams, xs: &mut [f64]) {
    for x in xs.iter_mut() {
        *x = kernel(kind, params, *x);
    }
}
