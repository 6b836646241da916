//! Observables and generator classes.
//!
//! A generator class picks the function ball that defines an integral
//! probability metric: `IPM_F(mu, nu) = sup_{f in F} |mu(f) - nu(f)|`.
//!
//! | class  | ball                                     | induced distance        |
//! |--------|------------------------------------------|-------------------------|
//! | `Tv`   | `{ f : ||f||_inf <= 1 }`                 | 2 x total variation     |
//! | `W1`   | `{ f : Lip(f) <= 1 }`                    | Kantorovich W1          |
//! | `Bl`   | `{ f : max(||f||_inf, Lip(f)) <= 1 }`    | bounded-Lipschitz       |
//! | `Mmd`  | unit ball of a Gaussian RKHS             | kernel MMD              |
//! | `L2Pi` | `{ f : ||f||_{L2(pi)} <= 1 }`            | chi-square-type L2 norm |
//!
//! A [`FunctionProfile`] couples a pointwise evaluator with the declared
//! analytic attributes (sup norm, Lipschitz constant, range) that the bounds
//! and the minimal-stretch computation consume.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::space::State;

/// The function ball defining an IPM. `Mmd` carries the Gaussian kernel
/// bandwidth `sigma` of `k(x, y) = exp(-|x - y|^2 / (2 sigma^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorClass {
    Tv,
    W1,
    Bl,
    Mmd { bandwidth: f64 },
    L2Pi,
}

impl GeneratorClass {
    pub fn name(&self) -> &'static str {
        match self {
            GeneratorClass::Tv => "tv",
            GeneratorClass::W1 => "w1",
            GeneratorClass::Bl => "bl",
            GeneratorClass::Mmd { .. } => "mmd",
            GeneratorClass::L2Pi => "l2pi",
        }
    }
}

/// An observable `f` with its declared attributes.
///
/// `lower` and `upper` must bracket every value `f` takes on the states it is
/// evaluated at; `span() = upper - lower` is the Hoeffding range. `sup_norm`
/// bounds `|f|` and `lipschitz`, when present, bounds the metric slope.
#[derive(Clone)]
pub struct FunctionProfile {
    eval: Arc<dyn Fn(State) -> f64 + Send + Sync>,
    pub name: String,
    pub sup_norm: f64,
    pub lipschitz: Option<f64>,
    pub lower: f64,
    pub upper: f64,
}

impl std::fmt::Debug for FunctionProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FunctionProfile")
            .field("name", &self.name)
            .field("sup_norm", &self.sup_norm)
            .field("lipschitz", &self.lipschitz)
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .finish()
    }
}

impl FunctionProfile {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(State) -> f64 + Send + Sync + 'static,
        lower: f64,
        upper: f64,
        sup_norm: f64,
        lipschitz: Option<f64>,
    ) -> Result<Self> {
        if !(lower <= upper) {
            return Err(Error::InvalidParam(format!("range [{lower}, {upper}] is empty")));
        }
        if sup_norm < 0.0 || !sup_norm.is_finite() {
            return Err(Error::InvalidParam(format!("sup norm {sup_norm}")));
        }
        if let Some(l) = lipschitz {
            if l < 0.0 || !l.is_finite() {
                return Err(Error::InvalidParam(format!("Lipschitz constant {l}")));
            }
        }
        Ok(Self { eval: Arc::new(eval), name: name.into(), sup_norm, lipschitz, lower, upper })
    }

    /// Indicator of one state of a finite space.
    pub fn indicator(state: usize) -> Self {
        Self::new(
            format!("1[state={state}]"),
            move |s| match s {
                State::Finite(i) if i == state => 1.0,
                _ => 0.0,
            },
            0.0,
            1.0,
            1.0,
            None,
        )
        .expect("static attributes are valid")
    }

    /// A table of values over the points of a finite space; attributes are
    /// derived exactly from the table and the space metric.
    pub fn table(values: Vec<f64>, space: &crate::space::MetricSpace) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::LengthMismatch(format!(
                "{} values for {} states",
                values.len(),
                space.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParam("table contains a non-finite value".into()));
        }
        let lower = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let upper = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sup = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut lip = 0.0f64;
        for i in 0..values.len() {
            for j in (i + 1)..values.len() {
                let d = space.dist(i, j);
                if d > 0.0 {
                    lip = lip.max((values[i] - values[j]).abs() / d);
                }
            }
        }
        let vals = values.clone();
        Self::new(
            "table",
            move |s| match s {
                State::Finite(i) => vals[i],
                State::Real(_) => f64::NAN,
            },
            lower,
            upper,
            sup,
            Some(lip),
        )
    }

    /// `f(x) = x` on a real interval.
    pub fn identity_on(lo: f64, hi: f64) -> Result<Self> {
        Self::new(
            "identity",
            |s| match s {
                State::Real(x) => x,
                State::Finite(i) => i as f64,
            },
            lo,
            hi,
            lo.abs().max(hi.abs()),
            Some(1.0),
        )
    }

    /// `f(x) = slope * x + intercept` on a real interval.
    pub fn affine_on(slope: f64, intercept: f64, lo: f64, hi: f64) -> Result<Self> {
        let a = slope * lo + intercept;
        let b = slope * hi + intercept;
        Self::new(
            "affine",
            move |s| match s {
                State::Real(x) => slope * x + intercept,
                State::Finite(i) => slope * i as f64 + intercept,
            },
            a.min(b),
            a.max(b),
            a.abs().max(b.abs()),
            Some(slope.abs()),
        )
    }

    pub fn eval(&self, s: State) -> f64 {
        (self.eval)(s)
    }

    /// The Hoeffding range `upper - lower`.
    pub fn span(&self) -> f64 {
        self.upper - self.lower
    }

    /// Check the declared attributes against evaluations at the given states:
    /// range containment everywhere and the Lipschitz bound on all pairs
    /// (relative tolerance `1e-9`). Distances come from the supplied metric.
    pub fn validate_on(
        &self,
        states: &[State],
        dist: impl Fn(State, State) -> f64,
    ) -> Result<()> {
        let tol = 1e-9;
        let scale = 1.0 + self.sup_norm;
        for &s in states {
            let v = self.eval(s);
            if !v.is_finite() {
                return Err(Error::ProfileIncomplete(format!("{} is not finite at {s}", self.name)));
            }
            if v < self.lower - tol * scale || v > self.upper + tol * scale {
                return Err(Error::ProfileIncomplete(format!(
                    "{} = {v} at {s} escapes the declared range [{}, {}]",
                    self.name, self.lower, self.upper
                )));
            }
            if v.abs() > self.sup_norm + tol * scale {
                return Err(Error::ProfileIncomplete(format!(
                    "|{}| = {} at {s} exceeds the declared sup norm {}",
                    self.name,
                    v.abs(),
                    self.sup_norm
                )));
            }
        }
        if let Some(lip) = self.lipschitz {
            for (a, &sa) in states.iter().enumerate() {
                for &sb in states.iter().skip(a + 1) {
                    let d = dist(sa, sb);
                    if d > 0.0 {
                        let slope = (self.eval(sa) - self.eval(sb)).abs() / d;
                        if slope > lip * (1.0 + tol) + tol {
                            return Err(Error::ProfileIncomplete(format!(
                                "{} has slope {slope} between {sa} and {sb}, declared {lip}",
                                self.name
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// The minimal `m >= 0` with `f in m * F` for the requested generator class:
/// the sup norm for `Tv`, the Lipschitz constant for `W1`, their max for
/// `Bl`, and the `L2(pi)` norm for `L2Pi`. The RKHS norm behind `Mmd` is not
/// recoverable from a profile, so that class is rejected.
pub fn minimal_stretch(
    f: &FunctionProfile,
    g: GeneratorClass,
    pi: Option<&DiscreteMeasure>,
) -> Result<f64> {
    match g {
        GeneratorClass::Tv => Ok(f.sup_norm),
        GeneratorClass::W1 => f.lipschitz.ok_or_else(|| {
            Error::ProfileIncomplete(format!("{} declares no Lipschitz constant", f.name))
        }),
        GeneratorClass::Bl => {
            let lip = f.lipschitz.ok_or_else(|| {
                Error::ProfileIncomplete(format!("{} declares no Lipschitz constant", f.name))
            })?;
            Ok(f.sup_norm.max(lip))
        }
        GeneratorClass::L2Pi => {
            let pi = pi.ok_or_else(|| {
                Error::ProfileIncomplete("L2(pi) stretch needs the stationary law".into())
            })?;
            let second_moment = pi.expect(|s| f.eval(s).powi(2));
            Ok(second_moment.sqrt())
        }
        GeneratorClass::Mmd { .. } => Err(Error::ProfileIncomplete(
            "the RKHS norm is not derivable from a function profile".into(),
        )),
    }
}
