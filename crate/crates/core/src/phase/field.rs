use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::point::{Coord, PhasePoint};
use super::BracketBackend;
use crate::error::{Error, Result};
use crate::tensor::{fnorm, CMatrix};

/// Relative central-difference step: `h = step · max(1, |x|)`.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// Values an observable may take.
pub trait FieldValue: Clone + Send + Sync + 'static {
    fn zero_like(&self) -> Self;
    fn scaled_add(&mut self, c: C64, other: &Self);
    fn norm(&self) -> f64;
}

impl FieldValue for C64 {
    fn zero_like(&self) -> Self {
        C64::new(0.0, 0.0)
    }

    fn scaled_add(&mut self, c: C64, other: &Self) {
        *self += c * other;
    }

    fn norm(&self) -> f64 {
        C64::norm(*self)
    }
}

impl FieldValue for CMatrix {
    fn zero_like(&self) -> Self {
        CMatrix::zeros(self.nrows(), self.ncols())
    }

    fn scaled_add(&mut self, c: C64, other: &Self) {
        *self += other * c;
    }

    fn norm(&self) -> f64 {
        fnorm(self)
    }
}

/// Spin part of a gradient.
#[derive(Clone, Debug)]
pub enum SpinPartials<T> {
    None,
    /// `∂/∂f_ij`, row-major `N × N`.
    F(Vec<T>),
    /// `∂/∂ξ_i^a` and `∂/∂η_i^a`, row-major `N × r`.
    XiEta { dxi: Vec<T>, deta: Vec<T> },
}

/// First partial derivatives of an observable.
#[derive(Clone, Debug)]
pub struct Partials<T> {
    pub dq: Vec<T>,
    pub dp: Vec<T>,
    pub spin: SpinPartials<T>,
}

impl<T: FieldValue> Partials<T> {
    fn max_mismatch(&self, other: &Partials<T>) -> f64 {
        let pairs = self.dq.iter().zip(&other.dq).chain(self.dp.iter().zip(&other.dp));
        let mut worst: f64 = 0.0;
        let mut rel = |a: &T, b: &T| {
            let mut d = a.clone();
            d.scaled_add(C64::new(-1.0, 0.0), b);
            worst = worst.max(d.norm() / b.norm().max(1.0));
        };
        for (a, b) in pairs {
            rel(a, b);
        }
        if let (SpinPartials::F(a), SpinPartials::F(b)) = (&self.spin, &other.spin) {
            for (a, b) in a.iter().zip(b) {
                rel(a, b);
            }
        }
        worst
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DerivativeSpec {
    Analytic,
    CentralFd { step: f64 },
}

impl Default for DerivativeSpec {
    fn default() -> Self {
        DerivativeSpec::CentralFd {
            step: DEFAULT_FD_STEP,
        }
    }
}

pub type Evaluator<T> = Arc<dyn Fn(&PhasePoint) -> Result<T> + Send + Sync>;
pub type PartialsFn<T> = Arc<dyn Fn(&PhasePoint) -> Result<Partials<T>> + Send + Sync>;

/// A function on phase space with a derivative rule.
///
/// Analytic partials are only ever given with respect to `q`, `p` and `f`;
/// the `ξη` chart is reached by the chain rule.
#[derive(Clone)]
pub struct ObservableField<T> {
    eval: Evaluator<T>,
    analytic: Option<PartialsFn<T>>,
    spec: DerivativeSpec,
}

impl<T: FieldValue> ObservableField<T> {
    /// Field differentiated by central differences.
    pub fn fd(eval: Evaluator<T>) -> Self {
        ObservableField {
            eval,
            analytic: None,
            spec: DerivativeSpec::default(),
        }
    }

    /// Field with closed-form partials, used by default.
    pub fn analytic(eval: Evaluator<T>, partials: PartialsFn<T>) -> Self {
        ObservableField {
            eval,
            analytic: Some(partials),
            spec: DerivativeSpec::Analytic,
        }
    }

    pub fn with_spec(mut self, spec: DerivativeSpec) -> Self {
        self.spec = spec;
        self
    }

    pub fn spec(&self) -> DerivativeSpec {
        self.spec
    }

    pub fn has_analytic(&self) -> bool {
        self.analytic.is_some()
    }

    pub fn value(&self, x: &PhasePoint) -> Result<T> {
        (self.eval)(x)
    }

    /// Partials in the chart used by `backend`.
    pub fn partials_for(&self, x: &PhasePoint, backend: BracketBackend) -> Result<Partials<T>> {
        match self.spec {
            DerivativeSpec::Analytic => {
                let f = self.analytic.as_ref().ok_or(Error::NoAnalyticDerivative)?;
                f(x)
            }
            DerivativeSpec::CentralFd { step } => self.central_fd(x, step, backend),
        }
    }

    /// Partials in the `(q, p, f)` chart.
    pub fn partials(&self, x: &PhasePoint) -> Result<Partials<T>> {
        self.partials_for(x, BracketBackend::CanonicalPlusKirillovF)
    }

    pub fn central_fd(&self, x: &PhasePoint, step: f64, backend: BracketBackend) -> Result<Partials<T>> {
        let n = x.n();
        let d = |c: Coord| -> Result<T> {
            let h = step * x.coord(c).abs().max(1.0);
            let plus = (self.eval)(&x.shifted(c, h))?;
            let minus = (self.eval)(&x.shifted(c, -h))?;
            let mut out = plus;
            out.scaled_add(C64::new(-1.0, 0.0), &minus);
            let mut scaled = out.zero_like();
            scaled.scaled_add(C64::new(0.5 / h, 0.0), &out);
            Ok(scaled)
        };
        let dq = (0..n).map(|i| d(Coord::Q(i))).collect::<Result<Vec<_>>>()?;
        let dp = (0..n).map(|i| d(Coord::P(i))).collect::<Result<Vec<_>>>()?;
        let spin = match (x.spin(), backend) {
            (None, _) | (_, BracketBackend::CanonicalOnly) => SpinPartials::None,
            (Some(_), BracketBackend::CanonicalPlusKirillovF) => SpinPartials::F(
                (0..n * n)
                    .map(|k| d(Coord::F(k / n, k % n)))
                    .collect::<Result<Vec<_>>>()?,
            ),
            (Some(s), BracketBackend::CanonicalPlusXiEta) => {
                let r = s.rank();
                let dxi = (0..n * r)
                    .map(|k| d(Coord::Xi(k / r, k % r)))
                    .collect::<Result<Vec<_>>>()?;
                let deta = (0..n * r)
                    .map(|k| d(Coord::Eta(k / r, k % r)))
                    .collect::<Result<Vec<_>>>()?;
                SpinPartials::XiEta { dxi, deta }
            }
        };
        Ok(Partials { dq, dp, spin })
    }

    /// Largest relative mismatch between analytic and central-difference
    /// partials at `x`, in the `(q, p, f)` chart.
    pub fn self_test(&self, x: &PhasePoint) -> Result<f64> {
        let f = self.analytic.as_ref().ok_or(Error::NoAnalyticDerivative)?;
        let a = f(x)?;
        let b = self.central_fd(x, DEFAULT_FD_STEP, BracketBackend::CanonicalPlusKirillovF)?;
        Ok(a.max_mismatch(&b))
    }

    /// Pointwise map of the field values; partials are mapped through the
    /// same linear map.
    pub fn map_linear<U: FieldValue>(
        &self,
        g: impl Fn(&T) -> U + Send + Sync + Clone + 'static,
    ) -> ObservableField<U> {
        let eval = self.eval.clone();
        let g1 = g.clone();
        let new_eval: Evaluator<U> = Arc::new(move |x| eval(x).map(|v| g1(&v)));
        let analytic = self.analytic.clone().map(|f| {
            let g2 = g.clone();
            let p: PartialsFn<U> = Arc::new(move |x: &PhasePoint| {
                let a = f(x)?;
                let m = |v: &Vec<T>| v.iter().map(|t| g2(t)).collect::<Vec<U>>();
                Ok(Partials {
                    dq: m(&a.dq),
                    dp: m(&a.dp),
                    spin: match &a.spin {
                        SpinPartials::None => SpinPartials::None,
                        SpinPartials::F(df) => SpinPartials::F(m(df)),
                        SpinPartials::XiEta { dxi, deta } => SpinPartials::XiEta {
                            dxi: m(dxi),
                            deta: m(deta),
                        },
                    },
                })
            });
            p
        });
        ObservableField {
            eval: new_eval,
            analytic,
            spec: self.spec,
        }
    }
}

impl ObservableField<CMatrix> {
    /// `Tr Lᵏ` as a scalar field; partials `k Tr(L^{k−1} ∂L)`.
    pub fn trace_power(&self, k: u32) -> ObservableField<C64> {
        assert!(k >= 1, "trace power must be positive");
        let eval = self.eval.clone();
        let e: Evaluator<C64> = Arc::new(move |x| Ok(eval(x)?.pow(k).trace()));
        let me = self.clone();
        let p: PartialsFn<C64> = Arc::new(move |x: &PhasePoint| {
            let l = me.value(x)?;
            let a = me.partials(x)?;
            let lk1 = l.pow(k - 1) * C64::new(k as f64, 0.0);
            let t = |d: &CMatrix| (&lk1 * d).trace();
            Ok(Partials {
                dq: a.dq.iter().map(t).collect(),
                dp: a.dp.iter().map(t).collect(),
                spin: match &a.spin {
                    SpinPartials::None => SpinPartials::None,
                    SpinPartials::F(df) => SpinPartials::F(df.iter().map(t).collect()),
                    SpinPartials::XiEta { dxi, deta } => SpinPartials::XiEta {
                        dxi: dxi.iter().map(t).collect(),
                        deta: deta.iter().map(t).collect(),
                    },
                },
            })
        });
        match self.spec {
            DerivativeSpec::Analytic => ObservableField::analytic(e, p),
            spec => ObservableField::fd(e).with_spec(spec),
        }
    }
}
