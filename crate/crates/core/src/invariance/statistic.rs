use std::fmt;
use std::sync::Arc;

/// Structure of a statistic that the adequate-set scan can exploit.
#[derive(Debug, Clone, PartialEq)]
enum Shape {
    /// `|c · v|`: piecewise affine along any line, with one kink.
    AbsLinear(Vec<f64>),
    /// First coordinate of the vector.
    Identity,
    Constant,
    Opaque,
}

type StatFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A named test statistic `m: ℝ^d → ℝ`.
///
/// All constructions include a cell when `m` at the observed vector is large
/// relative to the reference values. Statistics measuring nonconformity
/// (large means atypical) are used through [`StatisticFn::negated`].
#[derive(Clone)]
pub struct StatisticFn {
    name: String,
    shape: Shape,
    negated: bool,
    f: StatFn,
}

impl fmt::Debug for StatisticFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StatisticFn").field("name", &self.name).finish()
    }
}

fn abs_linear(name: impl Into<String>, c: Vec<f64>) -> StatisticFn {
    let coef = c.clone();
    StatisticFn {
        name: name.into(),
        shape: Shape::AbsLinear(c),
        negated: false,
        f: Arc::new(move |v: &[f64]| coef.iter().zip(v).map(|(a, b)| a * b).sum::<f64>().abs()),
    }
}

impl StatisticFn {
    pub fn custom(name: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            shape: Shape::Opaque,
            negated: false,
            f: Arc::new(f),
        }
    }

    /// `m(v) = v[0]`, the natural statistic of a scalar pivot.
    pub fn identity() -> Self {
        Self {
            name: "identity".into(),
            shape: Shape::Identity,
            negated: false,
            f: Arc::new(|v: &[f64]| v[0]),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            name: format!("constant({c})"),
            shape: Shape::Constant,
            negated: false,
            f: Arc::new(move |_: &[f64]| c),
        }
    }

    /// `|Σ (x_i − x̄)(v_i − v̄)|` over all `n + 1` coordinates.
    pub fn abs_covariance(x: &[f64]) -> Self {
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        abs_linear("abs-covariance", x.iter().map(|xi| xi - mean).collect())
    }

    /// `|v_last − v̄|`.
    pub fn centered_last(n_plus_1: usize) -> Self {
        let w = 1.0 / n_plus_1 as f64;
        let mut c = vec![-w; n_plus_1];
        c[n_plus_1 - 1] += 1.0;
        abs_linear("centered-last", c)
    }

    /// `|v̄|`, the sup-norm of the column means for a single column.
    pub fn abs_mean(n_plus_1: usize) -> Self {
        abs_linear("abs-mean", vec![1.0 / n_plus_1 as f64; n_plus_1])
    }

    /// `max_i |v_i|`.
    pub fn sup_norm() -> Self {
        Self::custom("sup-norm", |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs())))
    }

    pub fn squared_norm() -> Self {
        Self::custom("squared-norm", |v: &[f64]| v.iter().map(|x| x * x).sum())
    }

    pub fn sum() -> Self {
        Self::custom("sum", |v: &[f64]| v.iter().sum())
    }

    /// `−m`, turning a nonconformity score into a conformity score.
    pub fn negated(&self) -> Self {
        let f = self.f.clone();
        Self {
            name: if self.negated {
                self.name.trim_start_matches('-').to_string()
            } else {
                format!("-{}", self.name)
            },
            shape: self.shape.clone(),
            negated: !self.negated,
            f: Arc::new(move |v: &[f64]| -f(v)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, v: &[f64]) -> f64 {
        (self.f)(v)
    }

    pub fn is_identity(&self) -> bool {
        self.shape == Shape::Identity && !self.negated
    }

    pub fn is_constant(&self) -> bool {
        self.shape == Shape::Constant
    }

    /// Points `a` where `a ↦ m(u + a·d)` may fail to be affine. Empty when the
    /// statistic is affine along lines or its structure is unknown.
    pub fn kinks(&self, u: &[f64], d: &[f64]) -> Vec<f64> {
        match &self.shape {
            Shape::AbsLinear(c) => {
                let cu: f64 = c.iter().zip(u).map(|(a, b)| a * b).sum();
                let cd: f64 = c.iter().zip(d).map(|(a, b)| a * b).sum();
                if cd != 0.0 && (cu / cd).is_finite() {
                    vec![-cu / cd]
                } else {
                    Vec::new()
                }
            }
            _ => Vec::new(),
        }
    }

    /// Whether `a ↦ m(u + a·d)` is piecewise affine with breakpoints given by
    /// [`StatisticFn::kinks`].
    pub fn piecewise_affine(&self) -> bool {
        !matches!(self.shape, Shape::Opaque)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins() {
        let v = [1.0, 2.0, 6.0];
        assert!((StatisticFn::centered_last(3).eval(&v) - 3.0).abs() < 1e-12);
        assert!((StatisticFn::abs_mean(3).eval(&v) - 3.0).abs() < 1e-12);
        assert_eq!(StatisticFn::sup_norm().eval(&[-4.0, 2.0]), 4.0);
        let x = [0.0, 1.0, 2.0];
        // Σ (x_i − 1)(v_i − 3) = (−1)(−2) + 0 + 1·3 = 5.
        assert!((StatisticFn::abs_covariance(&x).eval(&v) - 5.0).abs() < 1e-12);
        let neg = StatisticFn::abs_covariance(&x).negated();
        assert!((neg.eval(&v) + 5.0).abs() < 1e-12);
        assert!((neg.negated().eval(&v) - 5.0).abs() < 1e-12);
        assert!(StatisticFn::identity().is_identity());
        assert!(!StatisticFn::identity().negated().is_identity());
    }

    #[test]
    fn kink_is_where_the_linear_form_vanishes() {
        let m = StatisticFn::centered_last(3);
        let u = [1.0, 2.0, 0.0];
        let d = [0.0, 0.0, 1.0];
        let k = m.kinks(&u, &d);
        assert_eq!(k.len(), 1);
        let at = [u[0], u[1], k[0]];
        assert!(m.eval(&at).abs() < 1e-12);
        assert!(StatisticFn::sup_norm().kinks(&u, &d).is_empty());
    }
}
