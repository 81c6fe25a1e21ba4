use core::fmt;

/// Problem parameters shared by the flow, the stationary problem and the
/// threshold search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    /// Spatial dimension `N`.
    pub dim: usize,
    /// Exponent of the focusing nonlinearity `|u|^{p-1} u`.
    pub p: f64,
    /// Coefficient of the quasi-linear term `κ u Δ(u²)`.
    pub kappa: f64,
    /// Initial-data amplitude.
    pub lambda: f64,
    /// When false, exponents outside `3 <= p < (3N+2)/(N-2)` are accepted
    /// for exploration and reported by [`Params::is_exploratory`].
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamsError {
    ZeroDimension,
    NonFinite,
    ExponentTooSmall(f64),
    ExponentSupercritical { p: f64, bound: f64 },
    NegativeKappa(f64),
    NegativeLambda(f64),
}

impl fmt::Display for ParamsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamsError::ZeroDimension => write!(f, "dimension must be at least 1"),
            ParamsError::NonFinite => write!(f, "parameters must be finite"),
            ParamsError::ExponentTooSmall(p) => write!(f, "exponent p = {p} is below 3"),
            ParamsError::ExponentSupercritical { p, bound } => {
                write!(f, "exponent p = {p} is not below the critical bound {bound}")
            }
            ParamsError::NegativeKappa(k) => write!(f, "kappa = {k} is negative"),
            ParamsError::NegativeLambda(l) => write!(f, "lambda = {l} is negative"),
        }
    }
}

impl core::error::Error for ParamsError {}

impl Params {
    pub fn new(dim: usize, p: f64, kappa: f64, lambda: f64) -> Result<Self, ParamsError> {
        let params = Params {
            dim,
            p,
            kappa,
            lambda,
            strict: true,
        };
        params.validate()?;
        Ok(params)
    }

    /// Same as `new` but out-of-range exponents are allowed.
    pub fn exploratory(dim: usize, p: f64, kappa: f64, lambda: f64) -> Result<Self, ParamsError> {
        let params = Params {
            dim,
            p,
            kappa,
            lambda,
            strict: false,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Params { lambda, ..self }
    }

    pub fn with_kappa(self, kappa: f64) -> Self {
        Params { kappa, ..self }
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        if self.dim == 0 {
            return Err(ParamsError::ZeroDimension);
        }
        if !(self.p.is_finite() && self.kappa.is_finite() && self.lambda.is_finite()) {
            return Err(ParamsError::NonFinite);
        }
        if self.kappa < 0.0 {
            return Err(ParamsError::NegativeKappa(self.kappa));
        }
        if self.lambda < 0.0 {
            return Err(ParamsError::NegativeLambda(self.lambda));
        }
        if self.strict {
            if self.p < 3.0 {
                return Err(ParamsError::ExponentTooSmall(self.p));
            }
            if let Some(bound) = self.critical_exponent() {
                if self.p >= bound {
                    return Err(ParamsError::ExponentSupercritical { p: self.p, bound });
                }
            }
        } else if self.p <= 1.0 {
            return Err(ParamsError::ExponentTooSmall(self.p));
        }
        Ok(())
    }

    /// `(3N+2)/(N-2)` for `N >= 3`, none otherwise.
    pub fn critical_exponent(&self) -> Option<f64> {
        (self.dim >= 3).then(|| (3 * self.dim + 2) as f64 / (self.dim - 2) as f64)
    }

    /// `(N+2)/(N-2)` for `N >= 3`: the Sobolev bound of the semilinear problem.
    pub fn semilinear_critical_exponent(&self) -> Option<f64> {
        (self.dim >= 3).then(|| (self.dim + 2) as f64 / (self.dim - 2) as f64)
    }

    /// True when the parameters fall outside the admissible range.
    pub fn is_exploratory(&self) -> bool {
        self.p < 3.0 || self.critical_exponent().is_some_and(|b| self.p >= b)
    }

    /// `((p+1)/2)^{1/(p-1)}`: below this level the local energy density
    /// `u²/2 - u^{p+1}/(p+1)` is positive.
    pub fn energy_threshold(&self) -> f64 {
        crate::math::powf((self.p + 1.0) / 2.0, 1.0 / (self.p - 1.0))
    }

    /// Diffusion coefficient `1 + 2κu²`.
    #[inline]
    pub fn diffusivity(&self, u: f64) -> f64 {
        1.0 + 2.0 * self.kappa * u * u
    }
}
