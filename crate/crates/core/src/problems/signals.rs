use crate::pencil::ScalarFn;
use crate::scalar::{lit, Real};
use std::sync::Arc;

/// Period-15 sawtooth: slope +1 on `[15k, 15k+10]`, slope -2 on `[15k+10, 15k+15]`.
pub fn sawtooth<T: Real>(t: T) -> T {
    let p = lit::<T>(15.0);
    let s = t - (t / p).floor() * p;
    if s <= lit(10.0) {
        s
    } else {
        lit::<T>(30.0) - s * lit::<T>(2.0)
    }
}

/// Period-20 triangle `10 - |t - 10 - 20k|`.
pub fn triangular<T: Real>(t: T) -> T {
    let p = lit::<T>(20.0);
    let k = (t / p).floor();
    lit::<T>(10.0) - (t - lit::<T>(10.0) - k * p).abs()
}

/// Time-dependent coefficient or source.
#[derive(Clone)]
pub enum Signal<T: Real> {
    Constant(T),
    /// `offset + slope t`
    Affine {
        offset: T,
        slope: T,
    },
    /// `offset + amplitude sin(frequency t + phase)`
    Sine {
        offset: T,
        amplitude: T,
        frequency: T,
        phase: T,
    },
    /// `offset + amplitude cos(frequency t + phase)`
    Cosine {
        offset: T,
        amplitude: T,
        frequency: T,
        phase: T,
    },
    /// `offset + scale exp(rate t)`
    Exp {
        offset: T,
        scale: T,
        rate: T,
    },
    /// `offset + scale (t + shift)^exponent`
    Power {
        offset: T,
        scale: T,
        shift: T,
        exponent: T,
    },
    /// `offset + scale / (ln(t + 1) + 1)`
    InverseLog {
        offset: T,
        scale: T,
    },
    /// `offset + scale sawtooth(t)`
    Sawtooth {
        offset: T,
        scale: T,
    },
    /// `offset + scale triangular(t)`
    Triangular {
        offset: T,
        scale: T,
    },
    Custom {
        value: ScalarFn<T>,
        derivative: Option<ScalarFn<T>>,
    },
}

impl<T: Real> std::fmt::Debug for Signal<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Signal::Constant(c) => write!(f, "Constant({c})"),
            Signal::Affine { offset, slope } => write!(f, "Affine({offset}, {slope})"),
            Signal::Sine {
                offset,
                amplitude,
                frequency,
                phase,
            } => {
                write!(f, "Sine({offset}, {amplitude}, {frequency}, {phase})")
            }
            Signal::Cosine {
                offset,
                amplitude,
                frequency,
                phase,
            } => {
                write!(f, "Cosine({offset}, {amplitude}, {frequency}, {phase})")
            }
            Signal::Exp { offset, scale, rate } => write!(f, "Exp({offset}, {scale}, {rate})"),
            Signal::Power {
                offset,
                scale,
                shift,
                exponent,
            } => {
                write!(f, "Power({offset}, {scale}, {shift}, {exponent})")
            }
            Signal::InverseLog { offset, scale } => write!(f, "InverseLog({offset}, {scale})"),
            Signal::Sawtooth { offset, scale } => write!(f, "Sawtooth({offset}, {scale})"),
            Signal::Triangular { offset, scale } => write!(f, "Triangular({offset}, {scale})"),
            Signal::Custom { .. } => write!(f, "Custom"),
        }
    }
}

impl<T: Real> Signal<T> {
    pub fn constant(c: f64) -> Self {
        Signal::Constant(lit(c))
    }

    pub fn affine(offset: f64, slope: f64) -> Self {
        Signal::Affine {
            offset: lit(offset),
            slope: lit(slope),
        }
    }

    pub fn sine(offset: f64, amplitude: f64, frequency: f64, phase: f64) -> Self {
        Signal::Sine {
            offset: lit(offset),
            amplitude: lit(amplitude),
            frequency: lit(frequency),
            phase: lit(phase),
        }
    }

    pub fn cosine(offset: f64, amplitude: f64, frequency: f64, phase: f64) -> Self {
        Signal::Cosine {
            offset: lit(offset),
            amplitude: lit(amplitude),
            frequency: lit(frequency),
            phase: lit(phase),
        }
    }

    pub fn exp(offset: f64, scale: f64, rate: f64) -> Self {
        Signal::Exp {
            offset: lit(offset),
            scale: lit(scale),
            rate: lit(rate),
        }
    }

    pub fn power(offset: f64, scale: f64, shift: f64, exponent: f64) -> Self {
        Signal::Power {
            offset: lit(offset),
            scale: lit(scale),
            shift: lit(shift),
            exponent: lit(exponent),
        }
    }

    pub fn inverse_log(offset: f64, scale: f64) -> Self {
        Signal::InverseLog {
            offset: lit(offset),
            scale: lit(scale),
        }
    }

    pub fn sawtooth() -> Self {
        Signal::Sawtooth {
            offset: T::zero(),
            scale: T::one(),
        }
    }

    pub fn triangular() -> Self {
        Signal::Triangular {
            offset: T::zero(),
            scale: T::one(),
        }
    }

    pub fn custom(value: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Signal::Custom {
            value: Arc::new(value),
            derivative: None,
        }
    }

    pub fn custom_with_derivative(
        value: impl Fn(T) -> T + Send + Sync + 'static,
        derivative: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Self {
        Signal::Custom {
            value: Arc::new(value),
            derivative: Some(Arc::new(derivative)),
        }
    }

    pub fn eval(&self, t: T) -> T {
        match self {
            Signal::Constant(c) => *c,
            Signal::Affine { offset, slope } => *offset + *slope * t,
            Signal::Sine {
                offset,
                amplitude,
                frequency,
                phase,
            } => *offset + *amplitude * (*frequency * t + *phase).sin(),
            Signal::Cosine {
                offset,
                amplitude,
                frequency,
                phase,
            } => *offset + *amplitude * (*frequency * t + *phase).cos(),
            Signal::Exp { offset, scale, rate } => *offset + *scale * (*rate * t).exp(),
            Signal::Power {
                offset,
                scale,
                shift,
                exponent,
            } => *offset + *scale * (t + *shift).powf(*exponent),
            Signal::InverseLog { offset, scale } => *offset + *scale / ((t + T::one()).ln() + T::one()),
            Signal::Sawtooth { offset, scale } => *offset + *scale * sawtooth(t),
            Signal::Triangular { offset, scale } => *offset + *scale * triangular(t),
            Signal::Custom { value, .. } => value(t),
        }
    }

    /// Time derivative; `None` for the piecewise-linear drives and for custom
    /// signals without one.
    pub fn derivative(&self, t: T) -> Option<T> {
        match self {
            Signal::Constant(_) => Some(T::zero()),
            Signal::Affine { slope, .. } => Some(*slope),
            Signal::Sine {
                amplitude,
                frequency,
                phase,
                ..
            } => Some(*amplitude * *frequency * (*frequency * t + *phase).cos()),
            Signal::Cosine {
                amplitude,
                frequency,
                phase,
                ..
            } => Some(-*amplitude * *frequency * (*frequency * t + *phase).sin()),
            Signal::Exp { scale, rate, .. } => Some(*scale * *rate * (*rate * t).exp()),
            Signal::Power {
                scale, shift, exponent, ..
            } => Some(*scale * *exponent * (t + *shift).powf(*exponent - T::one())),
            Signal::InverseLog { scale, .. } => {
                let l = (t + T::one()).ln() + T::one();
                Some(-*scale / (l * l * (t + T::one())))
            }
            Signal::Sawtooth { .. } | Signal::Triangular { .. } => None,
            Signal::Custom { derivative, .. } => derivative.as_ref().map(|d| d(t)),
        }
    }

    pub fn is_differentiable(&self) -> bool {
        !matches!(
            self,
            Signal::Sawtooth { .. } | Signal::Triangular { .. } | Signal::Custom { derivative: None, .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SineKind {
    Sin,
    Cos,
}

/// Scalar nonlinearity `phi(y)` with its derivative.
#[derive(Clone)]
pub enum Nonlinearity<T: Real> {
    /// `a y^(2k-1)`
    Power { a: T, k: u32 },
    /// `a sin y`
    Sine { a: T },
    /// `a cos y`
    Cosine { a: T },
    Custom {
        value: ScalarFn<T>,
        derivative: ScalarFn<T>,
    },
}

impl<T: Real> std::fmt::Debug for Nonlinearity<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Nonlinearity::Power { a, k } => write!(f, "Power({a}, {k})"),
            Nonlinearity::Sine { a } => write!(f, "Sine({a})"),
            Nonlinearity::Cosine { a } => write!(f, "Cosine({a})"),
            Nonlinearity::Custom { .. } => write!(f, "Custom"),
        }
    }
}

/// `y -> a y^(2k-1)`.
pub fn power_nonlinearity<T: Real>(a: f64, k: u32) -> Nonlinearity<T> {
    assert!(k >= 1, "power nonlinearity needs k >= 1");
    Nonlinearity::Power { a: lit(a), k }
}

/// `y -> a sin y` or `y -> a cos y`.
pub fn sine_nonlinearity<T: Real>(a: f64, kind: SineKind) -> Nonlinearity<T> {
    match kind {
        SineKind::Sin => Nonlinearity::Sine { a: lit(a) },
        SineKind::Cos => Nonlinearity::Cosine { a: lit(a) },
    }
}

impl<T: Real> Nonlinearity<T> {
    pub fn custom(
        value: impl Fn(T) -> T + Send + Sync + 'static,
        derivative: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Self {
        Nonlinearity::Custom {
            value: Arc::new(value),
            derivative: Arc::new(derivative),
        }
    }

    pub fn eval(&self, y: T) -> T {
        match self {
            Nonlinearity::Power { a, k } => *a * y.powi(2 * *k as i32 - 1),
            Nonlinearity::Sine { a } => *a * y.sin(),
            Nonlinearity::Cosine { a } => *a * y.cos(),
            Nonlinearity::Custom { value, .. } => value(y),
        }
    }

    pub fn derivative(&self, y: T) -> T {
        match self {
            Nonlinearity::Power { a, k } => {
                let p = 2 * *k as i32 - 1;
                *a * lit::<T>(p as f64) * y.powi(p - 1)
            }
            Nonlinearity::Sine { a } => *a * y.cos(),
            Nonlinearity::Cosine { a } => -*a * y.sin(),
            Nonlinearity::Custom { derivative, .. } => derivative(y),
        }
    }

    /// Amplitude of the sine/cosine families.
    pub fn trig_amplitude(&self) -> Option<T> {
        match self {
            Nonlinearity::Sine { a } | Nonlinearity::Cosine { a } => Some(*a),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sawtooth_branches() {
        assert_eq!(sawtooth(5.0f64), 5.0);
        assert!((sawtooth(12.0f64) - 6.0).abs() < 1e-14);
        assert_eq!(sawtooth(0.0f64), 0.0);
        assert!((sawtooth(10.0f64) - 10.0).abs() < 1e-14);
        assert!(sawtooth(15.0f64).abs() < 1e-14);
        for i in 0..200 {
            let t = i as f64 * 0.137;
            assert!((sawtooth(t + 15.0) - sawtooth(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn triangular_shape() {
        assert_eq!(triangular(10.0f64), 10.0);
        assert_eq!(triangular(0.0f64), 0.0);
        assert_eq!(triangular(20.0f64), 0.0);
        assert_eq!(triangular(25.0f64), 5.0);
    }

    #[test]
    fn power_family() {
        let phi = power_nonlinearity::<f64>(1.0, 2);
        assert_eq!(phi.eval(2.0), 8.0);
        assert_eq!(phi.derivative(1.0), 3.0);
        for y in [0.3, 1.7, -2.2, 5.0] {
            assert_eq!(phi.eval(-y), -phi.eval(y));
        }
        let quintic = power_nonlinearity::<f64>(1.0, 3);
        assert_eq!(quintic.eval(2.0), 32.0);
        assert_eq!(quintic.derivative(2.0), 80.0);
    }

    #[test]
    fn sine_family() {
        let phi = sine_nonlinearity::<f64>(2.0, SineKind::Sin);
        assert_eq!(phi.eval(0.0), 0.0);
        assert_eq!(phi.derivative(0.0), 2.0);
        for i in 0..100 {
            let y = -20.0 + 0.41 * i as f64;
            assert!(phi.eval(y).abs() <= 2.0);
        }
        let c = sine_nonlinearity::<f64>(1.0 / 3.0, SineKind::Cos);
        assert!((c.eval(0.0) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.derivative(0.0), 0.0);
    }

    #[test]
    fn signal_derivatives_match_differences() {
        let sigs: Vec<Signal<f64>> = vec![
            Signal::affine(1.0, 2.0),
            Signal::sine(3.0, 0.5, 2.0, 0.0),
            Signal::cosine(2.0, 1.0, 1.0, 0.0),
            Signal::exp(0.0, 1.0, -1.0),
            Signal::power(0.1, 1.0, 1.0, -1.0),
            Signal::power(0.01, 1.0, 10.0, -0.5),
            Signal::inverse_log(0.0, 1.0),
        ];
        for s in &sigs {
            for t in [0.0, 0.7, 3.1] {
                let d = 1e-6;
                let fd = (s.eval(t + d) - s.eval(t - d)) / (2.0 * d);
                assert!((fd - s.derivative(t).unwrap()).abs() < 1e-7, "{s:?} at {t}");
            }
        }
        assert!(Signal::<f64>::sawtooth().derivative(1.0).is_none());
    }
}
