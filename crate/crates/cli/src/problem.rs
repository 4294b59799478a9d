//! Problem selection: built-in presets or flat TOML problem files.
//!
//! ```toml
//! family = "circuit2"          # circuit1 | circuit2 | linear
//! l = "constant(500)"
//! r1 = "exp(0, 1, -1)"
//! u = "sine(0, 2, 2, pi)"
//! phi1 = "power(1, 2)"         # a y^(2k-1)
//! phi2 = "sin(0.5)"
//! x0 = [0.0, 0.0, 0.0]
//! t_end = 1.0
//! h = 0.001
//! ```

use crate::CliError;
use nalgebra::{DMatrix, DVector};
use serde::Deserialize;
use spectral_dae::problems::{
    circuit1, circuit2, preset_by_name, Circuit1Params, Circuit2Params, Nonlinearity, Signal,
};
use spectral_dae::{Dae, DaeForm, Pencil};
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

pub type ExactFn = Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>;

/// A problem ready to solve, with its default mesh.
#[derive(Clone)]
pub struct Problem {
    pub name: String,
    pub dae: Dae,
    pub x0: DVector<f64>,
    pub t0: f64,
    pub t_end: f64,
    pub h: f64,
    pub exact: Option<ExactFn>,
}

/// Resolves a preset name, or failing that, a problem file path.
pub fn load_problem(spec: &str) -> Result<Problem, CliError> {
    if let Some(p) = preset_by_name::<f64>(spec) {
        return Ok(Problem {
            name: p.name.to_string(),
            dae: p.dae,
            x0: p.x0,
            t0: p.t0,
            t_end: p.t_end,
            h: p.h,
            exact: p.exact,
        });
    }
    let path = Path::new(spec);
    if !path.is_file() {
        return Err(CliError::Usage(format!(
            "unknown preset or missing problem file '{spec}'"
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{spec}: {e}")))?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("problem")
        .to_string();
    parse_problem(&text, name)
}

#[derive(Debug, Deserialize)]
struct ProblemFile {
    family: String,
    #[serde(default)]
    t0: Option<f64>,
    #[serde(default)]
    t_end: Option<f64>,
    #[serde(default)]
    h: Option<f64>,
    #[serde(default)]
    x0: Option<Vec<f64>>,
    #[serde(default)]
    form: Option<String>,
    #[serde(default)]
    a: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    b: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    f: Option<Vec<f64>>,
    #[serde(flatten)]
    rest: BTreeMap<String, toml::Value>,
}

pub fn parse_problem(text: &str, name: String) -> Result<Problem, CliError> {
    let mut file: ProblemFile = toml::from_str(text).map_err(|e| CliError::Usage(format!("problem file: {e}")))?;
    let mut fields = Fields(std::mem::take(&mut file.rest));
    let dae = match file.family.as_str() {
        "circuit1" => {
            let p = Circuit1Params {
                l: fields.signal("l")?,
                r_l: fields.signal("r_l")?,
                r: fields.signal("r")?,
                u: fields.signal("u")?,
                i: fields.signal("i")?,
                phi: fields.nonlinearity("phi")?,
                phi_l: fields.nonlinearity("phi_l")?,
            };
            circuit1(p)
        }
        "circuit2" => {
            let p = Circuit2Params {
                l: fields.signal("l")?,
                r1: fields.signal("r1")?,
                r2: fields.signal("r2")?,
                g3: fields.signal("g3")?,
                u: fields.signal("u")?,
                i: fields.signal("i")?,
                phi1: fields.nonlinearity("phi1")?,
                phi2: fields.nonlinearity("phi2")?,
                phi3: fields.nonlinearity("phi3")?,
            };
            circuit2(p)
        }
        "linear" => linear(&file, file.t0.unwrap_or(0.0))?,
        other => return Err(CliError::Usage(format!("unknown family '{other}'"))),
    };
    if let Some(k) = fields.0.keys().next() {
        return Err(CliError::Usage(format!(
            "unexpected key '{k}' for family '{}'",
            file.family
        )));
    }
    let n = dae.dim();
    let x0 = match file.x0 {
        Some(v) if v.len() == n => DVector::from_vec(v),
        Some(v) => return Err(CliError::Usage(format!("x0 has {} entries, expected {n}", v.len()))),
        None => DVector::zeros(n),
    };
    Ok(Problem {
        name,
        dae,
        x0,
        t0: file.t0.unwrap_or(0.0),
        t_end: file.t_end.unwrap_or(1.0),
        h: file.h.unwrap_or(0.01),
        exact: None,
    })
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>, CliError> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Usage(format!("{what} must be a non-empty square matrix")));
    }
    Ok(DMatrix::from_row_iterator(n, n, rows.iter().flatten().copied()))
}

fn linear(file: &ProblemFile, t0: f64) -> Result<Dae, CliError> {
    let a = matrix(file.a.as_deref().unwrap_or_default(), "a")?;
    let b = matrix(file.b.as_deref().unwrap_or_default(), "b")?;
    if a.shape() != b.shape() {
        return Err(CliError::Usage("a and b differ in size".into()));
    }
    let n = a.nrows();
    let f = match &file.f {
        Some(v) if v.len() == n => DVector::from_vec(v.clone()),
        Some(_) => return Err(CliError::Usage(format!("f must have {n} entries"))),
        None => DVector::zeros(n),
    };
    let form = match file.form.as_deref() {
        None | Some("inside") => DaeForm::InsideDerivative,
        Some("outside") => DaeForm::OutsideDerivative,
        Some(o) => return Err(CliError::Usage(format!("unknown form '{o}'"))),
    };
    let pencil = Pencil::constant(a, b).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(Dae::new(pencil, move |_, _| f.clone(), form, t0).with_jacobian(move |_, _| DMatrix::zeros(n, n)))
}

struct Fields(BTreeMap<String, toml::Value>);

impl Fields {
    fn take(&mut self, key: &str) -> Result<toml::Value, CliError> {
        self.0
            .remove(key)
            .ok_or_else(|| CliError::Usage(format!("missing key '{key}'")))
    }

    fn signal(&mut self, key: &str) -> Result<Signal<f64>, CliError> {
        match self.take(key)? {
            toml::Value::Float(c) => Ok(Signal::constant(c)),
            toml::Value::Integer(c) => Ok(Signal::constant(c as f64)),
            toml::Value::String(s) => parse_signal(&s).map_err(|e| CliError::Usage(format!("{key}: {e}"))),
            v => Err(CliError::Usage(format!(
                "{key}: expected a number or signal string, got {v}"
            ))),
        }
    }

    fn nonlinearity(&mut self, key: &str) -> Result<Nonlinearity<f64>, CliError> {
        match self.take(key)? {
            toml::Value::String(s) => parse_nonlinearity(&s).map_err(|e| CliError::Usage(format!("{key}: {e}"))),
            v => Err(CliError::Usage(format!(
                "{key}: expected a nonlinearity string, got {v}"
            ))),
        }
    }
}

/// Number with an optional `pi` factor: `2`, `-0.5`, `pi`, `-pi/2`, `3*pi`.
pub fn parse_number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let (sign, body) = match s.strip_prefix('-') {
        Some(r) => (-1.0, r.trim()),
        None => (1.0, s),
    };
    let mut value = 1.0;
    let mut divide = false;
    let mut rest = body;
    loop {
        let end = rest.find(['*', '/']).unwrap_or(rest.len());
        let tok = rest[..end].trim();
        let v = if tok == "pi" {
            std::f64::consts::PI
        } else {
            tok.parse::<f64>().map_err(|_| format!("bad number '{s}'"))?
        };
        value = if divide { value / v } else { value * v };
        if end == rest.len() {
            break;
        }
        divide = rest.as_bytes()[end] == b'/';
        rest = &rest[end + 1..];
    }
    Ok(sign * value)
}

fn call(s: &str) -> Result<(String, Vec<f64>), String> {
    let s = s.trim();
    let Some(open) = s.find('(') else {
        return Ok((s.to_string(), Vec::new()));
    };
    let inner = s[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| format!("missing ')' in '{s}'"))?;
    let args = if inner.trim().is_empty() {
        Vec::new()
    } else {
        inner.split(',').map(parse_number).collect::<Result<_, _>>()?
    };
    Ok((s[..open].trim().to_string(), args))
}

fn arity(name: &str, args: &[f64], n: usize) -> Result<(), String> {
    if args.len() == n {
        Ok(())
    } else {
        Err(format!("{name} takes {n} arguments, got {}", args.len()))
    }
}

/// `constant(c)`, `affine(offset, slope)`, `sine(offset, amplitude, frequency, phase)`,
/// `cosine(...)`, `exp(offset, scale, rate)`, `power(offset, scale, shift, exponent)`,
/// `inverse_log(offset, scale)`, `sawtooth()`, `triangular()` (the last two
/// optionally with `(offset, scale)`), or a bare number.
pub fn parse_signal(s: &str) -> Result<Signal<f64>, String> {
    if let Ok(c) = parse_number(s) {
        return Ok(Signal::constant(c));
    }
    let (name, a) = call(s)?;
    let sig = match name.as_str() {
        "constant" => {
            arity(&name, &a, 1)?;
            Signal::constant(a[0])
        }
        "affine" => {
            arity(&name, &a, 2)?;
            Signal::affine(a[0], a[1])
        }
        "sine" | "sin" => {
            arity(&name, &a, 4)?;
            Signal::sine(a[0], a[1], a[2], a[3])
        }
        "cosine" | "cos" => {
            arity(&name, &a, 4)?;
            Signal::cosine(a[0], a[1], a[2], a[3])
        }
        "exp" => {
            arity(&name, &a, 3)?;
            Signal::exp(a[0], a[1], a[2])
        }
        "power" => {
            arity(&name, &a, 4)?;
            Signal::power(a[0], a[1], a[2], a[3])
        }
        "inverse_log" => {
            arity(&name, &a, 2)?;
            Signal::inverse_log(a[0], a[1])
        }
        "sawtooth" | "triangular" => {
            let (offset, scale) = match a.as_slice() {
                [] => (0.0, 1.0),
                [o, s] => (*o, *s),
                _ => return Err(format!("{name} takes 0 or 2 arguments")),
            };
            if name == "sawtooth" {
                Signal::Sawtooth { offset, scale }
            } else {
                Signal::Triangular { offset, scale }
            }
        }
        _ => return Err(format!("unknown signal '{name}'")),
    };
    Ok(sig)
}

/// `power(a, k)` for `a y^(2k-1)`, `sin(a)`, `cos(a)`, `linear(a)` or `zero`.
pub fn parse_nonlinearity(s: &str) -> Result<Nonlinearity<f64>, String> {
    let (name, a) = call(s)?;
    let n = match name.as_str() {
        "power" => {
            arity(&name, &a, 2)?;
            if a[1] < 1.0 || a[1].fract() != 0.0 {
                return Err("power exponent index k must be a positive integer".into());
            }
            Nonlinearity::Power {
                a: a[0],
                k: a[1] as u32,
            }
        }
        "linear" => {
            arity(&name, &a, 1)?;
            Nonlinearity::Power { a: a[0], k: 1 }
        }
        "sin" | "sine" => {
            arity(&name, &a, 1)?;
            Nonlinearity::Sine { a: a[0] }
        }
        "cos" | "cosine" => {
            arity(&name, &a, 1)?;
            Nonlinearity::Cosine { a: a[0] }
        }
        "zero" => Nonlinearity::Power { a: 0.0, k: 1 },
        _ => return Err(format!("unknown nonlinearity '{name}'")),
    };
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers() {
        assert_eq!(parse_number("2.5").unwrap(), 2.5);
        assert_eq!(parse_number("-pi").unwrap(), -std::f64::consts::PI);
        assert_eq!(parse_number("pi/2").unwrap(), std::f64::consts::FRAC_PI_2);
        assert_eq!(parse_number(" 3 * pi ").unwrap(), 3.0 * std::f64::consts::PI);
        assert!(parse_number("x").is_err());
    }

    #[test]
    fn signals() {
        let s = parse_signal("sine(0, 2, 2, pi)").unwrap();
        assert!((s.eval(0.25) - 2.0 * (0.5 + std::f64::consts::PI).sin()).abs() < 1e-15);
        assert_eq!(parse_signal("4").unwrap().eval(7.0), 4.0);
        assert_eq!(parse_signal("sawtooth()").unwrap().eval(12.0), 6.0);
        assert_eq!(parse_signal("triangular(1, 2)").unwrap().eval(10.0), 21.0);
        assert!(parse_signal("sine(1, 2)").is_err());
        assert!(parse_signal("bogus(1)").is_err());
    }

    #[test]
    fn nonlinearities() {
        assert_eq!(parse_nonlinearity("power(1, 2)").unwrap().eval(2.0), 8.0);
        assert_eq!(parse_nonlinearity("sin(2)").unwrap().derivative(0.0), 2.0);
        assert!(parse_nonlinearity("power(1, 1.5)").is_err());
    }

    #[test]
    fn file_round() {
        let text = r#"
            family = "circuit2"
            l = 500
            r1 = "exp(0, 1, -1)"
            r2 = "exp(2, 1, -1)"
            g3 = "power(0, 1, 1, -1)"
            u = "power(0, 1, 1, -1)"
            i = "sine(0, 1, 1, 0)"
            phi1 = "power(1, 2)"
            phi2 = "power(1, 2)"
            phi3 = "power(1, 2)"
            t_end = 1.0
            h = 0.001
        "#;
        let p = parse_problem(text, "t1".into()).unwrap();
        assert_eq!(p.dae.dim(), 3);
        assert_eq!(p.h, 0.001);
        assert!(parse_problem(&format!("{text}\nextra = 1"), "x".into()).is_err());
        assert!(parse_problem("family = \"circuit2\"", "x".into()).is_err());
    }
}
