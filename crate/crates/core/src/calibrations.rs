//! Catalogue of constant calibrations.
//!
//! Complex coordinates are interleaved: `z_k = x_k + i·y_k` occupies indices
//! `2k, 2k+1` (0-based). Quaternionic coordinates come in blocks of four.
//! Every entry is checked by the comass optimizer when it is built.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::combinatorics::combinations;
use crate::exterior::{ExteriorElement, FormSpec};
use crate::grassmann::{comass, ComassOptions, ComassReport};

/// Accepted band for a confirmed comass of one.
pub const COMASS_LOW: f64 = 1.0 - 1e-4;
pub const COMASS_HIGH: f64 = 1.0 + 1e-6;

#[derive(Clone, Debug)]
pub struct Calibration {
    pub name: String,
    pub form: ExteriorElement,
    pub claimed_comass: f64,
    pub grassmannian_hint: Option<String>,
    pub normal_flag: Option<bool>,
    /// Best comass value found when the entry was confirmed.
    pub comass_estimate: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogueEntry {
    pub name: &'static str,
    pub selector: &'static str,
    pub n: usize,
    pub p: usize,
    pub terms: usize,
}

impl Calibration {
    fn unconfirmed(name: String, form: ExteriorElement, hint: Option<&str>, normal: Option<bool>) -> Self {
        Self {
            name,
            form,
            claimed_comass: 1.0,
            grassmannian_hint: hint.map(str::to_string),
            normal_flag: normal,
            comass_estimate: None,
        }
    }

    /// A user form claimed to have comass one; confirmed with `opts`.
    pub fn from_form(name: &str, form: ExteriorElement, opts: &ComassOptions) -> Result<Self> {
        let mut cal = Self::unconfirmed(name.to_string(), form, None, None);
        cal.confirm(opts)?;
        Ok(cal)
    }

    /// A user form rescaled by `1 / comass`.
    pub fn from_form_rescaled(name: &str, form: ExteriorElement, opts: &ComassOptions) -> Result<Self> {
        let report = comass(&form, opts)?;
        let scaled = form.scale(1.0 / report.value);
        let mut cal = Self::unconfirmed(name.to_string(), scaled, None, None);
        cal.comass_estimate = Some(1.0);
        Ok(cal)
    }

    pub fn n(&self) -> usize {
        self.form.n()
    }

    pub fn p(&self) -> usize {
        self.form.p()
    }

    /// Runs the comass optimizer and records the estimate; fails when it
    /// falls outside `[1 − 1e-4, 1 + 1e-6]`.
    pub fn confirm(&mut self, opts: &ComassOptions) -> Result<ComassReport> {
        let report = comass(&self.form, opts)?;
        if !(COMASS_LOW..=COMASS_HIGH).contains(&report.value) {
            return Err(Error::ComassConfirmation {
                name: self.name.clone(),
                value: report.value,
                claimed: self.claimed_comass,
            });
        }
        self.comass_estimate = Some(report.value);
        Ok(report)
    }

    pub(crate) fn ensure_confirmed(&self) -> Result<()> {
        match self.comass_estimate {
            Some(v) if (COMASS_LOW..=COMASS_HIGH).contains(&v) => Ok(()),
            Some(v) => Err(Error::ComassConfirmation { name: self.name.clone(), value: v, claimed: 1.0 }),
            None => {
                let mut c = self.clone();
                c.confirm(&ComassOptions::quick()).map(|_| ())
            }
        }
    }

    /// Parses a selector: a catalogue name with optional `:`-separated
    /// parameters (`kaehler:3,2`, `lambda:0.5`, `omega4`) or a path to a
    /// JSON form spec. The comass is confirmed with a quick run.
    pub fn from_selector(selector: &str) -> Result<Self> {
        let mut cal = Self::parse_selector(selector)?;
        cal.confirm(&ComassOptions::quick())?;
        Ok(cal)
    }

    /// [`Calibration::from_selector`] without the comass confirmation.
    pub fn parse_selector(selector: &str) -> Result<Self> {
        let path = Path::new(selector);
        if selector.ends_with(".json") || path.is_file() {
            let text = std::fs::read_to_string(path)?;
            let spec: FormSpec = serde_json::from_str(&text).map_err(|e| Error::Parse {
                location: format!("{selector}:{}:{}", e.line(), e.column()),
                message: e.to_string(),
            })?;
            let form = ExteriorElement::try_from(&spec)?;
            return Ok(Self::unconfirmed(selector.to_string(), form, None, None));
        }
        let (name, params) = match selector.split_once(':') {
            Some((n, rest)) => {
                let params = rest
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::InvalidParameter(format!("`{s}` in `{selector}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                (n, params)
            }
            None => (selector, Vec::new()),
        };
        build(name, &params)
    }
}

fn int_param(params: &[f64], i: usize, default: Option<usize>, what: &str) -> Result<usize> {
    match params.get(i) {
        Some(&x) if x >= 1.0 && x.fract() == 0.0 && x <= 64.0 => Ok(x as usize),
        Some(&x) => Err(Error::InvalidParameter(format!("{what} must be a positive integer, got {x}"))),
        None => default.ok_or_else(|| Error::InvalidParameter(format!("missing {what}"))),
    }
}

/// Catalogue entry by name; the form is confirmed by a quick comass run.
pub fn catalogue(name: &str, params: &[f64]) -> Result<Calibration> {
    let mut cal = build(name, params)?;
    cal.confirm(&ComassOptions::quick())?;
    Ok(cal)
}

/// Catalogue entry without the comass confirmation.
pub fn build(name: &str, params: &[f64]) -> Result<Calibration> {
    let cal = match name {
        "kaehler" | "kahler" => {
            let n = int_param(params, 0, None, "complex dimension")?;
            let p = int_param(params, 1, Some(1), "complex degree")?;
            if p > n {
                return Err(Error::InvalidParameter(format!("degree {p} exceeds complex dimension {n}")));
            }
            Calibration::unconfirmed(format!("kaehler({n},{p})"), kaehler_power(n, p), Some("complex p-planes"), Some(true))
        }
        "omega4" => Calibration::unconfirmed("kaehler(2,1)".into(), kaehler_power(2, 1), Some("complex lines"), Some(true)),
        "special_lagrangian" | "sl" => {
            let n = int_param(params, 0, None, "complex dimension")?;
            Calibration::unconfirmed(
                format!("special_lagrangian({n})"),
                special_lagrangian(n),
                Some("special Lagrangian n-planes"),
                Some(true),
            )
        }
        "associative" => {
            Calibration::unconfirmed("associative".into(), associative(), Some("associative 3-planes"), Some(true))
        }
        "coassociative" => Calibration::unconfirmed(
            "coassociative".into(),
            associative().hodge_star(),
            Some("coassociative 4-planes"),
            Some(true),
        ),
        "cayley" => Calibration::unconfirmed("cayley".into(), cayley(), Some("Cayley 4-planes"), Some(true)),
        "quaternionic" => {
            let n = int_param(params, 0, None, "quaternionic dimension")?;
            Calibration::unconfirmed(
                format!("quaternionic({n})"),
                quaternionic(n),
                Some("quaternionic lines"),
                Some(true),
            )
        }
        "lambda" | "lambda_example" => {
            let l = *params
                .first()
                .ok_or_else(|| Error::InvalidParameter("lambda_example needs λ".into()))?;
            if !(l.abs() < 1.0) {
                return Err(Error::InvalidParameter(format!("|λ| must be < 1, got {l}")));
            }
            let form = ExteriorElement::from_terms(4, 2, vec![(vec![0, 1], 1.0), (vec![2, 3], l)])?;
            Calibration::unconfirmed(format!("lambda_example({l})"), form, Some("single plane {1,2}"), None)
        }
        "volume" => {
            let n = int_param(params, 0, None, "dimension")?;
            let hint = format!("single plane {{1..{n}}}");
            Calibration::unconfirmed(format!("volume({n})"), ExteriorElement::volume(n), Some(&hint), None)
        }
        other => return Err(Error::UnknownCalibration(other.to_string())),
    };
    Ok(cal)
}

/// Names and default selectors for `catalogue --list`.
pub fn list() -> Vec<CatalogueEntry> {
    let entries: [(&str, &str); 12] = [
        ("kaehler(2,1)", "kaehler:2,1"),
        ("kaehler(3,1)", "kaehler:3,1"),
        ("kaehler(3,2)", "kaehler:3,2"),
        ("special_lagrangian(2)", "special_lagrangian:2"),
        ("special_lagrangian(3)", "special_lagrangian:3"),
        ("associative", "associative"),
        ("coassociative", "coassociative"),
        ("cayley", "cayley"),
        ("quaternionic(2)", "quaternionic:2"),
        ("lambda_example(0.5)", "lambda:0.5"),
        ("volume(3)", "volume:3"),
        ("volume(4)", "volume:4"),
    ];
    entries
        .iter()
        .map(|&(name, selector)| {
            let (base, params) = match selector.split_once(':') {
                Some((b, r)) => (b, r.split(',').map(|s| s.parse().unwrap()).collect::<Vec<f64>>()),
                None => (selector, vec![]),
            };
            let form = build(base, &params).expect("catalogue entry").form;
            CatalogueEntry { name, selector, n: form.n(), p: form.p(), terms: form.len() }
        })
        .collect()
}

/// `ω^p / p!` on `C^n`, i.e. the sum over `p`-subsets of `∧ dx_k ∧ dy_k`.
pub fn kaehler_power(n: usize, p: usize) -> ExteriorElement {
    let terms = combinations(n, p)
        .into_iter()
        .map(|s| (s.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect::<Vec<_>>(), 1.0));
    ExteriorElement::from_terms(2 * n, 2 * p, terms).expect("valid indices")
}

/// `Re(dz_1 ∧ … ∧ dz_n)`.
pub fn special_lagrangian(n: usize) -> ExteriorElement {
    let mut terms = Vec::new();
    for mask in 0u32..(1 << n) {
        let ys = mask.count_ones() as usize;
        if ys % 2 == 1 {
            continue;
        }
        let sign = if (ys / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let idx: Vec<usize> = (0..n).map(|k| 2 * k + ((mask >> k) & 1) as usize).collect();
        terms.push((idx, sign));
    }
    ExteriorElement::from_terms(2 * n, n, terms).expect("valid indices")
}

const ASSOCIATIVE_TERMS: [([usize; 3], f64); 7] = [
    ([1, 2, 3], 1.0),
    ([1, 4, 5], 1.0),
    ([1, 6, 7], 1.0),
    ([2, 4, 6], 1.0),
    ([2, 5, 7], -1.0),
    ([3, 4, 7], -1.0),
    ([3, 5, 6], -1.0),
];

/// `e¹²³ + e¹⁴⁵ + e¹⁶⁷ + e²⁴⁶ − e²⁵⁷ − e³⁴⁷ − e³⁵⁶` on `R^7`.
pub fn associative() -> ExteriorElement {
    let terms = ASSOCIATIVE_TERMS.iter().map(|(idx, c)| (idx.iter().map(|i| i - 1).collect::<Vec<_>>(), *c));
    ExteriorElement::from_terms(7, 3, terms).expect("valid indices")
}

/// `dx₀ ∧ φ + *φ` on `R^8 = R ⊕ R^7`.
pub fn cayley() -> ExteriorElement {
    let phi = associative();
    let star = phi.hodge_star();
    let shift = |e: &ExteriorElement| -> Vec<(Vec<usize>, f64)> {
        e.terms().map(|(idx, c)| (idx.iter().map(|i| i + 1).collect(), c)).collect()
    };
    let e0 = ExteriorElement::basis(8, &[0]).expect("basis");
    let lifted = ExteriorElement::from_terms(8, 3, shift(&phi)).expect("valid indices");
    let first = e0.wedge(&lifted).expect("degree fits");
    let second = ExteriorElement::from_terms(8, 4, shift(&star)).expect("valid indices");
    &first + &second
}

/// `(ω_I² + ω_J² + ω_K²) / 6` on `H^n = R^{4n}`, with the three Kähler
/// forms of each block `ω_I = e⁰¹ + e²³`, `ω_J = e⁰² + e³¹`, `ω_K = e⁰³ + e¹²`.
pub fn quaternionic(n: usize) -> ExteriorElement {
    let dim = 4 * n;
    let mut forms = vec![ExteriorElement::zero(dim, 2); 3];
    for b in 0..n {
        let o = 4 * b;
        let pairs: [[(usize, usize, f64); 2]; 3] = [
            [(o, o + 1, 1.0), (o + 2, o + 3, 1.0)],
            [(o, o + 2, 1.0), (o + 1, o + 3, -1.0)],
            [(o, o + 3, 1.0), (o + 1, o + 2, 1.0)],
        ];
        for (form, block) in forms.iter_mut().zip(pairs) {
            let add = ExteriorElement::from_terms(dim, 2, block.iter().map(|&(i, j, c)| (vec![i, j], c)))
                .expect("valid indices");
            *form = &*form + &add;
        }
    }
    let mut total = ExteriorElement::zero(dim, 4);
    for f in &forms {
        total = &total + &f.wedge(f).expect("degree fits");
    }
    total.scale(1.0 / 6.0)
}
