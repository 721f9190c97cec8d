use serde::{Deserialize, Serialize};

use super::ExteriorElement;
use crate::error::{Error, Result};

/// `{"n": int, "p": int, "terms": [{"indices": [i₁,…,i_p], "coeff": real}]}`
/// with 1-based, strictly increasing indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormSpec {
    pub n: usize,
    pub p: usize,
    pub terms: Vec<TermSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub indices: Vec<usize>,
    pub coeff: f64,
}

impl TryFrom<&FormSpec> for ExteriorElement {
    type Error = Error;

    fn try_from(spec: &FormSpec) -> Result<Self> {
        let mut terms = Vec::with_capacity(spec.terms.len());
        for t in &spec.terms {
            if t.indices.iter().any(|&i| i == 0) {
                return Err(Error::InvalidIndex { indices: t.indices.clone(), n: spec.n, p: spec.p });
            }
            terms.push((t.indices.iter().map(|i| i - 1).collect(), t.coeff));
        }
        ExteriorElement::from_terms(spec.n, spec.p, terms).map_err(|e| match e {
            Error::InvalidIndex { indices, n, p } => Error::InvalidIndex {
                indices: indices.iter().map(|i| i + 1).collect(),
                n,
                p,
            },
            other => other,
        })
    }
}

impl From<&ExteriorElement> for FormSpec {
    fn from(e: &ExteriorElement) -> Self {
        FormSpec {
            n: e.n(),
            p: e.p(),
            terms: e
                .terms()
                .map(|(idx, c)| TermSpec { indices: idx.iter().map(|i| i + 1).collect(), coeff: c })
                .collect(),
        }
    }
}

/// Serialized as a form spec.
impl Serialize for ExteriorElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FormSpec::from(self).serialize(s)
    }
}

impl ExteriorElement {
    pub fn from_json(s: &str) -> Result<Self> {
        let spec: FormSpec = serde_json::from_str(s)?;
        ExteriorElement::try_from(&spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&FormSpec::from(self)).expect("form spec serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip_and_one_based() {
        let s = r#"{"n":4,"p":2,"terms":[{"indices":[1,2],"coeff":1.0},{"indices":[3,4],"coeff":0.5}]}"#;
        let e = ExteriorElement::from_json(s).unwrap();
        assert_eq!(e.coeff(&[0, 1]), 1.0);
        assert_eq!(e.coeff(&[2, 3]), 0.5);
        assert_eq!(ExteriorElement::from_json(&e.to_json()).unwrap(), e);
    }

    #[test]
    fn json_rejects_invalid() {
        for bad in [
            r#"{"n":4,"p":2,"terms":[{"indices":[2,1],"coeff":1.0}]}"#,
            r#"{"n":4,"p":2,"terms":[{"indices":[0,1],"coeff":1.0}]}"#,
            r#"{"n":4,"p":2,"terms":[{"indices":[1,5],"coeff":1.0}]}"#,
            r#"{"n":4,"p":2,"terms":[{"indices":[1,1],"coeff":1.0}]}"#,
            r#"{"n":4,"p":2,"terms":[],"extra":1}"#,
        ] {
            assert!(ExteriorElement::from_json(bad).is_err(), "{bad}");
        }
    }
}
