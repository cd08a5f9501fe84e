//! JSON wire formats.
//!
//! Complex numbers serialize as `[re, im]` pairs, exponents as numbers or
//! `"inf"`.  Space, element and operator descriptors are tagged by `kind`;
//! parsing validates structural consistency before handing anything to the
//! engines, so malformed input is rejected with a typed error (parse vs
//! semantic) that the CLI maps onto exit codes.

use serde::{Deserialize, Serialize};

use crate::amp::{AmpElem, BioperatorDesc, OperatorDesc};
use crate::error::{Error, Result};
use crate::spaces::PQSpace;

/// serde helper for `Vec<C64>` as a list of [re, im] pairs.
pub mod c64_vec {
    use crate::matrix::{c, C64};
    use serde::de::Deserializer;
    use serde::ser::Serializer;
    use serde::{Deserialize, Serialize};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| c(re, im)).collect())
    }
}

/// serde helper for a single complex scalar as [re, im].
pub mod c64_scalar {
    use crate::matrix::{c, C64};
    use serde::de::Deserializer;
    use serde::ser::Serializer;
    use serde::{Deserialize, Serialize};

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im]: [f64; 2] = <[f64; 2]>::deserialize(d)?;
        Ok(c(re, im))
    }
}

/// serde helper for nonnegative bounds that may be infinite.
pub mod f64_or_inf {
    use serde::de::{self, Deserializer};
    use serde::ser::Serializer;
    use serde::Deserialize;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Raw::Str(s) => Err(de::Error::custom(format!("expected number or \"inf\", got {s:?}"))),
        }
    }
}

/// Rewrite `{"kind": "max"}` quantizations to their schatten(1) normal form.
fn normalize_max(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Object(map) => {
            let is_max = map.get("kind").and_then(|k| k.as_str()) == Some("max");
            if is_max {
                map.insert("kind".into(), "schatten".into());
                map.insert("p".into(), 1.0.into());
            }
            for (_, v) in map.iter_mut() {
                normalize_max(v);
            }
        }
        serde_json::Value::Array(items) => {
            for v in items {
                normalize_max(v);
            }
        }
        _ => {}
    }
}

fn from_value<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    let mut value: serde_json::Value = serde_json::from_str(text)?;
    normalize_max(&mut value);
    Ok(serde_json::from_value(value)?)
}

/// Parse and validate a quantized-space descriptor.
pub fn parse_space(text: &str) -> Result<PQSpace> {
    let space: PQSpace = from_value(text)?;
    space.validate()?;
    Ok(space)
}

fn check_finite(label: &str, values: impl IntoIterator<Item = crate::matrix::C64>) -> Result<()> {
    for z in values {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::Input(format!("{label} contains a non-finite entry")));
        }
    }
    Ok(())
}

/// Parse and validate an amplified element (ambient descriptor + terms).
pub fn parse_element(text: &str) -> Result<AmpElem> {
    let elem: AmpElem = from_value(text)?;
    elem.space.validate()?;
    let dim = elem.space.dim();
    for t in &elem.terms {
        if t.vec.len() != dim {
            return Err(Error::Dimension(format!(
                "element term vector of length {} in a space of dimension {}",
                t.vec.len(),
                dim
            )));
        }
        check_finite("term matrix", t.coeff.data().iter().cloned())?;
        check_finite("term vector", t.vec.iter().cloned())?;
    }
    Ok(elem)
}

/// Parse and validate a linear operator descriptor.
pub fn parse_operator(text: &str) -> Result<OperatorDesc> {
    let op: OperatorDesc = from_value(text)?;
    op.validate()?;
    match &op.action {
        crate::amp::OpAction::Matrix { entries } => {
            check_finite("operator matrix", entries.iter().cloned())?
        }
        crate::amp::OpAction::Functional { coeffs } => {
            check_finite("functional", coeffs.iter().cloned())?
        }
        crate::amp::OpAction::Scale { factor } => check_finite("scale", [*factor])?,
        crate::amp::OpAction::Identity => {}
    }
    Ok(op)
}

/// Parse and validate a bilinear operator descriptor.
pub fn parse_bioperator(text: &str) -> Result<BioperatorDesc> {
    let bi: BioperatorDesc = from_value(text)?;
    bi.left.validate()?;
    bi.right.validate()?;
    bi.codomain.validate()?;
    if bi.coeffs.len() != bi.left.dim() * bi.right.dim() * bi.codomain.dim() {
        return Err(Error::Descriptor("bioperator tensor shape mismatch".into()));
    }
    Ok(bi)
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable")
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("serializable")
}
