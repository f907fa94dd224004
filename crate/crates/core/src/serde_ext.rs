//! Serialization codec for extended-real fields. JSON has no representation
//! for IEEE infinities (serde_json writes them as null), so infinite values
//! round-trip as the strings "inf" / "-inf" while finite values stay numbers.

pub(crate) mod ext_real {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            v.serialize(s)
        } else if *v == f64::INFINITY {
            "inf".serialize(s)
        } else if *v == f64::NEG_INFINITY {
            "-inf".serialize(s)
        } else {
            Err(serde::ser::Error::custom("NaN is not serializable"))
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
                "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!(
                    "expected a number or \"inf\"/\"-inf\", got {other:?}"
                ))),
            },
        }
    }
}
