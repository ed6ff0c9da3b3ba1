//! Serde helpers for values JSON cannot express natively.

/// Serializes a temperature as a JSON number, using the string `"inf"` for
/// the hardmax limit (JSON has no infinity literal).
pub mod beta_serde {
    use serde::de::Error as DeError;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(beta: &f64, ser: S) -> Result<S::Ok, S::Error> {
        if beta.is_infinite() {
            ser.serialize_str("inf")
        } else {
            ser.serialize_f64(*beta)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(x) => Ok(x),
            Raw::Str(s) if s == "inf" || s == "+inf" || s == "infinity" => Ok(f64::INFINITY),
            Raw::Str(s) => s
                .parse::<f64>()
                .map_err(|_| D::Error::custom(format!("bad temperature '{s}'"))),
        }
    }
}
