//! Serde adapters that write unbounded integers as decimal strings.

use std::fmt::Display;
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serializer};

pub fn serialize<T: Display, S: Serializer>(value: &T, ser: S) -> Result<S::Ok, S::Error> {
    ser.collect_str(value)
}

pub fn deserialize<'de, T: FromStr, D: Deserializer<'de>>(de: D) -> Result<T, D::Error> {
    let s = String::deserialize(de)?;
    s.parse()
        .map_err(|_| de::Error::custom(format!("not a decimal integer: {s:?}")))
}

pub mod vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<T: Display, S: Serializer>(values: &[T], ser: S) -> Result<S::Ok, S::Error> {
        let mut seq = ser.serialize_seq(Some(values.len()))?;
        for v in values {
            seq.serialize_element(&v.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, T: FromStr, D: Deserializer<'de>>(de: D) -> Result<Vec<T>, D::Error> {
        Vec::<String>::deserialize(de)?
            .into_iter()
            .map(|s| {
                s.parse()
                    .map_err(|_| de::Error::custom(format!("not a decimal integer: {s:?}")))
            })
            .collect()
    }
}
