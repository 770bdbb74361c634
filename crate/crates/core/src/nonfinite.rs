//! Serde helpers that keep `NaN` and `±inf` through JSON, which has no
//! encoding for them. Non-finite values are written as the strings `"NaN"`,
//! `"inf"` and `"-inf"`; numbers and those strings are both accepted on input.

use serde::de::{self, Deserializer, Visitor};
use serde::ser::{SerializeSeq, SerializeTuple, Serializer};

pub trait Lenient: Sized {
    fn ser<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error>;
    fn de<'de, D: Deserializer<'de>>(d: D) -> Result<Self, D::Error>;
}

pub fn serialize<T: Lenient, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    v.ser(s)
}

pub fn deserialize<'de, T: Lenient, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
    T::de(d)
}

/// Adapter so nested values can be (de)serialized through [`Lenient`].
struct Wrap<T>(T);

impl<T: Lenient> serde::Serialize for Wrap<&T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.ser(s)
    }
}

impl<'de, T: Lenient> serde::Deserialize<'de> for Wrap<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        T::de(d).map(Wrap)
    }
}

impl Lenient for f64 {
    fn ser<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.is_nan() {
            s.serialize_str("NaN")
        } else if self.is_infinite() {
            s.serialize_str(if *self > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(*self)
        }
    }

    fn de<'de, D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = f64;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a number, \"NaN\", \"inf\" or \"-inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
                Ok(v)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
                match v {
                    "NaN" => Ok(f64::NAN),
                    "inf" => Ok(f64::INFINITY),
                    "-inf" => Ok(f64::NEG_INFINITY),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

impl Lenient for (f64, f64) {
    fn ser<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&Wrap(&self.0))?;
        t.serialize_element(&Wrap(&self.1))?;
        t.end()
    }

    fn de<'de, D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (Wrap(a), Wrap(b)) = <(Wrap<f64>, Wrap<f64>) as serde::Deserialize>::deserialize(d)?;
        Ok((a, b))
    }
}

impl<T: Lenient> Lenient for Vec<T> {
    fn ser<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.len()))?;
        for v in self {
            seq.serialize_element(&Wrap(v))?;
        }
        seq.end()
    }

    fn de<'de, D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = <Vec<Wrap<T>> as serde::Deserialize>::deserialize(d)?;
        Ok(v.into_iter().map(|w| w.0).collect())
    }
}

impl<T: Lenient> Lenient for Option<T> {
    fn ser<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Some(v) => s.serialize_some(&Wrap(v)),
            None => s.serialize_none(),
        }
    }

    fn de<'de, D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = <Option<Wrap<T>> as serde::Deserialize>::deserialize(d)?;
        Ok(v.map(|w| w.0))
    }
}
