use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// The order `p` of a co-echelon space: `0`, a finite `p >= 1`, or `∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Order {
    Zero,
    Finite(u32),
    Infinity,
}

impl Order {
    pub fn is_finite(&self) -> bool {
        matches!(self, Order::Finite(_))
    }

    /// Orders `0` and `∞` share the sup norm.
    pub fn is_sup(&self) -> bool {
        !self.is_finite()
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Zero => write!(f, "0"),
            Order::Finite(p) => write!(f, "{p}"),
            Order::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Order {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Order::Infinity),
            "0" => Ok(Order::Zero),
            t => match t.parse::<u32>() {
                Ok(p) if p >= 1 => Ok(Order::Finite(p)),
                _ => Err(Error::InvalidArgument(format!(
                    "order must be 0, a positive integer or inf, got {t:?}"
                ))),
            },
        }
    }
}

impl Serialize for Order {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Order {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_orders() {
        assert_eq!("inf".parse::<Order>().unwrap(), Order::Infinity);
        assert_eq!("0".parse::<Order>().unwrap(), Order::Zero);
        assert_eq!("3".parse::<Order>().unwrap(), Order::Finite(3));
        assert!("-1".parse::<Order>().is_err());
        assert!("1.5".parse::<Order>().is_err());
    }
}
