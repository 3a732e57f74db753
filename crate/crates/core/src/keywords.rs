//! Text names of the option enums, shared by configuration files and the
//! command line.

use std::fmt;
use std::str::FromStr;

use crate::dast::Tail;
use crate::error::Error;
use crate::estimators::QqKind;
use crate::sample::LowerTransform;

macro_rules! keywords {
    ($ty:ty, $what:literal, { $($variant:path => $name:literal),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self, Error> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($name => Ok($variant),)+
                    other => Err(Error::Argument(format!(
                        concat!("unknown ", $what, " '{}', expected one of: {}"),
                        other,
                        [$($name),+].join(", ")
                    ))),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self {
                    $($variant => $name,)+
                })
            }
        }
    };
}

keywords!(Tail, "tail", {
    Tail::Upper => "upper",
    Tail::Lower => "lower",
    Tail::Both => "both",
});

keywords!(LowerTransform, "lower-tail transform", {
    LowerTransform::Auto => "auto",
    LowerTransform::Reciprocal => "reciprocal",
    LowerTransform::Negate => "negate",
});

keywords!(QqKind, "QQ-plot kind", {
    QqKind::Exponential => "exponential",
    QqKind::Pareto => "pareto",
    QqKind::Generalized => "generalized",
});

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for t in [Tail::Upper, Tail::Lower, Tail::Both] {
            assert_eq!(t.to_string().parse::<Tail>().unwrap(), t);
        }
        for m in [
            LowerTransform::Auto,
            LowerTransform::Reciprocal,
            LowerTransform::Negate,
        ] {
            assert_eq!(m.to_string().parse::<LowerTransform>().unwrap(), m);
        }
        assert_eq!(" Pareto ".parse::<QqKind>().unwrap(), QqKind::Pareto);
        assert!("sideways".parse::<Tail>().is_err());
    }
}
