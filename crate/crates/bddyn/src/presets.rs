//! Built-in parameter presets.

use crate::model::Params;
use crate::scalar::Real;

/// The default published parameter set, used throughout the reference
/// experiments. The growth rate `r` is never baked in: every run states
/// it explicitly.
pub fn table2<T: Real>(r: T) -> Params<T> {
    Params {
        r,
        k: T::lit(200.0),
        a1: T::lit(100.0),
        a2: T::lit(100.0),
        b1: T::lit(0.5),
        b2: T::lit(0.5),
        c1: T::lit(1.8),
        c2: T::lit(1.8),
        delta1: T::lit(0.82),
        delta2: T::lit(0.62),
        e1: T::lit(0.8143),
        e2: T::lit(0.625),
    }
}

/// Look up a preset by its CLI name.
pub fn by_name<T: Real>(name: &str, r: T) -> Option<Params<T>> {
    match name {
        "table2" => Some(table2(r)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_is_valid() {
        table2(1.37f64).validate().unwrap();
        assert!(by_name::<f64>("table2", 1.0).is_some());
        assert!(by_name::<f64>("nope", 1.0).is_none());
    }
}
