//! Example machines shipped with the crate.

use crate::model::{parse_model, ModelFile};

pub const M1: &str = include_str!("../../../models/m1.model");
pub const M2: &str = include_str!("../../../models/m2.model");
pub const M3: &str = include_str!("../../../models/m3.model");
pub const M4: &str = include_str!("../../../models/m4.model");
pub const M6: &str = include_str!("../../../models/m6.model");
pub const M7: &str = include_str!("../../../models/m7.model");
pub const M8: &str = include_str!("../../../models/m8.model");

/// File stem and source of every corpus model.
pub const ALL: [(&str, &str); 7] = [
    ("m1", M1),
    ("m2", M2),
    ("m3", M3),
    ("m4", M4),
    ("m6", M6),
    ("m7", M7),
    ("m8", M8),
];

pub fn load(source: &str) -> ModelFile {
    parse_model(source).expect("corpus model parses")
}
