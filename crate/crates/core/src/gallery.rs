//! Built-in surface documents.

use crate::document::SurfaceDocument;
use crate::error::{Error, Result};

const SOURCES: [(&str, &str); 11] = [
    ("example2_N2", include_str!("../gallery/example2_N2.json")),
    ("example2_N3", include_str!("../gallery/example2_N3.json")),
    ("example3_corrected", include_str!("../gallery/example3_corrected.json")),
    ("example3_as_printed", include_str!("../gallery/example3_as_printed.json")),
    ("prop11_embedded", include_str!("../gallery/prop11_embedded.json")),
    ("prop11_nonembedded", include_str!("../gallery/prop11_nonembedded.json")),
    ("prop12_punctured", include_str!("../gallery/prop12_punctured.json")),
    ("minus6pi_example4", include_str!("../gallery/minus6pi_example4.json")),
    ("prop16_minus8pi", include_str!("../gallery/prop16_minus8pi.json")),
    ("holomorphic_cusp", include_str!("../gallery/holomorphic_cusp.json")),
    ("holomorphic_parabola", include_str!("../gallery/holomorphic_parabola.json")),
];

pub fn names() -> Vec<&'static str> {
    SOURCES.iter().map(|s| s.0).collect()
}

pub fn fixture(name: &str) -> Result<SurfaceDocument> {
    let (_, text) = SOURCES.iter().find(|s| s.0 == name).ok_or_else(|| Error::UnknownFixture(name.to_string()))?;
    SurfaceDocument::parse(text)
}

pub fn all() -> Vec<SurfaceDocument> {
    SOURCES.iter().map(|(_, t)| SurfaceDocument::parse(t).expect("gallery documents parse")).collect()
}
