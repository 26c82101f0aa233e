//! File formats: scene descriptions, PGM images, raw field dumps and
//! key/value report CSVs. All readers and writers work in `f64`.

mod field_dump;
mod pgm;
mod report;
mod scene;

pub use field_dump::{read_field, write_field, FIELD_MAGIC};
pub use pgm::{
    encode_intensity, read_pgm, read_slice_image, write_intensity_image, write_pgm16,
    write_unit_image, Scaling,
};
pub use report::{read_report, write_report};
pub use scene::{load_scene, save_scene, SceneConfig, SliceSource, SweepSpec};
