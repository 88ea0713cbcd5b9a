//! Built-in graphs, systems, connections and squares.

mod entries;
mod graphs;
mod squares;

pub use entries::{
    build, build_named, canonical_cut_example, data_dir, entries, entry, ghj_connection, ghj_square, CatalogEntry, Expected,
    Fixture, Provenance, Source, Tagged, CATALOG_SCHEMA, DATA_DIR_VAR,
};
pub use graphs::{dynkin, ghj_system, self_system};
pub use squares::{fourier_matrix, hadamard_square, hadamard_square_unchecked, rotation_matrix};
