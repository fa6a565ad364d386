//! Population-level selection: NSGA-II, NSGA-III and ε-lexicase.
//!
//! Every operation takes a slice of objective vectors (anything that
//! derefs to `[f64]`) and returns indices into that slice, so callers keep
//! ownership of their individuals.

mod lexicase;
mod nsga2;
mod nsga3;

pub use lexicase::{
    lexicase_filter, lexicase_select, lexicase_survivor_select, mad, EpsilonMode, LexicaseConfig,
    LexicaseVariant,
};
pub use nsga2::{
    crowding_distance, fast_nondominated_sort, nsga2_parent_tournament, nsga2_survivor_select,
    rank_population, Front, Ranking,
};
pub use nsga3::{
    asf, lattice_size, nsga3_normalize, nsga3_normalize_with_mode, nsga3_survivor_select,
    perpendicular_distance, reference_lines, Normalization, ReferenceLineSet, ASF_ZERO_WEIGHT,
};
