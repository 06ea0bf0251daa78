//! Fixtures shared by the benchmarks.

use qvir_core::structfun::default_float;
use qvir_core::{build_structure_constants, Mode, ParamSet, StructureConstants};

/// Reference parameters `q = 3/10`, `p = 3/5` with coefficients up to `l_max`.
pub fn reference(mode: Mode, l_max: i64) -> StructureConstants {
    let ps = ParamSet::parse("3/10", "3/5", mode, l_max).expect("reference parameters");
    build_structure_constants(&ps).expect("structure constants")
}

pub fn reference_float() -> StructureConstants {
    reference(default_float(), 48)
}
