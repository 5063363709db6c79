//! Fixtures shared by the benchmarks under `benches/`.

use incompat_core::sweep::haar_setting;
use incompat_core::{CglmpSetting, ComplexMatrix};

/// Fixed Haar-random setting so runs are comparable across commits.
pub fn setting(d: usize) -> CglmpSetting {
    haar_setting(d, 7, 0).expect("valid dimension")
}

/// A Hermitian 9x9 matrix: the d = 3 CGLMP operator of [`setting`].
pub fn hermitian_9x9() -> ComplexMatrix {
    incompat_core::cglmp_operator(&setting(3))
}
