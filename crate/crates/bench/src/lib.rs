//! Shared inputs for the benchmarks.

use isac_core::alloc::{make_allocation, OfdmParams, PatternSpec, ResourceAllocation};
use isac_core::scene::{NoiseSpec, Scene, Target};
use isac_core::synth::{synthesize, FreqGrid};

/// Desk-scale grid with one target at 0 dB per-RE SNR.
pub fn desk_grid(pattern: &PatternSpec) -> (OfdmParams, ResourceAllocation, FreqGrid) {
    let p = OfdmParams::desk();
    let a = make_allocation(&p, pattern, 1).expect("desk pattern fits");
    let scene = Scene::new(vec![Target::with_amplitude(150.0, 3.0, 1.0)], NoiseSpec::SnrDb(0.0));
    let g = synthesize(&scene, &a, &p, 7).expect("valid scene");
    (p, a, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_matches_pattern() {
        let (_, a, g) = desk_grid(&PatternSpec::Random { active: 64 });
        assert_eq!(a.total_active(), 64 * 32);
        assert_eq!(g.active_samples().count(), 64 * 32);
    }
}
