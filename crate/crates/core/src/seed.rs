//! Seed derivation for reproducible sub-streams.
//!
//! Every randomized component of the library consumes a single `u64` seed.
//! Composite workflows (instance generation, experiment sweeps) derive the
//! seeds of their parts from one master seed through [`mix`], so a run is
//! fully determined by the master seed and the documented tag layout.

/// Finalizer of the splitmix64 generator. Bijective on `u64`.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a sub-seed from `master` and a `tag`.
///
/// For a fixed `master` the map `tag -> mix(master, tag)` is injective:
/// multiplication by an odd constant and xor are bijections on `u64`, and
/// splitmix64's finalizer is a bijection as well.
pub fn mix(master: u64, tag: u64) -> u64 {
    splitmix64(master ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Tags for the three streams of instance generation.
pub const TAG_SIGNAL: u64 = 1;
pub const TAG_SIDE_INFO: u64 = 2;
pub const TAG_ENSEMBLE: u64 = 3;

/// Tag space reserved for phase-transition trials (see
/// [`phase_tag`]); disjoint from the small generation tags above.
const PHASE_BASE: u64 = 1 << 62;
/// Tag space reserved for the beta-sweep replicates.
const BETA_BASE: u64 = 1 << 63;

/// Tag for the fresh ensemble of one phase-transition trial.
///
/// Injective in `(scheme_index, m, trial)` as long as `scheme_index < 16`,
/// `m < 2^28` and `trial < 2^28`, which covers any realistic sweep.
pub fn phase_tag(scheme_index: usize, m: usize, trial: usize) -> u64 {
    debug_assert!(scheme_index < 16 && m < (1 << 28) && trial < (1 << 28));
    PHASE_BASE | ((scheme_index as u64) << 56) | ((m as u64) << 28) | trial as u64
}

/// Tag for the square ensemble of one beta-sweep replicate.
pub fn beta_replicate_tag(replicate: usize) -> u64 {
    BETA_BASE | replicate as u64
}
