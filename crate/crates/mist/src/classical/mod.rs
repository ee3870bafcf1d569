//! Semiclassical driven transmon: drive harmonics, resonances, Chirikov
//! margins, trajectories and Poincare sections.

mod bessel;
mod chirikov;
mod harmonics;
mod integrator;
mod poincare;
mod separatrix;

pub use bessel::{bessel_j, bessel_j_upto};
pub use chirikov::{chirikov_margin, chirikov_margin_at, chirikov_scan, plasma_frequency, ChirikovScan};
pub use harmonics::{harmonic_coefficients, CouplingKind, HarmonicSeries, ETA_MAX};
pub use integrator::{
    flow, integrate_trajectory, wrap_phase, IntegratorOptions, PeriodicFlow, Splitting, Trajectory, MIN_STEPS_PER_PERIOD,
};
pub use poincare::{
    default_initial_conditions, poincare_section, separatrix_rings, write_section_csv, write_separatrix_csv, ChaosReport,
    PoincareSection, SectionOptions, CHAOS_THRESHOLD, SHADOW_OFFSET,
};
pub use separatrix::{resonance_center, resonance_width, separatrices, Separatrix, SEPARATRIX_SAMPLES};
