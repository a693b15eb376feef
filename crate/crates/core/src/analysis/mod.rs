//! Quality diagnostics for point sets.

mod energy;
mod geodesic;
mod pcf;
mod spectrum;

pub use energy::{probe_rng, sw_energy};
pub use geodesic::{mesh_geodesic_distances, mesh_pcf};
pub use pcf::{pair_correlation, sphere_pcf, PcfReport, Reference};
pub use spectrum::{sphere_power_spectrum, SpectrumReport};
