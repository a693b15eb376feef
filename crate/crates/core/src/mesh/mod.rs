//! Triangle meshes and intrinsic blue-noise sampling on them.

pub mod bvh;
pub mod generate;
pub mod io;
pub mod layout;
pub mod pipeline;
pub mod sample;
mod trimesh;
pub mod yamabe;

pub use io::{load_mesh, samples_csv, write_obj};
pub use layout::{build_local_layout, Layout, LayoutKind, PlacedFace, Restriction};
pub use sample::{sample_faces, Density, MeshSample};
pub use trimesh::TriMesh;
pub use yamabe::{angle_sums, yamabe_flow, yamabe_flow_from, ConformalFactors, YamabeOptions, YamabeReport};
pub use pipeline::{embed_sphere_fallback, sample_mesh_hyperbolic, sample_mesh_spherical, EmbedReport, HyperbolicConfig, HyperbolicReport, PatchRound};
