//! Checks for multiplicative bundle gerbes with connection: invariant forms on
//! Lie groups, a discrete simplicial Deligne complex, surface holonomy, loop
//! group extensions, Chern–Simons actions and brane curvatures.

pub mod lie;
pub mod mesh;
pub mod branes;
pub mod chern_simons;
pub mod deligne;
pub mod wzw;
pub mod cli;
