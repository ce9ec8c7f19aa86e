pub mod boundary;
pub mod gauge;
pub mod gen;
pub mod recover;
pub mod symbols;
pub mod verify;

use maxsym::random::direction_grid;
use nalgebra::Vector2;

/// `n` equispaced unit directions; at least one.
pub fn grid(n: usize) -> anyhow::Result<Vec<Vector2<f64>>> {
    if n == 0 {
        anyhow::bail!("need at least one direction");
    }
    Ok(direction_grid(n))
}
