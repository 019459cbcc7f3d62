//! Workloads shared by the benchmarks.

use wpvol_core::{keys_up_to, Result, VolumeKey, VolumeTable};

/// Computes every ordinary and super volume with `3g - 3 + n <= max_dim`
/// in a fresh table and returns the number of entries.
pub fn fresh_sweep(max_dim: u32) -> Result<usize> {
    let table = VolumeTable::new();
    for (g, n) in keys_up_to(max_dim) {
        table.ensure(VolumeKey::ordinary(g, n))?;
        table.ensure(VolumeKey::sup(g, n))?;
    }
    Ok(table.len())
}

/// A table already holding every volume up to `max_dim`.
pub fn warm_table(max_dim: u32) -> Result<VolumeTable> {
    let table = VolumeTable::new();
    for (g, n) in keys_up_to(max_dim) {
        table.ensure(VolumeKey::ordinary(g, n))?;
        table.ensure(VolumeKey::sup(g, n))?;
    }
    Ok(table)
}
