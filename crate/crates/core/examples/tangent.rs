//! Tangent directions estimated from points sampled on a line and on a cusp.

use jet_closure::cli::corpus::tangent_samples;
use jet_closure::geometry::{estimate_tangent_directions, TangentOptions};
use jet_closure::Result;

fn main() -> Result<()> {
    let opts = TangentOptions { delta_out: 1e-3, ..Default::default() };
    for (label, cusp) in [("line x = 0", false), ("cusp x^2 = y^3", true)] {
        let pts = tangent_samples(cusp);
        let dirs = estimate_tangent_directions(&pts, &opts)?;
        let dirs: Vec<_> = dirs.into_iter().map(|d| d.0).collect();
        println!("{label}: {} points, tangent directions {dirs:?}", pts.len());
    }
    Ok(())
}
