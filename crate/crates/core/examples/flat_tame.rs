//! Sampled flatness and tameness on a cone around the poles, and the
//! Leibniz check that a flat function times a tame one is flat.

use jet_closure::geometry::Direction;
use jet_closure::symfun::{parse_expr, Params};
use jet_closure::verifier::{check_flat, check_flat_tame_product, check_tame, Region, SampleOptions};
use jet_closure::Result;

fn main() -> Result<()> {
    let p = Params::new();
    let region = Region::Cone {
        omega: vec![Direction::axis(3, 2, 1.0), Direction::axis(3, 2, -1.0)],
        delta: 0.1,
        r: 1.0,
    };
    let opts = SampleOptions::default();
    let f = check_flat(&parse_expr("y^4/z", 3, &p)?, &region, 2, &opts)?;
    let s = check_tame(&parse_expr("y/z", 3, &p)?, &region, 2, &opts)?;
    println!("y^4/z flat to order 2: {:?}", f.verdict);
    for row in f.shells.iter().step_by(5) {
        println!("  shell {:>2}  |x| ≈ {:.2e}  sup {:.3e}", row.k, row.radius, row.sup);
    }
    println!("y/z tame to order 2: {:?} (constant {:.3})", s.verdict, s.constant);
    let prod = check_flat_tame_product(&f, &s, &opts)?;
    println!("product flat: {:?}, Leibniz consistent: {}", prod.verdict, prod.leibniz_consistent);
    Ok(())
}
