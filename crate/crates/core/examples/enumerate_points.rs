//! Integer points of bounded height on a one-sheeted and a two-sheeted
//! hyperboloid.

use quadric_sieve::lattice::{self, HeightWindow, Norm};
use quadric_sieve::AffineQuadricInstance;

fn main() -> quadric_sieve::Result<()> {
    let one = AffineQuadricInstance::parse("diag:1,1,-3", 1)?;
    println!("points of {} with |x| <= 3:", one.canonical());
    for x in lattice::enumerate_points(&one, &HeightWindow::euclidean(3)?)? {
        println!("  {x:?}");
    }

    // x^2 + y^2 - z^2 = -1 has two sheets, z > 0 and z < 0.
    let two = AffineQuadricInstance::parse("diag:1,1,-1", -1)?;
    for t in [10, 100, 1000] {
        let c = lattice::count_points(&two, &HeightWindow::euclidean(t)?)?;
        println!("T = {t:>4}: N = {:>5}, sheets {:?}", c.total, c.sheets);
    }

    let fit = lattice::fit_growth(&one, &[50, 100, 200, 400], Norm::Euclidean)?;
    for (t, n, ratio) in &fit.rows {
        println!("T = {t:>3}: N = {n:>6}, N/T = {ratio:.4}");
    }
    println!("log-log slope {:?}", fit.log_slope);
    Ok(())
}
