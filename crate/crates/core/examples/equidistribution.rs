//! Points of bounded height spread over the residue classes of Q(Z/l).

use quadric_sieve::geosieve;
use quadric_sieve::{AffineQuadricInstance, HeightWindow};

fn main() -> quadric_sieve::Result<()> {
    let inst = AffineQuadricInstance::parse("diag:1,1,-3", 1)?;
    // 2 is a bad prime here, so the classes mod 4 do not carry equal weight.
    for l in [3, 4, 5] {
        for t in [100, 400, 1600] {
            let row = geosieve::equidistribution(&inst, &HeightWindow::euclidean(t)?, l)?;
            println!(
                "l = {l}, T = {t:>4}: {:>6} points over {:>3} classes, max relative deviation {:.4}",
                row.total, row.local_count, row.max_deviation
            );
        }
    }
    Ok(())
}
