//! Tail counts over prime windows, the coprimality ratio of two cutters,
//! and the same experiment on a plain box.

use quadric_sieve::arith::Factorizer;
use quadric_sieve::geosieve::{self, SieveExperiment};
use quadric_sieve::localcount;
use quadric_sieve::poly::IntPolynomial;
use quadric_sieve::{AffineQuadricInstance, ClosedSubsetSpec};

fn main() -> quadric_sieve::Result<()> {
    let q = AffineQuadricInstance::parse("diag:1,1,1,-1", 1)?;
    let spec = ClosedSubsetSpec::parse(q, "x1;x2", 2)?;
    let exp = SieveExperiment::new(spec, vec![40, 80, 160], vec![5, 10, 20], geosieve::DEFAULT_ALPHA)?;

    // kappa is read off the first grid point only; at the smallest M the tail
    // fraction settles to a constant and can outgrow the shape as T rises.
    let check = exp.tail_shape_check()?;
    println!("kappa = {:.4}", check.kappa);
    for r in &check.rows {
        println!("T = {:>3}, M = {:>2}: tail/N = {:.4} <= {:.4}? {}", r.t, r.m, r.tau, r.bound, r.pass);
    }

    let split = exp.tail_count(160, 5)?;
    println!("T = 160, M = 5: tail {} split {:?} at T^alpha = {}", split.total, split.split, split.cut);

    let purity = exp.purity_ratio_experiment(100, localcount::DEFAULT_BUDGET)?;
    for r in &purity.rows {
        println!("T = {:>3}: gcd(x1, x2) = 1 for {:.4} of points, product {:.4}", r.t, r.ratio, r.product);
    }

    let cutters = [IntPolynomial::parse("x1", 2)?, IntPolynomial::parse("x2", 2)?];
    let f = Factorizer::default();
    let boxed = geosieve::ekedahl_shape_check(&cutters, &[50, 100, 200], &[5, 10], &f)?;
    println!("box baseline: kappa {:.4}, all within bound {}", boxed.kappa, boxed.passed());
    Ok(())
}
