//! Point counts modulo primes and prime powers, and the local densities of
//! the complement of a closed subset.

use quadric_sieve::localcount::{self, ClosedSubsetSpec};
use quadric_sieve::AffineQuadricInstance;

fn main() -> quadric_sieve::Result<()> {
    let budget = localcount::DEFAULT_BUDGET;
    let q = AffineQuadricInstance::parse("diag:1,1,1,-1", 1)?;
    for (p, k) in [(3, 1), (3, 2), (5, 1), (2, 3)] {
        println!("#Q(Z/{p}^{k}) = {}", localcount::count_prime_power(&q, p, k, budget)?);
    }
    let table = localcount::count_quadric_mod(&q, 360, budget)?;
    println!("#Q(Z/360) = {} from {:?}", table.count, table.breakdown);

    // Z = Q ∩ {x1 = x2 = 0}.
    let spec = ClosedSubsetSpec::parse(q, "x1;x2", 2)?;
    for p in [3, 5, 7, 11] {
        let tau = localcount::tau_p(&spec, p, budget)?;
        println!("tau_{p} = {} ({:.6})", tau.ratio(), tau.as_f64());
    }

    let bad = localcount::local_factor_bad_prime(&spec, 2, budget)?;
    println!("factor at 2: {} at level 2^{} (stabilized {})", bad.ratio, bad.level, bad.stabilized);

    let prod = localcount::purity_product(&spec, 200, budget)?;
    println!(
        "product over good p < 200: {:.6}, with bad factors {:.6}, tail bracket {:?}",
        prod.good_product,
        prod.prediction(),
        prod.bracket
    );
    Ok(())
}
