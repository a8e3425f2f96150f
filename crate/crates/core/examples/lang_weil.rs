//! How far #Q(F_p) strays from p^(n-1), normalized by p^(n-3/2).

use quadric_sieve::arith;
use quadric_sieve::localcount;
use quadric_sieve::AffineQuadricInstance;

fn main() -> quadric_sieve::Result<()> {
    let primes: Vec<u128> = arith::primes_below(60).into_iter().map(u128::from).collect();
    for (form, m) in [("diag:1,1,-3", 1), ("diag:1,1,1,-1", 1), ("diag:1,1,1,1,-2", 5)] {
        let inst = AffineQuadricInstance::parse(form, m)?;
        let report = localcount::lang_weil_report(&inst, &primes, localcount::DEFAULT_BUDGET)?;
        println!("{}: max |deviation| over good primes {:.4}", inst.canonical(), report.max_deviation);
        for row in report.rows.iter().take(6) {
            let tag = if row.good { "" } else { " (bad)" };
            println!("  p = {:>2}: {:>8} vs {:>8}, deviation {:+.4}{tag}", row.p, row.count, row.main_term, row.deviation);
        }
    }
    Ok(())
}
