//! Values of Q1 on a box that a binary form Q2 represents.

use quadric_sieve::halfsieve::HalfSieveInstance;

fn main() -> quadric_sieve::Result<()> {
    // 2x^2 + 3 against sums of two squares.
    let hs = HalfSieveInstance::parse("2*x1^2+3", "1,0,1")?;
    let hyp = hs.hypotheses()?;
    println!("disc {}, bad modulus {}, hypotheses hold: {} ({})", hs.disc(), hs.bad_modulus(), hyp.satisfied, hyp.note);

    for row in hs.density_curve(&[1000, 4000, 16000])? {
        println!("T = {:>5}: C(T) = {:>5}, C sqrt(ln T)/T^L = {:.4}", row.t, row.count, row.normalized);
    }

    let d = hs.decomposition_check(50)?;
    println!(
        "T = 50: C = {} <= zero fibre {} + sum b* {} over {} squares: {}",
        d.representable, d.zero_fiber, d.star_sum, d.squares.len(), d.holds()
    );

    let chain = hs.sifting_chain(200, 1, 10)?;
    println!(
        "sum b* {} <= S(full) {} <= S(reduced) {} <= Lambda {}",
        chain.b_star_sum, chain.sift_full, chain.sift_reduced, chain.lambda
    );

    let report = hs.halfdim_condition_report(&[100, 1000, 10000])?;
    for (x, dev) in &report.rows {
        println!("x = {x:>5}: deviation {dev:+.4}");
    }
    println!("character census {:?}", report.census);
    Ok(())
}
