//! Exact invariants of quadratic forms: determinant, signature, Hilbert
//! symbols, ternary anisotropy and sums of two squares.

use quadric_sieve::arith::Factorizer;
use quadric_sieve::forms::{self, Place};
use quadric_sieve::{BinaryForm, QuadraticForm};

fn main() -> quadric_sieve::Result<()> {
    for text in ["diag:1,1,-3", "x1^2+x1*x2+x2^2-x3^2", "gram2:2,1;1,-4"] {
        let q = QuadraticForm::parse(text)?;
        println!("{text}: det {}, signature {:?}", q.det(), q.signature()?);
    }

    for p in [Place::Infinity, Place::Prime(2), Place::Prime(3), Place::Prime(5)] {
        println!("(-1, 3)_{p:?} = {}", forms::hilbert_symbol(-1, 3, p)?);
    }

    // x^2 + y^2 - 3z^2 has no rational zero; x^2 + y^2 - 2z^2 does.
    for text in ["diag:1,1,-3", "diag:1,1,-2"] {
        let q = QuadraticForm::parse(text)?;
        println!("{text} anisotropic over Q: {}", forms::is_q_anisotropic_ternary(&q)?);
    }

    let sums = BinaryForm::parse("1,0,1")?;
    let f = Factorizer::default();
    let hits: Vec<i128> = (0..50).filter(|&n| sums.represents_with(n, &f)).collect();
    println!("sums of two squares below 50: {hits:?}");
    println!("b*(45) = {}", sums.b_star(45)?);
    Ok(())
}
