//! Diagonal and glued-shift models: rearranged forms agree with the direct
//! ones entry by entry.

use schauder_lab::constructions::{build_case1_model, build_case2_model, build_case3_model};
use schauder_lab::opcore::TruncationWindow;
use schauder_lab::seqcore::{ScalarSeq, SeqDomain};

fn main() -> schauder_lab::Result<()> {
    let beta = ScalarSeq::affine_limit(2.0, 1.0, 1.0)?;
    let alpha = ScalarSeq::offset(ScalarSeq::affine_limit(1.0, -1.0, 1.0)?, 1)?;
    let gamma = ScalarSeq::periodic((0..9).map(|k| 1.0 + k as f64 / 8.0).collect(), 1, SeqDomain::Unilateral)?;
    let m1 = build_case1_model(beta, alpha, gamma)?;
    let (spectrum, connected) = m1.connectedness()?;
    println!("shift part spectrum {:?}, gamma inside: {}", spectrum.shape, connected.pass);
    println!("block identity on +-64: {}", m1.block_identity(64)?.pass);

    let h = ScalarSeq::harmonic_shift(1.0, 1.0)?;
    let m2 = build_case2_model(ScalarSeq::two_sided(h.clone(), h)?)?;
    println!("factored shift on +-64: {}", m2.factorization_identity(64)?.pass);

    let m3 = build_case3_model(ScalarSeq::harmonic_shift(1.0, 2.0)?, ScalarSeq::constant(1.0), TruncationWindow::symmetric(64))?;
    println!("glued gap {:?}, λ* = {}, index one: {}", m3.gap, m3.lambda_star, m3.index_certificate.pass);
    Ok(())
}
