//! Commutant obstructions: coefficient blow-up, intertwiner kernels, and the
//! dimension of a truncated commutant.

use schauder_lab::commutant::{commutant_obstruction, rosenblum_obstruction, truncated_commutant_dim, DEFAULT_BOUND};
use schauder_lab::opcore::{OperatorExpr, TruncationWindow};
use schauder_lab::seqcore::{ScalarSeq, SeqDomain};

fn main() -> schauder_lab::Result<()> {
    let g = ScalarSeq::geometric(1.0, 0.5)?;
    let dyadic = ScalarSeq::two_sided(g.clone(), g)?;
    for k in [1, 2] {
        let c = commutant_obstruction(&dyadic, k, 30, DEFAULT_BOUND)?;
        println!("k={k}: max ratio {:e} at i={:?}, pass {}", c.evidence.max_ratio.unwrap().0, c.evidence.index_attained, c.pass);
    }

    let hi = ScalarSeq::constant_bilateral(2.0);
    let lo = ScalarSeq::periodic(vec![0.9, 1.0], 0, SeqDomain::Bilateral)?;
    let r = rosenblum_obstruction(&hi, &lo, 2.0, 40, &[-2, 0, 3], DEFAULT_BOUND)?;
    println!("intertwiner products {:?}", r.get_series("max_product_per_k").unwrap());

    let block = OperatorExpr::weighted_shift(ScalarSeq::constant(1.0)).truncate(TruncationWindow::prefix(6))?;
    println!("commutant of a 6x6 Jordan block: dim {}", truncated_commutant_dim(&block, 1e-10)?.dimension);
    Ok(())
}
