//! Spectrum of a bilateral weighted shift next to its truncated power norms.

use schauder_lab::opcore::{OperatorExpr, TruncationWindow};
use schauder_lab::seqcore::ScalarSeq;
use schauder_lab::spectral::{shift_spectrum, spectral_radius_estimate};

fn main() -> schauder_lab::Result<()> {
    let weights = ScalarSeq::two_sided(ScalarSeq::affine_limit(3.0, 1.0, 1.0)?, ScalarSeq::constant(0.5))?;
    let s = shift_spectrum(&weights)?;
    println!("{:?}", s.shape);

    let r = spectral_radius_estimate(&OperatorExpr::weighted_shift(weights), TruncationWindow::symmetric(256), 32)?;
    for p in r.table.iter().step_by(4) {
        println!("k={:>2}  ||T_w^k||^(1/k) = {:.6}", p.power, p.root);
    }
    println!("estimate {:.6}", r.estimate);
    Ok(())
}
