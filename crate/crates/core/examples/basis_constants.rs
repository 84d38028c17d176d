//! Basis and unconditional constants of a conditional Schauder system.

use schauder_lab::opcore::TruncationWindow;
use schauder_lab::schauder::{basis_const_estimate, unconditional_const_estimate, SchauderSystem};
use schauder_lab::seqcore::ScalarSeq;

fn main() -> schauder_lab::Result<()> {
    let sys = SchauderSystem::example35(ScalarSeq::loglog(1.0)?)?;
    let r = basis_const_estimate(&sys, 64, TruncationWindow::new(0, 140)?)?;
    for k in [2, 8, 32, 64] {
        println!("||Q_{k:<2}|| = {:.6}", r.norms[k - 1]);
    }
    println!("M >= {:.6} ({})", r.m, r.label);

    let w = TruncationWindow::new(0, 100)?;
    for k in [10, 20, 40] {
        let u = unconditional_const_estimate(&sys, k, w, 2000, 7)?;
        println!("K={k:<2} M_ub >= {:.6} (exhaustive {})", u.value, u.exhaustive);
    }

    let skew = SchauderSystem::skew_pair();
    println!("skew pair M_ub = {}", unconditional_const_estimate(&skew, 2, TruncationWindow::prefix(4), 0, 0)?.value);
    Ok(())
}
