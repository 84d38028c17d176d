//! Finite-rank approximations K_n of a blowing-up operator and their error
//! bounds.

use schauder_lab::opcore::TruncationWindow;
use schauder_lab::schauder::{blowup, SchauderSystem};
use schauder_lab::seqcore::ScalarSeq;

fn main() -> schauder_lab::Result<()> {
    let sys = SchauderSystem::example35(ScalarSeq::loglog(1.0)?)?;
    let alpha = ScalarSeq::geometric(1.0, 0.6)?;
    let r = blowup(&sys, &alpha, TruncationWindow::prefix(120), 16)?;
    println!("  n  ||T - K_n||   bound");
    for n in (0..=16).step_by(2) {
        println!("{n:>3}  {:.3e}  {:.3e}", r.errors[n], r.bounds[n]);
    }
    println!("pass {}", r.pass);
    Ok(())
}
