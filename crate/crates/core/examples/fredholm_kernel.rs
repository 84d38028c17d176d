//! Kernel vector and index certificate of T - λ for λ inside the weight gap.

use schauder_lab::opcore::{TruncationWindow, C64};
use schauder_lab::seqcore::ScalarSeq;
use schauder_lab::spectral::{fredholm_index_certificate, fredholm_kernel, kernel_residual, weight_gap};

fn main() -> schauder_lab::Result<()> {
    let w = ScalarSeq::two_sided(ScalarSeq::constant(2.0), ScalarSeq::constant(0.5))?;
    let (lo, hi) = weight_gap(&w)?;
    println!("gap {lo} < |λ| < {hi}");

    let lambda = C64::new(0.0, 1.0);
    let k = fredholm_kernel(&w, lambda, TruncationWindow::symmetric(64))?;
    for n in [-3, -1, 0, 1, 3] {
        println!("x[{n:>2}] = {:.6}", k.get(n).unwrap());
    }
    println!("residual {:e}", kernel_residual(&w, &k)?);

    let cert = fredholm_index_certificate(&w, lambda, TruncationWindow::symmetric(64))?;
    println!("{} pass={}", cert.claim, cert.pass);
    Ok(())
}
