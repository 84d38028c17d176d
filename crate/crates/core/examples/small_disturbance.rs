//! Basis constants before and after a small invertible disturbance X.

use schauder_lab::constructions::disturbance_sandwich_check;
use schauder_lab::opcore::{OperatorExpr, TruncationWindow, C64};
use schauder_lab::schauder::SchauderSystem;
use schauder_lab::seqcore::{ScalarSeq, SeqDomain};

fn main() -> schauder_lab::Result<()> {
    let sys = SchauderSystem::example35(ScalarSeq::loglog(1.0)?)?;
    let id = OperatorExpr::identity(SeqDomain::Unilateral);
    let x = OperatorExpr::patch(id.clone(), vec![(0, 1, C64::new(0.05, 0.0))]);
    let x_inv = OperatorExpr::patch(id, vec![(0, 1, C64::new(-0.05, 0.0))]);
    let c = disturbance_sandwich_check(&sys, &x, &x_inv, 0.1, 64, TruncationWindow::prefix(130))?;
    println!("M = {:.6}, M' = {:.6}", c.get("m").unwrap(), c.get("m_prime").unwrap());
    println!("smallest slack below {:.3e}, above {:.3e}", c.get("min_lower_gap").unwrap(), c.get("min_upper_gap").unwrap());
    println!("pass {}", c.pass);
    Ok(())
}
