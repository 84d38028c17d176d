//! Norm growth of the lower-triangular Toeplitz sections behind the
//! conditional system, against a summable control.

use schauder_lab::schauder::unboundedness_evidence_example35;
use schauder_lab::seqcore::ScalarSeq;

fn main() -> schauder_lab::Result<()> {
    let sizes = [16, 64, 256, 1024, 4096];
    for (name, alpha) in [("loglog", ScalarSeq::loglog(1.0)?), ("geometric", ScalarSeq::geometric(1.0, 0.5)?)] {
        let r = unboundedness_evidence_example35(&alpha, &sizes)?;
        let norms: Vec<String> = r.norms.iter().map(|x| format!("{x:.4}")).collect();
        println!("{name:<10} {}  plateau {}", norms.join(" "), r.bounded_like_plateau);
    }
    Ok(())
}
