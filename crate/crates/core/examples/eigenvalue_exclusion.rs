//! Weight schedule whose eigenvector profile stays above 1/√n, and the
//! divergence that rules out η² as an eigenvalue.

use schauder_lab::constructions::{design_case4_weights, eigenvalue_exclusion_check};

fn main() -> schauder_lab::Result<()> {
    let d = design_case4_weights(0.5, 1.0, 2.0, 30)?;
    for n in [1, 2, 3, 9, 30] {
        println!("P_{n:<2} = {:.5}  1/sqrt(n) = {:.5}", d.profile[n - 1], 1.0 / (n as f64).sqrt());
    }
    println!("{} of {} weights equal η²", d.exact_indices.len(), d.horizon);

    let c = eigenvalue_exclusion_check(&d, 1_000_000);
    println!(
        "sum P_n^2 up to 1e6 = {:.3}, threshold {:.3}, pass {}",
        c.get("partial_sum").unwrap(),
        c.evidence.threshold.unwrap().0,
        c.pass
    );
    Ok(())
}
