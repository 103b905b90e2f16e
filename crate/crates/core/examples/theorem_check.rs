//! Two independently drawn half-cell kernels have nearly the same spectrum,
//! and the gap between them shrinks like 1/sqrt(M).

use eranklab::cli::{gap_bound, median, theorem_gaps};
use eranklab::features::Activation;

fn main() -> eranklab::Result<()> {
    let n = 64;
    for m in [512, 2048, 8192] {
        let gaps = theorem_gaps(n, m, 50, 0, Activation::Tanh, 1.0)?;
        let worst = gaps.iter().cloned().fold(0.0, f64::max);
        println!(
            "M = {m:>5}: median gap {:.4}, worst {:.4}, bound {:.4}",
            median(&gaps),
            worst,
            gap_bound(n, m)
        );
    }
    Ok(())
}
