//! Gradient descent on a diagonal least-squares system: flatter spectra converge faster.

use eranklab::training::{diag_toy_run, toy_rhs, SpectrumKind};

fn main() -> eranklab::Result<()> {
    let n = 64;
    let b = toy_rhs(n, 0);
    for kind in [
        SpectrumKind::Equal,
        SpectrumKind::Linear,
        SpectrumKind::Geometric,
        SpectrumKind::TwoCluster { k: 8 },
    ] {
        let lambdas = kind.values(n, 256.0, 1.0);
        let rec = diag_toy_run(&lambdas, &b, 5e-2, 100)?;
        println!(
            "{:<12} erank {:>6.2}  loss {:.3e} -> {:.3e}",
            kind.name(),
            rec.erank,
            rec.losses[0],
            rec.losses.last().unwrap()
        );
    }
    Ok(())
}
