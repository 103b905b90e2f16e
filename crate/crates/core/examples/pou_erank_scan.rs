//! Effective rank of the feature kernel as the number of partition cells grows.
//!
//! ```text
//! cargo run --release --example pou_erank_scan
//! ```

use eranklab::cli::ScanPoint;
use eranklab::features::Activation;
use eranklab::partition::PouKind;

fn main() -> eranklab::Result<()> {
    let mut base = None;
    println!("{:>4} {:>10} {:>8}", "Mp", "erank", "ratio");
    for mp in [1, 2, 4, 8, 16] {
        let (_, erank) = ScanPoint {
            n: 256,
            m: 1024,
            mp,
            rm: 1.0,
            activation: Activation::Tanh,
            pou_kind: PouKind::Characteristic,
            seed: 0,
        }
        .spectrum()?;
        let b = *base.get_or_insert(erank);
        println!("{mp:>4} {erank:>10.4} {:>8.3}", erank / b);
    }
    Ok(())
}
