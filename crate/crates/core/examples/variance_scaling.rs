//! Widening the initialization range of the inner weights raises the effective rank,
//! including the saturated regime where the number of features equals the number of points.

use eranklab::cli::ScanPoint;
use eranklab::features::Activation;
use eranklab::partition::PouKind;

fn erank(n: usize, m: usize, rm: f64) -> eranklab::Result<f64> {
    let point = ScanPoint {
        n,
        m,
        mp: 1,
        rm,
        activation: Activation::Tanh,
        pou_kind: PouKind::Characteristic,
        seed: 0,
    };
    Ok(point.spectrum()?.1)
}

fn main() -> eranklab::Result<()> {
    println!("N = 256, M = 1024");
    for rm in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
        println!("  Rm = {rm:>4}: erank {:.3}", erank(256, 1024, rm)?);
    }

    println!("N = M");
    for size in [64, 128, 256, 512] {
        println!(
            "  {size:>4}: Rm = 1 gives {:.3}, Rm = 9 gives {:.3}",
            erank(size, size, 1.0)?,
            erank(size, size, 9.0)?
        );
    }
    Ok(())
}
