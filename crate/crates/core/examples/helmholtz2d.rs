//! Direct solve of a 2D Helmholtz problem on tensor-product cells.
//! The wavenumber sits near a Dirichlet eigenvalue, so the solve needs about a thousand features.

use eranklab::features::{Activation, ModelConfig, RandomFeatureModel};
use eranklab::partition::PouKind;
use eranklab::problems::{error_metrics, Problem};
use eranklab::training::rfm_solve;

fn main() -> eranklab::Result<()> {
    let problem = Problem::helmholtz2d(32);
    for mp in [1, 2] {
        let mut model = RandomFeatureModel::init(&ModelConfig {
            seed: 0,
            domain: problem.domain.clone(),
            cells: vec![mp, mp],
            neurons_per_cell: 1024 / (mp * mp),
            init_range: 1.0,
            activation: Activation::Tanh,
            pou_kind: PouKind::SineBlend,
            trainable_inner: false,
        })?;
        rfm_solve(&mut model, &problem)?;
        let err = error_metrics(&model, &problem)?;
        println!("{mp}x{mp} cells: relL2 {:.3e}, relH1 {:.3e}", err.rel_l2, err.rel_h1);
    }
    Ok(())
}
