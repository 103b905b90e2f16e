//! Direct least-squares solve of the 1D Helmholtz problem with a partitioned random feature model.

use eranklab::features::{Activation, ModelConfig, RandomFeatureModel};
use eranklab::partition::PouKind;
use eranklab::problems::{error_metrics, Problem};
use eranklab::training::rfm_solve;

fn main() -> eranklab::Result<()> {
    let problem = Problem::helmholtz1d(256);
    for activation in [Activation::Tanh, Activation::Sine] {
        for mp in [1, 2, 4, 8] {
            let mut model = RandomFeatureModel::init(&ModelConfig {
                seed: 0,
                domain: problem.domain.clone(),
                cells: vec![mp],
                neurons_per_cell: 64,
                init_range: 1.0,
                activation,
                pou_kind: PouKind::SineBlend,
                trainable_inner: false,
            })?;
            rfm_solve(&mut model, &problem)?;
            let err = error_metrics(&model, &problem)?;
            println!(
                "{:<5} Mp = {mp}: Linf {:.2e}  relL2 {:.2e}  relH1 {:.2e}",
                activation.name(),
                err.linf,
                err.rel_l2,
                err.rel_h1
            );
        }
    }
    Ok(())
}
