//! Steady Burgers equation trained by gradient descent on the collocation loss.
//! The operator is nonlinear, so the outer coefficients cannot be fitted directly.

use eranklab::features::{Activation, ModelConfig, RandomFeatureModel};
use eranklab::partition::PouKind;
use eranklab::problems::Problem;
use eranklab::training::{gd_train, rfm_solve, TrainConfig, TrainMode};

fn main() -> eranklab::Result<()> {
    let problem = Problem::burgers_steady1d(256);
    let mut model = RandomFeatureModel::init(&ModelConfig {
        seed: 0,
        domain: problem.domain.clone(),
        cells: vec![8],
        neurons_per_cell: 64,
        init_range: 4.0,
        activation: Activation::Tanh,
        pou_kind: PouKind::SineBlend,
        trainable_inner: false,
    })?;
    if let Err(e) = rfm_solve(&mut model.clone(), &problem) {
        println!("direct solve: {e}");
    }
    let epochs = 50_000;
    let rec = gd_train(
        &mut model,
        &problem,
        &TrainConfig {
            epochs,
            mode: TrainMode::OuterOnly,
            metrics_every: epochs / 5,
            ..TrainConfig::default()
        },
    )?;
    println!("lr {:.3e}", rec.lr);
    for (epoch, m) in &rec.metrics {
        println!("epoch {epoch:>6}: loss {:.4e}  relL2 {:.3e}", rec.losses[*epoch], m.rel_l2);
    }
    Ok(())
}
