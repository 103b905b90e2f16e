//! Training inner and outer weights together and watching the kernel spectrum move.

use eranklab::features::{Activation, ModelConfig, RandomFeatureModel};
use eranklab::partition::PouKind;
use eranklab::problems::Problem;
use eranklab::training::{gd_train, TrainConfig, TrainMode};

fn main() -> eranklab::Result<()> {
    let problem = Problem::regression(30.0, 256);
    let mut model = RandomFeatureModel::init(&ModelConfig {
        seed: 0,
        domain: problem.domain.clone(),
        cells: vec![8],
        neurons_per_cell: 32,
        init_range: 9.0,
        activation: Activation::Tanh,
        pou_kind: PouKind::SineBlend,
        trainable_inner: true,
    })?;
    let rec = gd_train(
        &mut model,
        &problem,
        &TrainConfig {
            epochs: 1000,
            mode: TrainMode::Full,
            snapshot_epochs: vec![0, 250, 500, 1000],
            ..TrainConfig::default()
        },
    )?;
    for s in &rec.snapshots {
        println!(
            "epoch {:>5}: erank {:.3}, loss {:.4e}, residual energy {:.4e}",
            s.epoch, s.erank, rec.losses[s.epoch], s.residual_energy
        );
    }
    Ok(())
}
