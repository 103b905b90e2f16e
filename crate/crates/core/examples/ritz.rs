//! Energy-functional training of a 1D elliptic problem with natural boundary conditions.

use eranklab::features::{Activation, ModelConfig, RandomFeatureModel};
use eranklab::partition::PouKind;
use eranklab::problems::Problem;
use eranklab::training::{gd_train, TrainConfig, TrainMode};

fn main() -> eranklab::Result<()> {
    let problem = Problem::elliptic_ritz1d(256);
    for (rm, mp) in [(1.0, 1), (6.0, 4)] {
        let mut model = RandomFeatureModel::init(&ModelConfig {
            seed: 0,
            domain: problem.domain.clone(),
            cells: vec![mp],
            neurons_per_cell: 512 / mp,
            init_range: rm,
            activation: Activation::Tanh,
            pou_kind: PouKind::SineBlend,
            trainable_inner: false,
        })?;
        let rec = gd_train(
            &mut model,
            &problem,
            &TrainConfig {
                epochs: 2000,
                mode: TrainMode::OuterOnly,
                ..TrainConfig::default()
            },
        )?;
        let err = rec.final_metrics().expect("metrics at the last epoch");
        println!(
            "Rm = {rm}, Mp = {mp}: energy {:.6}, relL2 {:.3e}, relH1 {:.3e}",
            rec.final_loss(),
            err.rel_l2,
            err.rel_h1
        );
    }
    Ok(())
}
