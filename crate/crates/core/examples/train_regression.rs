//! Gradient descent on the outer coefficients for a 1D regression target,
//! comparing a narrow single-cell model with a partitioned, widely initialized one.

use eranklab::features::{Activation, ModelConfig, RandomFeatureModel};
use eranklab::partition::PouKind;
use eranklab::problems::Problem;
use eranklab::training::{gd_train, TrainConfig, TrainMode};

fn main() -> eranklab::Result<()> {
    let problem = Problem::new(eranklab::problems::ProblemKind::Regression, None);
    let cfg = TrainConfig {
        epochs: 5000,
        mode: TrainMode::OuterOnly,
        ..TrainConfig::default()
    };
    for (rm, mp) in [(1.0, 1), (9.0, 8)] {
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
        let rec = gd_train(&mut model, &problem, &cfg)?;
        println!(
            "Rm = {rm}, Mp = {mp}: erank {:.2}, lr {:.3e}, loss {:.3e} -> {:.3e}, relL2 {:.3e}",
            rec.snapshots[0].erank,
            rec.lr,
            rec.losses[0],
            rec.final_loss(),
            rec.final_metrics().map_or(f64::NAN, |m| m.rel_l2)
        );
    }
    Ok(())
}
