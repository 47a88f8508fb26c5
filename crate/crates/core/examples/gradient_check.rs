//! Compare backpropagated gradients with central finite differences on a
//! reduced-width copy of the classifier.
//!
//! ```text
//! cargo run --example gradient_check -- [seed]
//! ```

use thermocrack::model::{build_network, forward, loss_and_grad, ArchitectureSpec, ModelParams};
use thermocrack::rng::seeded_rng;
use thermocrack::tensor::{softmax_xent, Tensor};

use rand::Rng;

fn loss(spec: &ArchitectureSpec, params: &ModelParams, x: &Tensor, class: usize) -> f64 {
    let logits = forward(spec, params, x).unwrap();
    softmax_xent(&logits, class).unwrap().0
}

fn main() -> thermocrack::Result<()> {
    let seed: u64 = std::env::args().nth(1).map_or(0, |s| s.parse().expect("seed"));
    let spec = ArchitectureSpec::with_widths(16, 16, [4, 4, 4], [8, 8]);
    let params = build_network(&spec, seed)?;
    let mut rng = seeded_rng(seed);
    let x = Tensor::new(vec![3, 16, 16], (0..3 * 256).map(|_| rng.random::<f32>()).collect())?;
    let class = 2;

    let (l0, grads) = loss_and_grad(&spec, &params, &x, class)?;
    println!("loss {l0:.6}");
    let h = 1e-3f32;
    for (li, name) in spec.param_layer_names().enumerate() {
        let g = &grads.layers[li].weights;
        let (mut agree, mut probed) = (0, 0);
        for j in (0..g.len()).step_by((g.len() / 16).max(1)) {
            let mut p = params.clone();
            let w = &mut p.layers[li].weights.data_mut()[j];
            let orig = *w;
            *w = orig + h;
            let lp = loss(&spec, &p, &x, class);
            p.layers[li].weights.data_mut()[j] = orig - h;
            let lm = loss(&spec, &p, &x, class);
            let numeric = (lp - lm) / (2.0 * f64::from(h));
            let analytic = f64::from(g.data()[j]);
            let diff = (numeric - analytic).abs();
            probed += 1;
            // f32 loss; a probe may straddle a ReLU kink.
            if diff <= 1e-3 || diff <= 1e-2 * numeric.abs().max(analytic.abs()) {
                agree += 1;
            }
        }
        println!("{name:<8} {:>6} weights  {agree}/{probed} probed partials agree", g.len());
    }
    Ok(())
}
