//! Checks analytic activation derivatives and backpropagated network
//! gradients against central finite differences.
//!
//! `cargo run --example gradient_check`

use hybridact::activation::{Activation, ActivationKind, ActivationParams, Variant};
use hybridact::data::resolve_data_dir;
use hybridact::experiments::{gradcheck_batch, DataOptions};
use hybridact::gradcheck::{
    check_activation, check_fresh_network, check_network_gradients, NetCheckOptions, ACTIVATION_TOL, DEFAULT_STEP,
};
use hybridact::nn::{init_network, LossKind, NetworkConfig};

fn main() -> hybridact::Result<()> {
    println!("activation derivatives on 2001 points of [-10, 10]:");
    for kind in ActivationKind::ALL {
        let r = check_activation(kind, &ActivationParams::with_k(50.0), -10.0, 10.0, 2001, DEFAULT_STEP, ACTIVATION_TOL)?;
        println!(
            "  {:<14} max rel err {:.2e} at x = {:>6.2}  excluded {:?}  {}",
            kind.name(),
            r.max_rel_error,
            r.worst_x,
            r.excluded_points,
            if r.passed { "ok" } else { "above tolerance" }
        );
    }

    // A 64-32-16 network on eight Iris rows, softmax cross-entropy.
    let opts = NetCheckOptions::default();
    let data = DataOptions::with_dir(resolve_data_dir(None));
    match gradcheck_batch(LossKind::Ce, 8, &data) {
        Ok(batch) => {
            for act in [Activation::s4(Variant::Rescaled, 10.0), Activation::plain(ActivationKind::S3Continuous)] {
                let config = NetworkConfig::for_task(batch.num_features(), &[64, 32, 16], batch.task, act);
                let net = init_network(&config, 1)?;
                let r = check_network_gradients(&net, &batch.features, &batch.targets, LossKind::Ce, &opts)?;
                println!("network {:<18} CE: {} parameters, max rel err {:.2e}", r.activation, r.params_checked, r.max_rel_error);
            }
        }
        Err(e) => println!("skipping the Iris network check: {e}"),
    }

    // The same check on a seeded random batch needs no data files.
    for loss in [LossKind::Bce, LossKind::Ce, LossKind::Mse] {
        let r = check_fresh_network(Activation::s4(Variant::Rescaled, 15.0), &[16, 8], loss, 8, 5, &opts)?;
        println!("random batch {loss:?}: max rel err {:.2e}", r.max_rel_error);
    }
    Ok(())
}
