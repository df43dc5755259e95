//! Runs the baseline network at one value of `q` and prints the leadership
//! summary.
//!
//! ```text
//! cargo run --release --example leadership -- 0.532 200000 7
//! ```

use powervac::metrics::{classify_phase, default_fit_range, fit_power_law};
use powervac::{simulate, MetricsConfig, ModelParams, RunMetrics};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: &str| args.get(i).cloned().unwrap_or_else(|| default.to_string());
    let params = ModelParams {
        q: arg(0, "0.532").parse().expect("q"),
        steps: arg(1, "200000").parse().expect("steps"),
        seed: arg(2, "0").parse().expect("seed"),
        ..Default::default()
    };
    let cfg = MetricsConfig::default();
    let mut metrics = RunMetrics::new(params.n, params.steps, cfg);
    simulate(&params, &mut [&mut metrics]).expect("valid parameters");
    let (summary, hist) = metrics.finish();

    println!("phase          {}", classify_phase(&summary, &cfg));
    println!("above 3.0      {:.4?}", summary.count_fractions4());
    println!("new leaders    {}", summary.new_leaders);
    println!("mean tenure    {:.0}", summary.mean_tenure());
    let (lo, hi) = default_fit_range(&hist, params.lambda);
    if let Ok(fit) = fit_power_law(&hist, lo, hi) {
        println!(
            "degree slope   {:.2} (R^2 {:.3})",
            fit.exponent, fit.r_squared
        );
    }
}
