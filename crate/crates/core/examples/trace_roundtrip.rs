//! Generate a trace, replay it with per-batch checks, then verify the
//! final structure on its own.

use batchdyn::harness::{generate, run, verify, GenConfig, Model, RunConfig, Structure, Trace, VerifyParams};

fn main() -> batchdyn::Result<()> {
    let trace = generate(&GenConfig {
        model: Model::SlidingWindow,
        n: 60,
        m: 900,
        batches: 10,
        batch_size: 20,
        mix: 0.5,
        seed: 1,
    })?;
    let text = trace.render();
    println!("{}", text.lines().take(4).collect::<Vec<_>>().join("\n"));
    let trace = Trace::parse(&text)?;

    let mut cfg = RunConfig::new(Structure::Spanner, 42);
    cfg.k = 2;
    let report = run(&trace, &cfg)?;
    print!("{}", report.stats_lines().lines().last().unwrap_or_default());
    println!();
    assert!(report.failure.is_none());

    let cert = verify(
        &trace.final_graph()?,
        &report.output,
        &VerifyParams { stretch: Some(3), eps: 0.5, seed: 0 },
    );
    println!("certificate: pass={} size={} max stretch={:?}", cert.pass, cert.size, cert.stretch.map(|s| s.max_stretch));
    Ok(())
}
