use lsd_verify::suites::run_suite;
use lsd_verify::Ctx;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let suite = args.get(1).map(|s| s.as_str()).unwrap_or("discrete-section6");
    let n: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(10_000);
    let ctx = Ctx::new(20_260_809, n);
    let t0 = std::time::Instant::now();
    match run_suite(suite, &ctx) {
        Ok(reports) => {
            for r in &reports {
                println!("{}", r.summary_line());
            }
            println!("suite `{suite}` in {:.2?}", t0.elapsed());
        }
        Err(e) => println!("ERROR: {e}"),
    }
}
