use amseq_core::classify::Window;
use amseq_core::constructions::*;
use std::time::Instant;
fn main() {
    let w = Window::new(4, 1 << 14);
    let t0 = Instant::now();
    match theorem_78_xi(0.5, 20, &w) {
        Ok(xi) => println!("L=20: {:?} pass={} p_last={}", t0.elapsed(), xi.certificate.all_pass(), xi.levels.last().unwrap().p),
        Err(e) => println!("L=20 error after {:?}: {e}", t0.elapsed()),
    }
    let t1 = Instant::now();
    match theorem_78_xi(0.5, 48, &w).and_then(|xi| theorem_78_family(&xi, 3, 8)) {
        Ok(f) => {
            println!("family: {:?} pass={} rounds={}", t1.elapsed(), f.certificate.all_pass(), f.rounds.len());
            for (n, c) in f.certificate.checks.iter().filter(|(_, c)| !c.passed()).take(4) { println!("  FAIL {n}: {c:?}"); }
        }
        Err(e) => println!("family error after {:?}: {e}", t1.elapsed()),
    }
}
