use nestlab_core::bounds::tau_trend_check;
use nestlab_core::interval::Interval;
use nestlab_core::map::UnimodalMap;
use nestlab_core::nest::construct_nice_interval;

fn main() {
    let f = UnimodalMap::logistic(3.9).unwrap();
    let v0 = construct_nice_interval(&f).unwrap();
    let lo = v0.lo() + v0.len() * 0.45;
    let hi = v0.lo() + v0.len() * 0.55;
    let v = Interval::new(lo, hi).unwrap();
    let t = tau_trend_check(&f, &v, 120, 300, 11).unwrap();
    println!(
        "tau trend: samples {} concordance {:.4} pass {}",
        t.samples, t.concordance, t.pass
    );
}
