//! Stroboscopic sections against the secular Hamiltonian.

use timeloc::classical::{initial_fan, section_spread, stroboscopic, ClassicalState, ClassicalSystem, EffectiveClassical, Micromotion};
use timeloc::disorder::{realization, DriveSpec};
use timeloc::num::median;

const ALPHA: f64 = 0.618_033_988_749_894_9;

fn spreads(omega0: f64) -> (f64, f64) {
    let omega = omega0 - ALPHA;
    let (drive, c) = realization(&DriveSpec::new(10.0, 3), 0).unwrap();
    let sys = ClassicalSystem::new(drive.clone(), 20.0, omega, ALPHA);
    let h = EffectiveClassical::new(c, 20.0, omega);
    let mm = Micromotion::new(&drive, 20.0, omega);
    let (mut raw, mut slow) = (Vec::new(), Vec::new());
    for (theta, p) in initial_fan(20.0, 4, 7) {
        let sec = stroboscopic(&sys, ClassicalState::resonant(theta, p, omega, ALPHA), 640, 40, 120).unwrap();
        raw.push(section_spread(&h, &sec));
        slow.push(section_spread(&h, &mm.averaged(&sec)));
    }
    (median(&raw).unwrap(), median(&slow).unwrap())
}

#[test]
fn spread_shrinks_with_frequency() {
    let a = spreads(600.0);
    let b = spreads(1200.0);
    let c = spreads(2000.0);
    assert!(a.0 > b.0 && b.0 > c.0, "{a:?} {b:?} {c:?}");
    // removing the first-order micromotion leaves a much smaller residue
    assert!(c.1 < c.0 / 4.0, "{c:?}");
}
