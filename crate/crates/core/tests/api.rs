use kspm::avalanche::{
    apply_fast_avalanche, density_column, fast_avalanche_peaks, long_avalanches, nth_avalanche, peaks,
};
use kspm::config::{pi_of_n, shot_vector};
use kspm::predict::{parse_regular_trace, wave_onset_column, wave_suffix};
use kspm::transducer::trace_from_simulation;
use kspm::*;

fn cfg(d: usize, v: &[i64]) -> Config {
    Config::new(d, v.to_vec()).unwrap()
}

#[test]
fn firing_examples() {
    assert_eq!(cfg(3, &[3, 1, 2, 1, 2]).fired(0).unwrap(), cfg(3, &[0, 1, 3, 1, 2]));
    assert_eq!(cfg(3, &[24]).fired(0).unwrap(), cfg(3, &[21, 0, 1]));
    assert_eq!(cfg(2, &[2, 0]).fired(0).unwrap(), cfg(2, &[0, 1]));
    assert!(cfg(3, &[2, 1, 2, 1, 2]).fired(0).is_err());
    assert_eq!(cfg(3, &[0, 3, 0, 1, 3]).leftmost_fireable(), Some(1));
    assert_eq!(cfg(4, &[1, 5, 4]).leftmost_fireable(), Some(1));
    assert_eq!(cfg(3, &[2, 1, 2, 1, 2]).leftmost_fireable(), None);
}

#[test]
fn stabilization_examples() {
    let (fp, _) = cfg(3, &[24]).stabilized();
    assert_eq!(fp, cfg(3, &[2, 1, 2, 1, 2]));
    let (fp, s) = cfg(3, &[3]).stabilized();
    assert_eq!((fp, s.0), (cfg(3, &[0, 0, 1]), vec![0]));
    assert!(cfg(3, &[6, 0, 3]).check_diamond());
    assert_eq!(pi_of_n(3, 0).unwrap(), Config::zero(3).unwrap());
    assert_eq!(shot_vector(3, 3).unwrap().counts(), [1]);
}

#[test]
fn avalanche_examples() {
    let (rec, next) = nth_avalanche(25, &pi_of_n(3, 24).unwrap()).unwrap();
    assert_eq!(rec.fired, [0, 2, 1, 4, 3]);
    assert_eq!(next, cfg(3, &[2, 0, 2, 1, 0, 1, 1]));
    let (rec, next) = nth_avalanche(1, &Config::zero(3).unwrap()).unwrap();
    assert!(rec.is_empty());
    assert_eq!(next, cfg(3, &[1]));
    assert_eq!(peaks(&[5, 4, 3, 8, 7]), [5, 8]);
    assert_eq!(density_column(&[0, 2, 1]), 0);
}

#[test]
fn long_avalanche_counts() {
    assert_eq!(long_avalanches(4, 195).unwrap().len(), 8);
    assert!(long_avalanches(5, 1).unwrap().is_empty());
    let phi = long_avalanches(4, 500).unwrap();
    assert_eq!(phi.l, 6);
    // Avalanche 216 fires column 9 and so belongs to the sequence.
    assert!(phi.indices.contains(&216));
}

#[test]
fn fast_path_d6() {
    let prev = pi_of_n(6, 1068).unwrap();
    let peaks = fast_avalanche_peaks(&prev, 10, true).unwrap();
    assert_eq!(peaks, [16, 21]);
    let next = apply_fast_avalanche(&prev, &peaks, 10).unwrap();
    assert_eq!(&next.diffs()[15..], &pi_of_n(6, 1069).unwrap().diffs()[15..]);
}

#[test]
fn transducer_examples() {
    let t = Transducer::build(3).unwrap();
    let w = |s: &str| TraceWord::parse(3, s).unwrap();
    assert_eq!(t.transduce(&w("abaaaaab")).unwrap(), w("abaab"));
    assert_eq!(t.iterate(&TraceWord::regular_cycles(3, 5), 5).unwrap(), TraceWord::empty());
    assert_eq!(t.iterate(&w("abaaaaab"), 2).unwrap(), t.transduce(&w("abaab")).unwrap());
    assert_eq!(t.iterate(&w("abba"), 0).unwrap(), w("abba"));
    assert_eq!(Transducer::build(2).unwrap().states().len(), 2);
    assert_eq!(Transducer::build(4).unwrap().states().len(), 37);
}

#[test]
fn trace_and_wave() {
    let trace = trace_from_simulation(4, 500, 4).unwrap();
    assert_eq!(trace.word.render(4), "0120120");
    let fp = pi_of_n(3, 2000).unwrap();
    let onset = wave_onset_column(&fp);
    assert!(onset <= 22);
    let regular = TraceWord::regular_cycles(3, 3);
    let form = parse_regular_trace(&regular, 3).unwrap();
    let suffix = wave_suffix(&form.with_y(3, 2).unwrap()).unwrap();
    assert_eq!(suffix, [1, 0, 2, 1, 2, 1]);
}

#[test]
fn json_round_trip() {
    let h = History::run(4, 300).unwrap();
    for rec in h.records() {
        let text = serde_json::to_string(rec).unwrap();
        assert_eq!(&serde_json::from_str::<AvalancheRecord>(&text).unwrap(), rec);
    }
    let fp = h.fixed_point().clone();
    let back: Config = serde_json::from_str(&serde_json::to_string(&fp).unwrap()).unwrap();
    assert_eq!(back, fp);
    let trace = trace_from_simulation(4, 300, 4).unwrap();
    let back: kspm::transducer::Trace = serde_json::from_str(&serde_json::to_string(&trace).unwrap()).unwrap();
    assert_eq!(back, trace);
}
