mod common;

use conservative_ha::analysis::{adequacy_check, project};
use conservative_ha::automaton::discretely_bisimilar;
use conservative_ha::construct::run_construction;
use conservative_ha::merge::{merge_automaton, MergeOptions};
use conservative_ha::traces::{accepts, validate_omniscient, TraceFile};
use conservative_ha::{ModeId, Rect};

use common::{annotate, automaton, fixture, spec, traces};

#[test]
fn spec_fixture_has_three_states_and_two_triggers() {
    let s = spec();
    assert_eq!(s.states(), ["takeoff", "travel", "landing"]);
    assert_eq!(s.edge_count(), 2);
    assert!(s.monitor_fires("takeoff", "cruise", &[1000.0, 0.0, 300.0]).is_some());
    assert!(s.monitor_fires("takeoff", "cruise", &[10.0, 0.0, 5.0]).is_none());
    assert!(s.monitor_fires("takeoff", "turnLeft", &[1000.0, 0.0, 300.0]).is_none());
}

#[test]
fn recorded_flights_are_runs_of_the_hand_written_model() {
    let truth = automaton("truth.json");
    let ts = annotate(&truth, &traces("flights.json"));
    for t in &ts {
        assert_eq!(validate_omniscient(&truth, t), Ok(()));
    }
    let modes = ts[2].resident_modes(truth.init_mode());
    assert_eq!(&modes[..3], &[ModeId(0), ModeId(1), ModeId(4)]);
}

#[test]
fn tree_before_merging_has_one_mode_per_step() {
    let ts = traces("flights.json");
    let st = run_construction(&ts, &spec()).unwrap();
    let steps: usize = ts.iter().map(|t| t.len() - 1).sum();
    assert_eq!(st.aut.mode_count(), steps + 1);
    let m = merge_automaton(&st.aut, MergeOptions::default()).unwrap();
    assert_eq!(m.automaton.mode_count(), 5);
    assert!(discretely_bisimilar(&m.automaton, &automaton("truth.json")));
    assert!(!m.events.is_empty());
}

#[test]
fn flight_projection_tightens_the_model() {
    let truth = automaton("truth.json");
    let ts = annotate(&truth, &traces("flights.json"));
    let p = project(&truth, &ts).unwrap();
    assert_eq!(p.flow(ModeId(0)).unwrap(), &Rect::from_bounds(&[(1.0, 100.0), (0.0, 0.0), (1.0, 30.0)]).unwrap());
    assert!(p.flow(ModeId(4)).unwrap().is_subset(truth.flow(ModeId(4)).unwrap()).unwrap());
    let built = merge_automaton(&run_construction(&traces("flights.json"), &spec()).unwrap().aut, MergeOptions::default())
        .unwrap()
        .automaton;
    for t in &ts {
        assert!(accepts(&built, &t.trace).is_some());
    }
}

#[test]
fn short_evaluation_traces_fail_landing_and_straight() {
    let truth = automaton("truth_eval.json");
    let ts = annotate(&truth, &traces("eval_short.json"));
    let r = adequacy_check(&truth, &ts, &spec(), &truth.abstraction());
    assert_eq!(r.failing_modes(), vec![ModeId(0), ModeId(1), ModeId(4)]);
    assert!(r.guard_violations.is_empty());
    assert_eq!(r.coarser, Some(true));
}

#[test]
fn fixture_files_round_trip() {
    let f = TraceFile::load(fixture("flights.json")).unwrap();
    assert_eq!(TraceFile::from_json(&f.to_json()).unwrap(), f);
    let a = automaton("truth.json");
    assert_eq!(conservative_ha::HybridAutomaton::from_json(&a.to_json()).unwrap(), a);
}
