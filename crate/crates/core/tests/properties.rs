use proptest::prelude::*;

use conservative_ha::analysis::{adequacy_check, connectivity_holds, project};
use conservative_ha::bench::{gen_adequate_traces, gen_tree, SpecKind, TreeBenchConfig};
use conservative_ha::construct::run_construction;
use conservative_ha::merge::{merge_automaton, MergeOptions};
use conservative_ha::traces::{accepts, random_walk, validate_omniscient, ObservableTrace, OmniscientTrace, WalkConfig};

fn config() -> impl Strategy<Value = TreeBenchConfig> {
    (1usize..=4, 1usize..=3, any::<bool>(), 0usize..10, any::<u64>()).prop_map(|(d, n, layer, k, seed)| {
        TreeBenchConfig {
            trace_count: k,
            seed,
            ..TreeBenchConfig::new(d, n, if layer { SpecKind::Layer } else { SpecKind::Id })
        }
    })
}

fn observe(ts: &[OmniscientTrace]) -> Vec<ObservableTrace> {
    ts.iter().map(OmniscientTrace::observe).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_traces_are_valid_and_adequate(c in config()) {
        let (truth, s, alpha) = gen_tree(&c).unwrap();
        let ts = gen_adequate_traces(&truth, &c).unwrap();
        prop_assert!(ts.len() >= c.trace_count);
        for t in &ts {
            prop_assert_eq!(validate_omniscient(&truth, t), Ok(()));
        }
        prop_assert!(adequacy_check(&truth, &ts, &s, &alpha).adequate());
    }

    #[test]
    fn merged_model_accepts_its_inputs(c in config()) {
        let (truth, s, _) = gen_tree(&c).unwrap();
        let ts = observe(&gen_adequate_traces(&truth, &c).unwrap());
        let st = run_construction(&ts, &s).unwrap();
        prop_assert_eq!(st.aut.edge_count() + 1, st.aut.mode_count());
        let m = merge_automaton(&st.aut, MergeOptions::default()).unwrap().automaton;
        for t in &ts {
            prop_assert!(accepts(&st.aut, t).is_some());
            prop_assert!(accepts(&m, t).is_some());
        }
        prop_assert!(m.mode_count() <= st.aut.mode_count());
        prop_assert!(connectivity_holds(&m, &truth));
    }

    #[test]
    fn projection_walks_are_accepted(c in config(), seed in any::<u64>()) {
        let (truth, s, _) = gen_tree(&c).unwrap();
        let ts = gen_adequate_traces(&truth, &c).unwrap();
        let st = run_construction(&observe(&ts), &s).unwrap();
        let m = merge_automaton(&st.aut, MergeOptions::default()).unwrap().automaton;
        let p = project(&truth, &ts).unwrap();
        for i in 0..20 {
            let w = random_walk(&p, &c.walk(), seed.wrapping_add(i)).unwrap();
            prop_assert!(accepts(&m, &w.trace).is_some());
        }
    }

    #[test]
    fn walks_of_generated_trees_are_valid(c in config(), seed in any::<u64>()) {
        let (truth, _, _) = gen_tree(&c).unwrap();
        let cfg = WalkConfig::with_max_steps(8);
        let w = random_walk(&truth, &cfg, seed).unwrap();
        prop_assert_eq!(validate_omniscient(&truth, &w), Ok(()));
        prop_assert_eq!(w.len(), c.depth + 1);
    }
}
