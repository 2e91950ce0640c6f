use moran_sweep::model::{PopulationConfig, PopulationState, StepEvent};
use proptest::prelude::*;

/// Draws an event valid for `state` from three raw indices.
fn event_from(state: &PopulationState, raw: (usize, usize, usize)) -> StepEvent {
    let n = state.size();
    let outside: Vec<usize> = (0..n).filter(|&i| !state.is_advantaged(i)).collect();
    StepEvent::new(raw.0 % n, raw.1 % n, outside[raw.2 % outside.len()])
}

proptest! {
    #[test]
    fn step_invariants_hold(
        n in 2usize..24,
        raws in prop::collection::vec((any::<usize>(), any::<usize>(), any::<usize>()), 1..300),
    ) {
        let config = PopulationConfig::new(n).with_full_matrix(true);
        let mut state = PopulationState::new(&config).unwrap();
        for raw in raws {
            if state.is_fixed() {
                break;
            }
            let before = state.clone();
            let event = event_from(&state, raw);
            let jumped = state.apply_step(event).unwrap();

            prop_assert_eq!(jumped, before.is_advantaged(event.mother));
            prop_assert_eq!(state.n_advantaged(), before.n_advantaged() + usize::from(jumped));
            prop_assert_eq!(state.time(), before.time() + 1);
            let expect = 0.5 * (before.weight1()[event.mother] + before.weight1()[event.father]);
            prop_assert_eq!(state.weight1()[event.killed], expect);

            let a = state.weights_full().unwrap();
            for i in 0..n {
                let w = state.weight1()[i];
                prop_assert!((0.0..=1.0).contains(&w));
                prop_assert_eq!(a[i * n], w);
                let row_sum: f64 = a[i * n..(i + 1) * n].iter().sum();
                prop_assert!((row_sum - 1.0).abs() <= 1e-12);
                if before.is_advantaged(i) {
                    prop_assert!(state.is_advantaged(i));
                    prop_assert_eq!(w, before.weight1()[i]);
                } else if i != event.killed {
                    prop_assert_eq!(w, before.weight1()[i]);
                }
            }
            let (b, c) = state.weight_split();
            prop_assert!(b >= 0.0 && c >= 0.0);
            prop_assert!((b + c - state.total_weight()).abs() <= 1e-12);
            prop_assert!(b + c <= n as f64);
        }
        if state.is_fixed() {
            let (_, c) = state.weight_split();
            prop_assert_eq!(c, 0.0);
        }
    }
}
