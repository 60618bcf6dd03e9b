use proptest::prelude::*;
use tildea::annulus::ArcSeed;
use tildea::engine::Seed;
use tildea::{MarkedAnnulus, Quiver, Triangulation};

fn walk(p: usize, q: usize, steps: &[usize]) -> Seed {
    let mut s = Seed::initial(Quiver::tilde_a(p, q).unwrap());
    for &k in steps {
        s = s.mutate(k % s.rank()).unwrap();
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn variables_are_positive_laurent(pq in prop::sample::select(vec![(1usize, 1usize), (2, 1), (2, 2), (3, 1)]), steps in prop::collection::vec(0usize..6, 0..7)) {
        let s = walk(pq.0, pq.1, &steps);
        for v in s.cluster() {
            prop_assert!(v.has_nonneg_numerator().unwrap());
        }
        prop_assert_eq!(s.quiver().classify_tilde_a().unwrap(), tildea::TypeLabel::TildeA { p: pq.0, q: pq.1 });
    }

    #[test]
    fn lockstep_flips_match_mutation(pq in prop::sample::select(vec![(1u32, 1u32), (2, 1), (3, 2)]), steps in prop::collection::vec(0usize..5, 0..6)) {
        let c = MarkedAnnulus::new(pq.0, pq.1).unwrap();
        let mut state = ArcSeed::initial(c).unwrap();
        for &k in &steps {
            let k = k % state.triangulation.len();
            let relation = state.triangulation.ptolemy_relation(k, state.seed.cluster()).unwrap();
            let next = state.flip(k).unwrap();
            prop_assert_eq!(&relation.exchanged().unwrap(), &next.seed.cluster()[k]);
            prop_assert_eq!(&next.triangulation.quiver().unwrap(), next.seed.quiver());
            state = next;
        }
    }

    #[test]
    fn flips_are_involutions(pq in prop::sample::select(vec![(1u32, 1u32), (2, 1), (2, 2), (3, 2)]), steps in prop::collection::vec(0usize..5, 0..8), k in 0usize..5) {
        let c = MarkedAnnulus::new(pq.0, pq.1).unwrap();
        let mut t = Triangulation::initial(c);
        for &s in &steps {
            t = t.flip(s % t.len()).unwrap().triangulation;
        }
        let k = k % t.len();
        let once = t.flip(k).unwrap();
        prop_assert_ne!(once.old_arc, once.new_arc);
        prop_assert_eq!(once.triangulation.flip(k).unwrap().triangulation, t);
    }

    #[test]
    fn denominators_count_crossings(steps in prop::collection::vec(0usize..3, 0..6)) {
        let c = MarkedAnnulus::new(2, 1).unwrap();
        let initial = Triangulation::initial(c);
        let mut state = ArcSeed::initial(c).unwrap();
        for &k in &steps {
            state = state.flip(k).unwrap();
        }
        for (arc, v) in state.triangulation.arcs().iter().zip(state.seed.cluster()) {
            let d = tildea::engine::denominator_vector(v).unwrap();
            let crossings: Vec<u32> = initial.arcs().iter().map(|a| c.crossing_number(arc, a).unwrap() as u32).collect();
            prop_assert_eq!(d, crossings);
        }
    }
}
