//! Property tests over random valid Kato graphs.

use kato_core::bass_serre::{abelian_invariants, presentation};
use kato_core::group::injections;
use kato_core::io::{emit_graph, parse_graph};
use kato_core::kato::random::{random_graph, RandomGraphSpec};
use kato_core::kato::{
    canonical_form, is_stable, paste, slide_cusp, slide_edge, stable_model, validate, KatoGraph,
};
use kato_core::Rational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn graph(seed: u64) -> KatoGraph {
    random_graph(&mut ChaCha8Rng::seed_from_u64(seed), &RandomGraphSpec::default())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn stabilizing_preserves_invariants(seed in any::<u64>()) {
        let k = graph(seed);
        let before = validate(&k).unwrap();
        let s = stable_model(&k).unwrap();
        let after = validate(&s).unwrap();
        prop_assert_eq!(before, after);
        prop_assert!(is_stable(&s));
        prop_assert_eq!(stable_model(&s).unwrap(), s);
    }

    #[test]
    fn slides_keep_the_key(seed in any::<u64>(), steps in 1usize..12) {
        let k = graph(seed);
        let key = canonical_form(&k).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let mut moved = k.clone();
        for _ in 0..steps {
            if !moved.edges.is_empty() && (moved.cusps.is_empty() || rng.gen_bool(0.5)) {
                let e = &moved.edges[rng.gen_range(0..moved.edges.len())];
                let end = rng.gen_range(0..2);
                let by = rng.gen_range(0..e.maps[end].target().order());
                moved = slide_edge(&moved, e.id, end, by).unwrap();
            } else if !moved.cusps.is_empty() {
                let c = &moved.cusps[rng.gen_range(0..moved.cusps.len())];
                let by = rng.gen_range(0..c.map.target().order());
                moved = slide_cusp(&moved, c.id, by).unwrap();
            }
        }
        prop_assert_eq!(validate(&moved).unwrap(), validate(&k).unwrap());
        prop_assert_eq!(canonical_form(&moved).unwrap(), key);
    }

    #[test]
    fn text_round_trip(seed in any::<u64>()) {
        let k = graph(seed);
        let text = emit_graph(&k);
        let back = parse_graph(&text).unwrap();
        prop_assert_eq!(&back, &k);
        prop_assert_eq!(emit_graph(&back), text);
    }

    #[test]
    fn abelianization_routes_agree(seed in any::<u64>()) {
        let k = graph(seed);
        let p = presentation(&k).unwrap();
        prop_assert!(p.is_well_formed());
        prop_assert_eq!(abelian_invariants(&k).unwrap(), p.abelianization());
    }

    #[test]
    fn pasting_adds_up(a in any::<u64>(), b in any::<u64>()) {
        let (g1, g2) = (graph(a), graph(b));
        let pair = g1.cusps.iter().find_map(|c1| {
            g2.cusps.iter().find(|c2| c2.index() == c1.index()).map(|c2| (c1, c2))
        });
        prop_assume!(pair.is_some());
        let (c1, c2) = pair.unwrap();
        let m = injections(&c1.group, &c2.group).into_iter().find(|m| m.is_bijective()).unwrap();
        let p = paste(&g1, c1.id, &g2, c2.id, &m).unwrap();
        let inv = validate(&p).unwrap();
        prop_assert_eq!(inv.cusp_count + 2, g1.cusps.len() + g2.cusps.len());
        prop_assert_eq!(inv.betti, g1.betti() + g2.betti());
        let edge = Rational::new(1.into(), c1.index().into());
        prop_assert_eq!(inv.euler_char, g1.euler_char() + g2.euler_char() - edge);
    }
}
