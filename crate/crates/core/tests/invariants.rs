use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use thetalab::adelic::{region_of_divisor, FakeAdeles, LiftedPlace, LocalRegion, RegionDescriptor};
use thetalab::arakelov::{BasePlace, Divisor, TateTable};
use thetalab::exactnum::{int, rat, LogValue, Rational};
use thetalab::indet::{
    enumerate_procession_automorphisms, ind1_act, ind1_orbit_union, ind2_saturate, ind3_bound_region, Ind3Params,
    LogShellConfig,
};
use thetalab::tate::TateLocalData;

const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

fn small(rng: &mut ChaCha8Rng) -> Rational {
    rat(rng.gen_range(-20..=20), rng.gen_range(1..=8))
}

/// Two places of degree 1 over each of two primes, in a quadratic base.
fn split_context(rng: &mut ChaCha8Rng) -> FakeAdeles {
    let primes: Vec<u64> = PRIMES.choose_multiple(rng, 2).copied().collect();
    let lifts = primes
        .iter()
        .flat_map(|&p| (0..2).map(move |i| BasePlace::finite_with(p, 1, 1, i).unwrap()));
    let lifts: Vec<LiftedPlace> = lifts
        .map(|v| LiftedPlace::new(v, rng.gen_range(1..=4), rng.gen_range(1..=2)).unwrap())
        .collect();
    FakeAdeles::new(2, lifts).unwrap()
}

fn random_region(rng: &mut ChaCha8Rng, factors: usize) -> LocalRegion {
    let shells: Vec<Rational> = (0..factors)
        .map(|_| rat(rng.gen_range(0..5), rng.gen_range(1..=3)))
        .collect();
    match rng.gen_range(0..4) {
        0 => LocalRegion::ring(small(rng)),
        1 => LocalRegion::polydisc(small(rng)),
        2 => LocalRegion::lattice(small(rng), shells, rat(-rng.gen_range(0..3), 2)).unwrap(),
        _ => LocalRegion::orbit(
            LocalRegion::lattice(small(rng), shells, int(0)).unwrap(),
            rat(rng.gen_range(0..4), 5),
            1,
        )
        .unwrap(),
    }
}

fn random_descriptor(rng: &mut ChaCha8Rng, level: usize) -> RegionDescriptor {
    let ctx = split_context(rng);
    let mut r = RegionDescriptor::full(level, 2);
    for p in ctx.primes() {
        for idx in ctx.indices(p, level) {
            if rng.gen_bool(0.4) {
                r.insert(idx, random_region(rng, level + 1)).unwrap();
            }
        }
    }
    r
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// `−deg(D) = ln ν̄(O(−D))` at every level up to 4 and every peel index.
    #[test]
    fn divisor_region_conversion(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = split_context(&mut rng);
        let entries: Vec<(BasePlace, Rational)> =
            ctx.lifted().keys().map(|v| (*v, small(&mut rng))).collect();
        let d = Divisor::from_entries(2, entries.clone()).unwrap();
        // each place has degree 1 in a base of degree 2
        let want = LogValue::from_parts(
            entries.iter().map(|(v, a)| (v.prime().unwrap(), -a / int(2))),
            int(0),
        );
        prop_assert_eq!(-d.normalized_degree(), want.clone());
        for level in 0..=4 {
            for peel in 0..=level {
                let r = region_of_divisor(&d, level, peel, &ctx).unwrap();
                prop_assert_eq!(r.ln_nu().unwrap(), want.clone());
            }
        }
    }

    #[test]
    fn orbit_union_is_idempotent_and_fixed(seed in any::<u64>(), level in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = random_descriptor(&mut rng, level);
        let u = ind1_orbit_union(&r).unwrap();
        prop_assert_eq!(ind1_orbit_union(&u).unwrap(), u.clone());
        for g in enumerate_procession_automorphisms(level).unwrap() {
            prop_assert_eq!(ind1_act(&g, &u).unwrap(), u.clone());
        }
    }

    #[test]
    fn ind2_keeps_volume(seed in any::<u64>(), level in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = random_descriptor(&mut rng, level);
        let aligned = r.summands().values().all(LocalRegion::is_lattice_aligned);
        let Ok(s) = ind2_saturate(&r) else {
            prop_assert!(!aligned);
            return Ok(());
        };
        prop_assert!(aligned && s.ind2_closed());
        prop_assert_eq!(s.ln_nu().ok(), r.ln_nu().ok());
        prop_assert_eq!(s.ln_nu_upper(), r.ln_nu_upper());
    }

    /// The hull of the bound region is that of its `N = n0` term.
    #[test]
    fn ind3_hull_is_first_term(
        ord_q in 1u64..40,
        l in prop::sample::select(vec![5u64, 7, 11, 13, 17]),
        j_pick in 0usize..8,
        n0 in 0u32..=1,
        shell in 0i64..6,
        e in 1u32..=4,
    ) {
        let j = 1 + j_pick % ((l as usize - 1) / 2);
        let p = if l == 11 { 13 } else { 11 };
        let tate = TateTable::over_q([TateLocalData { prime: p, ord_q, split: true }]);
        let ctx = FakeAdeles::over_q([(p, e, 1)]).unwrap();
        let mut logshell = LogShellConfig::default();
        logshell.place_volumes.insert(BasePlace::rational(p), int(shell));
        logshell.default_defect = Some(int(0));
        let params = Ind3Params::new(l, tate, n0, logshell.clone()).unwrap();
        let bound = ind3_bound_region(&params, j, &ctx).unwrap();

        let mut first = RegionDescriptor::full(j, 1);
        for idx in ctx.indices(p, j) {
            let step = rat((ord_q * (j * j) as u64) as i64, 2 * l as i64);
            let term = logshell.lattice(&idx).unwrap().scaled(&(step * int(n0 as i64)));
            first.insert(idx, term).unwrap();
        }
        prop_assert_eq!(bound.hull(), first.hull());
    }
}
