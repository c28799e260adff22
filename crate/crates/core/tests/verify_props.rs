mod common;

use levelta_core::dynsys::find_equilibria;
use levelta_core::expr::parse;
use levelta_core::io::parse_model;
use levelta_core::verify::{
    check_completeness, check_critical_points, check_levelset_sync, check_soundness, Status,
};
use levelta_core::{abstract_system, Grid, Options, PartitionFunction};
use proptest::prelude::*;

const NODE: &str = "\
system {
  dim = 2
  f1 = -x1
  f2 = -2*x2
  domain = [-4, 4] x [-4, 4]
}
partition {
  name = r
  phi = x1^2 + x2^2
  levels = [0, 1, 4, 32]
}
";

fn small() -> Options {
    Options {
        n_traj: 40,
        t_grid_points: 20,
        ..Options::default()
    }
}

#[test]
fn complete_saddle_abstraction_is_sound() {
    let m = common::saddle();
    let o = small();
    let a = abstract_system(&m.system, m.families.clone(), &o).unwrap();
    let grid = Grid::new(m.system.domain(), o.grid).unwrap();
    let c = check_completeness(&m.system, a.partition.families(), &a.tables, &grid, &o).unwrap();
    assert_eq!(c.status, Status::Pass, "{c}");
    let s = check_soundness(
        &m.system,
        &a.partition,
        &a.ta,
        o.n_traj,
        &o.t_grid(),
        o.seed,
        o.rk4_step,
    )
    .unwrap();
    assert_eq!(s.status, Status::Pass, "{s} {:?}", s.witnesses);
}

#[test]
fn unsynchronized_levels_give_spread_transit_times() {
    let m = parse_model(NODE).unwrap();
    let o = Options {
        extra_level_pairs: 0,
        ..Options::default()
    };
    let grid = Grid::new(m.system.domain(), o.grid).unwrap();
    let pf = &m.families[0];
    for a in [1.0, 4.0] {
        let v = check_levelset_sync(pf, &grid, a, o.sync_samples, o.tol_grad).unwrap();
        assert!(v.failed(), "{v}");
    }
    let a = abstract_system(&m.system, m.families.clone(), &o).unwrap();
    let c = check_completeness(&m.system, a.partition.families(), &a.tables, &grid, &o).unwrap();
    assert!(c.failed(), "{c}");
    assert!(a.tables[0].slices.iter().any(|s| s.stats.spread() > 0.1));
}

#[test]
fn verdicts_are_deterministic() {
    let m = common::saddle();
    let o = small();
    let run = || {
        let a = abstract_system(&m.system, m.families.clone(), &o).unwrap();
        let s = check_soundness(
            &m.system,
            &a.partition,
            &a.ta,
            o.n_traj,
            &o.t_grid(),
            o.seed,
            o.rk4_step,
        )
        .unwrap();
        serde_json::to_string(&s).unwrap()
    };
    assert_eq!(run(), run());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn critical_points_hold_only_for_centered_phi(shift in -2.0..2.0f64) {
        let m = common::saddle();
        let eq = find_equilibria(&m.system, m.options.equilibrium_seeds).unwrap();
        prop_assert_eq!(eq.len(), 1);
        let src = format!("(x1 - ({shift}))^2");
        let pf = PartitionFunction::new("p", parse(&src, 2).unwrap(), vec![0.0, 36.0], &m.system)
            .unwrap();
        let v = check_critical_points(&pf, &eq, m.options.tol_grad).unwrap();
        let expect_pass = 2.0 * shift.abs() <= m.options.tol_grad;
        prop_assert_eq!(v.pass, expect_pass, "{}", v);
        if !expect_pass {
            prop_assert!(!v.witnesses.is_empty());
        }
    }
}
