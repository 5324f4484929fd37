use bidsolve_core::dag_solver::{solve_game, solve_game_with, SolveOptions};
use bidsolve_core::equilibrium::solve_turn;
use bidsolve_core::game_graph::race_graph;
use bidsolve_core::scalar::ratio;
use bidsolve_core::table_io::{load_table, save_table};
use bidsolve_core::{ExactPayoff, ExactTable, Payoff, Payoff32, Scalar, ToeplitzPayoff, ValueTable};
use num_rational::BigRational;

#[test]
fn exact_and_float_tables_agree() {
    let g = race_graph(2, 2).unwrap();
    let opts = SolveOptions::default();
    let exact: ExactTable = solve_game_with(&g, 5, ratio(1, 100), &opts).unwrap();
    let float = solve_game(
        &g,
        5,
        &SolveOptions {
            x: Some(0.01),
            ..SolveOptions::default()
        },
    )
    .unwrap();
    let single: ValueTable<f32> = solve_game_with(&g, 5, 0.01f32, &opts).unwrap();
    for ((e, f), s) in exact.values.iter().zip(&float.values).zip(&single.values) {
        assert!((e.to_f64() - f).abs() < 1e-12);
        assert!((*s as f64 - f).abs() < 1e-4);
    }
    assert_eq!(exact.lengths, float.lengths);
}

#[test]
fn exact_turn_has_rational_value() {
    let m: ExactPayoff =
        ToeplitzPayoff::from_diagonal(2, 2, vec![ratio(0, 1), ratio(1, 1), ratio(1, 2)]).unwrap();
    let r = solve_turn(&m).unwrap();
    assert_eq!(r.value, ratio(2, 3));
    assert_eq!(r.s_a.probs, vec![ratio(1, 3), ratio(2, 3)]);
    assert_eq!(r.s_b.probs, vec![ratio(2, 3), ratio(1, 3)]);

    let f: Payoff = m.map(|v| v.to_f64());
    let s: Payoff32 = m.map(|v| v.to_f64() as f32);
    assert!((solve_turn(&f).unwrap().value - 2.0 / 3.0).abs() < 1e-15);
    assert!((solve_turn(&s).unwrap().value - 2.0 / 3.0).abs() < 1e-6);
}

#[test]
fn exact_table_round_trips() {
    let g = race_graph(2, 1).unwrap();
    let t: ExactTable = solve_game_with(&g, 4, ratio(1, 1000), &SolveOptions::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exact.json");
    save_table(&t, &path).unwrap();
    let back: ValueTable<BigRational> = load_table(&path, Some(g.hash())).unwrap();
    assert_eq!(back, t);
}
