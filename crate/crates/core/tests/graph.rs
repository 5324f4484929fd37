use std::collections::{HashSet, VecDeque};

use bidsolve_core::game_graph::{race_graph, GameSelector, GraphBuilder, GraphError};
use bidsolve_core::tictactoe::{move_to_cell, tictactoe_graph};
use bidsolve_core::{GameGraph, Player};

const LINES: [[usize; 3]; 8] = [
    [0, 1, 2],
    [3, 4, 5],
    [6, 7, 8],
    [0, 3, 6],
    [1, 4, 7],
    [2, 5, 8],
    [0, 4, 8],
    [2, 4, 6],
];

fn settled(board: &[u8; 9]) -> bool {
    LINES.iter().any(|l| board[l[0]] != b'.' && l.iter().all(|&c| board[c] == board[l[0]]))
        || board.iter().all(|&c| c != b'.')
}

/// Boards reachable when either mark may be placed next.
fn open_boards() -> usize {
    let mut seen = HashSet::new();
    let mut queue = VecDeque::from([[b'.'; 9]]);
    seen.insert([b'.'; 9]);
    while let Some(b) = queue.pop_front() {
        if settled(&b) {
            continue;
        }
        for cell in 0..9 {
            if b[cell] != b'.' {
                continue;
            }
            for mark in *b"XO" {
                let mut next = b;
                next[cell] = mark;
                if seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
    }
    seen.iter().filter(|b| !settled(b)).count()
}

#[test]
fn tictactoe_vertex_count_matches_direct_enumeration() {
    let g = tictactoe_graph(Player::B);
    assert_eq!(g.len(), open_boards() + 2);
    assert_eq!(g.max_depth(), 9);
}

#[test]
fn tictactoe_moves_place_marks() {
    let g = tictactoe_graph(Player::B);
    let v = g.id("XX.OO....").unwrap();
    assert_eq!(move_to_cell(&g, v, Player::A, 2), Some(g.win_a()));
    assert_eq!(move_to_cell(&g, v, Player::B, 5), Some(g.win_b()));
    assert_eq!(move_to_cell(&g, v, Player::A, 0), None);
    let w = move_to_cell(&g, v, Player::A, 8).unwrap();
    assert_eq!(g.name(w), "XX.OO...X");
}

#[test]
fn draws_go_to_the_chosen_player() {
    for draws in [Player::A, Player::B] {
        let g = tictactoe_graph(draws);
        let v = g.id("XOXXOOOX.").unwrap();
        let w = move_to_cell(&g, v, Player::A, 8).unwrap();
        assert_eq!(g.terminal_winner(w), Some(draws));
    }
}

/// Every A-only path from the root of race(k, m) has exactly k moves.
fn a_path_lengths(g: &GameGraph) -> HashSet<u32> {
    let mut out = HashSet::new();
    let mut stack = vec![(g.start(), 0)];
    while let Some((v, n)) = stack.pop() {
        if v == g.win_a() {
            out.insert(n);
            continue;
        }
        for &w in g.edges(v, Player::A) {
            stack.push((w, n + 1));
        }
    }
    out
}

#[test]
fn race_paths() {
    for (k, m) in [(1, 1), (3, 2), (2, 5)] {
        let g = race_graph(k, m).unwrap();
        assert_eq!(a_path_lengths(&g), HashSet::from([k]));
        assert_eq!(g.len() as u32, k * m + 2);
        assert_eq!(g.height(g.start()), k + m - 1);
    }
    assert!(matches!(race_graph(0, 2), Err(GraphError::InvalidParameter(_))));
}

#[test]
fn validation_errors() {
    let mut b = GraphBuilder::default();
    let (s, t) = (b.vertex("s"), b.vertex("t"));
    b.edge(s, t, Player::A).edge(t, s, Player::B);
    assert!(matches!(b.build(), Err(GraphError::CyclicGraph(_))));

    let mut b = GraphBuilder::default();
    let s = b.vertex("s");
    let (wa, wb) = (b.win_a(), b.win_b());
    b.edge(s, wa, Player::A).edge(wa, wb, Player::B);
    assert!(matches!(b.build(), Err(GraphError::DanglingTerminalEdge(_))));

    let mut b = GraphBuilder::default();
    let (s, t) = (b.vertex("s"), b.vertex("t"));
    let wa = b.win_a();
    b.edge(s, wa, Player::A).edge(s, t, Player::B);
    assert!(matches!(b.build(), Err(GraphError::DeadEndVertex(_))));
}

#[test]
fn json_round_trip_keeps_hash() {
    let g = race_graph(2, 3).unwrap();
    let text = serde_json::to_string(&g.to_spec()).unwrap();
    let back = GameGraph::from_json(&text).unwrap();
    assert_eq!(back.hash(), g.hash());
    assert_eq!(back.start(), back.id("2,3").unwrap());
    assert_ne!(race_graph(3, 2).unwrap().hash(), g.hash());
}

#[test]
fn selectors() {
    for s in ["race:2,3", "ttt", "ttt:A"] {
        let sel: GameSelector = s.parse().unwrap();
        assert_eq!(sel.to_string(), s);
    }
    assert!("race:2".parse::<GameSelector>().is_err());
    assert!("chess".parse::<GameSelector>().is_err());
}
