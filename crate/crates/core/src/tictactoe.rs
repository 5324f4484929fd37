//! Bidding Tic-Tac-Toe. A places X, B places O.
//!
//! Because the bid winner chooses who moves, X and O counts need not
//! alternate; every board reachable that way is a vertex. Boards are named by
//! nine characters in row-major order (`X`, `O`, `.`).

use std::collections::{HashMap, VecDeque};

use crate::game_graph::{GameGraph, GraphBuilder, Player, VertexId};

pub type Board = [Cell; 9];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cell {
    Empty,
    X,
    O,
}

pub const LINES: [[usize; 3]; 8] = [
    [0, 1, 2],
    [3, 4, 5],
    [6, 7, 8],
    [0, 3, 6],
    [1, 4, 7],
    [2, 5, 8],
    [0, 4, 8],
    [2, 4, 6],
];

pub const EMPTY_BOARD: Board = [Cell::Empty; 9];

pub fn board_name(board: &Board) -> String {
    board
        .iter()
        .map(|c| match c {
            Cell::Empty => '.',
            Cell::X => 'X',
            Cell::O => 'O',
        })
        .collect()
}

/// Parses a nine-character board name; `None` for anything else (terminals).
pub fn parse_board(name: &str) -> Option<Board> {
    let chars: Vec<char> = name.chars().collect();
    if chars.len() != 9 {
        return None;
    }
    let mut board = EMPTY_BOARD;
    for (cell, ch) in board.iter_mut().zip(chars) {
        *cell = match ch {
            '.' => Cell::Empty,
            'X' => Cell::X,
            'O' => Cell::O,
            _ => return None,
        };
    }
    Some(board)
}

pub fn has_line(board: &Board, mark: Cell) -> bool {
    LINES.iter().any(|line| line.iter().all(|&i| board[i] == mark))
}

pub fn is_full(board: &Board) -> bool {
    board.iter().all(|&c| c != Cell::Empty)
}

fn mark_of(p: Player) -> Cell {
    match p {
        Player::A => Cell::X,
        Player::B => Cell::O,
    }
}

/// Builds the bidding Tic-Tac-Toe graph; full boards without a line go to
/// `draw_winner`'s terminal.
pub fn tictactoe_graph(draw_winner: Player) -> GameGraph {
    let mut b = GraphBuilder::default();
    let draw_terminal = match draw_winner {
        Player::A => b.win_a(),
        Player::B => b.win_b(),
    };
    let root = b.vertex(&board_name(&EMPTY_BOARD));
    b.start(root);

    let mut ids: HashMap<Board, VertexId> = HashMap::from([(EMPTY_BOARD, root)]);
    let mut queue = VecDeque::from([EMPTY_BOARD]);
    while let Some(board) = queue.pop_front() {
        let from = ids[&board];
        for player in [Player::A, Player::B] {
            let mark = mark_of(player);
            for cell in 0..9 {
                if board[cell] != Cell::Empty {
                    continue;
                }
                let mut next = board;
                next[cell] = mark;
                let to = if has_line(&next, mark) {
                    match player {
                        Player::A => b.win_a(),
                        Player::B => b.win_b(),
                    }
                } else if is_full(&next) {
                    draw_terminal
                } else if let Some(&id) = ids.get(&next) {
                    id
                } else {
                    let id = b.vertex(&board_name(&next));
                    ids.insert(next, id);
                    queue.push_back(next);
                    id
                };
                b.edge(from, to, player);
            }
        }
    }
    b.build().expect("tic-tac-toe graph is well formed")
}

/// The cell where `from` and `to` differ, if they differ in exactly one.
pub fn placed_cell(from: &Board, to: &Board) -> Option<usize> {
    let diff: Vec<usize> = (0..9).filter(|&i| from[i] != to[i]).collect();
    (diff.len() == 1).then(|| diff[0])
}

/// The successor of `v` reached by `player` marking `cell`.
pub fn move_to_cell(g: &GameGraph, v: VertexId, player: Player, cell: usize) -> Option<VertexId> {
    let board = parse_board(g.name(v))?;
    if cell >= 9 || board[cell] != Cell::Empty {
        return None;
    }
    let mut next = board;
    next[cell] = mark_of(player);
    if has_line(&next, next[cell]) {
        return Some(match player {
            Player::A => g.win_a(),
            Player::B => g.win_b(),
        });
    }
    if is_full(&next) {
        // Draw terminal is whichever successor is terminal.
        return g.edges(v, player).iter().copied().find(|&w| g.is_terminal(w));
    }
    g.id(&board_name(&next)).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_board_has_nine_moves_each() {
        let g = tictactoe_graph(Player::B);
        let root = g.start();
        assert_eq!(g.name(root), ".........");
        assert_eq!(g.edges(root, Player::A).len(), 9);
        assert_eq!(g.edges(root, Player::B).len(), 9);
    }

    #[test]
    fn completing_row_collapses_to_win() {
        let g = tictactoe_graph(Player::B);
        let v = g.id("XX.OO....").unwrap();
        assert_eq!(move_to_cell(&g, v, Player::A, 2), Some(g.win_a()));
        assert_eq!(move_to_cell(&g, v, Player::B, 5), Some(g.win_b()));
        assert!(g.id("XXX......").is_err());
    }

    #[test]
    fn draws_go_to_configured_player() {
        let gb = tictactoe_graph(Player::B);
        let ga = tictactoe_graph(Player::A);
        // One empty cell; filling it with X or O draws.
        let name = "XOXXOOOX.";
        let board = parse_board(name).unwrap();
        assert!(!has_line(&board, Cell::X) && !has_line(&board, Cell::O));
        let vb = gb.id(name).unwrap();
        assert_eq!(gb.edges(vb, Player::A), &[gb.win_b()]);
        let va = ga.id(name).unwrap();
        assert_eq!(ga.edges(va, Player::B), &[ga.win_a()]);
    }

    #[test]
    fn board_names_round_trip() {
        let b = parse_board("X.O......").unwrap();
        assert_eq!(board_name(&b), "X.O......");
        assert!(parse_board("WIN_A").is_none());
        assert_eq!(placed_cell(&EMPTY_BOARD, &b), None);
        let mut one = EMPTY_BOARD;
        one[4] = Cell::X;
        assert_eq!(placed_cell(&EMPTY_BOARD, &one), Some(4));
    }
}
