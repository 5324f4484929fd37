//! The combinatorial game underneath a bidding game: an acyclic directed
//! graph whose edges are colored by the player allowed to traverse them, with
//! one sink per player marking that player's win.
//!
//! Vertices are dense indices into the graph; names are kept for I/O. Edge
//! lists are ordered by insertion and that order is the tie-break order used
//! everywhere a best successor is chosen.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::tictactoe;

pub type VertexId = usize;

pub const WIN_A: &str = "WIN_A";
pub const WIN_B: &str = "WIN_B";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    A,
    B,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::A => Player::B,
            Player::B => Player::A,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::A => f.write_str("A"),
            Player::B => f.write_str("B"),
        }
    }
}

impl FromStr for Player {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" | "a" => Ok(Player::A),
            "B" | "b" => Ok(Player::B),
            other => Err(GraphError::InvalidParameter(format!("unknown player {other:?}"))),
        }
    }
}

/// Chip holdings of both players. The total stays fixed for a whole game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChipState {
    pub a: u32,
    pub b: u32,
}

impl ChipState {
    pub fn new(a: u32, b: u32) -> Self {
        ChipState { a, b }
    }

    /// Split `total` so that A holds `a` chips.
    pub fn split(total: u32, a: u32) -> Option<Self> {
        (a <= total).then(|| ChipState { a, b: total - a })
    }

    pub fn total(&self) -> u32 {
        self.a + self.b
    }

    pub fn of(&self, p: Player) -> u32 {
        match p {
            Player::A => self.a,
            Player::B => self.b,
        }
    }

    /// Tie-break holder on equal bids: the richer player, A when even.
    pub fn advantage(&self) -> Player {
        if self.a >= self.b {
            Player::A
        } else {
            Player::B
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph contains a cycle through vertex {0:?}")]
    CyclicGraph(String),
    #[error("terminal vertex {0:?} has an outgoing edge")]
    DanglingTerminalEdge(String),
    #[error("non-terminal vertex {0:?} has no outgoing edge")]
    DeadEndVertex(String),
    #[error("no terminal is reachable from vertex {0:?}")]
    UnreachableTerminal(String),
    #[error("vertex {0:?} is terminal")]
    TerminalVertex(String),
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cannot read game spec: {0}")]
    Io(String),
}

/// JSON ingestion format for arbitrary games.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSpec>,
    #[serde(default = "default_win_a")]
    pub win_a: String,
    #[serde(default = "default_win_b")]
    pub win_b: String,
    /// Root position; defaults to the first listed non-terminal vertex.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub from: String,
    pub to: String,
    pub player: Player,
}

fn default_win_a() -> String {
    WIN_A.to_string()
}

fn default_win_b() -> String {
    WIN_B.to_string()
}

/// Incremental construction; [`GraphBuilder::build`] runs validation.
#[derive(Clone, Debug)]
pub struct GraphBuilder {
    names: Vec<String>,
    index: HashMap<String, VertexId>,
    edges_a: Vec<Vec<VertexId>>,
    edges_b: Vec<Vec<VertexId>>,
    win_a: VertexId,
    win_b: VertexId,
    start: Option<VertexId>,
}

impl Default for GraphBuilder {
    fn default() -> Self {
        Self::new(WIN_A, WIN_B)
    }
}

impl GraphBuilder {
    pub fn new(win_a: &str, win_b: &str) -> Self {
        let mut builder = GraphBuilder {
            names: Vec::new(),
            index: HashMap::new(),
            edges_a: Vec::new(),
            edges_b: Vec::new(),
            win_a: 0,
            win_b: 0,
            start: None,
        };
        builder.win_a = builder.vertex(win_a);
        builder.win_b = builder.vertex(win_b);
        builder
    }

    /// Returns the id of `name`, creating the vertex on first use.
    pub fn vertex(&mut self, name: &str) -> VertexId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        self.edges_a.push(Vec::new());
        self.edges_b.push(Vec::new());
        id
    }

    pub fn win_a(&self) -> VertexId {
        self.win_a
    }

    pub fn win_b(&self) -> VertexId {
        self.win_b
    }

    /// Adds `from -> to` for `player`; repeated edges are ignored.
    pub fn edge(&mut self, from: VertexId, to: VertexId, player: Player) -> &mut Self {
        let list = match player {
            Player::A => &mut self.edges_a[from],
            Player::B => &mut self.edges_b[from],
        };
        if !list.contains(&to) {
            list.push(to);
        }
        self
    }

    pub fn start(&mut self, v: VertexId) -> &mut Self {
        self.start = Some(v);
        self
    }

    pub fn build(self) -> Result<GameGraph, GraphError> {
        validate_graph(self)
    }
}

#[derive(Clone, Debug)]
pub struct GameGraph {
    names: Vec<String>,
    index: HashMap<String, VertexId>,
    edges_a: Vec<Vec<VertexId>>,
    edges_b: Vec<Vec<VertexId>>,
    win_a: VertexId,
    win_b: VertexId,
    start: VertexId,
    topo: Vec<VertexId>,
    height: Vec<u32>,
    hash: String,
}

/// Checks the structural invariants and precomputes the topological order.
pub fn validate_graph(spec: GraphBuilder) -> Result<GameGraph, GraphError> {
    let GraphBuilder {
        names,
        index,
        edges_a,
        edges_b,
        win_a,
        win_b,
        start,
    } = spec;
    let n = names.len();
    let is_terminal = |v: VertexId| v == win_a || v == win_b;

    for v in [win_a, win_b] {
        if !edges_a[v].is_empty() || !edges_b[v].is_empty() {
            return Err(GraphError::DanglingTerminalEdge(names[v].clone()));
        }
    }
    for v in 0..n {
        if !is_terminal(v) && edges_a[v].is_empty() && edges_b[v].is_empty() {
            return Err(GraphError::DeadEndVertex(names[v].clone()));
        }
    }

    // Kahn's algorithm, smallest id first for a stable order.
    let mut indegree = vec![0usize; n];
    for v in 0..n {
        for &w in edges_a[v].iter().chain(&edges_b[v]) {
            indegree[w] += 1;
        }
    }
    let mut queue: VecDeque<VertexId> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut topo = Vec::with_capacity(n);
    while let Some(v) = queue.pop_front() {
        topo.push(v);
        for &w in edges_a[v].iter().chain(&edges_b[v]) {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    if topo.len() < n {
        let culprit = (0..n).find(|&v| indegree[v] > 0).expect("leftover vertex");
        return Err(GraphError::CyclicGraph(names[culprit].clone()));
    }

    // Longest distance to a terminal, processed sinks first.
    let mut height = vec![0u32; n];
    let mut reaches = vec![false; n];
    for &v in topo.iter().rev() {
        if is_terminal(v) {
            reaches[v] = true;
            continue;
        }
        for &w in edges_a[v].iter().chain(&edges_b[v]) {
            height[v] = height[v].max(height[w] + 1);
            reaches[v] |= reaches[w];
        }
        if !reaches[v] {
            return Err(GraphError::UnreachableTerminal(names[v].clone()));
        }
    }

    let start = match start {
        Some(s) => s,
        None => (0..n)
            .find(|&v| !is_terminal(v))
            .ok_or_else(|| GraphError::InvalidParameter("graph has no playable vertex".into()))?,
    };

    let mut graph = GameGraph {
        names,
        index,
        edges_a,
        edges_b,
        win_a,
        win_b,
        start,
        topo,
        height,
        hash: String::new(),
    };
    graph.hash = graph.compute_hash();
    Ok(graph)
}

impl GameGraph {
    pub fn from_spec(spec: &GameSpec) -> Result<Self, GraphError> {
        let mut b = GraphBuilder::new(&spec.win_a, &spec.win_b);
        for v in &spec.vertices {
            b.vertex(v);
        }
        let lookup = |b: &GraphBuilder, name: &str| {
            b.index
                .get(name)
                .copied()
                .ok_or_else(|| GraphError::UnknownVertex(name.to_string()))
        };
        for e in &spec.edges {
            let from = lookup(&b, &e.from)?;
            let to = lookup(&b, &e.to)?;
            b.edge(from, to, e.player);
        }
        if let Some(s) = &spec.start {
            let s = lookup(&b, s)?;
            b.start(s);
        }
        b.build()
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let spec: GameSpec =
            serde_json::from_str(text).map_err(|e| GraphError::Io(e.to_string()))?;
        Self::from_spec(&spec)
    }

    pub fn from_file(path: &Path) -> Result<Self, GraphError> {
        let text = std::fs::read_to_string(path).map_err(|e| GraphError::Io(e.to_string()))?;
        Self::from_json(&text)
    }

    pub fn to_spec(&self) -> GameSpec {
        let mut edges = Vec::new();
        for v in 0..self.len() {
            for (player, list) in [(Player::A, &self.edges_a[v]), (Player::B, &self.edges_b[v])] {
                for &w in list {
                    edges.push(EdgeSpec {
                        from: self.names[v].clone(),
                        to: self.names[w].clone(),
                        player,
                    });
                }
            }
        }
        GameSpec {
            vertices: self.names.clone(),
            edges,
            win_a: self.names[self.win_a].clone(),
            win_b: self.names[self.win_b].clone(),
            start: Some(self.names[self.start].clone()),
        }
    }

    fn compute_hash(&self) -> String {
        let bytes = serde_json::to_vec(&self.to_spec()).expect("spec serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// SHA-256 of the canonical spec; identifies the graph in saved tables.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v]
    }

    pub fn id(&self, name: &str) -> Result<VertexId, GraphError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::UnknownVertex(name.to_string()))
    }

    pub fn win_a(&self) -> VertexId {
        self.win_a
    }

    pub fn win_b(&self) -> VertexId {
        self.win_b
    }

    pub fn start(&self) -> VertexId {
        self.start
    }

    pub fn is_terminal(&self, v: VertexId) -> bool {
        v == self.win_a || v == self.win_b
    }

    /// Winner recorded by a terminal vertex.
    pub fn terminal_winner(&self, v: VertexId) -> Option<Player> {
        if v == self.win_a {
            Some(Player::A)
        } else if v == self.win_b {
            Some(Player::B)
        } else {
            None
        }
    }

    /// Sources first, terminals last.
    pub fn topological_order(&self) -> &[VertexId] {
        &self.topo
    }

    /// Longest number of moves from `v` to a terminal.
    pub fn height(&self, v: VertexId) -> u32 {
        self.height[v]
    }

    pub fn max_depth(&self) -> u32 {
        self.height.iter().copied().max().unwrap_or(0)
    }

    pub fn edges(&self, v: VertexId, p: Player) -> &[VertexId] {
        match p {
            Player::A => &self.edges_a[v],
            Player::B => &self.edges_b[v],
        }
    }

    pub fn successors(&self, v: VertexId, p: Player) -> Result<&[VertexId], GraphError> {
        if self.is_terminal(v) {
            return Err(GraphError::TerminalVertex(self.names[v].clone()));
        }
        Ok(self.edges(v, p))
    }
}

/// Race to the finish: A needs `k` moves, B needs `m`.
///
/// Vertex `"i,j"` has `i` A-moves and `j` B-moves outstanding; reaching zero
/// on either side lands on that player's terminal.
pub fn race_graph(k: u32, m: u32) -> Result<GameGraph, GraphError> {
    if k == 0 || m == 0 {
        return Err(GraphError::InvalidParameter(format!(
            "race needs positive move counts, got {k},{m}"
        )));
    }
    let mut b = GraphBuilder::default();
    let name = |i: u32, j: u32| format!("{i},{j}");
    let start = b.vertex(&name(k, m));
    b.start(start);
    for i in (1..=k).rev() {
        for j in (1..=m).rev() {
            let v = b.vertex(&name(i, j));
            let next_a = if i == 1 { b.win_a() } else { b.vertex(&name(i - 1, j)) };
            let next_b = if j == 1 { b.win_b() } else { b.vertex(&name(i, j - 1)) };
            b.edge(v, next_a, Player::A);
            b.edge(v, next_b, Player::B);
        }
    }
    b.build()
}

/// The `--game` selector: `race:k,m`, `ttt` (optionally `ttt:A` to hand
/// draws to A instead of B), or `file:<path>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GameSelector {
    Race(u32, u32),
    TicTacToe(Player),
    File(String),
}

impl FromStr for GameSelector {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GraphError::InvalidParameter(format!("unrecognized game selector {s:?}"));
        if let Some(rest) = s.strip_prefix("race:") {
            let (k, m) = rest.split_once(',').ok_or_else(bad)?;
            let k = k.trim().parse().map_err(|_| bad())?;
            let m = m.trim().parse().map_err(|_| bad())?;
            return Ok(GameSelector::Race(k, m));
        }
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(GameSelector::File(path.to_string()));
        }
        match s {
            "ttt" => Ok(GameSelector::TicTacToe(Player::B)),
            "ttt:A" => Ok(GameSelector::TicTacToe(Player::A)),
            "ttt:B" => Ok(GameSelector::TicTacToe(Player::B)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for GameSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GameSelector::Race(k, m) => write!(f, "race:{k},{m}"),
            GameSelector::TicTacToe(Player::B) => f.write_str("ttt"),
            GameSelector::TicTacToe(Player::A) => f.write_str("ttt:A"),
            GameSelector::File(p) => write!(f, "file:{p}"),
        }
    }
}

impl GameSelector {
    pub fn build(&self) -> Result<GameGraph, GraphError> {
        match self {
            GameSelector::Race(k, m) => race_graph(*k, *m),
            GameSelector::TicTacToe(draws) => Ok(tictactoe::tictactoe_graph(*draws)),
            GameSelector::File(path) => GameGraph::from_file(Path::new(path)),
        }
    }
}
