use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};

use domineering::cgt::{render_value, value};
use domineering::knowledge::{
    alternatives, atlas, explain, parse_records, seeds, Horizon, Record,
};
use domineering::search::solve_board;
use domineering::strategy::{Grid, SessionStatus, Transcript};
use domineering::{BoardSpec, Cell, Move, Player, Position, SearchLimits, Topology, ValueLimits};

use crate::engine::Engine;

#[derive(Args, Debug)]
pub struct BoardArgs {
    #[arg(long, default_value = "rect")]
    pub topology: String,
    #[arg(long)]
    pub width: u16,
    #[arg(long)]
    pub length: u16,
}

impl BoardArgs {
    pub fn spec(&self) -> anyhow::Result<BoardSpec> {
        let t: Topology = self.topology.parse()?;
        Ok(BoardSpec::new(t, self.width, self.length)?)
    }
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub board: BoardArgs,
    /// Give up after this many seconds.
    #[arg(long, default_value_t = 600)]
    pub max_time: u64,
    #[arg(long)]
    pub max_nodes: Option<u64>,
}

/// Prints the searched outcome as a knowledge-base line.
pub fn solve(args: &SolveArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let spec = args.board.spec()?;
    let mut limits = SearchLimits {
        max_time: Duration::from_secs(args.max_time),
        ..SearchLimits::default()
    };
    if let Some(n) = args.max_nodes {
        limits.max_nodes = n;
    }
    let fact = solve_board(spec, limits)?;
    eprintln!("{spec}: {}", fact.outcomes.label());
    writeln!(out, "{}", Record::Fact(fact).to_line())?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct ValueArgs {
    #[command(flatten)]
    pub board: BoardArgs,
    #[arg(long, default_value_t = 600)]
    pub max_time: u64,
}

pub fn value_cmd(args: &ValueArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let pos = Position::empty(args.board.spec()?)?;
    let limits = ValueLimits {
        max_time: Duration::from_secs(args.max_time),
        ..ValueLimits::default()
    };
    let g = value(&pos, limits).context("value not found within limits")?;
    writeln!(out, "{}", render_value(g))?;
    Ok(())
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Emit {
    Atlas,
    Traces,
    Kb,
}

#[derive(Args, Debug)]
pub struct DeriveArgs {
    /// Seed file (one JSON record per line) used in place of the built-in seeds.
    #[arg(long)]
    pub seeds: Option<PathBuf>,
    /// Longest board length considered.
    #[arg(long, default_value_t = 64)]
    pub horizon: u16,
    #[arg(long, value_enum, default_value = "atlas")]
    pub emit: Emit,
    /// Board whose derivation `--emit traces` prints, such as `rect:2x26`.
    #[arg(long)]
    pub key: Option<String>,
    /// Atlas topology.
    #[arg(long, default_value = "rect")]
    pub topology: String,
    /// Drop seed records about this board before deriving.
    #[arg(long)]
    pub without: Vec<String>,
    /// Skip searching small boards for extra seeds.
    #[arg(long)]
    pub no_search: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn derive(args: &DeriveArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let mut records = match &args.seeds {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_records(&text)?
        }
        None => seeds::catalog(),
    };
    if !args.no_search {
        records.extend(
            seeds::SeedPlan::default()
                .run(SearchLimits::default())
                .into_iter()
                .map(Record::Fact),
        );
    }
    let dropped: Vec<BoardSpec> = args.without.iter().map(|k| k.parse()).collect::<Result<_, _>>()?;
    records.retain(|r| !dropped.contains(&r.key()));
    let horizon = Horizon {
        max_length: args.horizon,
        ..Horizon::default()
    };
    let engine = Engine::from_records(records, horizon)?;
    let kb = engine.kb;
    let (solved, partial) = kb.count_by_status();
    eprintln!("{solved} boards solved, {partial} partly known");

    let text = match args.emit {
        Emit::Atlas => {
            let t: Topology = args.topology.parse()?;
            atlas(kb, t, horizon.max_width, horizon.max_length).to_text()
        }
        Emit::Traces => {
            let Some(key) = &args.key else { bail!("--emit traces needs --key") };
            let key: BoardSpec = key.parse()?;
            let tree = explain(kb, &key)?;
            let alts = alternatives(kb, &key);
            let body = serde_json::json!({ "trace": tree, "alternatives": alts });
            serde_json::to_string_pretty(&body)? + "\n"
        }
        Emit::Kb => kb.to_records().iter().map(|r| r.to_line() + "\n").collect(),
    };
    match &args.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct PlayArgs {
    #[arg(long)]
    pub width: u16,
    #[arg(long)]
    pub length: u16,
    /// `V`, `H` or `auto`.
    #[arg(long, default_value = "auto")]
    pub engine_side: String,
    /// Who moves first.
    #[arg(long, default_value = "V")]
    pub first: String,
    /// Where the transcript goes; defaults to `game-WxL.txt`.
    #[arg(long)]
    pub transcript: Option<PathBuf>,
    #[arg(long)]
    pub kb: Option<PathBuf>,
}

/// Reads `a1:a2`, `a1 a2` or `V a1:a2`.
fn parse_move(line: &str, player: Player) -> anyhow::Result<Move> {
    let mut text = line.trim();
    if let Some((p, rest)) = text.split_once(' ') {
        if p.parse::<Player>().is_ok() {
            if p.parse::<Player>()? != player {
                bail!("you are playing {player}");
            }
            text = rest.trim();
        }
    }
    let (a, b) = text
        .split_once([':', ' ', '-'])
        .context("expected two cells, such as a1:a2")?;
    let a: Cell = a.trim().parse()?;
    let b: Cell = b.trim().parse()?;
    Ok(Move::new(player, a, b))
}

/// The board with column letters across and row numbers down.
fn labeled(grid: &Grid) -> String {
    let text = grid.to_string();
    let cols = text.lines().next().map_or(0, |l| l.chars().count());
    let letters: String = (0..cols).map(|c| Cell::new(0, c as u16).to_string().trim_end_matches('1').to_string() + " ").collect();
    let mut out = format!("    {}\n", letters.trim_end());
    for (r, line) in text.lines().enumerate() {
        let cells: Vec<String> = line.chars().map(String::from).collect();
        out.push_str(&format!("{:>3} {}\n", r + 1, cells.join(" ")));
    }
    out
}

/// Plays one game on the terminal, returning its transcript.
pub fn play(
    engine: &Engine,
    args: &PlayArgs,
    input: &mut impl BufRead,
    out: &mut impl Write,
) -> anyhow::Result<Transcript> {
    let spec = BoardSpec::rect(args.width, args.length);
    let side = match args.engine_side.as_str() {
        "auto" => None,
        p => Some(p.parse::<Player>()?),
    };
    let first: Player = args.first.parse()?;
    let mut game = engine.session(spec, side, first).map_err(|e| anyhow::anyhow!("cannot play {spec}: {e}"))?;
    let human = game.engine().opponent();
    writeln!(out, "{spec}: engine plays {} ({}); you play {human}", game.engine(), game.recipe())?;
    while game.status() == SessionStatus::InProgress {
        if game.to_move() == game.engine() {
            let mv = game.engine_move()?;
            writeln!(out, "engine: {mv}")?;
            continue;
        }
        write!(out, "{}your move ({human}): ", labeled(game.grid()))?;
        out.flush()?;
        let mut line = String::new();
        if input.read_line(&mut line)? == 0 {
            bail!("input ended before the game did");
        }
        match parse_move(&line, human).and_then(|mv| game.play(mv).map_err(Into::into)) {
            Ok(()) => {}
            Err(e) => writeln!(out, "not accepted: {e}")?,
        }
    }
    if let SessionStatus::Finished(w) = game.status() {
        writeln!(out, "{}{w} wins", labeled(game.grid()))?;
    }
    let transcript = game.transcript();
    let path = args
        .transcript
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("game-{}x{}.txt", args.width, args.length)));
    std::fs::write(&path, transcript.to_string()).with_context(|| format!("writing {}", path.display()))?;
    writeln!(out, "transcript saved to {}", path.display())?;
    Ok(transcript)
}
