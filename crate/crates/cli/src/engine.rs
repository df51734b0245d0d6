//! The loaded knowledge base plus a shared strategy cache.

use std::path::Path;

use anyhow::Context;
use parking_lot::Mutex;

use domineering::knowledge::{parse_records, saturate, seeds, Horizon, KnowledgeBase, Record, RuleSet};
use domineering::strategy::{PieceLimits, PlaySession, Recipes, Strategy, StrategyError, SUPPORTED_WIDTHS};
use domineering::{BoardSpec, Player, SearchLimits, Topology};

pub struct Engine {
    pub kb: &'static KnowledgeBase,
    recipes: Mutex<Recipes<'static>>,
}

impl Engine {
    /// Saturates `records` and keeps the result for the life of the process.
    pub fn from_records(records: Vec<Record>, horizon: Horizon) -> anyhow::Result<Self> {
        let mut kb = KnowledgeBase::from_records(records).context("seeds contradict each other")?;
        saturate(&mut kb, horizon, RuleSet::default()).context("saturation found a contradiction")?;
        Ok(Engine::new(kb))
    }

    pub fn new(kb: KnowledgeBase) -> Self {
        let kb: &'static KnowledgeBase = Box::leak(Box::new(kb));
        Engine {
            kb,
            recipes: Mutex::new(Recipes::new(kb, PieceLimits::default())),
        }
    }

    /// Built-in seeds plus the small boards found by search.
    pub fn standard() -> anyhow::Result<Self> {
        Engine::from_records(seeds::standard(SearchLimits::default()), Horizon::default())
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let records = parse_records(&text).with_context(|| format!("parsing {}", path.display()))?;
        Engine::from_records(records, Horizon::default())
    }

    /// A strategy for whoever wins `spec`, per the knowledge base.
    pub fn strategy(&self, spec: BoardSpec) -> Result<Strategy, StrategyError> {
        if !SUPPORTED_WIDTHS.contains(&spec.width) {
            return Err(StrategyError::UnsupportedWidth(spec.width));
        }
        if spec.topology != Topology::Rectangle {
            return Err(StrategyError::Unavailable(spec));
        }
        let mut recipes = self.recipes.lock();
        let claim = recipes
            .known(spec.width, spec.length)
            .single_member()
            .ok_or(StrategyError::Unavailable(spec))?;
        recipes.strategy_for(spec.width, spec.length, claim)
    }

    /// A new game. With no engine side given, the engine takes whichever
    /// side wins with `first` to move.
    pub fn session(
        &self,
        spec: BoardSpec,
        engine: Option<Player>,
        first: Player,
    ) -> Result<PlaySession, StrategyError> {
        let strategy = self.strategy(spec)?;
        let engine = match engine {
            Some(p) => p,
            None => PlaySession::auto_engine(&strategy, first).ok_or(StrategyError::Unavailable(spec))?,
        };
        PlaySession::new(strategy, engine, first).map_err(|e| match e {
            StrategyError::NotAWin { spec, player, .. } => StrategyError::NotAWin {
                spec,
                player,
                outcome: self.recipes.lock().known(spec.width, spec.length),
            },
            e => e,
        })
    }
}
