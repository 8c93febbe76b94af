use alloc::vec::Vec;

use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

use super::rules::{self, Outcome};
use super::{
    EngineError, Heuristics, InductionProposer, PdrAnswer, PdrConfig, Rule, RunOptions, RunStats,
    Schedule, TraceEvent, TraceSink, Verdict,
};
use crate::lattice::{
    is_conclusive_kt, is_kleene_sequence, is_kt_sequence, kt_equiv, kt_order_leq,
    CompleteLattice, KleeneSequence, KtSequence, Problem, Transformer,
};

/// Entry point for the three engines.
///
/// ```
/// use ltpdr_core::kripke::{KripkeHeuristics, KripkeStructure, PowersetLattice};
/// use ltpdr_core::{Problem, Solver, Verdict};
///
/// // 0 → 1 → 1, 2 → 2; start in 0, states 0 and 1 are safe.
/// let k = KripkeStructure::new(3, &[(0, 1), (1, 1), (2, 2)], &[0], &[0, 1]).unwrap();
/// let problem = Problem::new(PowersetLattice::new(3), |a: &_| k.forward(a), k.safe().clone());
/// let mut heuristics = KripkeHeuristics::forward(&k);
/// let answer = Solver::new(&problem).run_combined(&mut heuristics).unwrap();
/// assert_eq!(answer.verdict, Verdict::True);
/// ```
pub struct Solver<'a, L: CompleteLattice, F> {
    problem: &'a Problem<L, F>,
    options: RunOptions,
    trace: Option<&'a mut dyn TraceSink>,
    induction: Option<&'a mut dyn InductionProposer<L>>,
}

impl<'a, L, F> Solver<'a, L, F>
where
    L: CompleteLattice,
    F: Transformer<L::Elem>,
{
    pub fn new(problem: &'a Problem<L, F>) -> Self {
        Self {
            problem,
            options: RunOptions::default(),
            trace: None,
            induction: None,
        }
    }

    pub fn options(mut self, options: RunOptions) -> Self {
        self.options = options;
        self
    }

    pub fn budget(mut self, budget: u64) -> Self {
        self.options.budget = budget;
        self
    }

    pub fn schedule(mut self, schedule: Schedule) -> Self {
        self.options.schedule = schedule;
        self
    }

    pub fn check_invariants(mut self, on: bool) -> Self {
        self.options.check_invariants = on;
        self
    }

    pub fn trace(mut self, sink: &'a mut dyn TraceSink) -> Self {
        self.trace = Some(sink);
        self
    }

    /// Enables the Induction rule with the given proposer.
    pub fn induction(mut self, proposer: &'a mut dyn InductionProposer<L>) -> Self {
        self.induction = Some(proposer);
        self
    }

    /// Combined LT-PDR: searches for both a conclusive KT sequence and a
    /// conclusive Kleene sequence.
    pub fn run_combined<H>(self, heuristics: &mut H) -> Result<PdrAnswer<L::Elem>, EngineError>
    where
        H: Heuristics<L> + ?Sized,
    {
        let Solver {
            problem,
            options,
            trace,
            mut induction,
        } = self;
        let lat = &problem.lattice;
        let mut mon = Monitor::new(&options, trace);
        let mut rng = rng_for(options.schedule);
        let mut cfg = PdrConfig::initial(problem);
        mon.check_combined(problem, &cfg, Rule::Valid, None, false)?;
        // frames changed by the previous step, for the Valid scan
        let mut dirty: Option<(usize, usize)> = Some((0, 1));

        loop {
            if mon.exhausted() {
                return Ok(mon.finish(Verdict::BudgetExhausted, &cfg));
            }
            if let Some((lo, hi)) = dirty {
                if rules::conclusive_between(lat, &cfg.frames, lo.saturating_sub(1), hi).is_some() {
                    mon.record(Rule::Valid, &cfg);
                    let j = is_conclusive_kt(lat, &cfg.frames);
                    let mut answer = mon.finish(Verdict::True, &cfg);
                    answer.conclusive_index = j;
                    answer.kt_witness = Some(cfg.frames);
                    return Ok(answer);
                }
            }
            if let Some(witness) = rules::model_witness(lat, &cfg) {
                mon.record(Rule::Model, &cfg);
                let mut answer = mon.finish(Verdict::False, &cfg);
                answer.kleene_witness = Some(witness);
                return Ok(answer);
            }

            let step = mon.stats.steps() + 1;
            let before = options.check_invariants.then(|| cfg.frames.clone());
            let applied = match rng.as_mut() {
                None => combined_default_step(problem, &mut cfg, heuristics, induction.as_deref_mut(), step)?,
                Some(rng) => combined_fuzz_step(problem, &mut cfg, heuristics, induction.as_deref_mut(), rng, step)?,
            };
            let Some((rule, changed)) = applied else {
                return Ok(mon.finish(Verdict::Stuck, &cfg));
            };
            mon.record(rule, &cfg);
            let progress = matches!(rule, Rule::Unfold | Rule::Induction).then_some(()).and(before.as_ref());
            let installed = matches!(rule, Rule::Candidate | Rule::Decide);
            mon.check_combined(problem, &cfg, rule, progress, installed)?;
            dirty = changed;
        }
    }

    /// Positive LT-PDR: Valid, Unfold and Induction only. Never answers
    /// False. Each step in which the proposed Induction does not apply
    /// consumes one unit of budget.
    pub fn run_positive(self) -> Result<PdrAnswer<L::Elem>, EngineError> {
        let Solver {
            problem,
            options,
            trace,
            mut induction,
        } = self;
        let lat = &problem.lattice;
        let mut mon = Monitor::new(&options, trace);
        let mut rng = rng_for(options.schedule);
        let mut cfg = PdrConfig::initial(problem);
        mon.check_combined(problem, &cfg, Rule::Valid, None, false)?;

        loop {
            if mon.exhausted() {
                return Ok(mon.finish(Verdict::BudgetExhausted, &cfg));
            }
            if let Some(j) = is_conclusive_kt(lat, &cfg.frames) {
                mon.record(Rule::Valid, &cfg);
                let mut answer = mon.finish(Verdict::True, &cfg);
                answer.conclusive_index = Some(j);
                answer.kt_witness = Some(cfg.frames);
                return Ok(answer);
            }
            let step = mon.stats.steps() + 1;
            let unfold_enabled = lat.leq(cfg.frames.last(), &problem.alpha);
            let proposal = match (&mut induction, unfold_enabled && rng.is_none()) {
                (Some(p), false) => p.propose(&problem.query(), &cfg.frames),
                _ => None,
            };
            let induction_enabled = match &proposal {
                Some((k, x)) => rules::induction_guard(problem, &cfg.frames, *k, x).map_err(|reason| {
                    EngineError::HeuristicViolation {
                        rule: Rule::Induction,
                        step,
                        reason,
                    }
                })?,
                None => false,
            };
            let before = options.check_invariants.then(|| cfg.frames.clone());
            let rule = match (unfold_enabled, induction_enabled) {
                (true, true) => {
                    let coin = rng.as_mut().map(|r| r.random_bool(0.5)).unwrap_or(false);
                    if coin {
                        Rule::Induction
                    } else {
                        Rule::Unfold
                    }
                }
                (true, false) => Rule::Unfold,
                (false, true) => Rule::Induction,
                (false, false) if proposal.is_some() => {
                    mon.idle();
                    continue;
                }
                (false, false) => return Ok(mon.finish(Verdict::Stuck, &cfg)),
            };
            match rule {
                Rule::Unfold => {
                    rules::unfold(problem, &mut cfg);
                }
                _ => {
                    let (k, x) = proposal.expect("induction enabled");
                    rules::strengthen(lat, &mut cfg.frames, k, &x);
                }
            }
            mon.record(rule, &cfg);
            mon.check_combined(problem, &cfg, rule, before.as_ref(), false)?;
        }
    }

    /// Negative LT-PDR: Candidate, Model and Decide only, unconstrained by
    /// frames. Never answers True. The heuristics receive `⊤` in place of a
    /// frame; when Decide is not enabled or has no choice the engine restarts
    /// with Candidate.
    pub fn run_negative<H>(self, heuristics: &mut H) -> Result<PdrAnswer<L::Elem>, EngineError>
    where
        H: Heuristics<L> + ?Sized,
    {
        let Solver {
            problem,
            options,
            trace,
            ..
        } = self;
        let lat = &problem.lattice;
        let top = lat.top();
        let bot = lat.bot();
        let mut mon = Monitor::<L>::new(&options, trace);
        let mut rng = rng_for(options.schedule);
        // head first: (C_0, …, C_{n−1})
        let mut chain: Vec<L::Elem> = Vec::new();

        loop {
            if mon.exhausted() {
                return Ok(mon.finish_negative(Verdict::BudgetExhausted));
            }
            if chain.first().is_some_and(|c| lat.equiv(c, &bot)) {
                mon.record_negative(Rule::Model, chain.len());
                let mut answer = mon.finish_negative(Verdict::False);
                answer.kleene_witness = Some(KleeneSequence::new(0, chain));
                return Ok(answer);
            }
            let step = mon.stats.steps() + 1;
            let query = problem.query();
            let restart = chain.is_empty()
                || rng.as_mut().is_some_and(|r| r.random_bool(0.5));
            let mut rule = Rule::Decide;
            // Decide needs C_head ≤ F(⊤)
            let enabled = !restart && lat.leq(&chain[0], &problem.apply(&top));
            if enabled {
                let head = &chain[0];
                let chosen = heuristics
                    .decide(&query, &top, head)
                    .map_err(|source| EngineError::HeuristicFailed { rule: Rule::Decide, step, source })?;
                match chosen {
                    Some(x) => {
                        if !lat.leq(head, &problem.apply(&x)) {
                            return Err(EngineError::HeuristicViolation {
                                rule: Rule::Decide,
                                step,
                                reason: "obligation is not below F(x)",
                            });
                        }
                        chain.insert(0, x);
                    }
                    None => rule = Rule::Candidate,
                }
            } else {
                rule = Rule::Candidate;
            }
            if rule == Rule::Candidate {
                let chosen = heuristics
                    .candidate(&query, &top, None)
                    .map_err(|source| EngineError::HeuristicFailed { rule: Rule::Candidate, step, source })?;
                let Some(x) = chosen else {
                    return Ok(mon.finish_negative(Verdict::Stuck));
                };
                if lat.leq(&x, &problem.alpha) {
                    return Err(EngineError::HeuristicViolation {
                        rule: Rule::Candidate,
                        step,
                        reason: "x does not violate alpha",
                    });
                }
                chain.clear();
                chain.push(x);
            }
            mon.record_negative(rule, chain.len());
            if options.check_invariants
                && !is_kleene_sequence(problem, &KleeneSequence::new(0, chain.clone()))
            {
                return Err(EngineError::InvariantViolation {
                    rule,
                    step,
                    detail: "obligations are not a Kleene sequence",
                });
            }
        }
    }
}

fn rng_for(schedule: Schedule) -> Option<SmallRng> {
    match schedule {
        Schedule::Default => None,
        Schedule::Fuzz { seed } => Some(SmallRng::seed_from_u64(seed)),
    }
}

type Applied = Option<(Rule, Option<(usize, usize)>)>;

fn induction_proposal<L, F>(
    problem: &Problem<L, F>,
    cfg: &PdrConfig<L::Elem>,
    proposer: Option<&mut (dyn InductionProposer<L> + '_)>,
    step: u64,
) -> Result<Option<(usize, L::Elem)>, EngineError>
where
    L: CompleteLattice,
    F: Transformer<L::Elem>,
{
    let Some(proposer) = proposer else {
        return Ok(None);
    };
    let Some((k, x)) = proposer.propose(&problem.query(), &cfg.frames) else {
        return Ok(None);
    };
    let ok = rules::induction_guard(problem, &cfg.frames, k, &x).map_err(|reason| {
        EngineError::HeuristicViolation {
            rule: Rule::Induction,
            step,
            reason,
        }
    })?;
    Ok(ok.then_some((k, x)))
}

fn combined_default_step<L, F, H>(
    problem: &Problem<L, F>,
    cfg: &mut PdrConfig<L::Elem>,
    heuristics: &mut H,
    induction: Option<&mut (dyn InductionProposer<L> + '_)>,
    step: u64,
) -> Result<Applied, EngineError>
where
    L: CompleteLattice,
    F: Transformer<L::Elem>,
    H: Heuristics<L> + ?Sized,
{
    if cfg.obligations.is_empty() {
        if let Some((k, x)) = induction_proposal(problem, cfg, induction, step)? {
            rules::strengthen(&problem.lattice, &mut cfg.frames, k, &x);
            return Ok(Some((Rule::Induction, Some((2, k)))));
        }
    }
    if rules::unfold(problem, cfg) {
        let n = cfg.frames.len();
        return Ok(Some((Rule::Unfold, Some((n - 1, n - 1)))));
    }
    if cfg.obligations.is_empty() {
        return Ok(match rules::candidate(problem, cfg, heuristics, step)? {
            Outcome::Applied => Some((Rule::Candidate, None)),
            _ => None,
        });
    }
    let i = cfg.obligations.start_index();
    if rules::decide(problem, cfg, heuristics, step)? == Outcome::Applied {
        return Ok(Some((Rule::Decide, None)));
    }
    Ok(match rules::conflict(problem, cfg, heuristics, step)? {
        Outcome::Applied => Some((Rule::Conflict, Some((2, i)))),
        _ => None,
    })
}

fn combined_fuzz_step<L, F, H>(
    problem: &Problem<L, F>,
    cfg: &mut PdrConfig<L::Elem>,
    heuristics: &mut H,
    induction: Option<&mut (dyn InductionProposer<L> + '_)>,
    rng: &mut SmallRng,
    step: u64,
) -> Result<Applied, EngineError>
where
    L: CompleteLattice,
    F: Transformer<L::Elem>,
    H: Heuristics<L> + ?Sized,
{
    let lat = &problem.lattice;
    let mut enabled: Vec<Rule> = Vec::with_capacity(3);
    let last_safe = lat.leq(cfg.frames.last(), &problem.alpha);
    if last_safe {
        enabled.push(Rule::Unfold);
    }
    if cfg.obligations.is_empty() {
        if !last_safe {
            enabled.push(Rule::Candidate);
        }
    } else if let Some((_, guard)) = rules::obligation_guard(problem, cfg) {
        enabled.push(if guard.is_ok() { Rule::Decide } else { Rule::Conflict });
    }
    let mut proposal = induction_proposal(problem, cfg, induction, step)?;
    if proposal.is_some() {
        enabled.push(Rule::Induction);
    }

    while !enabled.is_empty() {
        let rule = enabled.swap_remove(rng.random_range(0..enabled.len()));
        let i = cfg.obligations.start_index();
        let n = cfg.frames.len();
        let done = match rule {
            Rule::Unfold => rules::unfold(problem, cfg).then_some(Some((n, n))),
            Rule::Induction => {
                let (k, x) = proposal.take().expect("proposal present");
                rules::strengthen(lat, &mut cfg.frames, k, &x);
                Some(Some((2, k)))
            }
            Rule::Candidate => (rules::candidate(problem, cfg, heuristics, step)? == Outcome::Applied)
                .then_some(None),
            Rule::Decide => (rules::decide(problem, cfg, heuristics, step)? == Outcome::Applied)
                .then_some(None),
            Rule::Conflict => (rules::conflict(problem, cfg, heuristics, step)? == Outcome::Applied)
                .then_some(Some((2, i))),
            Rule::Valid | Rule::Model => unreachable!("pre-empting rules are not scheduled"),
        };
        if let Some(changed) = done {
            return Ok(Some((rule, changed)));
        }
    }
    Ok(None)
}

/// Step accounting, tracing and (optionally) per-step validation.
struct Monitor<'s, L: CompleteLattice> {
    stats: RunStats,
    budget: u64,
    check: bool,
    trace: Option<&'s mut dyn TraceSink>,
    /// `⊥, F⊥, F²⊥, …` as far as needed.
    chain: Vec<L::Elem>,
}

impl<'s, L: CompleteLattice> Monitor<'s, L> {
    fn new(options: &RunOptions, trace: Option<&'s mut dyn TraceSink>) -> Self {
        Self {
            stats: RunStats::default(),
            budget: options.budget,
            check: options.check_invariants,
            trace,
            chain: Vec::new(),
        }
    }

    fn exhausted(&self) -> bool {
        self.stats.steps() >= self.budget
    }

    fn idle(&mut self) {
        self.stats.idle += 1;
    }

    fn record(&mut self, rule: Rule, cfg: &PdrConfig<L::Elem>) {
        self.stats.record(rule);
        self.stats.frames = cfg.frames.len();
        self.emit(rule, cfg.frames.len(), cfg.obligations.len());
    }

    fn record_negative(&mut self, rule: Rule, obligations: usize) {
        self.stats.record(rule);
        self.emit(rule, 0, obligations);
    }

    fn emit(&mut self, rule: Rule, frames: usize, obligations: usize) {
        if let Some(sink) = self.trace.as_mut() {
            sink.record(&TraceEvent {
                step: self.stats.steps(),
                rule,
                frames,
                obligations,
            });
        }
    }

    fn finish(mut self, verdict: Verdict, cfg: &PdrConfig<L::Elem>) -> PdrAnswer<L::Elem> {
        self.stats.frames = cfg.frames.len();
        PdrAnswer::open(verdict, self.stats)
    }

    fn finish_negative(self, verdict: Verdict) -> PdrAnswer<L::Elem> {
        PdrAnswer::open(verdict, self.stats)
    }

    fn check_combined<F>(
        &mut self,
        problem: &Problem<L, F>,
        cfg: &PdrConfig<L::Elem>,
        rule: Rule,
        before: Option<&KtSequence<L::Elem>>,
        installed: bool,
    ) -> Result<(), EngineError>
    where
        F: Transformer<L::Elem>,
    {
        if !self.check {
            return Ok(());
        }
        let step = self.stats.steps();
        let fail = |detail| Err(EngineError::InvariantViolation { rule, step, detail });
        let lat = &problem.lattice;
        let frames = &cfg.frames;
        let n = frames.len();

        if !is_kt_sequence(problem, frames) {
            return fail("frames are not a KT sequence");
        }
        if !lat.equiv(&frames[1], &problem.apply(&lat.bot())) {
            return fail("X1 differs from F(bot)");
        }
        if !is_kleene_sequence(problem, &cfg.obligations) {
            return fail("obligations are not a Kleene sequence");
        }
        if !cfg.obligations.is_empty() && cfg.obligations.end_index() != n {
            return fail("obligations do not end at the last frame");
        }
        if installed {
            let i = cfg.obligations.start_index();
            let head = cfg.obligations.head().expect("installed obligation");
            if !lat.leq(head, &frames[i]) {
                return fail("installed obligation is not below its frame");
            }
        }
        if self.chain.is_empty() {
            self.chain.push(lat.bot());
        }
        while self.chain.len() < n {
            let next = problem.apply(self.chain.last().expect("nonempty"));
            self.chain.push(next);
        }
        if self.chain.iter().zip(frames.frames()).any(|(c, x)| !lat.leq(c, x)) {
            return fail("frame does not over-approximate the initial chain");
        }
        if let Some(before) = before {
            if !kt_order_leq(lat, before, frames) || kt_equiv(lat, before, frames) {
                return fail("frames did not strictly progress");
            }
        }
        Ok(())
    }
}
