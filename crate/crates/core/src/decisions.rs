//! Decisions under a neighbourhood of repaired models.
//!
//! A [`DecisionProblem`] is a list of labelled actions with losses `L_a(x)`.
//! Expected losses are taken under a single model, a bootstrap
//! [`ModelEnsemble`] of d-sharp fits, or the equal-weight average of that
//! ensemble.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std float methods when std is linked
use num_traits::Float;
use rand::Rng;

use crate::distributions::{seeded_rng, Sample, Univariate};
use crate::error::{bail, Error, Result};
use crate::quadrature::integrate_unit_split;
use crate::sharpening::{self, DSharpModel, Model};

/// Default number of bootstrap replicates.
pub const DEFAULT_REPLICATES: usize = 1000;
/// Default largest LP order explored per replicate.
pub const DEFAULT_MAX_ORDER: usize = 10;
/// OPEN penalty used inside each bootstrap replicate.
pub const OPEN_GAMMA: f64 = 2.0;

// ---------------------------------------------------------------------------
// loss expressions

#[derive(Debug, Clone, PartialEq)]
enum Expr {
    Const(f64),
    X,
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Abs(Box<Expr>),
    Min(Vec<Expr>),
    Max(Vec<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl Expr {
    fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::X => x,
            Expr::Neg(e) => -e.eval(x),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    Op::Div => a / b,
                    Op::Pow => a.powf(b),
                }
            }
            Expr::Abs(e) => e.eval(x).abs(),
            Expr::Min(args) => args.iter().map(|e| e.eval(x)).fold(f64::INFINITY, f64::min),
            Expr::Max(args) => {
                args.iter().map(|e| e.eval(x)).fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part, e.g. 1e-3
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse()
                .map_err(|_| Error::Input(format!("bad number `{text}` in loss `{src}`")))?;
            out.push(Token::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            out.push(Token::Sym(c));
            i += 1;
        } else {
            bail!(Input, "unexpected character `{c}` in loss `{src}`");
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Token::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn fail<T>(&self, what: &str) -> Result<T> {
        Err(Error::Input(format!("{what} at token {} in loss `{}`", self.pos + 1, self.src)))
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                Op::Add
            } else if self.eat('-') {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                Op::Mul
            } else if self.eat('/') {
                Op::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    // right associative; binds tighter than unary minus on its left
    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Token::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "x" => Ok(Expr::X),
                    "pi" => Ok(Expr::Const(core::f64::consts::PI)),
                    "e" => Ok(Expr::Const(core::f64::consts::E)),
                    "abs" | "min" | "max" => {
                        if !self.eat('(') {
                            return self.fail("expected `(`");
                        }
                        let mut args = vec![self.expr()?];
                        while self.eat(',') {
                            args.push(self.expr()?);
                        }
                        if !self.eat(')') {
                            return self.fail("expected `)`");
                        }
                        match (name.as_str(), args.len()) {
                            ("abs", 1) => Ok(Expr::Abs(Box::new(args.pop().unwrap()))),
                            ("abs", _) => self.fail("abs takes one argument"),
                            (_, 1) => self.fail("min/max take at least two arguments"),
                            ("min", _) => Ok(Expr::Min(args)),
                            _ => Ok(Expr::Max(args)),
                        }
                    }
                    _ => self.fail(&format!("unknown name `{name}`")),
                }
            }
            Some(Token::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.fail("expected `)`");
                }
                Ok(e)
            }
            Some(_) => self.fail("unexpected token"),
            None => self.fail("unexpected end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum LossKind {
    Expr(Expr),
    Table(Vec<(f64, f64)>),
}

/// Loss `L(x)` of one action, either an arithmetic expression in `x` or a
/// piecewise-linear table with flat extrapolation.
#[derive(Debug, Clone, PartialEq)]
pub struct Loss {
    kind: LossKind,
    scale: f64,
    source: String,
}

impl Loss {
    /// Parses `+ - * / ^`, `abs(.)`, `min(.., ..)`, `max(.., ..)`, numbers and `x`.
    pub fn expr(src: &str) -> Result<Self> {
        let toks = tokenize(src)?;
        let mut p = Parser { toks, pos: 0, src };
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return p.fail("trailing input");
        }
        Ok(Self { kind: LossKind::Expr(e), scale: 1.0, source: src.to_string() })
    }

    /// Table of `(x, loss)` knots with strictly increasing `x`.
    pub fn table(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            bail!(Input, "loss table is empty");
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                bail!(Input, "loss table abscissae must increase strictly");
            }
        }
        if points.iter().any(|(x, l)| !x.is_finite() || !l.is_finite()) {
            bail!(Input, "loss table has non-finite entries");
        }
        let source = format!("table[{}]", points.len());
        Ok(Self { kind: LossKind::Table(points), scale: 1.0, source })
    }

    /// The same loss multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self { scale: self.scale * c, ..self.clone() }
    }

    /// Original expression text, or `table[k]`.
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, x: f64) -> f64 {
        let raw = match &self.kind {
            LossKind::Expr(e) => e.eval(x),
            LossKind::Table(pts) => interpolate(pts, x),
        };
        self.scale * raw
    }
}

fn interpolate(pts: &[(f64, f64)], x: f64) -> f64 {
    let first = pts[0];
    let last = pts[pts.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let k = pts.partition_point(|p| p.0 <= x);
    let (x0, y0) = pts[k - 1];
    let (x1, y1) = pts[k];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    pub label: String,
    pub loss: Loss,
}

/// Actions `a_1..a_q` (q ≥ 2) with their losses.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionProblem {
    actions: Vec<Action>,
}

impl DecisionProblem {
    pub fn new(actions: Vec<Action>) -> Result<Self> {
        if actions.len() < 2 {
            bail!(Input, "a decision problem needs at least two actions, got {}", actions.len());
        }
        Ok(Self { actions })
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn label(&self, action: usize) -> &str {
        &self.actions[action].label
    }

    /// Every loss multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let actions = self
            .actions
            .iter()
            .map(|a| Action { label: a.label.clone(), loss: a.loss.scaled(c) })
            .collect();
        Self { actions }
    }

    fn check(&self, action: usize) -> Result<&Action> {
        match self.actions.get(action) {
            Some(a) => Ok(a),
            None => bail!(Domain, "action index {action} out of range"),
        }
    }
}

/// `∫ L_a(x) dF(x)` under `model`.
pub fn expected_loss<M: Univariate>(
    problem: &DecisionProblem,
    action: usize,
    model: &M,
) -> Result<f64> {
    let a = problem.check(action)?;
    let mut bad = None;
    let value = model.expect(|x| {
        let l = a.loss.eval(x);
        if !l.is_finite() {
            bad.get_or_insert(x);
        }
        l
    });
    if let Some(x) = bad {
        bail!(Evaluation, "loss of action `{}` is not finite at x = {x}", a.label);
    }
    if !value.is_finite() {
        bail!(Evaluation, "expected loss of action `{}` is not finite", a.label);
    }
    Ok(value)
}

/// Expected losses of all actions under `model`.
pub fn expected_losses<M: Univariate>(problem: &DecisionProblem, model: &M) -> Result<Vec<f64>> {
    (0..problem.len()).map(|a| expected_loss(problem, a, model)).collect()
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// Action with the smallest expected loss under `model`; the first one on ties.
pub fn optimal_action<M: Univariate>(problem: &DecisionProblem, model: &M) -> Result<usize> {
    Ok(argmin(&expected_losses(problem, model)?))
}

// ---------------------------------------------------------------------------
// bootstrap neighbourhood

/// Bootstrap-synthesized d-sharp models sharing one model-0, and their
/// equal-weight average `f_bar`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelEnsemble {
    base: Arc<Model>,
    members: Vec<DSharpModel>,
    /// Replicate index of each member.
    replicates: Vec<usize>,
    requested: usize,
    kinks: Vec<f64>,
}

impl ModelEnsemble {
    /// Assembles replicate results; `None` marks a skipped replicate.
    /// More than 10% skipped is an error.
    pub fn from_replicates(base: Arc<Model>, results: Vec<Option<DSharpModel>>) -> Result<Self> {
        let requested = results.len();
        if requested == 0 {
            bail!(Input, "ensemble needs at least one replicate");
        }
        let mut members = Vec::with_capacity(requested);
        let mut replicates = Vec::with_capacity(requested);
        for (i, r) in results.into_iter().enumerate() {
            if let Some(m) = r {
                members.push(m);
                replicates.push(i);
            }
        }
        let skipped = requested - members.len();
        if skipped * 10 > requested {
            return Err(Error::Degenerate(format!(
                "{skipped} of {requested} bootstrap replicates were degenerate"
            )));
        }
        let mut kinks: Vec<f64> = members.iter().flat_map(|m| m.kinks().iter().copied()).collect();
        kinks.sort_by(f64::total_cmp);
        kinks.dedup();
        Ok(Self { base, members, replicates, requested, kinks })
    }

    /// Ensemble of explicitly given members over `base`.
    pub fn from_members(base: impl Into<Model>, members: Vec<DSharpModel>) -> Result<Self> {
        let base = Arc::new(base.into());
        let members = members
            .into_iter()
            .map(|m| DSharpModel::with_shared_base(base.clone(), m.coeffs()).map(Some))
            .collect::<Result<Vec<_>>>()?;
        Self::from_replicates(base, members)
    }

    pub fn base(&self) -> &Model {
        &self.base
    }

    pub fn members(&self) -> &[DSharpModel] {
        &self.members
    }

    pub fn replicate_ids(&self) -> &[usize] {
        &self.replicates
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn requested(&self) -> usize {
        self.requested
    }

    pub fn skipped(&self) -> usize {
        self.requested - self.members.len()
    }

    /// Averaged comparison density `mean_j d_j(u)`.
    pub fn ratio(&self, u: f64) -> f64 {
        self.members.iter().map(|m| m.ratio(u)).sum::<f64>() / self.members.len() as f64
    }
}

impl Univariate for ModelEnsemble {
    fn pdf(&self, x: f64) -> f64 {
        let f0 = self.base.pdf(x);
        if f0 == 0.0 {
            return 0.0;
        }
        f0 * self.ratio(self.base.cdf(x))
    }

    fn cdf(&self, x: f64) -> f64 {
        self.members.iter().map(|m| m.cdf(x)).sum::<f64>() / self.members.len() as f64
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            bail!(Domain, "quantile level must lie in (0, 1), got {p}");
        }
        // the averaged rank cdf is monotone in w; bisect there
        let g = |w: f64| {
            self.members.iter().map(|m| m.rank_cdf(w)).sum::<f64>() / self.members.len() as f64
        };
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let w = (0.5 * (lo + hi)).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
        self.base.quantile(w)
    }

    fn support(&self) -> (f64, f64) {
        self.base.support()
    }

    /// Direct quadrature against `f_bar` in the rank domain.
    fn expect<G: FnMut(f64) -> f64>(&self, mut g: G) -> f64 {
        let base = &self.base;
        integrate_unit_split(
            |u| {
                let r = self.ratio(u);
                if r == 0.0 {
                    return 0.0;
                }
                match base.quantile(u) {
                    Ok(x) => g(x) * r,
                    Err(_) => f64::NAN,
                }
            },
            &self.kinks,
        )
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let k = rng.gen_range(0..self.members.len());
        self.members[k].draw(rng)
    }
}

/// One bootstrap replicate: resample with seed `master + index`, fit up to
/// order `m_max`, select by OPEN and build the d-sharp model. `Ok(None)` for a
/// degenerate replicate.
pub fn bootstrap_replicate(
    data: &Sample,
    base: &Arc<Model>,
    m_max: usize,
    master_seed: u64,
    index: usize,
) -> Result<Option<DSharpModel>> {
    let mut rng = seeded_rng(replicate_seed(master_seed, index));
    let resampled = data.resample(&mut rng);
    let raw = sharpening::estimate_raw(&resampled, base.as_ref(), m_max)?;
    let sel = sharpening::open_select(&raw, resampled.len(), OPEN_GAMMA)?;
    match DSharpModel::with_shared_base(base.clone(), &sel.smooth) {
        Ok(m) => Ok(Some(m)),
        Err(Error::Degenerate(msg)) => {
            log::warn!("bootstrap replicate {index} skipped: {msg}");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// Seed of replicate `index`: `master + index`.
pub fn replicate_seed(master_seed: u64, index: usize) -> u64 {
    master_seed.wrapping_add(index as u64)
}

fn check_bootstrap_input(data: &Sample, replicates: usize) -> Result<()> {
    if data.len() < 10 {
        bail!(Input, "bootstrap needs at least 10 observations, got {}", data.len());
    }
    if replicates == 0 {
        bail!(Parameter, "number of bootstrap replicates must be positive");
    }
    Ok(())
}

/// `B` bootstrap d-sharp models of `data` against `base` (sequential).
pub fn bootstrap_ensemble(
    data: &Sample,
    base: impl Into<Model>,
    m_max: usize,
    replicates: usize,
    seed: u64,
) -> Result<ModelEnsemble> {
    check_bootstrap_input(data, replicates)?;
    let base = Arc::new(base.into());
    let results = (0..replicates)
        .map(|i| bootstrap_replicate(data, &base, m_max, seed, i))
        .collect::<Result<Vec<_>>>()?;
    ModelEnsemble::from_replicates(base, results)
}

/// Validates inputs the way [`bootstrap_ensemble`] does, for callers that run
/// replicates themselves.
pub fn validate_bootstrap(data: &Sample, replicates: usize) -> Result<()> {
    check_bootstrap_input(data, replicates)
}

/// Direct fits `DS(F0, m)` from the first `m` raw coefficients, `m = 0..=m_max`.
pub fn direct_fits(data: &Sample, base: impl Into<Model>, m_max: usize) -> Result<Vec<DSharpModel>> {
    let base = Arc::new(base.into());
    let raw = sharpening::estimate_raw(data, base.as_ref(), m_max)?;
    let mut out = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        let coeffs: Vec<(usize, f64)> = (1..=m).map(|j| (j, raw[j - 1])).collect();
        match DSharpModel::with_shared_base(base.clone(), &coeffs) {
            Ok(model) => out.push(model),
            Err(Error::Degenerate(msg)) => log::warn!("direct fit m={m} skipped: {msg}"),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Bootstrap distribution of the optimal action.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionProfile {
    pub counts: Vec<usize>,
    pub total: usize,
    pub probabilities: Vec<f64>,
    /// Shannon entropy in nats.
    pub entropy: f64,
}

impl ActionProfile {
    pub fn from_counts(counts: Vec<usize>) -> Self {
        let total: usize = counts.iter().sum();
        let probabilities: Vec<f64> = counts
            .iter()
            .map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 })
            .collect();
        let entropy = probabilities
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum::<f64>()
            .max(0.0);
        Self { counts, total, probabilities, entropy }
    }
}

/// Optimal action of every ensemble member, tallied.
pub fn action_profile(problem: &DecisionProblem, ensemble: &ModelEnsemble) -> Result<ActionProfile> {
    let mut counts = vec![0usize; problem.len()];
    for m in ensemble.members() {
        counts[optimal_action(problem, m)?] += 1;
    }
    Ok(ActionProfile::from_counts(counts))
}

/// Member with the largest expected loss for `action` (lowest index on ties).
pub fn least_favorable<'a>(
    problem: &DecisionProblem,
    action: usize,
    ensemble: &'a ModelEnsemble,
) -> Result<(usize, &'a DSharpModel)> {
    if ensemble.is_empty() {
        bail!(Input, "ensemble is empty");
    }
    let mut best = 0;
    let mut worst = f64::NEG_INFINITY;
    for (i, m) in ensemble.members().iter().enumerate() {
        let l = expected_loss(problem, action, m)?;
        if l > worst {
            worst = l;
            best = i;
        }
    }
    Ok((best, &ensemble.members()[best]))
}

/// Outcome of the minimax search over a finite candidate set.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimaxResult {
    pub action: usize,
    /// Worst-case expected loss of each action.
    pub worst_loss: Vec<f64>,
    /// Candidate index attaining the worst case of each action.
    pub attained_by: Vec<usize>,
}

/// `argmin_a max_{g in candidates} E_g L_a`; first action / candidate on ties.
pub fn minimax_action<M: Univariate>(
    problem: &DecisionProblem,
    candidates: &[M],
) -> Result<MinimaxResult> {
    if candidates.is_empty() {
        bail!(Input, "minimax needs at least one candidate model");
    }
    let mut worst_loss = vec![f64::NEG_INFINITY; problem.len()];
    let mut attained_by = vec![0usize; problem.len()];
    for (k, model) in candidates.iter().enumerate() {
        for (a, l) in expected_losses(problem, model)?.into_iter().enumerate() {
            if l > worst_loss[a] {
                worst_loss[a] = l;
                attained_by[a] = k;
            }
        }
    }
    Ok(MinimaxResult { action: argmin(&worst_loss), worst_loss, attained_by })
}

/// Outcome of the decision under the averaged model.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustResult {
    pub action: usize,
    /// Mean of the member expected losses, per action.
    pub expected_loss: Vec<f64>,
}

/// `argmin_a E_{f_bar} L_a`, computed as the mean of member expected losses.
pub fn robust_action(problem: &DecisionProblem, ensemble: &ModelEnsemble) -> Result<RobustResult> {
    if ensemble.is_empty() {
        bail!(Input, "ensemble is empty");
    }
    let mut sums = vec![0.0; problem.len()];
    for m in ensemble.members() {
        for (s, l) in sums.iter_mut().zip(expected_losses(problem, m)?) {
            *s += l;
        }
    }
    let k = ensemble.len() as f64;
    let expected_loss: Vec<f64> = sums.into_iter().map(|s| s / k).collect();
    Ok(RobustResult { action: argmin(&expected_loss), expected_loss })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::BaseModel;
    use crate::sharpening::make_dsharp;

    fn problem(exprs: &[&str]) -> DecisionProblem {
        DecisionProblem::new(
            exprs
                .iter()
                .enumerate()
                .map(|(i, e)| Action { label: format!("a{}", i + 1), loss: Loss::expr(e).unwrap() })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn expression_grammar() {
        let cases: &[(&str, f64, f64)] = &[
            ("x", 3.0, 3.0),
            ("2*x + 1", 3.0, 7.0),
            ("(x - 25)^2", 20.0, 25.0),
            ("-x^2", 3.0, -9.0),
            ("2^3^2", 0.0, 512.0),
            ("abs(x - 4) / 2", 1.0, 1.5),
            ("min(x, 10, 4) + max(x, 0)", -2.0, -2.0),
            ("1e-1 * x", 10.0, 1.0),
            ("10 - 2 - 3", 0.0, 5.0),
            ("12 / 3 / 2", 0.0, 2.0),
        ];
        for &(src, x, want) in cases {
            let got = Loss::expr(src).unwrap().eval(x);
            assert!((got - want).abs() < 1e-12, "{src}: {got}");
        }
        for bad in ["", "x +", "foo(x)", "abs(x, 1)", "min(x)", "(x", "x $ 2", "1.2.3"] {
            assert!(Loss::expr(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn table_interpolation() {
        let l = Loss::table(vec![(0.0, 1.0), (10.0, 3.0), (20.0, 0.0)]).unwrap();
        assert_eq!(l.eval(-5.0), 1.0);
        assert_eq!(l.eval(5.0), 2.0);
        assert_eq!(l.eval(10.0), 3.0);
        assert_eq!(l.eval(15.0), 1.5);
        assert_eq!(l.eval(99.0), 0.0);
        assert!(Loss::table(vec![(1.0, 0.0), (1.0, 2.0)]).is_err());
        assert!(Loss::table(vec![]).is_err());
    }

    #[test]
    fn needs_two_actions() {
        let one = vec![Action { label: "a".into(), loss: Loss::expr("x").unwrap() }];
        assert!(DecisionProblem::new(one).is_err());
    }

    #[test]
    fn expected_loss_examples() {
        let p = problem(&["1", "x"]);
        let exp = BaseModel::exponential(25.0).unwrap();
        assert!((expected_loss(&p, 0, &exp).unwrap() - 1.0).abs() < 1e-12);
        assert!((expected_loss(&p, 1, &exp).unwrap() - 25.0).abs() < 1e-6);
        let tilted = make_dsharp(BaseModel::uniform(0.0, 1.0).unwrap(), &[(1, 0.2)]).unwrap();
        let want = 0.5 + 0.2 / 12f64.sqrt();
        assert!((expected_loss(&p, 1, &tilted).unwrap() - want).abs() < 1e-12);
        assert!((want - 0.5577).abs() < 1e-4);
        let p = problem(&["1", "(x - 2)^0.5"]);
        assert!(matches!(
            expected_loss(&p, 1, &BaseModel::uniform(0.0, 1.0).unwrap()),
            Err(Error::Evaluation(_))
        ));
    }

    #[test]
    fn ties_and_dominance() {
        let m = BaseModel::exponential(3.0).unwrap();
        assert_eq!(optimal_action(&problem(&["x", "2*x"]), &m).unwrap(), 0);
        assert_eq!(optimal_action(&problem(&["2*x", "x"]), &m).unwrap(), 1);
        assert_eq!(optimal_action(&problem(&["x", "x", "x"]), &m).unwrap(), 0);
    }

    #[test]
    fn profile_entropy() {
        let p = ActionProfile::from_counts(vec![5, 0, 0]);
        assert_eq!(p.entropy, 0.0);
        let p = ActionProfile::from_counts(vec![25, 25, 25, 25]);
        assert!((p.entropy - 4f64.ln()).abs() < 1e-15);
        assert!((p.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    fn two_member_ensemble() -> ModelEnsemble {
        // on U(20, 30) a T1 tilt by c moves the mean to 25 + 10 c / sqrt(12)
        let base = BaseModel::uniform(20.0, 30.0).unwrap();
        let c = 12f64.sqrt() / 10.0;
        let low = make_dsharp(base.clone(), &[(1, -c)]).unwrap();
        let high = make_dsharp(base.clone(), &[(1, c)]).unwrap();
        ModelEnsemble::from_members(base, vec![low, high]).unwrap()
    }

    #[test]
    fn least_favorable_member() {
        let ens = two_member_ensemble();
        let p = problem(&["x", "1"]);
        let means: Vec<f64> = ens.members().iter().map(|m| expected_loss(&p, 0, m).unwrap()).collect();
        assert!((means[0] - 24.0).abs() < 1e-9 && (means[1] - 26.0).abs() < 1e-9, "{means:?}");
        assert_eq!(least_favorable(&p, 0, &ens).unwrap().0, 1);
        assert_eq!(least_favorable(&p, 1, &ens).unwrap().0, 0);
    }

    #[test]
    fn crossed_losses() {
        // E L1 = (24, 26) and E L2 = (50 - 24, 50 - 26) = (26, 24) shifted by 0.5
        let ens = two_member_ensemble();
        let p = problem(&["x", "50.5 - x"]);
        let mm = minimax_action(&p, ens.members()).unwrap();
        // worst cases: a1 -> 26, a2 -> 26.5
        assert_eq!(mm.action, 0);
        assert_eq!(mm.attained_by, vec![1, 0]);
        let r = robust_action(&p, &ens).unwrap();
        // means: a1 -> 25, a2 -> 25.5
        assert_eq!(r.action, 0);
        assert!((r.expected_loss[0] - 25.0).abs() < 1e-9);
        // linearity against direct quadrature on f_bar
        for a in 0..2 {
            let direct = expected_loss(&p, a, &ens).unwrap();
            assert!((direct - r.expected_loss[a]).abs() < 1e-6);
        }
    }

    #[test]
    fn bootstrap_is_reproducible() {
        let base = BaseModel::normal(0.0, 1.0).unwrap();
        let data = BaseModel::normal(0.2, 1.2).unwrap().sample(300, 5);
        let a = bootstrap_ensemble(&data, base.clone(), 6, 20, 9).unwrap();
        let b = bootstrap_ensemble(&data, base.clone(), 6, 20, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 20);
        let mass = crate::quadrature::integrate_unit_split(|u| a.ratio(u), &a.kinks);
        assert!((mass - 1.0).abs() < 1e-5);
        let small = Sample::new(vec![0.0; 9]).unwrap();
        assert!(bootstrap_ensemble(&small, base, 6, 20, 9).is_err());
    }

    #[test]
    fn direct_fit_zero_is_base() {
        let base = BaseModel::normal(0.0, 1.0).unwrap();
        let data = base.sample(100, 1);
        let fits = direct_fits(&data, base, 4).unwrap();
        assert_eq!(fits.len(), 5);
        assert!(fits[0].coeffs().is_empty());
        assert_eq!(fits[3].coeffs().len(), 3);
    }
}
