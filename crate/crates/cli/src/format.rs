//! Line-oriented model formats.
//!
//! All three share the same lexical rules: `#` starts a comment, blank lines
//! are ignored, headers come first and `trans` starts the transition block.
//!
//! ```text
//! # .kr                       # .mdp                         # .mrm
//! states 3                    states 3                       states 2
//! init 0                      actions 1                      init 0
//! safe 0 1                    init 0                         lambda 1.5
//! trans                       lambda 0.6                     safe 0
//! 0 1                         safe 0 1                       trans
//! 1 1                         trans                          0 -> (1,0):1/4 (1,1):3/4
//! 2 2                         0 0 -> 1:0.5 2:0.5             1 -> (0,1):1
//!                             1 0 -> 1:1
//!                             2 0 -> 2:1
//! ```
//!
//! `.kr` also accepts `unsafe i…` in place of `safe`. Probabilities are
//! decimals or fractions `num/den`; an `.mrm` threshold may be `inf`.

use std::fmt::Write as _;

use ltpdr_core::kripke::KripkeStructure;
use ltpdr_core::mdp::MdpModel;
use ltpdr_core::mrm::MrmModel;
use ltpdr_core::quant::{ValidationError, DISTRIBUTION_TOLERANCE};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: distribution of state {state}{} sums to {sum}", action.map(|a| format!(" action {a}")).unwrap_or_default())]
    Distribution {
        line: usize,
        state: usize,
        action: Option<usize>,
        sum: f64,
    },
    #[error("invalid model: {0}")]
    Model(String),
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError::Parse {
        line,
        message: message.into(),
    })
}

/// Non-empty lines with comments stripped, paired with 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn parse_usize(line: usize, tok: &str, what: &str) -> Result<usize, FormatError> {
    tok.parse()
        .or_else(|_| err(line, format!("expected {what}, found `{tok}`")))
}

fn parse_state(line: usize, tok: &str, states: usize) -> Result<usize, FormatError> {
    let s = parse_usize(line, tok, "a state index")?;
    if s >= states {
        return err(line, format!("state {s} out of range (model has {states} states)"));
    }
    Ok(s)
}

/// A decimal or a fraction `num/den`.
pub fn parse_probability(line: usize, tok: &str) -> Result<f64, FormatError> {
    let bad = || err(line, format!("expected a probability, found `{tok}`"));
    let p = match tok.split_once('/') {
        Some((num, den)) => {
            let (Ok(num), Ok(den)) = (num.parse::<u64>(), den.parse::<u64>()) else {
                return bad();
            };
            if den == 0 {
                return bad();
            }
            num as f64 / den as f64
        }
        None => match tok.parse::<f64>() {
            Ok(p) if p.is_finite() => p,
            _ => return bad(),
        },
    };
    if !(0.0..=1.0).contains(&p) {
        return err(line, format!("probability {tok} is not in [0, 1]"));
    }
    Ok(p)
}

fn check_sum(line: usize, state: usize, action: Option<usize>, ps: impl Iterator<Item = f64>) -> Result<(), FormatError> {
    let sum: f64 = ps.sum();
    if (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE {
        return Err(FormatError::Distribution {
            line,
            state,
            action,
            sum,
        });
    }
    Ok(())
}

fn model_error(e: ValidationError) -> FormatError {
    FormatError::Model(e.to_string())
}

/// Header values collected before `trans`.
#[derive(Default)]
struct Headers {
    states: Option<usize>,
    actions: Option<usize>,
    init: Option<Vec<usize>>,
    safe: Option<Vec<usize>>,
    unsafe_: Option<Vec<usize>>,
    lambda: Option<f64>,
}

/// Parses header lines up to and including `trans`; returns the headers and
/// the line number of `trans`.
fn headers<'a>(
    it: &mut impl Iterator<Item = (usize, &'a str)>,
    allowed: &[&str],
    lambda: fn(usize, &str) -> Result<f64, FormatError>,
) -> Result<(Headers, usize), FormatError> {
    let mut h = Headers::default();
    let mut last = 0;
    for (line, text) in it.by_ref() {
        last = line;
        let mut toks = text.split_whitespace();
        let key = toks.next().expect("line is non-empty");
        let rest: Vec<&str> = toks.collect();
        if key == "trans" {
            if !rest.is_empty() {
                return err(line, "`trans` takes no arguments");
            }
            return Ok((h, line));
        }
        if !allowed.contains(&key) {
            return err(line, format!("unexpected `{key}`"));
        }
        let one = |what| match rest.as_slice() {
            [tok] => Ok(*tok),
            _ => err(line, format!("`{key}` takes exactly one {what}")),
        };
        let list = |states: Option<usize>| -> Result<Vec<usize>, FormatError> {
            let Some(n) = states else {
                return err(line, "`states` must come first");
            };
            rest.iter().map(|t| parse_state(line, t, n)).collect()
        };
        let duplicate = match key {
            "states" => {
                let n = parse_usize(line, one("count")?, "a state count")?;
                if n == 0 {
                    return err(line, "a model needs at least one state");
                }
                h.states.replace(n).is_some()
            }
            "actions" => {
                let n = parse_usize(line, one("count")?, "an action count")?;
                if n == 0 {
                    return err(line, "a model needs at least one action");
                }
                h.actions.replace(n).is_some()
            }
            "init" => h.init.replace(list(h.states)?).is_some(),
            "safe" => h.safe.replace(list(h.states)?).is_some(),
            "unsafe" => h.unsafe_.replace(list(h.states)?).is_some(),
            "lambda" => h.lambda.replace(lambda(line, one("value")?)?).is_some(),
            _ => unreachable!("checked against the allowed keys"),
        };
        if duplicate {
            return err(line, format!("duplicate `{key}`"));
        }
    }
    err(last + 1, "missing `trans`")
}

fn require<T>(value: Option<T>, line: usize, key: &str) -> Result<T, FormatError> {
    match value {
        Some(v) => Ok(v),
        None => err(line, format!("missing `{key}`")),
    }
}

fn single_init(line: usize, init: Vec<usize>) -> Result<usize, FormatError> {
    match init.as_slice() {
        [s] => Ok(*s),
        _ => err(line, "`init` takes exactly one state"),
    }
}

fn no_lambda(line: usize, _: &str) -> Result<f64, FormatError> {
    err(line, "unexpected `lambda`")
}

pub fn parse_kripke(text: &str) -> Result<KripkeStructure, FormatError> {
    let mut it = lines(text);
    let (h, trans_line) = headers(&mut it, &["states", "init", "safe", "unsafe"], no_lambda)?;
    let n = require(h.states, trans_line, "states")?;
    let init = require(h.init, trans_line, "init")?;
    let safe = match (h.safe, h.unsafe_) {
        (Some(s), None) => s,
        (None, Some(u)) => (0..n).filter(|s| !u.contains(s)).collect(),
        (Some(_), Some(_)) => return err(trans_line, "give either `safe` or `unsafe`, not both"),
        (None, None) => return err(trans_line, "missing `safe`"),
    };
    let mut edges = Vec::new();
    for (line, text) in it {
        let toks: Vec<&str> = text.split_whitespace().collect();
        let [a, b] = toks.as_slice() else {
            return err(line, "expected a transition `a b`");
        };
        edges.push((parse_state(line, a, n)?, parse_state(line, b, n)?));
    }
    KripkeStructure::new(n, &edges, &init, &safe).map_err(|e| FormatError::Model(e.to_string()))
}

fn mdp_lambda(line: usize, tok: &str) -> Result<f64, FormatError> {
    match tok.parse::<f64>() {
        Ok(x) if (0.0..=1.0).contains(&x) => Ok(x),
        _ => err(line, format!("threshold must be a number in [0, 1], found `{tok}`")),
    }
}

pub fn parse_mdp(text: &str) -> Result<MdpModel, FormatError> {
    let mut it = lines(text);
    let (h, trans_line) = headers(&mut it, &["states", "actions", "init", "lambda", "safe"], mdp_lambda)?;
    let n = require(h.states, trans_line, "states")?;
    let m = require(h.actions, trans_line, "actions")?;
    let init = single_init(trans_line, require(h.init, trans_line, "init")?)?;
    let lambda = require(h.lambda, trans_line, "lambda")?;
    let safe = require(h.safe, trans_line, "safe")?;
    let mut trans = Vec::new();
    let mut seen = vec![vec![false; m]; n];
    for (line, text) in it {
        let Some((lhs, rhs)) = text.split_once("->") else {
            return err(line, "expected `s a -> t:p …`");
        };
        let lhs: Vec<&str> = lhs.split_whitespace().collect();
        let [s, a] = lhs.as_slice() else {
            return err(line, "expected `s a` before `->`");
        };
        let s = parse_state(line, s, n)?;
        let a = parse_usize(line, a, "an action index")?;
        if a >= m {
            return err(line, format!("action {a} out of range (model has {m} actions)"));
        }
        if std::mem::replace(&mut seen[s][a], true) {
            return err(line, format!("state {s} action {a} is defined twice"));
        }
        let mut dist = Vec::new();
        for tok in rhs.split_whitespace() {
            let Some((t, p)) = tok.split_once(':') else {
                return err(line, format!("expected `t:p`, found `{tok}`"));
            };
            dist.push((parse_state(line, t, n)?, parse_probability(line, p)?));
        }
        if dist.is_empty() {
            return err(line, "empty distribution");
        }
        check_sum(line, s, Some(a), dist.iter().map(|d| d.1))?;
        trans.push((s, a, dist));
    }
    MdpModel::new(n, m, init, lambda, &safe, &trans).map_err(model_error)
}

fn mrm_lambda(line: usize, tok: &str) -> Result<f64, FormatError> {
    if tok == "inf" {
        return Ok(f64::INFINITY);
    }
    match tok.parse::<f64>() {
        Ok(x) if x.is_finite() && x >= 0.0 => Ok(x),
        _ => err(line, format!("threshold must be a nonnegative number or `inf`, found `{tok}`")),
    }
}

/// `(c,t):p` items separated by whitespace; spaces inside the parentheses are
/// allowed.
fn mrm_outcomes(line: usize, n: usize, mut rest: &str) -> Result<Vec<(u32, usize, f64)>, FormatError> {
    let mut out = Vec::new();
    loop {
        rest = rest.trim_start();
        if rest.is_empty() {
            return Ok(out);
        }
        let Some(body) = rest.strip_prefix('(') else {
            return err(line, format!("expected `(c,t):p`, found `{rest}`"));
        };
        let Some((pair, after)) = body.split_once(')') else {
            return err(line, "unclosed `(`");
        };
        let Some((c, t)) = pair.split_once(',') else {
            return err(line, format!("expected `c,t` inside parentheses, found `{pair}`"));
        };
        let c = c.trim();
        let Ok(c) = c.parse::<u32>() else {
            return err(line, format!("reward must be a nonnegative integer below 2^32, found `{c}`"));
        };
        let t = parse_state(line, t.trim(), n)?;
        let Some(after) = after.strip_prefix(':') else {
            return err(line, "expected `:` after `)`");
        };
        let end = after.find(char::is_whitespace).unwrap_or(after.len());
        let p = parse_probability(line, &after[..end])?;
        out.push((c, t, p));
        rest = &after[end..];
    }
}

pub fn parse_mrm(text: &str) -> Result<MrmModel, FormatError> {
    let mut it = lines(text);
    let (h, trans_line) = headers(&mut it, &["states", "init", "lambda", "safe"], mrm_lambda)?;
    let n = require(h.states, trans_line, "states")?;
    let init = single_init(trans_line, require(h.init, trans_line, "init")?)?;
    let lambda = require(h.lambda, trans_line, "lambda")?;
    let safe = require(h.safe, trans_line, "safe")?;
    let mut trans = Vec::new();
    let mut seen = vec![false; n];
    for (line, text) in it {
        let Some((lhs, rhs)) = text.split_once("->") else {
            return err(line, "expected `s -> (c,t):p …`");
        };
        let s = parse_state(line, lhs.trim(), n)?;
        if std::mem::replace(&mut seen[s], true) {
            return err(line, format!("state {s} is defined twice"));
        }
        let outcomes = mrm_outcomes(line, n, rhs)?;
        if outcomes.is_empty() {
            return err(line, "empty distribution");
        }
        check_sum(line, s, None, outcomes.iter().map(|o| o.2))?;
        trans.push((s, outcomes));
    }
    if let Some(s) = seen.iter().position(|&x| !x) {
        return err(trans_line, format!("state {s} has no transitions"));
    }
    MrmModel::new(n, init, lambda, &safe, &trans).map_err(model_error)
}

fn join<T: ToString>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn header_line(out: &mut String, key: &str, values: &str) {
    if values.is_empty() {
        writeln!(out, "{key}").unwrap();
    } else {
        writeln!(out, "{key} {values}").unwrap();
    }
}

pub fn serialize_kripke(k: &KripkeStructure) -> String {
    let mut out = String::new();
    writeln!(out, "states {}", k.state_count()).unwrap();
    header_line(&mut out, "init", &join(k.initial().iter()));
    header_line(&mut out, "safe", &join(k.safe().iter()));
    out.push_str("trans\n");
    for (a, b) in k.transitions() {
        writeln!(out, "{a} {b}").unwrap();
    }
    out
}

pub fn serialize_mdp(m: &MdpModel) -> String {
    let mut out = String::new();
    writeln!(out, "states {}", m.state_count()).unwrap();
    writeln!(out, "actions {}", m.action_count()).unwrap();
    writeln!(out, "init {}", m.initial()).unwrap();
    writeln!(out, "lambda {}", m.lambda()).unwrap();
    header_line(&mut out, "safe", &join(m.safe().iter()));
    out.push_str("trans\n");
    for (s, a, dist) in m.transitions() {
        let items = join(dist.iter().map(|(t, p)| format!("{t}:{p}")));
        writeln!(out, "{s} {a} -> {items}").unwrap();
    }
    out
}

pub fn serialize_mrm(m: &MrmModel) -> String {
    let mut out = String::new();
    writeln!(out, "states {}", m.state_count()).unwrap();
    writeln!(out, "init {}", m.initial()).unwrap();
    if m.lambda().is_infinite() {
        out.push_str("lambda inf\n");
    } else {
        writeln!(out, "lambda {}", m.lambda()).unwrap();
    }
    header_line(&mut out, "safe", &join(m.safe().iter()));
    out.push_str("trans\n");
    for s in 0..m.state_count() {
        let items = join(m.outcomes(s).iter().map(|(c, t, p)| format!("({c},{t}):{p}")));
        writeln!(out, "{s} -> {items}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const K1: &str = "states 3\ninit 0\nsafe 0 1\ntrans\n0 1\n1 1\n2 2\n";
    const M1: &str = "states 3\nactions 1\ninit 0\nlambda 0.6\nsafe 0 1\ntrans\n0 0 -> 1:0.5 2:1/2\n1 0 -> 1:1\n2 0 -> 2:1\n";
    const M2: &str = "states 2\ninit 0\nlambda 1.5\nsafe 0\ntrans\n0 -> (1,0):1/4 (1, 1):3/4\n1 -> (0,1):1\n";

    fn line_of(e: FormatError) -> usize {
        match e {
            FormatError::Parse { line, .. } | FormatError::Distribution { line, .. } => line,
            FormatError::Model(m) => panic!("unexpected model error {m}"),
        }
    }

    #[test]
    fn parses_k1() {
        let k = parse_kripke(K1).unwrap();
        assert_eq!(k, KripkeStructure::new(3, &[(0, 1), (1, 1), (2, 2)], &[0], &[0, 1]).unwrap());
    }

    #[test]
    fn kripke_edge_cases() {
        let k = parse_kripke("states 1\ninit\nsafe 0\ntrans\n").unwrap();
        assert!(k.initial().is_empty());
        assert_eq!(line_of(parse_kripke("states 2\ninit 5\nsafe 0\ntrans\n").unwrap_err()), 2);
        let k = parse_kripke("# comment\nstates 3 # three\n\ninit 0\nunsafe 2\ntrans\n0 1\n0 1\n").unwrap();
        assert_eq!(k.safe().iter().collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(k.transition_count(), 1);
        assert_eq!(line_of(parse_kripke("states 2\ninit 0\nsafe 0\ntrans\n0 1 1\n").unwrap_err()), 5);
        assert_eq!(line_of(parse_kripke("states 2\ninit 0\ntrans\n").unwrap_err()), 3);
    }

    #[test]
    fn parses_m1() {
        let m = parse_mdp(M1).unwrap();
        assert_eq!(m.distribution(0, 0), Some(&[(1, 0.5), (2, 0.5)][..]));
        assert_eq!(m.lambda(), 0.6);
    }

    #[test]
    fn mdp_errors() {
        let bad_sum = "states 1\nactions 1\ninit 0\nlambda 0.5\nsafe 0\ntrans\n0 0 -> 0:0.9\n";
        assert!(matches!(parse_mdp(bad_sum), Err(FormatError::Distribution { line: 7, state: 0, action: Some(0), .. })));
        let bad_lambda = "states 1\nactions 1\ninit 0\nlambda 1.5\nsafe 0\ntrans\n0 0 -> 0:1\n";
        assert_eq!(line_of(parse_mdp(bad_lambda).unwrap_err()), 4);
        let missing_action = "states 2\nactions 1\ninit 0\nlambda 0.5\nsafe 0\ntrans\n0 0 -> 0:1\n";
        assert!(matches!(parse_mdp(missing_action), Err(FormatError::Model(_))));
    }

    #[test]
    fn parses_m2() {
        let m = parse_mrm(M2).unwrap();
        assert_eq!(m.outcomes(0), &[(1, 0, 0.25), (1, 1, 0.75)]);
        let inf = parse_mrm(&M2.replace("lambda 1.5", "lambda inf")).unwrap();
        assert!(inf.lambda().is_infinite());
    }

    #[test]
    fn mrm_errors() {
        assert_eq!(line_of(parse_mrm(&M2.replace("(1,0)", "(-1,0)")).unwrap_err()), 6);
        assert_eq!(line_of(parse_mrm(&M2.replace("init 0\n", "")).unwrap_err()), 4);
        assert_eq!(line_of(parse_mrm(&M2.replace("lambda 1.5", "lambda -2")).unwrap_err()), 3);
    }

    #[test]
    fn probabilities() {
        assert_eq!(parse_probability(1, "1/4").unwrap(), 0.25);
        assert_eq!(parse_probability(1, "0.125").unwrap(), 0.125);
        assert!(parse_probability(1, "1/0").is_err());
        assert!(parse_probability(1, "3/2").is_err());
        assert!(parse_probability(1, "x").is_err());
    }

    #[test]
    fn round_trips() {
        let k = parse_kripke(K1).unwrap();
        assert_eq!(parse_kripke(&serialize_kripke(&k)).unwrap(), k);
        let m = parse_mdp(M1).unwrap();
        assert_eq!(parse_mdp(&serialize_mdp(&m)).unwrap(), m);
        let r = parse_mrm(M2).unwrap();
        assert_eq!(parse_mrm(&serialize_mrm(&r)).unwrap(), r);
    }

    proptest::proptest! {
        #[test]
        fn random_models_round_trip(seed in proptest::prelude::any::<u64>(), n in 1usize..8) {
            use ltpdr_core::gen::{random_kripke, random_mdp, random_mrm};
            use rand::SeedableRng;
            let mut rng = rand::rngs::SmallRng::seed_from_u64(seed);
            let k = random_kripke(&mut rng, n, 0.3);
            proptest::prop_assert_eq!(parse_kripke(&serialize_kripke(&k)).unwrap(), k);
            let m = random_mdp(&mut rng, n, 2, 0.37);
            proptest::prop_assert_eq!(parse_mdp(&serialize_mdp(&m)).unwrap(), m);
            let r = random_mrm(&mut rng, n, 2.5);
            proptest::prop_assert_eq!(parse_mrm(&serialize_mrm(&r)).unwrap(), r);
        }
    }
}
