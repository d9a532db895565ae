//! The `mdp v1` and `policy v1` text formats.
//!
//! Both are UTF-8, line oriented, with `#` comments. Serialization is
//! canonical (fixed line order, shortest round-trip float printing), so
//! save → load → save is byte-identical.

use std::collections::BTreeMap;
use std::fmt;

use gclab_core::mdp::{validate, FiniteMdp};
use gclab_core::policy::GoalConditionedPolicy;

#[derive(Debug)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Line 0 marks whole-file validation failures.
        if self.line == 0 {
            f.write_str(&self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ParseError {}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            None
        } else {
            Some((i + 1, line))
        }
    })
}

/// Parses the `mdp v1` grammar and validates the kernel. Per-(state,
/// action) probabilities must sum to 1 within 1e-9.
pub fn parse_mdp(text: &str) -> Result<FiniteMdp, ParseError> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, "mdp v1")) => {}
        Some((n, other)) => {
            return Err(ParseError::new(
                n,
                format!("expected `mdp v1` header, found `{other}`"),
            ))
        }
        None => {
            return Err(ParseError::new(
                1,
                "expected `mdp v1` header, found end of file",
            ))
        }
    }

    let mut states: Vec<String> = Vec::new();
    let mut state_index: BTreeMap<String, usize> = BTreeMap::new();
    let mut actions: Vec<Vec<String>> = Vec::new();
    let mut triples: Vec<(usize, usize, usize, usize, f64)> = Vec::new(); // line, s, a, sp, p

    for (n, line) in lines {
        if let Some(rest) = line.strip_prefix("states:") {
            if !states.is_empty() {
                return Err(ParseError::new(n, "duplicate `states:` line"));
            }
            for token in rest.split_whitespace() {
                if state_index
                    .insert(token.to_string(), states.len())
                    .is_some()
                {
                    return Err(ParseError::new(n, format!("duplicate state id `{token}`")));
                }
                states.push(token.to_string());
            }
            if states.is_empty() {
                return Err(ParseError::new(n, "`states:` line lists no states"));
            }
            actions = vec![Vec::new(); states.len()];
        } else if let Some(rest) = line.strip_prefix("actions ") {
            let (name, list) = rest
                .split_once(':')
                .ok_or_else(|| ParseError::new(n, "expected `actions <state>: a1 a2 ...`"))?;
            let name = name.trim();
            let s = *state_index
                .get(name)
                .ok_or_else(|| ParseError::new(n, format!("unknown state `{name}`")))?;
            if !actions[s].is_empty() {
                return Err(ParseError::new(
                    n,
                    format!("duplicate `actions` line for `{name}`"),
                ));
            }
            actions[s] = list.split_whitespace().map(|t| t.to_string()).collect();
            if actions[s].is_empty() {
                return Err(ParseError::new(
                    n,
                    format!("state `{name}` lists no actions"),
                ));
            }
        } else if let Some(rest) = line.strip_prefix("t ") {
            let tokens: Vec<&str> = rest.split_whitespace().collect();
            if tokens.len() != 4 {
                return Err(ParseError::new(
                    n,
                    format!(
                        "expected `t <state> <action> <state'> <prob>`, found {} token(s)",
                        tokens.len()
                    ),
                ));
            }
            let s = *state_index
                .get(tokens[0])
                .ok_or_else(|| ParseError::new(n, format!("unknown state `{}`", tokens[0])))?;
            let a = actions[s]
                .iter()
                .position(|a| a == tokens[1])
                .ok_or_else(|| {
                    ParseError::new(
                        n,
                        format!("unknown action `{}` at `{}`", tokens[1], tokens[0]),
                    )
                })?;
            let sp = *state_index
                .get(tokens[2])
                .ok_or_else(|| ParseError::new(n, format!("unknown state `{}`", tokens[2])))?;
            let p: f64 = tokens[3].parse().map_err(|_| {
                ParseError::new(n, format!("bad probability token `{}`", tokens[3]))
            })?;
            triples.push((n, s, a, sp, p));
        } else {
            return Err(ParseError::new(
                n,
                format!("unrecognized directive `{line}`"),
            ));
        }
    }

    if states.is_empty() {
        return Err(ParseError::new(1, "missing `states:` line"));
    }
    let mut kernel: Vec<Vec<Vec<f64>>> = (0..states.len())
        .map(|s| vec![vec![0.0; states.len()]; actions[s].len()])
        .collect();
    for (n, s, a, sp, p) in triples {
        if kernel[s][a][sp] != 0.0 {
            return Err(ParseError::new(
                n,
                format!(
                    "duplicate transition ({}, {}) -> {}",
                    states[s], actions[s][a], states[sp]
                ),
            ));
        }
        kernel[s][a][sp] = p;
    }
    let violations = validate(&states, &actions, &kernel);
    if !violations.is_empty() {
        let listed = violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        return Err(ParseError::new(0, format!("validation failed: {listed}")));
    }
    FiniteMdp::new(states, actions, kernel)
        .map_err(|e| ParseError::new(0, format!("validation failed: {e}")))
}

/// Canonical `mdp v1` serialization.
pub fn serialize_mdp(mdp: &FiniteMdp) -> String {
    let mut out = String::from("mdp v1\n");
    out.push_str("states:");
    for s in mdp.states() {
        out.push(' ');
        out.push_str(s);
    }
    out.push('\n');
    for s in 0..mdp.n_states() {
        out.push_str(&format!("actions {}:", mdp.state_name(s)));
        for a in mdp.actions_of(s) {
            out.push(' ');
            out.push_str(a);
        }
        out.push('\n');
    }
    for s in 0..mdp.n_states() {
        for a in 0..mdp.n_actions(s) {
            for (sp, &p) in mdp.row(s, a).iter().enumerate() {
                if p > 0.0 {
                    out.push_str(&format!(
                        "t {} {} {} {}\n",
                        mdp.state_name(s),
                        mdp.action_name(s, a),
                        mdp.state_name(sp),
                        p
                    ));
                }
            }
        }
    }
    out
}

/// Parses the `policy v1` grammar against an MDP. Conditioning labels
/// are free-form (goal state ids or skill ids); `*` marks the
/// stationary tail slot.
pub fn parse_policy(text: &str, mdp: &FiniteMdp) -> Result<GoalConditionedPolicy, ParseError> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, "policy v1")) => {}
        Some((n, other)) => {
            return Err(ParseError::new(
                n,
                format!("expected `policy v1` header, found `{other}`"),
            ))
        }
        None => {
            return Err(ParseError::new(
                1,
                "expected `policy v1` header, found end of file",
            ))
        }
    }
    struct Entry {
        line: usize,
        time: Option<usize>, // None = tail
        s: usize,
        a: usize,
        p: f64,
    }
    let mut labels: Vec<String> = Vec::new();
    let mut entries: BTreeMap<usize, Vec<Entry>> = BTreeMap::new();
    let mut horizon = 0usize;
    for (n, line) in lines {
        let rest = line
            .strip_prefix("p ")
            .ok_or_else(|| ParseError::new(n, format!("unrecognized directive `{line}`")))?;
        let tokens: Vec<&str> = rest.split_whitespace().collect();
        if tokens.len() != 5 {
            return Err(ParseError::new(
                n,
                format!(
                    "expected `p <cond> <time|*> <state> <action> <prob>`, found {} token(s)",
                    tokens.len()
                ),
            ));
        }
        let cond = match labels.iter().position(|l| l == tokens[0]) {
            Some(i) => i,
            None => {
                labels.push(tokens[0].to_string());
                labels.len() - 1
            }
        };
        let time = if tokens[1] == "*" {
            None
        } else {
            let t: usize = tokens[1]
                .parse()
                .map_err(|_| ParseError::new(n, format!("bad time token `{}`", tokens[1])))?;
            horizon = horizon.max(t + 1);
            Some(t)
        };
        let s = mdp
            .state_index(tokens[2])
            .ok_or_else(|| ParseError::new(n, format!("unknown state `{}`", tokens[2])))?;
        let a = mdp.action_index(s, tokens[3]).ok_or_else(|| {
            ParseError::new(
                n,
                format!("unknown action `{}` at `{}`", tokens[3], tokens[2]),
            )
        })?;
        let p: f64 = tokens[4]
            .parse()
            .map_err(|_| ParseError::new(n, format!("bad probability token `{}`", tokens[4])))?;
        entries.entry(cond).or_default().push(Entry {
            line: n,
            time,
            s,
            a,
            p,
        });
    }
    if labels.is_empty() {
        return Err(ParseError::new(1, "policy lists no entries"));
    }
    let slots = horizon + 1;
    let mut table = vec![
        vec![
            (0..mdp.n_states())
                .map(|s| vec![0.0; mdp.n_actions(s)])
                .collect::<Vec<_>>();
            slots
        ];
        labels.len()
    ];
    for (cond, list) in entries {
        for e in list {
            let slot = e.time.unwrap_or(horizon);
            if table[cond][slot][e.s][e.a] != 0.0 {
                return Err(ParseError::new(e.line, "duplicate policy entry"));
            }
            table[cond][slot][e.s][e.a] = e.p;
        }
    }
    GoalConditionedPolicy::from_table(mdp, labels, horizon, table)
        .map_err(|e| ParseError::new(0, format!("validation failed: {e}")))
}

/// Canonical `policy v1` serialization: conditioning-major, explicit
/// slots before the `*` tail, zero entries omitted.
pub fn serialize_policy(policy: &GoalConditionedPolicy, mdp: &FiniteMdp) -> String {
    let mut out = String::from("policy v1\n");
    for (c, label) in policy.labels().iter().enumerate() {
        for slot in 0..policy.n_slots() {
            let time = if slot == policy.horizon() {
                "*".to_string()
            } else {
                slot.to_string()
            };
            for s in 0..mdp.n_states() {
                for (a, &p) in policy.slot_probs(c, slot, s).iter().enumerate() {
                    if p > 0.0 {
                        out.push_str(&format!(
                            "p {} {} {} {} {}\n",
                            label,
                            time,
                            mdp.state_name(s),
                            mdp.action_name(s, a),
                            p
                        ));
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use gclab_core::mdp;
    use gclab_core::policy::{random_policy, Conditioning};

    #[test]
    fn river_round_trips_byte_identically() {
        let m = mdp::river(0.08, 0.2).unwrap();
        let text = serialize_mdp(&m);
        let reloaded = parse_mdp(&text).unwrap();
        let again = serialize_mdp(&reloaded);
        assert_eq!(text, again);
        assert_eq!(m, reloaded);
    }

    #[test]
    fn random_mdp_round_trips_byte_identically() {
        for seed in 0..20 {
            let m = mdp::random_mdp(4, 2, 2, seed).unwrap();
            let text = serialize_mdp(&m);
            let reloaded = parse_mdp(&text).unwrap();
            assert_eq!(text, serialize_mdp(&reloaded), "seed {seed}");
        }
    }

    #[test]
    fn missing_header_is_line_one_error() {
        let err = parse_mdp("states: a b\n").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.message.contains("mdp v1"));
    }

    #[test]
    fn bad_row_sum_names_the_pair() {
        let text = "mdp v1\nstates: a b\nactions a: x\nactions b: x\n\
                    t a x b 0.9\nt b x b 1\n";
        let err = parse_mdp(text).unwrap_err();
        assert!(err.message.contains("row-sum 0.9"), "{err}");
        assert!(err.message.contains("(a, x)"), "{err}");
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# header comment\nmdp v1\n\nstates: a  # two states? no, one\nactions a: x\nt a x a 1.0\n";
        let m = parse_mdp(text).unwrap();
        assert_eq!(m.n_states(), 1);
    }

    #[test]
    fn unknown_tokens_carry_line_numbers() {
        let text = "mdp v1\nstates: a\nactions a: x\nt a y a 1.0\n";
        let err = parse_mdp(text).unwrap_err();
        assert_eq!(err.line, 4);
        assert!(err.message.contains("unknown action `y`"));
    }

    #[test]
    fn policy_round_trips() {
        let m = mdp::random_mdp(3, 2, 2, 5).unwrap();
        let pol = random_policy(&m, Conditioning::Goals, 2, 9);
        let text = serialize_policy(&pol, &m);
        let reloaded = parse_policy(&text, &m).unwrap();
        assert_eq!(text, serialize_policy(&reloaded, &m));
        assert_eq!(pol, reloaded);
    }

    #[test]
    fn skill_policy_round_trips_with_skill_labels() {
        let m = mdp::random_mdp(3, 2, 2, 6).unwrap();
        let pol = random_policy(&m, Conditioning::Skills(2), 1, 4);
        let text = serialize_policy(&pol, &m);
        let reloaded = parse_policy(&text, &m).unwrap();
        assert_eq!(reloaded.labels(), &["z0".to_string(), "z1".to_string()]);
        assert_eq!(pol, reloaded);
    }
}
