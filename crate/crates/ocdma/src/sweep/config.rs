//! Line-oriented experiment config parser: `[section]` headers, `key = value`
//! pairs, `#` comments, comma-separated lists, rationals as `b/a`.
//!
//! Sections and keys:
//!
//! ```text
//! [code]      length, weight        (or: file = path to a code-family file)
//! [receiver]  kind = ccr | pic; s = threshold list; s2 = stage-2 list (pic)
//! [sweep]     users, methods (analytic, mc, exact), mode (strict | permissive),
//!             sim (model | code), trials (mc), seed
//! [channels]  plan = none | list of b/a or offset:K entries (repeatable);
//!             fwhm, spacing, filter in nm (needed by offset entries)
//! [output]    prefix
//! ```
//!
//! Unknown sections and keys are errors, not warnings. Every error carries
//! the 1-based line it was found on (line 0 = whole-file problems such as a
//! missing section).

use super::{CodeSpec, Method, Plan, ReceiverKind, SweepSpec};
use crate::analytic::{alpha_from_spectrum, EvalMode};
use crate::mcsim::SimMode;
use crate::numeric::Alpha;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

struct RawItem {
    line: usize,
    key: String,
    value: String,
}

struct Sections {
    items: BTreeMap<&'static str, Vec<RawItem>>,
    header_lines: BTreeMap<&'static str, usize>,
}

const SECTIONS: &[&str] = &["code", "receiver", "sweep", "channels", "output"];

const KEYS: &[(&str, &[&str])] = &[
    ("code", &["length", "weight", "file"]),
    ("receiver", &["kind", "s", "s2"]),
    (
        "sweep",
        &["users", "methods", "mode", "sim", "trials", "seed"],
    ),
    ("channels", &["plan", "fwhm", "spacing", "filter"]),
    ("output", &["prefix"]),
];

/// Keys that may appear more than once.
const REPEATABLE: &[(&str, &str)] = &[("channels", "plan")];

fn tokenize(text: &str, errors: &mut Vec<ParseError>) -> Sections {
    let mut sections = Sections {
        items: BTreeMap::new(),
        header_lines: BTreeMap::new(),
    };
    let mut current: Option<&'static str> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw_line.split_once('#') {
            Some((before, _)) => before,
            None => raw_line,
        }
        .trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let Some(name) = name.strip_suffix(']') else {
                errors.push(ParseError {
                    line,
                    message: format!("malformed section header `{content}`"),
                });
                continue;
            };
            match SECTIONS.iter().find(|s| **s == name) {
                Some(&known) => {
                    if sections.header_lines.insert(known, line).is_some() {
                        errors.push(ParseError {
                            line,
                            message: format!("duplicate section [{known}]"),
                        });
                    }
                    current = Some(known);
                }
                None => {
                    errors.push(ParseError {
                        line,
                        message: format!("unknown section [{name}]"),
                    });
                    current = None;
                }
            }
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            errors.push(ParseError {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            });
            continue;
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        let Some(section) = current else {
            errors.push(ParseError {
                line,
                message: format!("`{key}` appears before any [section]"),
            });
            continue;
        };
        let allowed = KEYS
            .iter()
            .find(|(s, _)| *s == section)
            .map(|(_, keys)| *keys)
            .unwrap_or(&[]);
        if !allowed.contains(&key.as_str()) {
            errors.push(ParseError {
                line,
                message: format!("unknown key `{key}` in [{section}]"),
            });
            continue;
        }
        let repeatable = REPEATABLE.contains(&(section, key.as_str()));
        let items = sections.items.entry(section).or_default();
        if !repeatable && items.iter().any(|i| i.key == key) {
            errors.push(ParseError {
                line,
                message: format!("duplicate key `{key}` in [{section}]"),
            });
            continue;
        }
        items.push(RawItem { line, key, value });
    }
    sections
}

impl Sections {
    fn get(&self, section: &str, key: &str) -> Option<&RawItem> {
        self.items
            .get(section)
            .and_then(|items| items.iter().find(|i| i.key == key))
    }

    fn get_all(&self, section: &str, key: &str) -> Vec<&RawItem> {
        self.items
            .get(section)
            .map(|items| items.iter().filter(|i| i.key == key).collect())
            .unwrap_or_default()
    }

    fn section_line(&self, section: &str) -> usize {
        self.header_lines.get(section).copied().unwrap_or(0)
    }
}

fn parse_u32(item: &RawItem, errors: &mut Vec<ParseError>) -> Option<u32> {
    match item.value.parse() {
        Ok(v) => Some(v),
        Err(e) => {
            errors.push(ParseError {
                line: item.line,
                message: format!("`{}`: bad integer `{}`: {e}", item.key, item.value),
            });
            None
        }
    }
}

fn parse_u64(item: &RawItem, errors: &mut Vec<ParseError>) -> Option<u64> {
    match item.value.parse() {
        Ok(v) => Some(v),
        Err(e) => {
            errors.push(ParseError {
                line: item.line,
                message: format!("`{}`: bad integer `{}`: {e}", item.key, item.value),
            });
            None
        }
    }
}

fn parse_f64_pos(item: &RawItem, errors: &mut Vec<ParseError>) -> Option<f64> {
    match item.value.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Some(v),
        _ => {
            errors.push(ParseError {
                line: item.line,
                message: format!(
                    "`{}` must be a positive number, got `{}`",
                    item.key, item.value
                ),
            });
            None
        }
    }
}

fn parse_u32_list(item: &RawItem, errors: &mut Vec<ParseError>) -> Vec<u32> {
    let mut out = Vec::new();
    for part in item.value.split(',') {
        match part.trim().parse::<u32>() {
            Ok(v) => out.push(v),
            Err(e) => errors.push(ParseError {
                line: item.line,
                message: format!("`{}`: bad integer `{}`: {e}", item.key, part.trim()),
            }),
        }
    }
    if out.is_empty() {
        errors.push(ParseError {
            line: item.line,
            message: format!("`{}` list is empty", item.key),
        });
    }
    out
}

struct SpectrumKeys {
    fwhm: Option<f64>,
    spacing: Option<f64>,
    filter: Option<f64>,
}

fn resolve_plan(
    item: &RawItem,
    spectrum: &SpectrumKeys,
    errors: &mut Vec<ParseError>,
) -> Option<Plan> {
    if item.value == "none" {
        return Some(Plan::no_wdm());
    }
    let mut alphas = Vec::new();
    let mut offsets = Vec::new();
    for part in item.value.split(',') {
        let part = part.trim();
        if let Some(offset_text) = part.strip_prefix("offset:") {
            let Ok(offset) = offset_text.parse::<i32>() else {
                errors.push(ParseError {
                    line: item.line,
                    message: format!("bad channel offset `{part}`"),
                });
                return None;
            };
            let (Some(fwhm), Some(spacing), Some(filter)) =
                (spectrum.fwhm, spectrum.spacing, spectrum.filter)
            else {
                errors.push(ParseError {
                    line: item.line,
                    message: "offset: entries need fwhm, spacing and filter in [channels]"
                        .to_string(),
                });
                return None;
            };
            let snapped = match alpha_from_spectrum(fwhm, spacing, offset, filter) {
                Ok(r) => r,
                Err(e) => {
                    errors.push(ParseError {
                        line: item.line,
                        message: e.to_string(),
                    });
                    return None;
                }
            };
            match Alpha::new(*snapped.numer(), *snapped.denom()) {
                Ok(alpha) => {
                    alphas.push(alpha);
                    offsets.push(offset);
                }
                Err(_) => {
                    errors.push(ParseError {
                        line: item.line,
                        message: format!(
                            "offset:{offset} resolves to a zero coefficient; drop the channel \
                             or widen the source"
                        ),
                    });
                    return None;
                }
            }
        } else {
            match Alpha::parse(part) {
                Ok(alpha) => alphas.push(alpha),
                Err(e) => {
                    errors.push(ParseError {
                        line: item.line,
                        message: e.to_string(),
                    });
                    return None;
                }
            }
        }
    }
    if alphas.is_empty() {
        errors.push(ParseError {
            line: item.line,
            message: "empty channel plan; use `plan = none` for the no-WDM case".to_string(),
        });
        return None;
    }
    let alpha_model = if offsets.is_empty() {
        String::new()
    } else {
        format!(
            "spectral(fwhm={},spacing={},filter={},offsets={})",
            spectrum.fwhm.unwrap(),
            spectrum.spacing.unwrap(),
            spectrum.filter.unwrap(),
            offsets
                .iter()
                .map(|o| o.to_string())
                .collect::<Vec<_>>()
                .join("|")
        )
    };
    Some(Plan::new(alphas, alpha_model))
}

/// Parses and fully validates a sweep config; returns either the spec or
/// every located error.
pub fn parse_config(text: &str) -> Result<SweepSpec, Vec<ParseError>> {
    let mut errors = Vec::new();
    let sections = tokenize(text, &mut errors);

    // [code]
    let code = {
        let file = sections.get("code", "file");
        let length = sections.get("code", "length");
        let weight = sections.get("code", "weight");
        match (file, length, weight) {
            (Some(f), None, None) => Some(CodeSpec::File {
                path: f.value.clone(),
            }),
            (None, Some(l), Some(w)) => {
                let l = parse_u32(l, &mut errors);
                let w = parse_u32(w, &mut errors);
                match (l, w) {
                    (Some(length), Some(weight)) => Some(CodeSpec::Params { length, weight }),
                    _ => None,
                }
            }
            (None, None, None) => {
                errors.push(ParseError {
                    line: sections.section_line("code"),
                    message: "[code] needs either `length` and `weight`, or `file`".to_string(),
                });
                None
            }
            _ => {
                errors.push(ParseError {
                    line: sections.section_line("code"),
                    message: "[code] takes `length` + `weight` or `file`, not both".to_string(),
                });
                None
            }
        }
    };

    // [receiver]
    let receiver = match sections.get("receiver", "kind") {
        Some(item) => match item.value.as_str() {
            "ccr" => Some(ReceiverKind::Ccr),
            "pic" => Some(ReceiverKind::Pic),
            other => {
                errors.push(ParseError {
                    line: item.line,
                    message: format!("receiver kind must be `ccr` or `pic`, got `{other}`"),
                });
                None
            }
        },
        None => {
            errors.push(ParseError {
                line: sections.section_line("receiver"),
                message: "[receiver] needs `kind`".to_string(),
            });
            None
        }
    };
    let thresholds = match sections.get("receiver", "s") {
        Some(item) => parse_u32_list(item, &mut errors),
        None => {
            errors.push(ParseError {
                line: sections.section_line("receiver"),
                message: "[receiver] needs `s`".to_string(),
            });
            Vec::new()
        }
    };
    let thresholds2 = match (receiver, sections.get("receiver", "s2")) {
        (Some(ReceiverKind::Pic), Some(item)) => parse_u32_list(item, &mut errors),
        (Some(ReceiverKind::Pic), None) => {
            errors.push(ParseError {
                line: sections.section_line("receiver"),
                message: "pic receivers need `s2`".to_string(),
            });
            Vec::new()
        }
        (Some(ReceiverKind::Ccr), Some(item)) => {
            errors.push(ParseError {
                line: item.line,
                message: "`s2` only applies to pic receivers".to_string(),
            });
            Vec::new()
        }
        _ => Vec::new(),
    };

    // [sweep]
    let users = match sections.get("sweep", "users") {
        Some(item) => parse_u32_list(item, &mut errors),
        None => {
            errors.push(ParseError {
                line: sections.section_line("sweep"),
                message: "[sweep] needs `users`".to_string(),
            });
            Vec::new()
        }
    };
    let methods: Vec<Method> = match sections.get("sweep", "methods") {
        Some(item) => {
            let mut out = Vec::new();
            for part in item.value.split(',') {
                match part.trim() {
                    "analytic" => out.push(Method::Analytic),
                    "mc" => out.push(Method::Mc),
                    "exact" => out.push(Method::Exact),
                    other => errors.push(ParseError {
                        line: item.line,
                        message: format!("unknown method `{other}` (expected analytic, mc, exact)"),
                    }),
                }
            }
            out.sort_unstable();
            out.dedup();
            if out.is_empty() {
                errors.push(ParseError {
                    line: item.line,
                    message: "`methods` list is empty".to_string(),
                });
            }
            out
        }
        None => {
            errors.push(ParseError {
                line: sections.section_line("sweep"),
                message: "[sweep] needs `methods`".to_string(),
            });
            Vec::new()
        }
    };
    let mode = match sections.get("sweep", "mode") {
        Some(item) => match item.value.as_str() {
            "strict" => EvalMode::Strict,
            "permissive" => EvalMode::Permissive,
            other => {
                errors.push(ParseError {
                    line: item.line,
                    message: format!("mode must be `strict` or `permissive`, got `{other}`"),
                });
                EvalMode::Strict
            }
        },
        None => EvalMode::Strict,
    };
    let sim = match sections.get("sweep", "sim") {
        Some(item) => match item.value.as_str() {
            "model" => SimMode::Model,
            "code" => SimMode::Code,
            other => {
                errors.push(ParseError {
                    line: item.line,
                    message: format!("sim must be `model` or `code`, got `{other}`"),
                });
                SimMode::Model
            }
        },
        None => SimMode::Model,
    };
    let trials = sections
        .get("sweep", "trials")
        .and_then(|item| parse_u64(item, &mut errors));
    if methods.contains(&Method::Mc) {
        match trials {
            Some(0) | None => errors.push(ParseError {
                line: sections.section_line("sweep"),
                message: "the mc method needs `trials` >= 1".to_string(),
            }),
            _ => {}
        }
    }
    let seed = sections
        .get("sweep", "seed")
        .and_then(|item| parse_u64(item, &mut errors))
        .unwrap_or(0);

    // [channels]
    let spectrum = SpectrumKeys {
        fwhm: sections
            .get("channels", "fwhm")
            .and_then(|i| parse_f64_pos(i, &mut errors)),
        spacing: sections
            .get("channels", "spacing")
            .and_then(|i| parse_f64_pos(i, &mut errors)),
        filter: sections
            .get("channels", "filter")
            .and_then(|i| parse_f64_pos(i, &mut errors)),
    };
    let plan_items = sections.get_all("channels", "plan");
    let mut plans: Vec<Plan> = Vec::new();
    if plan_items.is_empty() {
        plans.push(Plan::no_wdm());
    } else {
        for item in plan_items {
            if let Some(plan) = resolve_plan(item, &spectrum, &mut errors) {
                if plans.iter().any(|p| p.label() == plan.label()) {
                    errors.push(ParseError {
                        line: item.line,
                        message: format!("duplicate channel plan `{}`", plan.label()),
                    });
                } else {
                    plans.push(plan);
                }
            }
        }
    }

    // [output]
    let output_prefix = match sections.get("output", "prefix") {
        Some(item) => {
            if item.value.is_empty()
                || !item
                    .value
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
            {
                errors.push(ParseError {
                    line: item.line,
                    message: "prefix must be nonempty [A-Za-z0-9_-]".to_string(),
                });
            }
            item.value.clone()
        }
        None => "results".to_string(),
    };

    for item in [("users", &users), ("s", &thresholds)] {
        if item.1.contains(&0) {
            errors.push(ParseError {
                line: sections.section_line(if item.0 == "users" {
                    "sweep"
                } else {
                    "receiver"
                }),
                message: format!("`{}` values must be at least 1", item.0),
            });
        }
    }
    if thresholds2.contains(&0) {
        errors.push(ParseError {
            line: sections.section_line("receiver"),
            message: "`s2` values must be at least 1".to_string(),
        });
    }

    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(SweepSpec {
        code: code.expect("validated"),
        receiver: receiver.expect("validated"),
        thresholds,
        thresholds2,
        users,
        methods,
        mode,
        sim,
        trials,
        seed,
        plans,
        output_prefix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[code]
length = 64
weight = 2

[receiver]
kind = ccr
s = 2

[sweep]
users = 8
methods = analytic
";

    #[test]
    fn minimal_config_parses() {
        let spec = parse_config(MINIMAL).unwrap();
        assert_eq!(spec.users, vec![8]);
        assert_eq!(spec.thresholds, vec![2]);
        assert_eq!(spec.plans.len(), 1);
        assert!(spec.plans[0].alphas().is_empty());
        assert_eq!(spec.mode, EvalMode::Strict);
        assert_eq!(spec.output_prefix, "results");
    }

    #[test]
    fn unknown_keys_are_errors() {
        let text = format!("{MINIMAL}\n[sweep]\n"); // duplicate section
        assert!(parse_config(&text).is_err());
        let text = MINIMAL.replace("users = 8", "users = 8\nbogus = 1");
        let errs = parse_config(&text).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| e.message.contains("unknown key `bogus`")));
        assert_eq!(errs.len(), 1);
    }

    #[test]
    fn zero_alpha_is_a_parse_error() {
        let text = format!("{MINIMAL}\n[channels]\nplan = 0/2\n");
        let errs = parse_config(&text).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(errs[0].message.contains("0 < b/a <= 1"));
        assert!(errs[0].line > 0);
    }

    #[test]
    fn spectral_plans_resolve() {
        let text = format!(
            "{MINIMAL}\n[channels]\nfwhm = 2.0\nspacing = 0.8\nfilter = 0.8\n\
             plan = none\nplan = offset:1, offset:-1\n"
        );
        let spec = parse_config(&text).unwrap();
        assert_eq!(spec.plans.len(), 2);
        let wdm = &spec.plans[1];
        assert_eq!(wdm.alphas().len(), 2);
        assert_eq!(wdm.alphas()[0], wdm.alphas()[1]);
        assert!(wdm.alpha_model().contains("spectral(fwhm=2"));
        assert!(wdm.alpha_model().contains("offsets=1|-1"));
    }

    #[test]
    fn offsets_without_spectrum_keys_fail() {
        let text = format!("{MINIMAL}\n[channels]\nplan = offset:1\n");
        let errs = parse_config(&text).unwrap_err();
        assert!(errs[0].message.contains("fwhm"));
    }

    #[test]
    fn mc_requires_trials() {
        let text = MINIMAL.replace("methods = analytic", "methods = analytic, mc");
        let errs = parse_config(&text).unwrap_err();
        assert!(errs.iter().any(|e| e.message.contains("trials")));
        let ok = MINIMAL.replace("methods = analytic", "methods = mc\ntrials = 1000");
        assert!(parse_config(&ok).is_ok());
    }

    #[test]
    fn pic_threshold_pairing() {
        let text = MINIMAL.replace("kind = ccr", "kind = pic");
        let errs = parse_config(&text).unwrap_err();
        assert!(errs.iter().any(|e| e.message.contains("s2")));
        let text = MINIMAL.replace("s = 2", "s = 2\ns2 = 1, 2");
        let errs = parse_config(&text).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| e.message.contains("only applies to pic")));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = MINIMAL.replace("users = 8", "users = 8  # eight actives\n\n# done");
        assert!(parse_config(&text).is_ok());
    }
}
