//! A small expression language for user-defined maps.
//!
//! A map-spec file is UTF-8 text with one `key = value` entry per line.
//! Text after `#` is a comment and blank lines are ignored; keys may appear in
//! any order, each at most once.
//!
//! ```text
//! name      = bernoulli_dsl            # optional, default "custom"
//! dimension = 1                        # required, m >= 1
//! domain    = [0, 1]                   # required, m intervals joined by `x`
//! params    = a=1.0                    # optional, comma list of `name` or `name=default`
//! x0        = 0.3                      # optional, comma list, default: domain midpoint
//! guard     = x1 <= 0.5                # optional, one comparison
//! f1        = 2*a*x1                   # required f1..fm, branch taken when guard holds
//! g1        = a*(2*x1 - 1)             # g1..gm, required iff guard is present
//! jacobian  = numeric                  # optional: `numeric` (default) or `none`
//! ```
//!
//! State variables are `x1..xm`. Expression grammar: see [`parser`].
//! Jacobians of DSL maps are central finite differences.

mod expr;
mod parser;

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

pub use expr::{BinOp, CmpOp, Expr, Func};
pub use parser::{parse_expr, parse_expr_bytes};

use crate::dynsys::{Domain, MapSystem};
use crate::error::{Error, Result};
use expr::Compiled;

/// Unparsed description of a custom map.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSpecSource {
    pub name: String,
    pub dimension: usize,
    pub component_exprs: Vec<String>,
    pub guard: Option<String>,
    pub else_exprs: Vec<String>,
    pub param_names: Vec<String>,
    pub param_defaults: Vec<f64>,
    pub domain: Domain,
    pub x0: Option<Vec<f64>>,
    pub jacobian: bool,
}

impl MapSpecSource {
    /// Reads the line-oriented map-spec format.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.split('#').next().unwrap_or_default().trim();
            if trimmed.is_empty() {
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or_else(|| Error::MapFile {
                line,
                message: "expected `key = value`".into(),
            })?;
            let key = key.trim().to_string();
            if entries.contains_key(&key) {
                return Err(Error::MapFile {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
            entries.insert(key, (line, value.trim().to_string()));
        }

        let file_err = |line: usize, message: String| Error::MapFile { line, message };
        let take = |entries: &mut BTreeMap<String, (usize, String)>, key: &str| entries.remove(key);

        let (dim_line, dim_text) =
            take(&mut entries, "dimension").ok_or_else(|| file_err(0, "missing `dimension`".into()))?;
        let dimension: usize = dim_text
            .parse()
            .ok()
            .filter(|d| *d >= 1)
            .ok_or_else(|| file_err(dim_line, format!("invalid dimension `{dim_text}`")))?;

        let (dom_line, dom_text) =
            take(&mut entries, "domain").ok_or_else(|| file_err(0, "missing `domain`".into()))?;
        let domain = parse_domain(&dom_text).map_err(|m| file_err(dom_line, m))?;

        let name = take(&mut entries, "name").map_or_else(|| "custom".to_string(), |(_, v)| v);

        let mut param_names = Vec::new();
        let mut param_defaults = Vec::new();
        if let Some((line, text)) = take(&mut entries, "params") {
            for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let (pname, default) = match item.split_once('=') {
                    Some((n, v)) => {
                        let v: f64 = v
                            .trim()
                            .parse()
                            .map_err(|_| file_err(line, format!("invalid default in `{item}`")))?;
                        (n.trim(), v)
                    }
                    None => (item, 0.0),
                };
                param_names.push(pname.to_string());
                param_defaults.push(default);
            }
        }

        let x0 = match take(&mut entries, "x0") {
            Some((line, text)) => Some(parse_list(&text).map_err(|m| file_err(line, m))?),
            None => None,
        };

        let jacobian = match take(&mut entries, "jacobian") {
            None => true,
            Some((_, v)) if v == "numeric" => true,
            Some((_, v)) if v == "none" => false,
            Some((line, v)) => {
                return Err(file_err(
                    line,
                    format!("jacobian must be `numeric` or `none`, got `{v}`"),
                ))
            }
        };

        let guard = take(&mut entries, "guard").map(|(_, v)| v);
        let mut component_exprs = Vec::new();
        let mut else_exprs = Vec::new();
        for k in 1..=dimension {
            if let Some((_, v)) = take(&mut entries, &format!("f{k}")) {
                component_exprs.push(v);
            }
            if let Some((_, v)) = take(&mut entries, &format!("g{k}")) {
                else_exprs.push(v);
            }
        }
        if let Some((key, (line, _))) = entries.into_iter().next() {
            return Err(file_err(line, format!("unexpected key `{key}`")));
        }

        Ok(Self {
            name,
            dimension,
            component_exprs,
            guard,
            else_exprs,
            param_names,
            param_defaults,
            domain,
            x0,
            jacobian,
        })
    }

    fn state_names(&self) -> Vec<String> {
        (1..=self.dimension).map(|k| format!("x{k}")).collect()
    }

    /// Parses and binds every expression, producing a runnable map.
    pub fn parse(&self) -> Result<MapSystem> {
        let m = self.dimension;
        if self.domain.dimension() != m {
            return Err(Error::Arity {
                expected: m,
                found: self.domain.dimension(),
            });
        }
        if self.component_exprs.len() != m {
            return Err(Error::Arity {
                expected: m,
                found: self.component_exprs.len(),
            });
        }
        let states = self.state_names();
        let mut seen = HashSet::new();
        for p in &self.param_names {
            let valid = p.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && p.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid || states.contains(p) || Func::from_name(p).is_some() || !seen.insert(p) {
                return Err(Error::InvalidConfig(format!("invalid parameter name `{p}`")));
            }
        }

        let compile_all = |sources: &[String]| -> Result<Vec<Compiled>> {
            sources
                .iter()
                .map(|src| {
                    let e = parse_expr(src)?;
                    if e.is_comparison() {
                        return Err(Error::InvalidConfig(format!("component `{src}` is a comparison")));
                    }
                    Compiled::new(&e, &states, &self.param_names)
                })
                .collect()
        };
        let components = compile_all(&self.component_exprs)?;

        let (guard, else_components) = match &self.guard {
            Some(src) => {
                let g = parse_expr(src)?;
                if !g.is_comparison() {
                    return Err(Error::InvalidConfig(format!("guard `{src}` is not a comparison")));
                }
                if self.else_exprs.len() != m {
                    return Err(Error::Arity {
                        expected: m,
                        found: self.else_exprs.len(),
                    });
                }
                let g = Compiled::new(&g, &states, &self.param_names)?;
                (Some(g), compile_all(&self.else_exprs)?)
            }
            None if !self.else_exprs.is_empty() => {
                return Err(Error::InvalidConfig("else-branch given without a guard".into()));
            }
            None => (None, Vec::new()),
        };

        let mut defaults = self.param_defaults.clone();
        defaults.resize(self.param_names.len(), 0.0);
        let x0 = match &self.x0 {
            Some(x0) if x0.len() != m => {
                return Err(Error::Dimension {
                    expected: m,
                    found: x0.len(),
                })
            }
            Some(x0) => x0.clone(),
            None => self.domain.midpoint(),
        };
        Ok(MapSystem::custom(
            self.name.clone(),
            self.domain.clone(),
            self.param_names.clone(),
            defaults,
            x0,
            CustomMap {
                components,
                guard,
                else_components,
                jacobian: self.jacobian,
            },
        ))
    }
}

/// Parses map-spec text into a runnable map.
pub fn parse_map_spec(text: &str) -> Result<MapSystem> {
    MapSpecSource::from_text(text)?.parse()
}

pub fn load_map_file(path: impl AsRef<Path>) -> Result<MapSystem> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    parse_map_spec(&text)
}

fn parse_list(text: &str) -> std::result::Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("invalid number `{}`", s.trim()))
        })
        .collect()
}

/// `[lo, hi] x [lo, hi] x ...`
fn parse_domain(text: &str) -> std::result::Result<Domain, String> {
    let mut lows = Vec::new();
    let mut highs = Vec::new();
    let mut rest = text.trim();
    loop {
        let inner = rest
            .strip_prefix('[')
            .and_then(|r| r.split_once(']'))
            .ok_or_else(|| format!("expected `[low, high]` in domain `{text}`"))?;
        let bounds = parse_list(inner.0)?;
        if bounds.len() != 2 {
            return Err(format!("interval `[{}]` needs exactly two bounds", inner.0));
        }
        lows.push(bounds[0]);
        highs.push(bounds[1]);
        rest = inner.1.trim();
        if rest.is_empty() {
            break;
        }
        rest = rest
            .strip_prefix('x')
            .or_else(|| rest.strip_prefix('×'))
            .ok_or_else(|| format!("expected `x` between domain intervals in `{text}`"))?
            .trim();
    }
    Domain::new(lows, highs).map_err(|e| e.to_string())
}

/// Compiled custom map: either a single component list, or a guard that
/// selects between two lists.
#[derive(Debug, Clone)]
pub(crate) struct CustomMap {
    components: Vec<Compiled>,
    guard: Option<Compiled>,
    else_components: Vec<Compiled>,
    jacobian: bool,
}

impl CustomMap {
    pub(crate) fn has_jacobian(&self) -> bool {
        self.jacobian
    }

    pub(crate) fn eval_into(&self, x: &[f64], params: &[f64], out: &mut [f64]) {
        let branch = match &self.guard {
            Some(g) if g.eval(x, params) == 0.0 => &self.else_components,
            _ => &self.components,
        };
        for (slot, e) in out.iter_mut().zip(branch) {
            *slot = e.eval(x, params);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BERNOULLI: &str = "
# Bernoulli shift
name = bern
dimension = 1
domain = [0, 1]
params = a=1.0
x0 = 0.3
guard = x1 <= 0.5
f1 = 2*a*x1
g1 = a*(2*x1 - 1)
";

    #[test]
    fn bernoulli_replica() {
        let map = parse_map_spec(BERNOULLI).unwrap();
        assert_eq!(map.name(), "bern");
        assert_eq!(map.default_params(), &[1.0]);
        assert_eq!(map.default_x0(), &[0.3]);
        assert_eq!(map.step_vec(&[0.25], &[1.0]).unwrap(), vec![0.5]);
        assert_eq!(map.step_vec(&[0.75], &[0.5]).unwrap(), vec![0.25]);
        assert_eq!(map.derivative(), Some(crate::dynsys::Derivative::Numeric));
        let (j, _) = map.jacobian_matrix(&[0.2], &[0.7]).unwrap();
        assert!((j[0] - 1.4).abs() < 1e-8);
    }

    #[test]
    fn tinkerbell_component() {
        let text = "dimension = 2\ndomain = [-1.2, 0.4] x [-0.7, 0.3]\nparams = a\n\
                    f1 = x1^2 - x2^2 + a*x1 + (-0.6)*x2\nf2 = 2*x1*x2 + 2.0*x1 + 0.5*x2\n";
        let map = parse_map_spec(text).unwrap();
        let y = map.step_vec(&[0.1, 0.1], &[0.9]).unwrap();
        assert!((y[0] - 0.03).abs() < 1e-15);
        let x0 = map.default_x0();
        assert!((x0[0] + 0.4).abs() < 1e-15 && (x0[1] + 0.2).abs() < 1e-15);
    }

    #[test]
    fn arity_and_binding_errors() {
        let base = "dimension = 2\ndomain = [0,1] x [0,1]\nparams = a\n";
        assert_eq!(
            parse_map_spec(&format!("{base}f1 = x1\n")).unwrap_err(),
            Error::Arity { expected: 2, found: 1 }
        );
        assert_eq!(
            parse_map_spec(&format!("{base}f1 = x1\nf2 = b*x2\n")).unwrap_err(),
            Error::UnboundVariable("b".into())
        );
        assert_eq!(
            parse_map_spec(&format!("{base}f1 = x3\nf2 = x2\n")).unwrap_err(),
            Error::UnboundVariable("x3".into())
        );
        let err = parse_map_spec(&format!("{base}f1 = 2**a\nf2 = x2\n")).unwrap_err();
        match err {
            Error::Parse(e) => assert_eq!(e.position, 2),
            other => panic!("expected a parse error, got {other:?}"),
        }
        assert!(parse_map_spec(&format!("{base}guard = x1 <= 0.5\nf1 = x1\nf2 = x2\ng1 = x1\n")).is_err());
        assert!(parse_map_spec(&format!("{base}guard = x1 + 1\nf1 = x1\nf2 = x2\ng1 = x1\ng2 = x2\n")).is_err());
    }

    #[test]
    fn file_level_errors_carry_lines() {
        assert!(matches!(
            MapSpecSource::from_text("dimension = 1\ndomain = [0, 1]\nfoo = 3\n"),
            Err(Error::MapFile { line: 3, .. })
        ));
        assert!(matches!(
            MapSpecSource::from_text("dimension = 1\ndimension = 2\n"),
            Err(Error::MapFile { line: 2, .. })
        ));
        assert!(matches!(
            MapSpecSource::from_text("dimension = 1\ndomain = [1, 0]\nf1 = x1\n"),
            Err(Error::MapFile { line: 2, .. })
        ));
        assert!(matches!(
            MapSpecSource::from_text("dimension = zero\n"),
            Err(Error::MapFile { line: 1, .. })
        ));
        assert!(matches!(
            MapSpecSource::from_text("domain = [0, 1]\n"),
            Err(Error::MapFile { .. })
        ));
    }

    #[test]
    fn jacobian_none_disables_derivatives() {
        let map = parse_map_spec("dimension = 1\ndomain = [0, 1]\nf1 = x1/2\njacobian = none\n").unwrap();
        assert_eq!(map.derivative(), None);
        assert_eq!(
            map.jacobian_matrix(&[0.5], &[]).unwrap_err(),
            Error::NoJacobian("custom".into())
        );
    }

    #[test]
    fn bad_param_names() {
        let text = "dimension = 1\ndomain = [0, 1]\nparams = x1\nf1 = x1\n";
        assert!(matches!(parse_map_spec(text), Err(Error::InvalidConfig(_))));
        let text = "dimension = 1\ndomain = [0, 1]\nparams = a, a\nf1 = x1\n";
        assert!(matches!(parse_map_spec(text), Err(Error::InvalidConfig(_))));
    }
}
