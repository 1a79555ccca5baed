//! Strict JSON configuration schema for the CLI. Geometry (interval
//! endpoints, shifts, epsilon) is always given as "p/q" rational
//! strings; floating-point numbers are allowed only for filter VALUES.

use serde::{Deserialize, Serialize};

use crate::catalog;
use crate::error::{Error, Result};
use crate::filters::{make_filter_system, FilterSystem};
use crate::funcalg::{FilterFn, Interval, PiecewiseFn};
use crate::lattice::DilationScheme;
use crate::msystems::{journe_loop_element, LoopElement};
use crate::multiplicity::{MultiplicityFn, MultiplicityPair};
use crate::rational::{parse_rat, rat, Rat};
use crate::scalar::Scalar;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// transpose-of-B integer dilation matrix A; defaults to [[2]]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dilation: Option<DilationCfg>,
    /// required for explicit pc filters, ignored for builtins
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiplicity: Option<MultiplicityCfg>,
    pub filters: FiltersCfg,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DilationCfg {
    pub a: Vec<Vec<i128>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MultiplicityCfg {
    Constant { value: u32 },
    Piecewise { pieces: Vec<MultiplicityPiece> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiplicityPiece {
    pub lo: String,
    pub hi: String,
    pub value: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FiltersCfg {
    /// one of: ex35 | journe-canonical | journe-smooth | classical-mra
    Builtin {
        id: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        eps: Option<String>,
    },
    /// explicit piecewise-constant matrices; h is c x c, g is c~ x c,
    /// each entry a list of pieces
    Pc {
        h: Vec<Vec<Vec<PcPiece>>>,
        g: Vec<Vec<Vec<PcPiece>>>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PcPiece {
    pub lo: String,
    pub hi: String,
    pub value: ValueCfg,
}

/// A filter value: the exact tokens "sqrt2" / "-sqrt2", an exact
/// rational string "p/q", a float, or {re, im}.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueCfg {
    Token(String),
    Complex { re: f64, im: f64 },
    Real(f64),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LoopConfig {
    /// the Journé loop element L_p of Example 4.8
    JourneLp {
        #[serde(skip_serializing_if = "Option::is_none")]
        eps: Option<String>,
    },
    /// the identity section for a builtin system's multiplicity pair
    Identity { system: Box<SystemConfig> },
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn parse_geom(s: &str, what: &str) -> Result<Rat> {
    parse_rat(s).map_err(|_| cfg_err(format!("bad rational {what}: {s:?} (want \"p/q\")")))
}

impl ValueCfg {
    pub fn to_scalar(&self) -> Result<Scalar> {
        match self {
            ValueCfg::Token(t) => match t.as_str() {
                "sqrt2" => Ok(Scalar::sqrt_n(2)),
                "-sqrt2" => Ok(-Scalar::sqrt_n(2)),
                other => Ok(Scalar::from_rat(parse_geom(other, "value")?)),
            },
            ValueCfg::Complex { re, im } => Ok(Scalar::num(*re, *im)),
            ValueCfg::Real(x) => Ok(Scalar::num(*x, 0.0)),
        }
    }
}

fn parse_pieces(entry: &[PcPiece]) -> Result<PiecewiseFn> {
    let mut pieces = Vec::with_capacity(entry.len());
    for p in entry {
        let iv = Interval::new(parse_geom(&p.lo, "piece lo")?, parse_geom(&p.hi, "piece hi")?)?;
        pieces.push((iv, p.value.to_scalar()?));
    }
    PiecewiseFn::new(pieces, true)
}

fn parse_multiplicity(cfg: &MultiplicityCfg) -> Result<MultiplicityFn> {
    match cfg {
        MultiplicityCfg::Constant { value } => Ok(MultiplicityFn::constant(*value)),
        MultiplicityCfg::Piecewise { pieces } => {
            let mut out = Vec::with_capacity(pieces.len());
            for p in pieces {
                let iv =
                    Interval::new(parse_geom(&p.lo, "mult lo")?, parse_geom(&p.hi, "mult hi")?)?;
                out.push((iv, p.value));
            }
            MultiplicityFn::new(out)
        }
    }
}

fn parse_eps(eps: &Option<String>) -> Result<Rat> {
    match eps {
        None => Ok(rat(1, 100)),
        Some(s) => parse_geom(s, "eps"),
    }
}

impl SystemConfig {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| cfg_err(format!("config parse error: {e}")))
    }

    pub fn build(&self) -> Result<FilterSystem> {
        match &self.filters {
            FiltersCfg::Builtin { id, eps } => match id.as_str() {
                "ex35" => Ok(catalog::ex35_system()),
                "journe-canonical" => Ok(catalog::journe_canonical_system()),
                "journe-smooth" => {
                    Ok(catalog::journe_smooth_system_with_eps(parse_eps(eps)?))
                }
                "classical-mra" => Ok(catalog::classical_mra_system()),
                other => Err(cfg_err(format!("unknown builtin system {other:?}"))),
            },
            FiltersCfg::Pc { h, g } => {
                let a = self
                    .dilation
                    .as_ref()
                    .map(|d| d.a.clone())
                    .unwrap_or_else(|| vec![vec![2]]);
                let scheme = DilationScheme::new(a)?;
                let mcfg = self
                    .multiplicity
                    .as_ref()
                    .ok_or_else(|| cfg_err("pc filters need a multiplicity section"))?;
                let mp = MultiplicityPair::new(&scheme, parse_multiplicity(mcfg)?)?;
                let to_mat = |m: &[Vec<Vec<PcPiece>>]| -> Result<Vec<Vec<FilterFn>>> {
                    m.iter()
                        .map(|row| {
                            row.iter()
                                .map(|e| Ok(FilterFn::Pc(parse_pieces(e)?)))
                                .collect()
                        })
                        .collect()
                };
                make_filter_system(
                    scheme,
                    mp,
                    to_mat(h)?,
                    to_mat(g)?,
                    self.name.clone().unwrap_or_else(|| "custom".into()),
                )
            }
        }
    }
}

impl LoopConfig {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| cfg_err(format!("loop config parse error: {e}")))
    }

    pub fn build(&self) -> Result<LoopElement> {
        match self {
            LoopConfig::JourneLp { eps } => {
                let p0 = crate::funcalg::QmfLowpass::new(parse_eps(eps)?)?;
                journe_loop_element(p0)
            }
            LoopConfig::Identity { system } => {
                let sys = system.build()?;
                Ok(LoopElement::identity(sys.mp))
            }
        }
    }
}

fn pc_pieces_of(p: &PiecewiseFn) -> Vec<PcPiece> {
    p.pieces()
        .iter()
        .map(|(iv, v)| PcPiece {
            lo: crate::rational::format_rat(&iv.lo),
            hi: crate::rational::format_rat(&iv.hi),
            value: if *v == Scalar::sqrt_n(2) {
                ValueCfg::Token("sqrt2".into())
            } else if *v == -Scalar::sqrt_n(2) {
                ValueCfg::Token("-sqrt2".into())
            } else {
                let z = v.to_complex();
                ValueCfg::Complex { re: z.re, im: z.im }
            },
        })
        .collect()
}

fn mult_cfg_of(m: &MultiplicityFn) -> MultiplicityCfg {
    MultiplicityCfg::Piecewise {
        pieces: m
            .pieces()
            .iter()
            .map(|(iv, v)| MultiplicityPiece {
                lo: crate::rational::format_rat(&iv.lo),
                hi: crate::rational::format_rat(&iv.hi),
                value: *v,
            })
            .collect(),
    }
}

fn pc_system_cfg(sys: &FilterSystem) -> SystemConfig {
    let mat = |m: &[Vec<FilterFn>]| -> Vec<Vec<Vec<PcPiece>>> {
        m.iter()
            .map(|row| {
                row.iter()
                    .map(|e| match e {
                        FilterFn::Pc(p) => pc_pieces_of(p),
                        _ => unreachable!("pc export of non-pc filter"),
                    })
                    .collect()
            })
            .collect()
    };
    SystemConfig {
        name: Some(sys.name.clone()),
        dilation: Some(DilationCfg { a: sys.scheme.a.clone() }),
        multiplicity: Some(mult_cfg_of(&sys.mp.m)),
        filters: FiltersCfg::Pc { h: mat(&sys.h), g: mat(&sys.g) },
    }
}

/// The shipped example configs: (filename, JSON body).
pub fn example_configs() -> Vec<(&'static str, String)> {
    let pretty = |v: &SystemConfig| serde_json::to_string_pretty(v).expect("serialize config");
    let ex35 = pc_system_cfg(&catalog::ex35_system());
    let journe = pc_system_cfg(&catalog::journe_canonical_system());
    let smooth = SystemConfig {
        name: Some("journe-smooth".into()),
        dilation: None,
        multiplicity: None,
        filters: FiltersCfg::Builtin { id: "journe-smooth".into(), eps: Some("1/100".into()) },
    };
    let loop_p = LoopConfig::JourneLp { eps: Some("1/100".into()) };
    vec![
        ("ex35.cfg", pretty(&ex35)),
        ("journe_canonical.cfg", pretty(&journe)),
        ("journe_smooth.cfg", pretty(&smooth)),
        (
            "loop_p.cfg",
            serde_json::to_string_pretty(&loop_p).expect("serialize loop config"),
        ),
    ]
}
