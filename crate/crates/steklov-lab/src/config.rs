//! Flat key-value run configuration with dotted sections, e.g.
//! `domain.kind = disk`. The resolved configuration is written alongside
//! every run's outputs so reports stay diff-friendly and reproducible.

use crate::agmon::EdgeRule;
use crate::field::{MagneticField, Polynomial2};
use crate::geometry::DomainSpec;
use crate::vec2::Vec2;
use crate::verify::HRule;
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Shipped experiment presets for the two example regimes.
pub const PRESET_NONVANISHING: &str = include_str!("presets/nonvanishing.cfg");
pub const PRESET_MONTGOMERY_K: &str = include_str!("presets/montgomery-k.cfg");

pub fn preset(name: &str) -> Result<&'static str> {
    match name {
        "nonvanishing" => Ok(PRESET_NONVANISHING),
        "montgomery-k" => Ok(PRESET_MONTGOMERY_K),
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

#[derive(Clone, Debug)]
pub enum FieldSpec {
    Constant { b0: f64 },
    Monomial { kappa: u32 },
    Gauged { base: Box<FieldSpec>, phi: Vec<(f64, u32, u32)> },
}

impl FieldSpec {
    pub fn build(&self) -> MagneticField {
        match self {
            FieldSpec::Constant { b0 } => MagneticField::constant(*b0),
            FieldSpec::Monomial { kappa } => MagneticField::monomial(*kappa),
            FieldSpec::Gauged { base, phi } => {
                MagneticField::gauged(base.build(), Polynomial2::new(phi.clone()))
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub field: FieldSpec,
    pub beta: Vec<f64>,
    pub h: f64,
    pub quadrature_order: u32,
    pub eig_k: usize,
    pub t_factors: Vec<f64>,
    pub edge_rule: EdgeRule,
    /// Calibration radius for the ball radius function; `None` means
    /// 0.2 x domain diameter.
    pub r0_calib: Option<f64>,
    /// Well threshold for the standalone `agmon` pipeline; `None` picks
    /// twice the boundary minimum of the weight.
    pub agmon_well: Option<f64>,
    pub seed: u64,
    pub jobs: usize,
    pub sweep_betas: Vec<f64>,
    pub sweep_h_rule: HRule,
    /// Optional disk radius override for the scaling sweep (the asymptotic
    /// regime may need a larger domain than the pointwise experiments).
    pub sweep_radius: Option<f64>,
    pub audit_betas: Vec<f64>,
    pub audit_random: usize,
    pub decay_beta: f64,
    pub gauge_beta: f64,
    pub gauge_h: f64,
    pub gauge_phi: Vec<(f64, u32, u32)>,
    /// Optional smaller disk for the gauge experiment.
    pub gauge_radius: Option<f64>,
    pub loc_beta: f64,
    pub loc_h: Option<f64>,
    pub verify_reports: Vec<String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        let map = ConfigMap::parse(text)?;
        let cfg = RunConfig::from_map(&map)?;
        map.check_consumed()?;
        Ok(cfg)
    }

    fn from_map(map: &ConfigMap) -> Result<RunConfig> {
        let domain = match map.get_str("domain.kind", "disk")?.as_str() {
            "disk" | "unit-disk" => DomainSpec::Disk { radius: map.get_f64("domain.radius", 1.0)? },
            "rectangle" => {
                let r = map.get_f64_list("domain.rect", &[0.0, 0.0, 1.0, 1.0])?;
                if r.len() != 4 {
                    return Err(map.err("domain.rect", "expected four numbers `x0 y0 x1 y1`"));
                }
                DomainSpec::Rectangle { x0: r[0], y0: r[1], x1: r[2], y1: r[3] }
            }
            "polygon" => {
                let pts = map.get_pairs("domain.corners")?;
                DomainSpec::Polygon { corners: pts }
            }
            other => return Err(map.err("domain.kind", &format!("unknown domain kind `{other}`"))),
        };
        domain.validate()?;

        let field = parse_field(map, "field")?;

        let cfg = RunConfig {
            domain,
            field,
            beta: map.get_f64_list("beta", &[100.0])?,
            h: map.get_f64("h", 0.02)?,
            quadrature_order: map.get_f64("quadrature.order", 4.0)? as u32,
            eig_k: map.get_f64("eig.k", 1.0)? as usize,
            t_factors: map.get_f64_list("well.T", &[1.0, 2.0, 4.0])?,
            edge_rule: match map.get_str("edge.rule", "trapezoid")?.as_str() {
                "trapezoid" => EdgeRule::Trapezoid,
                "simpson" => EdgeRule::Simpson,
                other => return Err(map.err("edge.rule", &format!("unknown rule `{other}`"))),
            },
            r0_calib: map.get_opt_f64("agmon.r0_calib")?.filter(|&v| v > 0.0),
            agmon_well: map.get_opt_f64("agmon.well")?,
            seed: map.get_f64("seed", 42.0)? as u64,
            jobs: map.get_f64("jobs", 0.0)? as usize,
            sweep_betas: map.get_f64_list("sweep.betas", &[50.0, 100.0, 200.0, 400.0, 800.0])?,
            sweep_h_rule: match map.get_str("sweep.h_rule", "fixed")?.as_str() {
                "fixed" => HRule::Fixed,
                "resolve" => HRule::Resolve { kh: map.get_f64("sweep.kh", 0.5)? },
                other => return Err(map.err("sweep.h_rule", &format!("unknown rule `{other}`"))),
            },
            sweep_radius: map.get_opt_f64("sweep.radius")?,
            audit_betas: map.get_f64_list("audit.betas", &[100.0, 200.0, 400.0])?,
            audit_random: map.get_f64("audit.random", 50.0)? as usize,
            decay_beta: map.get_f64("decay.beta", 400.0)?,
            gauge_beta: map.get_f64("gauge.beta", 100.0)?,
            gauge_h: map.get_f64("gauge.h", 0.02)?,
            gauge_phi: map.get_triples("gauge.phi", &[(1.0, 1, 1)])?,
            gauge_radius: map.get_opt_f64("gauge.radius")?,
            loc_beta: map.get_f64("loc.beta", 800.0)?,
            loc_h: map.get_opt_f64("loc.h")?,
            verify_reports: map.get_str_list("verify.reports", &["sweep"])?,
        };
        if cfg.h <= 0.0 {
            return Err(map.err("h", "h must be positive"));
        }
        Ok(cfg)
    }

    /// Canonical resolved snapshot, written next to every run's outputs.
    pub fn snapshot(&self) -> String {
        let mut s = String::new();
        let mut kv: BTreeMap<String, String> = BTreeMap::new();
        match &self.domain {
            DomainSpec::Disk { radius } => {
                kv.insert("domain.kind".into(), "disk".into());
                kv.insert("domain.radius".into(), format!("{radius}"));
            }
            DomainSpec::Rectangle { x0, y0, x1, y1 } => {
                kv.insert("domain.kind".into(), "rectangle".into());
                kv.insert("domain.rect".into(), format!("{x0} {y0} {x1} {y1}"));
            }
            DomainSpec::Polygon { corners } => {
                kv.insert("domain.kind".into(), "polygon".into());
                let pts: Vec<String> = corners.iter().map(|c| format!("{} {}", c.x, c.y)).collect();
                kv.insert("domain.corners".into(), pts.join("; "));
            }
        }
        fn field_kv(prefix: &str, f: &FieldSpec, kv: &mut BTreeMap<String, String>) {
            match f {
                FieldSpec::Constant { b0 } => {
                    kv.insert(format!("{prefix}.kind"), "constant".into());
                    kv.insert(format!("{prefix}.B0"), format!("{b0}"));
                }
                FieldSpec::Monomial { kappa } => {
                    kv.insert(format!("{prefix}.kind"), "monomial".into());
                    kv.insert(format!("{prefix}.kappa"), format!("{kappa}"));
                }
                FieldSpec::Gauged { base, phi } => {
                    kv.insert(format!("{prefix}.kind"), "gauged".into());
                    let terms: Vec<String> =
                        phi.iter().map(|(c, px, py)| format!("{c} {px} {py}")).collect();
                    kv.insert(format!("{prefix}.phi"), terms.join("; "));
                    match base.as_ref() {
                        FieldSpec::Constant { b0 } => {
                            kv.insert(format!("{prefix}.base"), "constant".into());
                            kv.insert(format!("{prefix}.B0"), format!("{b0}"));
                        }
                        FieldSpec::Monomial { kappa } => {
                            kv.insert(format!("{prefix}.base"), "monomial".into());
                            kv.insert(format!("{prefix}.kappa"), format!("{kappa}"));
                        }
                        FieldSpec::Gauged { .. } => {}
                    }
                }
            }
        }
        field_kv("field", &self.field, &mut kv);
        let list = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ");
        kv.insert("beta".into(), list(&self.beta));
        kv.insert("h".into(), format!("{}", self.h));
        kv.insert("quadrature.order".into(), format!("{}", self.quadrature_order));
        kv.insert("eig.k".into(), format!("{}", self.eig_k));
        kv.insert("well.T".into(), list(&self.t_factors));
        kv.insert("edge.rule".into(), if self.edge_rule == EdgeRule::Simpson { "simpson".into() } else { "trapezoid".into() });
        if let Some(r0) = self.r0_calib {
            kv.insert("agmon.r0_calib".into(), format!("{r0}"));
        }
        if let Some(w) = self.agmon_well {
            kv.insert("agmon.well".into(), format!("{w}"));
        }
        kv.insert("seed".into(), format!("{}", self.seed));
        kv.insert("jobs".into(), format!("{}", self.jobs));
        kv.insert("sweep.betas".into(), list(&self.sweep_betas));
        if let Some(r) = self.sweep_radius {
            kv.insert("sweep.radius".into(), format!("{r}"));
        }
        match self.sweep_h_rule {
            HRule::Fixed => {
                kv.insert("sweep.h_rule".into(), "fixed".into());
            }
            HRule::Resolve { kh } => {
                kv.insert("sweep.h_rule".into(), "resolve".into());
                kv.insert("sweep.kh".into(), format!("{kh}"));
            }
        }
        kv.insert("audit.betas".into(), list(&self.audit_betas));
        kv.insert("audit.random".into(), format!("{}", self.audit_random));
        kv.insert("decay.beta".into(), format!("{}", self.decay_beta));
        kv.insert("gauge.beta".into(), format!("{}", self.gauge_beta));
        kv.insert("gauge.h".into(), format!("{}", self.gauge_h));
        let terms: Vec<String> = self.gauge_phi.iter().map(|(c, px, py)| format!("{c} {px} {py}")).collect();
        kv.insert("gauge.phi".into(), terms.join("; "));
        if let Some(r) = self.gauge_radius {
            kv.insert("gauge.radius".into(), format!("{r}"));
        }
        kv.insert("loc.beta".into(), format!("{}", self.loc_beta));
        if let Some(h) = self.loc_h {
            kv.insert("loc.h".into(), format!("{h}"));
        }
        kv.insert("verify.reports".into(), self.verify_reports.join(", "));
        for (k, v) in kv {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

fn parse_field(map: &ConfigMap, prefix: &str) -> Result<FieldSpec> {
    let kind = map.get_str(&format!("{prefix}.kind"), "constant")?;
    match kind.as_str() {
        "constant" => Ok(FieldSpec::Constant { b0: map.get_f64(&format!("{prefix}.B0"), 1.0)? }),
        "monomial" => Ok(FieldSpec::Monomial { kappa: map.get_f64(&format!("{prefix}.kappa"), 1.0)? as u32 }),
        "gauged" => {
            let base = match map.get_str(&format!("{prefix}.base"), "constant")?.as_str() {
                "constant" => FieldSpec::Constant { b0: map.get_f64(&format!("{prefix}.B0"), 1.0)? },
                "monomial" => FieldSpec::Monomial { kappa: map.get_f64(&format!("{prefix}.kappa"), 1.0)? as u32 },
                other => return Err(map.err(&format!("{prefix}.base"), &format!("unknown base `{other}`"))),
            };
            let phi = map.get_triples(&format!("{prefix}.phi"), &[(1.0, 1, 1)])?;
            Ok(FieldSpec::Gauged { base: Box::new(base), phi })
        }
        other => Err(map.err(&format!("{prefix}.kind"), &format!("unknown field kind `{other}`"))),
    }
}

/// Raw parsed key -> (line, value) map with typed getters.
struct ConfigMap {
    entries: BTreeMap<String, (usize, String)>,
    consumed: std::cell::RefCell<std::collections::BTreeSet<String>>,
}

impl ConfigMap {
    fn parse(text: &str) -> Result<ConfigMap> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config { line: i + 1, msg: format!("expected `key = value`, got `{line}`") });
            };
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(Error::Config { line: i + 1, msg: "empty key".into() });
            }
            if entries.insert(key.clone(), (i + 1, value.trim().to_string())).is_some() {
                return Err(Error::Config { line: i + 1, msg: format!("duplicate key `{key}`") });
            }
        }
        Ok(ConfigMap { entries, consumed: Default::default() })
    }

    fn err(&self, key: &str, msg: &str) -> Error {
        let line = self.entries.get(key).map(|e| e.0).unwrap_or(0);
        Error::Config { line, msg: format!("{key}: {msg}") }
    }

    fn raw(&self, key: &str) -> Option<&(usize, String)> {
        if let Some(e) = self.entries.get(key) {
            self.consumed.borrow_mut().insert(key.to_string());
            Some(e)
        } else {
            None
        }
    }

    fn get_str(&self, key: &str, default: &str) -> Result<String> {
        Ok(self.raw(key).map(|(_, v)| v.clone()).unwrap_or_else(|| default.to_string()))
    }

    fn get_str_list(&self, key: &str, default: &[&str]) -> Result<Vec<String>> {
        match self.raw(key) {
            Some((_, v)) => Ok(v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()),
            None => Ok(default.iter().map(|s| s.to_string()).collect()),
        }
    }

    fn get_f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.raw(key) {
            Some((line, v)) => v.parse().map_err(|_| Error::Config { line: *line, msg: format!("{key}: cannot parse `{v}` as a number") }),
            None => Ok(default),
        }
    }

    fn get_opt_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.raw(key) {
            Some((line, v)) => {
                if v == "auto" {
                    return Ok(None);
                }
                v.parse()
                    .map(Some)
                    .map_err(|_| Error::Config { line: *line, msg: format!("{key}: cannot parse `{v}` as a number") })
            }
            None => Ok(None),
        }
    }

    fn get_f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.raw(key) {
            Some((line, v)) => {
                let vals: Vec<f64> = v
                    .split([',', ' '])
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| {
                        t.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::Config { line: *line, msg: format!("{key}: cannot parse `{t}`") })
                    })
                    .collect::<Result<_>>()?;
                if vals.is_empty() {
                    return Err(Error::Config { line: *line, msg: format!("{key}: empty list") });
                }
                Ok(vals)
            }
            None => Ok(default.to_vec()),
        }
    }

    /// Semicolon-separated `x y` pairs.
    fn get_pairs(&self, key: &str) -> Result<Vec<Vec2>> {
        let Some((line, v)) = self.raw(key) else {
            return Err(Error::Config { line: 0, msg: format!("{key}: required for polygon domains") });
        };
        let mut out = Vec::new();
        for part in v.split(';') {
            let nums: Vec<f64> = part
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| Error::Config { line: *line, msg: format!("{key}: cannot parse `{t}`") }))
                .collect::<Result<_>>()?;
            if nums.len() != 2 {
                return Err(Error::Config { line: *line, msg: format!("{key}: each corner needs `x y`") });
            }
            out.push(Vec2::new(nums[0], nums[1]));
        }
        Ok(out)
    }

    /// Semicolon-separated `coef px py` triples (polynomial terms).
    fn get_triples(&self, key: &str, default: &[(f64, u32, u32)]) -> Result<Vec<(f64, u32, u32)>> {
        match self.raw(key) {
            Some((line, v)) => {
                if v.trim().is_empty() || v.trim() == "0" {
                    return Ok(Vec::new());
                }
                let mut out = Vec::new();
                for part in v.split(';') {
                    let nums: Vec<f64> = part
                        .split_whitespace()
                        .map(|t| {
                            t.parse::<f64>()
                                .map_err(|_| Error::Config { line: *line, msg: format!("{key}: cannot parse `{t}`") })
                        })
                        .collect::<Result<_>>()?;
                    if nums.len() != 3 {
                        return Err(Error::Config { line: *line, msg: format!("{key}: each term needs `coef px py`") });
                    }
                    out.push((nums[0], nums[1] as u32, nums[2] as u32));
                }
                Ok(out)
            }
            None => Ok(default.to_vec()),
        }
    }

    fn check_consumed(&self) -> Result<()> {
        let consumed = self.consumed.borrow();
        for (key, (line, _)) in &self.entries {
            if !consumed.contains(key) {
                return Err(Error::Config { line: *line, msg: format!("unknown key `{key}`") });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_minimal_config() {
        let cfg = RunConfig::parse("domain.kind = disk\ndomain.radius = 0.5\nbeta = 100, 200\nh = 0.05\n").unwrap();
        assert_eq!(cfg.domain, DomainSpec::Disk { radius: 0.5 });
        assert_eq!(cfg.beta, vec![100.0, 200.0]);
        assert_eq!(cfg.h, 0.05);
    }

    #[test]
    fn rejects_unknown_keys_with_line_numbers() {
        let err = RunConfig::parse("h = 0.1\nnot.a.key = 7\n").unwrap_err();
        match err {
            Error::Config { line, msg } => {
                assert_eq!(line, 2);
                assert!(msg.contains("not.a.key"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(matches!(RunConfig::parse("just words\n"), Err(Error::Config { line: 1, .. })));
        assert!(matches!(RunConfig::parse("h = abc\n"), Err(Error::Config { .. })));
    }

    #[test]
    fn presets_parse_and_snapshot_round_trips() {
        for name in ["nonvanishing", "montgomery-k"] {
            let cfg = RunConfig::parse(preset(name).unwrap()).unwrap();
            let snap = cfg.snapshot();
            let cfg2 = RunConfig::parse(&snap).unwrap();
            assert_eq!(snap, cfg2.snapshot(), "snapshot must be a fixed point for {name}");
        }
    }

    #[test]
    fn gauge_phi_terms_parse() {
        let cfg = RunConfig::parse("gauge.phi = 1 1 1; -0.5 2 0\n").unwrap();
        assert_eq!(cfg.gauge_phi, vec![(1.0, 1, 1), (-0.5, 2, 0)]);
    }
}
