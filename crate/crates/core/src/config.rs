//! Scenario files: a TOML document with one `[[scenario]]` table per Hecke triple.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::arith::parse_q;
use crate::error::{HeckeError, Result};
use crate::group::{FamilyRef, FamilyRegistry};
use crate::qadic::{AdeleCoord, FiniteAdele, DEFAULT_PRECISION};

pub const REPORTS: &[&str] = &[
    "describe-pair",
    "b-set",
    "structure-constants",
    "qadic",
    "omega-witness",
    "induced-check",
    "completion",
    "directedness",
];

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub scenario: Vec<ScenarioConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub label: Option<String>,
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, toml::Value>,
    #[serde(default = "default_ball")]
    pub ball_radius: u32,
    #[serde(default = "default_window")]
    pub window_radius: u32,
    #[serde(default = "default_precision")]
    pub precision: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Absent means every report; an empty list only echoes the scenario.
    #[serde(default)]
    pub reports: Option<Vec<String>>,
    /// Element pairs for `structure-constants`, in the family's text syntax.
    #[serde(default)]
    pub pairs: Vec<[String; 2]>,
    #[serde(default = "default_omega")]
    pub omega_n: Vec<u64>,
    /// Finite adeles as `"l:value[@prec], ..."`.
    #[serde(default)]
    pub adeles: Vec<String>,
    /// Quotient levels `[m, k]` for `completion`.
    #[serde(default = "default_levels")]
    pub levels: Vec<[u32; 2]>,
}

fn default_ball() -> u32 {
    2
}
fn default_window() -> u32 {
    3
}
fn default_precision() -> u32 {
    DEFAULT_PRECISION
}
fn default_samples() -> usize {
    20
}
fn default_omega() -> Vec<u64> {
    vec![2, 4, 6, 12]
}
fn default_levels() -> Vec<[u32; 2]> {
    vec![[0, 3], [1, 2]]
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ConfigFile = toml::from_str(text).map_err(|e| HeckeError::Config(e.to_string()))?;
        for s in &cfg.scenario {
            s.validate()?;
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HeckeError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

impl ScenarioConfig {
    pub fn new(family: &str, params: BTreeMap<String, toml::Value>) -> Self {
        ScenarioConfig {
            label: None,
            family: family.to_string(),
            params,
            ball_radius: default_ball(),
            window_radius: default_window(),
            precision: default_precision(),
            seed: 0,
            samples: default_samples(),
            reports: None,
            pairs: Vec::new(),
            omega_n: default_omega(),
            adeles: Vec::new(),
            levels: default_levels(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.build_family()?;
        for r in self.reports.iter().flatten() {
            if !REPORTS.contains(&r.as_str()) {
                return Err(HeckeError::Config(format!(
                    "unknown report '{r}' (expected one of {})",
                    REPORTS.join(", ")
                )));
            }
        }
        if self.omega_n.contains(&0) {
            return Err(HeckeError::Config("omega_n entries must be positive".into()));
        }
        for a in &self.adeles {
            parse_adele(a, self.precision)?;
        }
        let fam = self.build_family()?;
        for [x, y] in &self.pairs {
            fam.parse_element(x)?;
            fam.parse_element(y)?;
        }
        Ok(())
    }

    pub fn build_family(&self) -> Result<FamilyRef> {
        FamilyRegistry::default().build(&self.family, &self.params)
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.family.clone())
    }

    pub fn wants(&self, report: &str) -> bool {
        match &self.reports {
            None => true,
            Some(rs) => rs.iter().any(|r| r == report),
        }
    }
}

/// `"2:5/4@64, 3:7"`: coordinates at the listed primes, integral elsewhere.
pub fn parse_adele(s: &str, default_prec: u32) -> Result<FiniteAdele> {
    let bad = |why: &str| HeckeError::Parse(format!("adele '{s}': {why}"));
    let mut coords = BTreeMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (l, rest) = part.split_once(':').ok_or_else(|| bad("expected prime:value"))?;
        let l: u64 = l.trim().parse().map_err(|_| bad("prime"))?;
        let (v, prec) = match rest.split_once('@') {
            Some((v, p)) => (v, p.trim().parse::<u32>().map_err(|_| bad("precision"))?),
            None => (rest, default_prec),
        };
        let value = parse_q(v).ok_or_else(|| bad("value"))?;
        if coords.insert(l, AdeleCoord { value, prec }).is_some() {
            return Err(bad("prime listed twice"));
        }
    }
    FiniteAdele::new(coords)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_scenarios() {
        let cfg = ConfigFile::parse(
            r#"
            [[scenario]]
            family = "padic-axb"
            params = { p = 2, q = 3 }
            reports = ["b-set"]
            pairs = [["(0,4)", "(0,4)"]]

            [[scenario]]
            family = "heisenberg"
            params = { s = "1/2", t = "1/3" }
            "#,
        )
        .unwrap();
        assert_eq!(cfg.scenario.len(), 2);
        assert!(cfg.scenario[0].wants("b-set") && !cfg.scenario[0].wants("qadic"));
        assert!(cfg.scenario[1].wants("qadic"));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ConfigFile::parse("[[scenario]]\nfamily = \"nope\"").is_err());
        assert!(ConfigFile::parse("[[scenario]]\nfamily = \"padic-axb\"\nparams = { p = 4 }").is_err());
        assert!(ConfigFile::parse("[[scenario]]\nfamily = \"dihedral\"\nreports = [\"x\"]").is_err());
        assert!(ConfigFile::parse("[[scenario]]\nfamily = \"dihedral\"\nbogus = 1").is_err());
        assert!(parse_adele("2:1/2, 2:3", 64).is_err());
        assert_eq!(parse_adele("2:5/4@10, 3:7", 64).unwrap().coords[&2].prec, 10);
    }
}
