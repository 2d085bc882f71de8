//! Scenario runs and the versioned JSON report they produce.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arith::{fmt_q, Q};
use crate::characters::{
    extendability_check, fmt_phases, in_b, in_b_plus, lamplighter_b_classification, sigma_image,
};
use crate::completion::{
    b_plus_generator, directedness_probe, hecke_neighbourhood, predicted_stabilization,
    sigma_continuity_probe, stabilization,
};
use crate::config::{parse_adele, ScenarioConfig, REPORTS};
use crate::cyclotomic::Cyclo;
use crate::error::{HeckeError, Result};
use crate::group::{
    index_l_by_descriptors, index_lk, modular_delta, reducedness_probe, Family, GroupElement,
    PadicAxb, Relative,
};
use crate::hecke::{extension_scenario, structure_constants_checked, HeckeElement};
use crate::induced::{commutation_residual, irreducibility_probe, CosetWindow};
use crate::qadic::{self, FiniteAdele};
use crate::scenario::HeckeScenario;

pub const SCHEMA: &str = "v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub scenarios: Vec<ScenarioReport>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub label: String,
    pub config: ScenarioConfig,
    /// Precision, seed and ball sizes actually used.
    pub notes: BTreeMap<String, Value>,
    pub results: BTreeMap<String, Value>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| HeckeError::Parse(e.to_string()))
    }

    /// `scenario,report,path,value` rows, one per leaf.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scenario,report,path,value\n");
        for s in &self.scenarios {
            for (name, v) in &s.results {
                let mut rows = Vec::new();
                flatten(v, String::new(), &mut rows);
                for (path, leaf) in rows {
                    out.push_str(&format!(
                        "{},{},{},{}\n",
                        csv_field(&s.label),
                        name,
                        csv_field(&path),
                        csv_field(&leaf)
                    ));
                }
            }
        }
        out
    }

    /// Whether any section reported an error (indeterminate results do not count).
    pub fn has_errors(&self) -> bool {
        fn walk(v: &Value) -> bool {
            match v {
                Value::Object(m) => m.contains_key("error") || m.values().any(walk),
                Value::Array(a) => a.iter().any(walk),
                _ => false,
            }
        }
        self.scenarios.iter().any(|s| s.results.values().any(walk))
    }
}

fn flatten(v: &Value, path: String, out: &mut Vec<(String, String)>) {
    let join = |k: &str| {
        if path.is_empty() {
            k.to_string()
        } else {
            format!("{path}.{k}")
        }
    };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten(x, join(k), out)),
        Value::Array(a) => a
            .iter()
            .enumerate()
            .for_each(|(i, x)| flatten(x, join(&i.to_string()), out)),
        Value::String(s) => out.push((path, s.clone())),
        other => out.push((path, other.to_string())),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Runs every scenario. Configuration problems surface as `Err`; failures
/// inside a section are recorded in the report instead.
pub fn run(scenarios: &[ScenarioConfig]) -> Result<Report> {
    let mut warnings = Vec::new();
    if scenarios.is_empty() {
        warnings.push("no scenarios configured".to_string());
    }
    let mut out = Vec::new();
    for cfg in scenarios {
        cfg.validate()?;
        out.push(run_scenario(cfg)?);
    }
    Ok(Report {
        schema: SCHEMA.to_string(),
        scenarios: out,
        warnings,
    })
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let fam = cfg.build_family()?;
    let sc = HeckeScenario::new(cfg.label(), fam.clone());
    let ball = fam.ball(cfg.ball_radius);
    let mut notes = BTreeMap::new();
    notes.insert("precision".into(), json!(cfg.precision));
    notes.insert("seed".into(), json!(cfg.seed));
    notes.insert("ball_radius".into(), json!(cfg.ball_radius));
    notes.insert("ball_size".into(), json!(ball.len()));
    notes.insert("window_radius".into(), json!(cfg.window_radius));
    notes.insert("field_order".into(), json!(sc.field.order()));

    let ctx = Ctx {
        cfg,
        fam: fam.as_ref(),
        sc: &sc,
        ball: &ball,
    };
    let mut results = BTreeMap::new();
    let requested: Vec<&str> = match &cfg.reports {
        None => REPORTS.to_vec(),
        Some(rs) => rs.iter().map(String::as_str).collect(),
    };
    for name in requested {
        let v = match name {
            "describe-pair" => describe_pair(&ctx),
            "b-set" => b_set(&ctx),
            "structure-constants" => structure_constants_section(&ctx),
            "qadic" => qadic_section(&ctx),
            "omega-witness" => omega_section(&ctx),
            "induced-check" => induced_section(&ctx),
            "completion" => completion_section(&ctx),
            "directedness" => directedness_section(&ctx),
            other => Err(HeckeError::Config(format!("unknown report '{other}'"))),
        };
        results.insert(name.to_string(), flag(v));
    }
    Ok(ScenarioReport {
        label: cfg.label(),
        config: cfg.clone(),
        notes,
        results,
    })
}

struct Ctx<'a> {
    cfg: &'a ScenarioConfig,
    fam: &'a dyn Family,
    sc: &'a Arc<HeckeScenario>,
    ball: &'a [GroupElement],
}

impl Ctx<'_> {
    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        r.set_stream(stream);
        r
    }

    fn b_ball(&self) -> Result<Vec<GroupElement>> {
        let mut out = Vec::new();
        for x in self.ball {
            if in_b(self.fam, x)? {
                out.push(x.clone());
            }
        }
        Ok(out)
    }
}

fn flag(v: Result<Value>) -> Value {
    match v {
        Ok(v) => v,
        Err(HeckeError::Indeterminate { precision, reason }) => json!({
            "indeterminate": true,
            "precision": precision,
            "reason": reason,
        }),
        Err(HeckeError::Unsupported(m)) => json!({ "unsupported": m }),
        Err(e) => json!({ "error": kind(&e), "message": e.to_string() }),
    }
}

fn kind(e: &HeckeError) -> &'static str {
    match e {
        HeckeError::FamilyMismatch { .. } => "family-mismatch",
        HeckeError::Domain(_) => "domain",
        HeckeError::NotInB(_) => "not-in-b",
        HeckeError::Unsupported(_) => "unsupported",
        HeckeError::Indeterminate { .. } => "indeterminate",
        HeckeError::Config(_) => "config",
        HeckeError::Parse(_) => "parse",
    }
}

fn cyclo_json(c: &Cyclo) -> Value {
    json!({
        "value": c.to_string(),
        "coefficients": c.coeffs().iter().map(fmt_q).collect::<Vec<_>>(),
    })
}

fn opt_u64(x: Option<u64>) -> Value {
    x.map_or(Value::Null, |v| json!(v))
}

fn describe_pair(c: &Ctx) -> Result<Value> {
    let fam = c.fam;
    let params: BTreeMap<String, String> = fam.params().into_iter().collect();
    let mut rows = Vec::new();
    for x in c.ball.iter().take(12) {
        let dc = fam.double_coset(x);
        rows.push(json!({
            "x": x.to_string(),
            "double_coset_rep": dc.z.to_string(),
            "L": fam.index_l(x),
            "L_by_descriptors": opt_u64(index_l_by_descriptors(fam, x)),
            "L_K": opt_u64(index_lk(fam, x)),
            "delta_H": modular_delta(fam, x, Relative::H).map(|d| fmt_q(&d)).ok(),
            "delta_K": modular_delta(fam, x, Relative::K).map(|d| fmt_q(&d)).ok(),
            "in_B": in_b(fam, x)?,
        }));
    }
    let mut consistent = true;
    let mut agree = true;
    for x in c.ball {
        let dh = modular_delta(fam, x, Relative::H)?;
        if let Ok(dk) = modular_delta(fam, x, Relative::K) {
            consistent &= dh == dk;
        }
        agree &= index_l_by_descriptors(fam, x) == Some(fam.index_l(x));
    }
    let mut multiplicative = true;
    let head = &c.ball[..c.ball.len().min(16)];
    for x in head {
        for y in head {
            let xy = fam.multiply_raw(x, y);
            let lhs = modular_delta(fam, &xy, Relative::H)?;
            let rhs = modular_delta(fam, x, Relative::H)? * modular_delta(fam, y, Relative::H)?;
            multiplicative &= lhs == rhs;
        }
    }
    let red = reducedness_probe(fam, c.ball);
    let mut rng = c.rng(1);
    let cert = extendability_check(fam, c.ball, &mut rng);
    let image: Vec<String> = sigma_image(fam, &mut rng, c.cfg.samples)
        .iter()
        .map(|v| fmt_phases(v))
        .collect();
    let phi = if cert.exists() && c.sc.dim() == 1 {
        flag(phi_check(c))
    } else {
        json!({ "unsupported": "the character has no verified extension to G" })
    };
    Ok(json!({
        "family": fam.name(),
        "params": params,
        "dim": fam.dim(),
        "H": fam.h_descriptor().to_string(),
        "K": fam.kernel_descriptor().to_string(),
        "sigma_order": fam.sigma_order(),
        "sigma_image_sample": image,
        "index_table": rows,
        "index_routes_agree": agree,
        "delta_H_equals_delta_K": consistent,
        "delta_multiplicative": multiplicative,
        "reducedness": {
            "intersection": red.intersection.to_string(),
            "trivial": red.trivial,
            "still_shrinking": red.shrinking,
        },
        "extension": serde_json::to_value(&cert).expect("serializable"),
        "phi": phi,
    }))
}

fn phi_check(c: &Ctx) -> Result<Value> {
    let mut rng = c.rng(2);
    let mut ok = true;
    for _ in 0..c.cfg.samples {
        let f = HeckeElement::random(c.sc, &mut rng, 3, 2);
        let g = HeckeElement::random(c.sc, &mut rng, 3, 2);
        let sc = extension_scenario(c.sc, &[&f, &g])?;
        let (f, g) = (f.embed(&sc)?, g.embed(&sc)?);
        let target = sc.trivial();
        let pf = f.phi_transport(&target)?;
        let pg = g.phi_transport(&target)?;
        ok &= f.convolve(&g).phi_transport(&target)? == pf.convolve(&pg);
        ok &= f.involution()?.phi_transport(&target)? == pf.involution()?;
    }
    Ok(json!({ "isomorphism_verified": ok, "pairs": c.cfg.samples }))
}

fn b_set(c: &Ctx) -> Result<Value> {
    let fam = c.fam;
    let b = c.b_ball()?;
    let mut b_plus = Vec::new();
    for x in &b {
        if in_b_plus(fam, x)? {
            b_plus.push(x.to_string());
        }
    }
    let in_h = b.iter().filter(|x| fam.in_h(x)).count();
    let description = if b.len() == c.ball.len() {
        "B = G on ball".to_string()
    } else if in_h == b.len() {
        "B = H on ball".to_string()
    } else {
        format!("B contains {} of {} ball elements", b.len(), c.ball.len())
    };
    let mut out = json!({
        "ball": c.ball.len(),
        "in_B": b.len(),
        "in_B_not_H": b.len() - in_h,
        "description": description,
        "B_sample": b.iter().take(24).map(|x| x.to_string()).collect::<Vec<_>>(),
        "B_plus_sample": b_plus.iter().take(24).collect::<Vec<_>>(),
    });
    if let Some(pa) = fam.as_any().downcast_ref::<PadicAxb>() {
        let n0 = pa.n0();
        let mut matches = true;
        // Which sign of the shift exponent the computed B+ uses.
        let (mut neg, mut pos) = (true, true);
        for x in c.ball {
            if let GroupElement::PadicAxb { k, .. } = x {
                let member = in_b(fam, x)?;
                matches &= member == (k.rem_euclid(n0 as i64) == 0);
                if member && *k != 0 {
                    let plus = in_b_plus(fam, x)?;
                    neg &= plus == (*k < 0);
                    pos &= plus == (*k > 0);
                }
            }
        }
        let sign = match (neg, pos) {
            (true, false) => "k <= 0",
            (false, true) => "k >= 0",
            (true, true) => "undetermined on ball",
            (false, false) => "mixed",
        };
        out["n0"] = json!(n0);
        out["closed_form"] = json!(format!("Z[1/{}] x| {}Z", pa.p(), n0));
        out["closed_form_matches_ball"] = json!(matches);
        out["B_plus_orientation"] = json!(sign);
        if neg != pos {
            out["B_plus_closed_form"] = json!(format!("Z[1/{}] x| {}N, {sign}", pa.p(), n0));
        }
    }
    if fam.name() == "lamplighter" {
        let cls = lamplighter_b_classification(fam, 2 * c.cfg.ball_radius as i64 + 2)?;
        out["shift_classification"] = serde_json::to_value(&cls).expect("serializable");
    }
    Ok(out)
}

fn structure_constants_section(c: &Ctx) -> Result<Value> {
    c.sc.require_dim_one("structure constants")?;
    let pairs: Vec<(GroupElement, GroupElement)> = if c.cfg.pairs.is_empty() {
        let b = c.b_ball()?;
        let head: Vec<GroupElement> = b.into_iter().take(4).collect();
        head.iter()
            .flat_map(|x| head.iter().map(move |y| (x.clone(), y.clone())))
            .collect()
    } else {
        c.cfg
            .pairs
            .iter()
            .map(|[x, y]| Ok((c.fam.parse_element(x)?, c.fam.parse_element(y)?)))
            .collect::<Result<_>>()?
    };
    let mut tables = Vec::new();
    for (x, y) in pairs {
        let entry = match structure_constants_checked(c.sc, &x, &y) {
            Ok(t) => {
                let coeffs: BTreeMap<String, Value> =
                    t.iter().map(|(z, v)| (z.to_string(), cyclo_json(v))).collect();
                json!({ "x": x.to_string(), "y": y.to_string(), "coefficients": coeffs })
            }
            Err(e) => json!({ "x": x.to_string(), "y": y.to_string(), "result": flag(Err(e)) }),
        };
        tables.push(entry);
    }
    Ok(json!({ "field_order": c.sc.field.order(), "tables": tables }))
}

/// `(p, q)` for the families carrying the q-adic structure.
fn qadic_params(fam: &dyn Family) -> Result<(u64, u64)> {
    if let Some(pa) = fam.as_any().downcast_ref::<PadicAxb>() {
        if pa.qs().len() == 1 {
            return Ok((pa.p(), pa.qs()[0]));
        }
    }
    Err(HeckeError::Unsupported(format!(
        "q-adic analysis needs padic-axb with a single q, got {}",
        fam.name()
    )))
}

/// Residue depth of the stratification table in reports.
const STRATA_DEPTH: u32 = 10;

fn qadic_section(c: &Ctx) -> Result<Value> {
    let (p, q) = qadic_params(c.fam)?;
    let prec = c.cfg.precision;
    let n0 = qadic::n0(p, q)?;
    let z = qadic::z0(p, q, prec);
    let fixed = z.scale_p(n0 as i64).eq_at_precision(&z);
    let torsion = z.mul_int(q as i64).is_zero_at_precision();
    let limit = (prec / 2).max(1);
    let mut h_inf = Vec::new();
    for a in qadic::h_infinity(p, q, prec) {
        h_inf.push(json!({
            "element": a.encode(),
            "member": qadic::h_infinity_membership(&a, limit)?,
        }));
    }
    let depth = prec.min(STRATA_DEPTH);
    let table = qadic::stratification_table(p, q, depth)?;
    Ok(json!({
        "p": p,
        "q": q,
        "precision": prec,
        "n0": n0,
        "z0": z.encode(),
        "p_n0_z0_equals_z0": fixed,
        "q_z0_is_zero": torsion,
        "h_infinity": h_inf,
        "stratification": {
            "depth": depth,
            "partition": table.is_partition(),
            "table": serde_json::to_value(&table).expect("serializable"),
        },
    }))
}

fn omega_section(c: &Ctx) -> Result<Value> {
    let adeles: Vec<(String, FiniteAdele)> = if c.cfg.adeles.is_empty() {
        // diagonal rationals whose denominators cover the requested n
        ["5/4", "7/6", "35/12", "1/10"]
            .iter()
            .map(|s| {
                let r: Q = crate::arith::parse_q(s).expect("literal");
                (s.to_string(), FiniteAdele::from_rational(&r, &[2, 3, 5], c.cfg.precision))
            })
            .collect()
    } else {
        c.cfg
            .adeles
            .iter()
            .map(|s| Ok((s.clone(), parse_adele(s, c.cfg.precision)?)))
            .collect::<Result<_>>()?
    };
    let mut rows = Vec::new();
    for (name, x) in &adeles {
        for &n in &c.cfg.omega_n {
            let w = qadic::omega_n_witness(x, n).map(|w| serde_json::to_value(&w).expect("serializable"));
            rows.push(json!({ "adele": name, "n": n, "result": flag(w) }));
        }
    }
    Ok(json!({ "witnesses": rows }))
}

fn induced_section(c: &Ctx) -> Result<Value> {
    c.sc.require_dim_one("induced representation check")?;
    let sc = HeckeScenario::with_sqrt(c.cfg.label(), c.sc.family.clone());
    let window = CosetWindow::around(&sc, c.cfg.window_radius)?;
    let b = c.b_ball()?;
    let xs: Vec<&GroupElement> = b.iter().take(6).collect();
    let ws: Vec<&GroupElement> = c.ball.iter().take(c.cfg.samples.max(1)).collect();
    let mut checked = 0;
    let mut zero = 0;
    let mut vacuous = 0;
    let mut failures = Vec::new();
    for x in &xs {
        let e = HeckeElement::epsilon(&sc, x)?;
        for w in &ws {
            let r = commutation_residual(&sc, w, &e, &window)?;
            checked += 1;
            match r.residual_zero {
                Some(true) => zero += 1,
                Some(false) => failures.push(format!("w = {w}, x = {x}")),
                None => vacuous += 1,
            }
        }
    }
    let verdict = irreducibility_probe(&sc, c.ball, &window)?;
    let b_is_h = b.iter().all(|x| c.fam.in_h(x));
    Ok(json!({
        "window": window.len(),
        "pairs": checked,
        "residual_zero": zero,
        "empty_interior": vacuous,
        "failures": failures,
        "irreducibility": serde_json::to_value(&verdict).expect("serializable"),
        "B_equals_H_on_ball": b_is_h,
    }))
}

fn completion_section(c: &Ctx) -> Result<Value> {
    let fam = c.fam;
    let continuity = sigma_continuity_probe(fam, c.ball);
    let f: Vec<GroupElement> = c.ball.iter().take(3).cloned().collect();
    let basic = hecke_neighbourhood(fam, &f);
    let mut out = json!({
        "continuity": serde_json::to_value(&continuity).expect("serializable"),
        "neighbourhood": {
            "F": f.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "subgroup": basic.to_string(),
        },
    });
    if let Ok((p, q)) = qadic_params(fam) {
        let n0 = qadic::n0(p, q)?;
        let gen = b_plus_generator(fam, c.ball)?
            .ok_or_else(|| HeckeError::Domain("no B+ generator on the ball".into()))?;
        let mut levels = Vec::new();
        for [m, k] in &c.cfg.levels {
            let predicted = predicted_stabilization(*k, n0);
            let r = stabilization(fam, &gen, *m, *k, predicted + 3).map(|r| {
                let mut v = serde_json::to_value(&r).expect("serializable");
                v["passed"] = json!(r.passed());
                v["predicted_by_n0"] = json!(predicted);
                v
            });
            levels.push(flag(r));
        }
        out["stabilization"] = json!(levels);
    }
    Ok(out)
}

fn directedness_section(c: &Ctx) -> Result<Value> {
    let r = directedness_probe(c.fam, c.ball)?;
    let mut v = serde_json::to_value(&r).expect("serializable");
    v["passed"] = json!(r.passed());
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ConfigFile;

    fn one(text: &str) -> Report {
        run(&ConfigFile::parse(text).unwrap().scenario).unwrap()
    }

    #[test]
    fn padic_report_mentions_n0() {
        let r = one(
            "[[scenario]]\nfamily = \"padic-axb\"\nparams = { p = 2, q = 3 }\nreports = [\"b-set\", \"qadic\"]",
        );
        let b = &r.scenarios[0].results["b-set"];
        assert_eq!(b["n0"], json!(2));
        assert_eq!(b["closed_form"], json!("Z[1/2] x| 2Z"));
        assert_eq!(b["closed_form_matches_ball"], json!(true));
        assert_eq!(b["B_plus_orientation"], json!("k <= 0"));
        let q = &r.scenarios[0].results["qadic"];
        assert_eq!(q["p_n0_z0_equals_z0"], json!(true));
        assert_eq!(q["stratification"]["partition"], json!(true));
    }

    #[test]
    fn dihedral_phi_verified() {
        let r = one(
            "[[scenario]]\nfamily = \"dihedral\"\nparams = { sigma_b = -1 }\nreports = [\"describe-pair\", \"b-set\"]\nsamples = 5",
        );
        let s = &r.scenarios[0].results;
        assert_eq!(s["b-set"]["description"], json!("B = G on ball"));
        assert_eq!(s["describe-pair"]["phi"]["isomorphism_verified"], json!(true));
    }

    #[test]
    fn round_trip_and_determinism() {
        let text = "[[scenario]]\nfamily = \"heisenberg\"\nparams = { s = \"1/2\", t = \"1/3\" }\nsamples = 4\nreports = [\"describe-pair\", \"structure-constants\", \"omega-witness\"]";
        let a = one(text).to_json();
        assert_eq!(a, one(text).to_json());
        assert_eq!(Report::from_json(&a).unwrap().to_json(), a);
    }

    #[test]
    fn empty_request_list_echoes_scenario() {
        let r = run(&[]).unwrap();
        assert!(r.scenarios.is_empty() && !r.warnings.is_empty());
        let mut cfg = ScenarioConfig::new("dihedral", BTreeMap::new());
        cfg.reports = Some(vec!["b-set".into()]);
        assert_eq!(run_scenario(&cfg).unwrap().results.len(), 1);
        cfg.reports = Some(vec![]);
        let s = run_scenario(&cfg).unwrap();
        assert!(s.results.is_empty());
        assert_eq!(s.config, cfg);
    }
}
