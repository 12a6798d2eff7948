//! Check reports: per-point defects, gates, verdicts and their rendering.
//!
//! A defect passes iff `value <= tol * max(1, scale)`, where `scale` is the
//! magnitude of the quantities being compared. Gates guard conditional
//! claims: a failing *required* gate turns the verdict NOT-APPLICABLE, a
//! failing optional gate only stops the defects that depend on it from
//! being asserted.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Map, Value};

/// Default tolerances, all scaled by one global multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub multiplier: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { multiplier: 1.0 }
    }
}

impl Tolerances {
    pub fn new(multiplier: f64) -> Self {
        Tolerances { multiplier }
    }

    fn s(&self, base: f64) -> f64 {
        base * self.multiplier
    }

    /// Identities exact up to rounding in the jet pipeline.
    pub fn jet_identity(&self) -> f64 {
        self.s(1e-8)
    }
    pub fn fd(&self) -> f64 {
        self.s(1e-4)
    }
    pub fn qe_gate(&self) -> f64 {
        self.s(1e-6)
    }
    pub fn lcf_gate(&self) -> f64 {
        self.s(1e-6)
    }
    pub fn symmetry(&self) -> f64 {
        self.s(1e-9)
    }
    pub fn schur(&self) -> f64 {
        self.s(1e-6)
    }
    pub fn weyl_divergence(&self) -> f64 {
        self.s(1e-6)
    }
    pub fn proof_chain(&self) -> f64 {
        self.s(1e-7)
    }
    pub fn two_path(&self) -> f64 {
        self.s(1e-8)
    }
    pub fn frame(&self) -> f64 {
        self.s(1e-10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::NotApplicable => "NOT-APPLICABLE",
        }
    }
}

/// When a defect counts towards the verdict.
#[derive(Debug, Clone, PartialEq)]
pub enum Assert {
    Always,
    /// Asserted only if every named gate passed.
    Gated(Vec<String>),
    /// Reported for diagnostics only.
    Never,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
    pub required: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointRecord {
    pub coords: Vec<f64>,
    pub level: Option<f64>,
    pub defects: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefectSummary {
    pub max: f64,
    pub tol: f64,
    pub scale: f64,
    pub asserted: bool,
    pub pass: bool,
}

/// Variation of a quantity that should be constant across a group of points.
#[derive(Debug, Clone, PartialEq)]
pub struct Spread {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub tol: f64,
    pub asserted: bool,
}

impl Spread {
    pub fn spread(&self) -> f64 {
        self.max - self.min
    }

    pub fn pass(&self) -> bool {
        let scale = 1f64.max(self.min.abs()).max(self.max.abs());
        self.spread() <= self.tol * scale
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub check: String,
    pub source: String,
    pub seed: u64,
    pub tol: f64,
    pub points: Vec<PointRecord>,
    pub defects: BTreeMap<String, DefectSummary>,
    pub spreads: Vec<Spread>,
    pub gates: Vec<Gate>,
    pub notes: Vec<String>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone)]
struct Declared {
    tol: f64,
    assert: Assert,
    max: f64,
    scale: f64,
}

/// Accumulates points, defects and gates, then settles the verdict.
#[derive(Debug, Clone)]
pub struct ReportBuilder {
    check: String,
    source: String,
    seed: u64,
    tol: f64,
    points: Vec<PointRecord>,
    declared: BTreeMap<String, Declared>,
    spreads: Vec<Spread>,
    gates: Vec<Gate>,
    notes: Vec<String>,
}

impl ReportBuilder {
    pub fn new(check: &str, source: &str, seed: u64, tol: Tolerances) -> Self {
        ReportBuilder {
            check: check.into(),
            source: source.into(),
            seed,
            tol: tol.multiplier,
            points: Vec::new(),
            declared: BTreeMap::new(),
            spreads: Vec::new(),
            gates: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Register a defect name with its tolerance and assertion mode.
    pub fn declare(&mut self, name: &str, tol: f64, assert: Assert) -> &mut Self {
        self.declared.entry(name.into()).or_insert(Declared {
            tol,
            assert,
            max: 0.0,
            scale: 1.0,
        });
        self
    }

    pub fn point(&mut self, coords: &[f64], level: Option<f64>) -> usize {
        self.points.push(PointRecord {
            coords: coords.to_vec(),
            level,
            defects: BTreeMap::new(),
        });
        self.points.len() - 1
    }

    /// Record a defect at a point; undeclared names are diagnostic only.
    /// NaN values propagate as failures.
    pub fn defect(&mut self, point: usize, name: &str, value: f64, scale: f64) {
        self.points[point].defects.insert(name.into(), value);
        let d = self.declared.entry(name.into()).or_insert(Declared {
            tol: f64::INFINITY,
            assert: Assert::Never,
            max: 0.0,
            scale: 1.0,
        });
        d.max = if value.is_nan() || d.max.is_nan() { f64::NAN } else { d.max.max(value) };
        d.scale = d.scale.max(scale.abs());
    }

    /// Merge a gate measurement; repeated names keep the worst value.
    pub fn gate(&mut self, name: &str, value: f64, bound: f64, required: bool) {
        let passed = value <= bound;
        if let Some(g) = self.gates.iter_mut().find(|g| g.name == name) {
            if !(value <= g.value) {
                g.value = value;
            }
            g.passed &= passed;
            g.required |= required;
        } else {
            self.gates.push(Gate {
                name: name.into(),
                value,
                bound,
                passed,
                required,
            });
        }
    }

    pub fn spread(&mut self, name: &str, values: &[f64], tol: f64, asserted: bool) {
        if values.is_empty() {
            return;
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let any_nan = values.iter().any(|v| v.is_nan());
        self.spreads.push(Spread {
            name: name.into(),
            min: if any_nan { f64::NAN } else { min },
            max: if any_nan { f64::NAN } else { max },
            tol,
            asserted,
        });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn gate_passed(&self, name: &str) -> Option<bool> {
        self.gates.iter().find(|g| g.name == name).map(|g| g.passed)
    }

    pub fn failed_required_gates(&self) -> Vec<String> {
        self.gates.iter().filter(|g| g.required && !g.passed).map(|g| g.name.clone()).collect()
    }

    pub fn finish(self) -> CheckReport {
        let gate_ok = |n: &String| self.gates.iter().find(|g| &g.name == n).map_or(true, |g| g.passed);
        let required_failed = self.gates.iter().any(|g| g.required && !g.passed);
        let defects: BTreeMap<String, DefectSummary> = self
            .declared
            .iter()
            .filter(|(name, _)| self.points.iter().any(|p| p.defects.contains_key(*name)))
            .map(|(name, d)| {
                let asserted = match &d.assert {
                    Assert::Always => true,
                    Assert::Gated(gs) => gs.iter().all(gate_ok),
                    Assert::Never => false,
                };
                let pass = d.max <= d.tol * d.scale.max(1.0);
                (
                    name.clone(),
                    DefectSummary {
                        max: d.max,
                        tol: d.tol,
                        scale: d.scale,
                        asserted,
                        pass,
                    },
                )
            })
            .collect();
        let failed = defects.values().any(|d| d.asserted && !d.pass)
            || self.spreads.iter().any(|s| s.asserted && !s.pass());
        let verdict = if required_failed {
            Verdict::NotApplicable
        } else if failed {
            Verdict::Fail
        } else {
            Verdict::Pass
        };
        CheckReport {
            check: self.check,
            source: self.source,
            seed: self.seed,
            tol: self.tol,
            points: self.points,
            defects,
            spreads: self.spreads,
            gates: self.gates,
            notes: self.notes,
            verdict,
        }
    }
}

/// Round to 12 significant digits; non-finite values become `null`.
fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    json!(if rounded == 0.0 { 0.0 } else { rounded })
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn failed_gates(&self) -> Vec<&str> {
        self.gates.iter().filter(|g| !g.passed).map(|g| g.name.as_str()).collect()
    }

    /// Worst value of a named defect over all points.
    pub fn max_defect(&self, name: &str) -> Option<f64> {
        self.defects.get(name).map(|d| d.max)
    }

    pub fn spread_of(&self, name: &str) -> Option<&Spread> {
        self.spreads.iter().find(|s| s.name == name)
    }

    pub fn to_json(&self) -> Value {
        let points: Vec<Value> = self
            .points
            .iter()
            .map(|p| {
                let defects: Map<String, Value> = p.defects.iter().map(|(k, v)| (k.clone(), num(*v))).collect();
                json!({
                    "coords": p.coords.iter().map(|x| num(*x)).collect::<Vec<_>>(),
                    "level": p.level.map_or(Value::Null, num),
                    "defects": defects,
                })
            })
            .collect();
        let defects: Map<String, Value> = self
            .defects
            .iter()
            .map(|(k, d)| {
                (
                    k.clone(),
                    json!({
                        "max": num(d.max),
                        "tol": num(d.tol),
                        "scale": num(d.scale),
                        "asserted": d.asserted,
                        "pass": d.pass,
                    }),
                )
            })
            .collect();
        let spreads: Map<String, Value> = self
            .spreads
            .iter()
            .map(|s| {
                (
                    s.name.clone(),
                    json!({
                        "min": num(s.min),
                        "max": num(s.max),
                        "spread": num(s.spread()),
                        "tol": num(s.tol),
                        "asserted": s.asserted,
                        "pass": s.pass(),
                    }),
                )
            })
            .collect();
        let gates: Vec<Value> = self
            .gates
            .iter()
            .map(|g| {
                json!({
                    "name": g.name,
                    "value": num(g.value),
                    "bound": num(g.bound),
                    "passed": g.passed,
                    "required": g.required,
                })
            })
            .collect();
        json!({
            "check": self.check,
            "source": self.source,
            "seed": self.seed,
            "tol": num(self.tol),
            "points": points,
            "aggregate": {
                "defects": defects,
                "spreads": spreads,
                "failed_gates": self.failed_gates(),
                "notes": self.notes,
            },
            "gates": gates,
            "verdict": self.verdict.as_str(),
        })
    }

    pub fn render_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("report serialises")
    }

    /// Aligned table, one row per defect name.
    pub fn render_human(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "check:  {}", self.check);
        let _ = writeln!(out, "source: {}", self.source);
        let _ = writeln!(out, "seed:   {}   tol multiplier: {}   points: {}", self.seed, self.tol, self.points.len());
        let mut rows: Vec<[String; 5]> = vec![[
            "defect".into(),
            "max".into(),
            "tolerance".into(),
            "asserted".into(),
            "status".into(),
        ]];
        for (name, d) in &self.defects {
            rows.push([
                name.clone(),
                format!("{:.3e}", d.max),
                if d.tol.is_finite() { format!("{:.1e}", d.tol * d.scale.max(1.0)) } else { "-".into() },
                if d.asserted { "yes".into() } else { "no".into() },
                status(d.asserted, d.pass),
            ]);
        }
        for s in &self.spreads {
            rows.push([
                format!("spread({})", s.name),
                format!("{:.3e}", s.spread()),
                format!("{:.1e}", s.tol),
                if s.asserted { "yes".into() } else { "no".into() },
                status(s.asserted, s.pass()),
            ]);
        }
        table(&mut out, &rows);
        if !self.gates.is_empty() {
            let mut rows: Vec<[String; 5]> = vec![[
                "gate".into(),
                "value".into(),
                "bound".into(),
                "required".into(),
                "status".into(),
            ]];
            for g in &self.gates {
                rows.push([
                    g.name.clone(),
                    format!("{:.3e}", g.value),
                    format!("{:.1e}", g.bound),
                    if g.required { "yes".into() } else { "no".into() },
                    if g.passed { "ok".into() } else { "FAILED".into() },
                ]);
            }
            out.push('\n');
            table(&mut out, &rows);
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        let failed = self.failed_gates();
        if self.verdict == Verdict::NotApplicable {
            let _ = writeln!(out, "verdict: {} (failed gate: {})", self.verdict.as_str(), failed.join(", "));
        } else {
            let _ = writeln!(out, "verdict: {}", self.verdict.as_str());
        }
        out
    }
}

fn status(asserted: bool, pass: bool) -> String {
    match (asserted, pass) {
        (_, true) => "ok".into(),
        (true, false) => "FAIL".into(),
        (false, false) => "over (not asserted)".into(),
    }
}

fn table(out: &mut String, rows: &[[String; 5]]) {
    let mut widths = [0usize; 5];
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    for r in rows {
        let mut line = String::new();
        for (i, (w, c)) in widths.iter().zip(r).enumerate() {
            if i == 0 {
                let _ = write!(line, "{c:<w$}");
            } else {
                let _ = write!(line, "  {c:>w$}");
            }
        }
        let _ = writeln!(out, "{}", line.trim_end());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ReportBuilder {
        let mut b = ReportBuilder::new("demo", "catalog:flat:3", 0, Tolerances::default());
        b.declare("a", 1e-8, Assert::Always);
        b.declare("b", 1e-8, Assert::Gated(vec!["qe".into()]));
        let p = b.point(&[0.1, 0.2], None);
        b.defect(p, "a", 1e-9, 1.0);
        b.defect(p, "b", 1.0, 1.0);
        b
    }

    #[test]
    fn optional_gate_deasserts_dependent_defects() {
        let mut b = sample();
        b.gate("qe", 1.0, 1e-6, false);
        let r = b.finish();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(!r.defects["b"].asserted);
    }

    #[test]
    fn gated_defect_fails_when_gate_passes() {
        let mut b = sample();
        b.gate("qe", 0.0, 1e-6, false);
        assert_eq!(b.finish().verdict, Verdict::Fail);
    }

    #[test]
    fn required_gate_gives_not_applicable_and_is_named() {
        let mut b = sample();
        b.gate("lcf", 0.5, 1e-6, true);
        let r = b.finish();
        assert_eq!(r.verdict, Verdict::NotApplicable);
        assert!(r.render_human().contains("failed gate: lcf"));
        assert_eq!(r.to_json()["aggregate"]["failed_gates"][0], "lcf");
    }

    #[test]
    fn scaled_tolerance() {
        let mut b = ReportBuilder::new("demo", "x", 0, Tolerances::default());
        b.declare("big", 1e-8, Assert::Always);
        let p = b.point(&[0.0], None);
        b.defect(p, "big", 5e-7, 100.0);
        assert_eq!(b.finish().verdict, Verdict::Pass);
    }

    #[test]
    fn nan_fails_and_serialises_as_null() {
        let mut b = ReportBuilder::new("demo", "x", 0, Tolerances::default());
        b.declare("a", 1e-8, Assert::Always);
        let p = b.point(&[0.0], None);
        b.defect(p, "a", f64::NAN, 1.0);
        let r = b.finish();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.to_json()["aggregate"]["defects"]["a"]["max"].is_null());
    }

    #[test]
    fn json_rounds_to_twelve_digits_and_sorts_keys() {
        assert_eq!(num(0.1 + 0.2), json!(0.3));
        assert_eq!(num(1.0 / 3.0), json!(0.333333333333));
        let r = sample().finish();
        let text = r.render_json();
        assert_eq!(text, r.render_json());
        let agg = text.find("\"aggregate\"").unwrap();
        let check = text.find("\"check\"").unwrap();
        assert!(agg < check);
    }
}
