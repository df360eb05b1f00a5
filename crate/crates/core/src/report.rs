//! Versioned JSON reports and the verification suites behind the CLI.

use serde::Serialize;
use serde_json::{json, Value};

use crate::chars::{conductor, dual_group, LevelLattice};
use crate::error::{Error, Result};
use crate::invariants::invariant_table;
use crate::limitformula::{case_constant, decomposition_check, kronecker_check};
use crate::modforms::{fricke_siegel_residual, sample_identity_inputs, HPoint, TorsionVector};
use crate::numeric::{decimal, PrecisionContext};
use crate::numtheory::primes_up_to;
use crate::quadfield::{Field, Ideal};
use crate::rayclass::{degree_kn_over_h, degree_ring_over_h, predicted_order, RayClassGroup};
use crate::theorems::{case_character, case_plan, choose_t, satisfies_c1, satisfies_c2, table_admissible, verify_main};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub inputs: Value,
    pub values: Value,
    pub residual: Option<String>,
    pub tolerance: Option<String>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub config: Value,
    pub results: Vec<CheckResult>,
    pub precision: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<f64>,
}

impl Report {
    pub fn new(command: &str, config: Value, results: Vec<CheckResult>, ctx: Option<&PrecisionContext>) -> Report {
        let precision = match ctx {
            Some(c) => json!({"digits": c.digits, "guard": c.guard, "max_escalations": c.max_escalations}),
            None => Value::Null,
        };
        Report { schema: SCHEMA, command: command.into(), config, results, precision, timing: None }
    }

    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    /// `name,residual,tolerance,pass` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,residual,tolerance,pass\n");
        for r in &self.results {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.name,
                r.residual.as_deref().unwrap_or(""),
                r.tolerance.as_deref().unwrap_or(""),
                r.pass
            ));
        }
        out
    }
}

fn sci(x: &rug::Float) -> String {
    decimal(x, 6)
}

fn vector_json(v: &TorsionVector) -> Value {
    json!([v.r1.to_string(), v.r2.to_string()])
}

/// Discriminant, class group and splitting of small primes.
pub fn field_info(d: i64) -> Result<Value> {
    let f = Field::new(d)?;
    let cl = RayClassGroup::new(f, f.one())?;
    let splitting: Vec<Value> = primes_up_to(50)
        .into_iter()
        .map(|p| {
            let parts = f.factor_rational_prime(p);
            let kind = match parts.as_slice() {
                [_, _] => "split",
                [(_, 2)] => "ramified",
                _ => "inert",
            };
            json!({"p": p, "type": kind, "primes": parts.iter().map(|(q, _)| q.hnf()).collect::<Vec<_>>()})
        })
        .collect();
    Ok(json!({
        "d_k": d,
        "tau_k": format!("({d} + sqrt({d}))/2"),
        "tau_norm": f.tau_norm(),
        "unit_count": f.unit_count(),
        "class_number": f.class_number(),
        "class_group_invariants": cl.invariants(),
        "reduced_forms": f.reduced_forms(),
        "splitting": splitting,
    }))
}

/// Structure of `Cl(N)` with the subgroup orders and the degree cross-checks.
pub fn rayclass_info(d: i64, n: i64) -> Result<(Value, Vec<CheckResult>)> {
    if n < 1 {
        return Err(Error::InvalidInput("N must be positive".into()));
    }
    let f = Field::new(d)?;
    let m = Ideal::rational(f, n);
    let g = RayClassGroup::new(f, m)?;
    let hilbert = g.subgroup_hilbert();
    let mut levels = Vec::new();
    for k in (1..=n).filter(|k| n % k == 0) {
        let small = RayClassGroup::new(f, Ideal::rational(f, k))?;
        levels.push(json!({"m": k, "order": small.order(), "fixing_subgroup_order": g.kernel_to(&small)?.len()}));
    }
    let mut checks = vec![CheckResult {
        name: "order formula".into(),
        inputs: json!({"d_k": d, "n": n}),
        values: json!({"order": g.order(), "predicted": predicted_order(f, &m)}),
        residual: None,
        tolerance: None,
        pass: g.order() as i64 == predicted_order(f, &m),
    }];
    let kn = degree_kn_over_h(f, n);
    checks.push(CheckResult {
        name: "[K_(N):H]".into(),
        inputs: json!({"d_k": d, "n": n}),
        values: json!({"subgroup_order": hilbert.len(), "formula": kn}),
        residual: None,
        tolerance: None,
        pass: hilbert.len() as i64 == kn,
    });
    let mut ring_order = Value::Null;
    if n > 1 {
        let ring = g.subgroup_ring()?;
        ring_order = json!(ring.len());
        let hn = degree_ring_over_h(f, n);
        checks.push(CheckResult {
            name: "[H_N:H]".into(),
            inputs: json!({"d_k": d, "n": n}),
            values: json!({"index": hilbert.len() / ring.len(), "formula": hn}),
            residual: None,
            tolerance: None,
            pass: (hilbert.len() / ring.len()) as i64 == hn && hilbert.len() % ring.len() == 0,
        });
    }
    let info = json!({
        "d_k": d,
        "n": n,
        "invariants": g.invariants(),
        "order": g.order(),
        "generators": g.generators().iter().map(|p| p.hnf()).collect::<Vec<_>>(),
        "hilbert_subgroup_order": hilbert.len(),
        "ring_class_subgroup_order": ring_order,
        "levels": levels,
    });
    Ok((info, checks))
}

pub fn suite_fricke_siegel(seed: u64, samples: usize, ctx: &PrecisionContext) -> Result<Vec<CheckResult>> {
    let tol = ctx.identity_tolerance();
    sample_identity_inputs(seed, samples, 12)
        .into_iter()
        .enumerate()
        .map(|(i, (u, v, (x, y)))| {
            let tau = HPoint::from_f64(x, y, ctx)?;
            let r = fricke_siegel_residual(&u, &v, &tau, ctx)?;
            Ok(CheckResult {
                name: format!("sample {i}"),
                inputs: json!({"u": vector_json(&u), "v": vector_json(&v), "tau": [x, y]}),
                values: Value::Null,
                residual: Some(sci(&r)),
                tolerance: Some(sci(&tol)),
                pass: r < tol,
            })
        })
        .collect()
}

fn level_group(d: i64, n: i64) -> Result<(Field, RayClassGroup, LevelLattice)> {
    let f = Field::new(d)?;
    if n < 2 {
        return Err(Error::InvalidInput("N must be at least 2".into()));
    }
    let g = RayClassGroup::new(f, Ideal::rational(f, n))?;
    let l = LevelLattice::new(&g)?;
    Ok((f, g, l))
}

pub fn suite_kronecker(d: i64, n: i64, cutoff: usize, ctx: &PrecisionContext) -> Result<Vec<CheckResult>> {
    let (f, g, l) = level_group(d, n)?;
    let full = Ideal::rational(f, n);
    let dual = dual_group(&g);
    let chi = dual
        .iter()
        .find(|c| conductor(c, &l) == full)
        .or_else(|| dual.iter().find(|c| !conductor(c, &l).is_one()))
        .ok_or_else(|| Error::NoneFound("character with a proper conductor".into()))?;
    let table = invariant_table(&g, ctx)?;
    let k = kronecker_check(chi, &g, &table, cutoff, ctx)?;
    let tol = ctx.identity_tolerance();
    let inputs = json!({"d_k": d, "n": n, "character": chi.exponents(), "conductor": k.conductor.hnf(), "cutoff": cutoff});
    Ok(vec![
        CheckResult {
            name: "limit formula".into(),
            inputs: inputs.clone(),
            values: json!({
                "lhs": [k.lhs.re, k.lhs.im],
                "rhs": [decimal(&k.rhs.re, 20), decimal(&k.rhs.im, 20)],
                "l_value": [k.l_value.re, k.l_value.im],
                "l_error": k.l_value.error,
            }),
            residual: Some(format!("{:.6e}", k.residual)),
            tolerance: Some("1e-3".into()),
            pass: k.residual < 1e-3,
        },
        CheckResult {
            name: "gamma independence".into(),
            inputs,
            values: Value::Null,
            residual: Some(sci(&k.gamma_residual)),
            tolerance: Some(sci(&tol)),
            pass: k.gamma_residual < tol,
        },
    ])
}

pub fn suite_decomposition(d: i64, n: i64, ctx: &PrecisionContext) -> Result<Vec<CheckResult>> {
    let (_, g, l) = level_group(d, n)?;
    let plan = case_plan(n)?;
    let chi = case_character(&g, &l, &plan, None)?;
    let table = invariant_table(&g, ctx)?;
    let dec = decomposition_check(&chi, &g, &table, plan.t, ctx)?;
    let tol = ctx.identity_tolerance();
    Ok(vec![CheckResult {
        name: "level decomposition".into(),
        inputs: json!({"d_k": d, "n": n, "t": plan.t, "character": chi.exponents()}),
        values: json!({
            "lhs": [decimal(&dec.lhs.re, 20), decimal(&dec.lhs.im, 20)],
            "plus": {"level": dec.plus.level, "inner_vanishes": dec.plus.inner_vanishes},
            "minus": {"level": dec.minus.level, "inner_vanishes": dec.minus.inner_vanishes},
        }),
        residual: Some(sci(&dec.residual)),
        tolerance: Some(sci(&tol)),
        pass: dec.residual < tol,
    }])
}

pub fn suite_case_constants(d: i64, n: i64, ctx: &PrecisionContext) -> Result<Vec<CheckResult>> {
    let (_, g, l) = level_group(d, n)?;
    let plan = case_plan(n)?;
    let chi = case_character(&g, &l, &plan, None)?;
    let table = invariant_table(&g, ctx)?;
    let r = case_constant(&chi, &g, &table, plan.t, plan.expected, ctx)?;
    let tol = ctx.pow10(-30);
    Ok(vec![CheckResult {
        name: "case constant".into(),
        inputs: json!({"d_k": d, "n": n, "t": plan.t, "case": plan.kind, "character": chi.exponents()}),
        values: json!({
            "ratio": [decimal(&r.ratio.re, 40), decimal(&r.ratio.im, 40)],
            "expected": plan.expected,
            "abs_s_chi_bar": sci(&r.s_bar_abs),
        }),
        residual: Some(sci(&r.deviation)),
        tolerance: Some(sci(&tol)),
        pass: r.deviation < tol && r.s_bar_abs > 1e-10,
    }])
}

pub fn suite_choice_of_t(max_n: i64) -> Result<Vec<CheckResult>> {
    if max_n < 2 {
        return Err(Error::InvalidInput("max-n must be at least 2".into()));
    }
    (2..=max_n)
        .filter(|&n| table_admissible(n))
        .map(|n| {
            let c = choose_t(n)?;
            Ok(CheckResult {
                name: format!("N = {n}"),
                inputs: json!({"n": n}),
                values: serde_json::to_value(c).expect("plain struct"),
                residual: None,
                tolerance: None,
                pass: satisfies_c1(n, c.t) && satisfies_c2(&c),
            })
        })
        .collect()
}

pub fn suite_main(d: i64, n: i64, ctx: &PrecisionContext) -> Result<Vec<CheckResult>> {
    let v = verify_main(Field::new(d)?, n, ctx)?;
    let consistent = v.fixing_group_order * v.distinct_values == v.class_group_order;
    Ok(vec![CheckResult {
        name: format!("K_(N) = K(h({}))", v.generator_used),
        inputs: json!({"d_k": d, "n": n}),
        pass: v.generated && consistent,
        values: serde_json::to_value(&v).expect("plain struct"),
        residual: None,
        tolerance: None,
    }])
}

/// The invariant table of `Cl(N)` as JSON.
pub fn table_json(d: i64, n: i64, ctx: &PrecisionContext) -> Result<Value> {
    let (_, g, _) = level_group(d, n)?;
    let t = invariant_table(&g, ctx)?;
    Ok(serde_json::to_value(t.export(&g, ctx.digits as usize)).expect("plain struct"))
}

/// CSV rows `class,fricke_re,fricke_im,log_abs_siegel`.
pub fn table_csv(d: i64, n: i64, ctx: &PrecisionContext) -> Result<String> {
    let (_, g, _) = level_group(d, n)?;
    let t = invariant_table(&g, ctx)?;
    let mut out = String::from("class,fricke_re,fricke_im,log_abs_siegel\n");
    for e in t.export(&g, ctx.digits as usize).entries {
        let class: Vec<String> = e.class.iter().map(|x| x.to_string()).collect();
        out.push_str(&format!("{},{},{},{}\n", class.join(" "), e.fricke_re, e.fricke_im, e.log_abs_siegel));
    }
    Ok(out)
}
