use anyhow::{bail, Context, Result};
use finsub_core::monoid::{
    default_cap, enumerate_primitive, generating_family, height, to_tilde, ExponentVector,
};
use finsub_core::separating::{
    eval_invariant, separating_set, separation_check, uij_exponents, v_exponents, vij_exponents, InvariantSpec,
};
use finsub_core::structure::{
    conjecture_check, rank3_classify, rank4_classify, rank5_partial_classify, smallest_ambient, verify_theorem,
    ConjectureId, Theorem,
};
use finsub_core::subspace::{dilation_orbit_reps, enumerate_subspaces, PartitionOracle};
use finsub_core::{dickson_eval, make_field, CanonicalSubspace, FieldCtx, SubgroupBasis};
use num_bigint::BigUint;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::output::{big_json, bigint_json, Rendered};
use crate::{ConjectureArg, FieldArgs, TheoremArg};

fn field(f: FieldArgs) -> Result<FieldCtx> {
    make_field(f.p, f.n).with_context(|| format!("cannot build GF({}^{})", f.p, f.n))
}

fn hex_rows(ctx: &FieldCtx, v: &CanonicalSubspace) -> Vec<String> {
    v.rows().iter().map(|x| ctx.to_hex(x)).collect()
}

fn parse_basis(ctx: &FieldCtx, s: &str) -> Result<SubgroupBasis> {
    let elems = s
        .split(',')
        .map(|t| ctx.parse_hex(t).with_context(|| format!("bad element {t:?}")))
        .collect::<Result<Vec<_>>>()?;
    Ok(SubgroupBasis::new(elems))
}

fn vector_json(v: &ExponentVector) -> Value {
    Value::Array(v.coords().iter().map(big_json).collect())
}

fn vector_cells(v: &ExponentVector) -> Vec<String> {
    v.coords().iter().map(|x| x.to_string()).collect()
}

fn coord_header(first: &[&str], r: usize, last: &[&str]) -> Vec<String> {
    let mut h: Vec<String> = first.iter().map(|s| s.to_string()).collect();
    h.extend((1..=r).map(|i| format!("a_{i}")));
    h.extend(last.iter().map(|s| s.to_string()));
    h
}

pub fn field_info(f: FieldArgs) -> Result<Rendered> {
    let ctx = field(f)?;
    let g = ctx.primitive_element();
    let subfields: Vec<(usize, String)> = (1..=ctx.n())
        .filter(|m| ctx.n() % m == 0)
        .map(|m| Ok((m, ctx.to_hex(&ctx.subfield_generator(m)?))))
        .collect::<Result<_, finsub_core::field::FieldError>>()?;
    let mut rows = vec![
        vec!["p".into(), ctx.p().to_string()],
        vec!["n".into(), ctx.n().to_string()],
        vec!["order".into(), ctx.order().to_string()],
        vec!["modulus".into(), format!("{:?}", ctx.modulus())],
        vec!["primitive".into(), ctx.to_hex(&g)],
    ];
    for (m, gen) in &subfields {
        rows.push(vec![format!("GF(p^{m}) generator"), gen.clone()]);
    }
    let json = json!({
        "p": ctx.p(),
        "n": ctx.n(),
        "order": ctx.order(),
        "modulus": ctx.modulus(),
        "primitive": ctx.to_hex(&g),
        "subfields": subfields.iter().map(|(m, gen)| json!({"degree": m, "generator": gen})).collect::<Vec<_>>(),
    });
    Ok(Rendered::new(&["key", "value"], rows, json))
}

pub fn subgroups(f: FieldArgs, r: usize, sample_size: Option<usize>, seed: u64) -> Result<Rendered> {
    let ctx = field(f)?;
    let mut all = enumerate_subspaces(&ctx, r)?;
    let total = all.len();
    if let Some(k) = sample_size {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx = sample(&mut rng, total, k.min(total)).into_vec();
        idx.sort_unstable();
        all = idx.into_iter().map(|i| all[i].clone()).collect();
    }
    let rows: Vec<Vec<String>> = all.iter().map(|v| vec![hex_rows(&ctx, v).join(" ")]).collect();
    let json = json!({
        "p": ctx.p(),
        "n": ctx.n(),
        "r": r,
        "total": total,
        "subgroups": all.iter().map(|v| hex_rows(&ctx, v)).collect::<Vec<_>>(),
    });
    let mut out = Rendered::new(&["basis"], rows, json);
    out.notes.push(format!("{total} subgroups of rank {r} in GF({}^{})", ctx.p(), ctx.n()));
    Ok(out)
}

pub fn orbits(f: FieldArgs, r: usize) -> Result<Rendered> {
    let ctx = field(f)?;
    let table = dilation_orbit_reps(&ctx, r)?;
    let mut oracle = PartitionOracle::new();
    let mut rows = Vec::new();
    let mut items = Vec::new();
    for e in &table.entries {
        let lam = oracle.partition_of(&ctx, &e.rep);
        let rep = hex_rows(&ctx, &e.rep);
        rows.push(vec![rep.join(" "), e.orbit_size.to_string(), e.stabilizer_q.to_string(), lam.to_string()]);
        items.push(json!({
            "rep": rep,
            "orbit_size": e.orbit_size,
            "stabilizer_q": e.stabilizer_q,
            "partition": lam,
        }));
    }
    let mut out = Rendered::new(&["rep", "orbit_size", "stabilizer_q", "partition"], rows, Value::Array(items));
    out.json_lines = true;
    out.notes.push(format!("{} orbits covering {} subgroups", table.len(), table.total_subspaces()));
    Ok(out)
}

fn classify_one(ctx: &FieldCtx, oracle: &mut PartitionOracle, v: &CanonicalSubspace) -> Result<(Vec<String>, Value, bool)> {
    let d = dickson_eval(ctx, &v.basis())?.to_hex(ctx);
    let result = match v.rank() {
        3 => rank3_classify(ctx, oracle, v)?,
        4 => rank4_classify(ctx, oracle, v)?,
        5 => rank5_partial_classify(ctx, oracle, v)?,
        _ => {
            let lam = oracle.partition_of(ctx, v);
            let basis = hex_rows(ctx, v);
            let row = vec![basis.join(" "), d.join(" "), "-".into(), lam.to_string(), "true".into()];
            let json = json!({
                "basis": basis, "dickson": d, "theorem": null, "oracle": lam, "agree": true, "witness": {},
            });
            return Ok((row, json, true));
        }
    };
    let theorem = result.theorem.as_ref().map_or("-".to_string(), |t| t.to_string());
    let row = vec![result.basis.join(" "), d.join(" "), theorem, result.oracle.to_string(), result.agree.to_string()];
    let mut json = serde_json::to_value(&result)?;
    json["dickson"] = json!(d);
    Ok((row, json, result.agree))
}

pub fn classify(f: FieldArgs, basis: Option<&str>, r: Option<usize>) -> Result<Rendered> {
    let ctx = field(f)?;
    let subs: Vec<CanonicalSubspace> = match (basis, r) {
        (Some(b), _) => {
            let b = parse_basis(&ctx, b)?;
            let v = CanonicalSubspace::from_basis(&ctx, &b);
            if v.rank() != b.len() {
                bail!("basis elements are dependent (rank {} from {} elements)", v.rank(), b.len());
            }
            vec![v]
        }
        (None, Some(r)) => dilation_orbit_reps(&ctx, r)?.entries.into_iter().map(|e| e.rep).collect(),
        (None, None) => bail!("give --basis or --r"),
    };
    let mut oracle = PartitionOracle::new();
    let mut rows = Vec::new();
    let mut items = Vec::new();
    let mut all_agree = true;
    for v in &subs {
        let (row, json, agree) = classify_one(&ctx, &mut oracle, v)?;
        all_agree &= agree;
        rows.push(row);
        items.push(json);
    }
    let json = if basis.is_some() { items.pop().unwrap_or(Value::Null) } else { Value::Array(items) };
    let mut out = Rendered::new(&["basis", "dickson", "theorem", "oracle", "agree"], rows, json);
    out.exit = if all_agree { 0 } else { 2 };
    Ok(out)
}

/// `v_1`, `v_12`, `u_23`, `v_{1,10}`.
fn parse_invariant(p: u32, r: usize, name: &str) -> Result<InvariantSpec> {
    let name = name.trim();
    let (kind, rest) = name.split_once('_').with_context(|| format!("bad invariant name {name:?}"))?;
    let rest = rest.trim_start_matches('{').trim_end_matches('}');
    let idx: Vec<usize> = if rest.contains(',') {
        rest.split(',').map(|t| t.trim().parse()).collect::<Result<_, _>>()?
    } else if rest.len() == 2 && r <= 10 {
        rest.chars().map(|c| c.to_digit(10).map(|d| d as usize).context("bad index")).collect::<Result<_>>()?
    } else {
        vec![rest.parse()?]
    };
    let spec = match (kind, idx.as_slice()) {
        ("v", [i]) => v_exponents(p, r, *i)?,
        ("v", [i, j]) => vij_exponents(p, r, *i, *j)?,
        ("u", [i, j]) => uij_exponents(p, r, *i, *j)?,
        _ => bail!("bad invariant name {name:?}"),
    };
    Ok(spec)
}

pub fn eval(f: FieldArgs, basis: &str, invariant: Option<&str>, exponents: Option<&str>) -> Result<Rendered> {
    let ctx = field(f)?;
    let b = parse_basis(&ctx, basis)?;
    let r = b.len();
    let spec = match (invariant, exponents) {
        (Some(name), _) => parse_invariant(ctx.p(), r, name)?,
        (None, Some(e)) => {
            let a = e.split(',').map(|t| t.trim().parse::<u64>()).collect::<Result<Vec<_>, _>>()?;
            let v = ExponentVector::from_u64(ctx.p(), &a);
            if !finsub_core::monoid::is_solution(&v) {
                bail!("{v} does not have weight zero");
            }
            InvariantSpec::custom(v, e)
        }
        (None, None) => bail!("give --invariant or --exponents"),
    };
    let value = ctx.to_hex(&eval_invariant(&ctx, &spec, &b)?);
    let json = json!({
        "invariant": spec.label,
        "exponents": vector_json(&spec.exponents),
        "basis": b.elems().iter().map(|x| ctx.to_hex(x)).collect::<Vec<_>>(),
        "value": value,
    });
    Ok(Rendered::new(&["invariant", "value"], vec![vec![spec.label.clone(), value]], json))
}

pub fn primitives(p: u32, r: usize, cap: Option<u64>, tilde: bool) -> Result<Rendered> {
    let cap = match cap {
        Some(c) => BigUint::from(c),
        None => default_cap(p, r)?,
    };
    let e = enumerate_primitive(p, r, &cap)?;
    let mut rows = Vec::new();
    let mut items = Vec::new();
    for v in &e.primitives {
        let mut row = vector_cells(v);
        let h = height(v);
        row.push(h.to_string());
        let mut item = json!({"vector": vector_json(v), "height": bigint_json(&h)});
        if tilde {
            let t = to_tilde(v)?;
            row.push(t.to_string());
            item["tilde"] = Value::Array(t.0.iter().map(bigint_json).collect());
        }
        rows.push(row);
        items.push(item);
    }
    let last: &[&str] = if tilde { &["height", "tilde"] } else { &["height"] };
    let json = json!({
        "p": p,
        "r": r,
        "cap": big_json(&cap),
        "solutions_seen": e.solutions_seen,
        "primitives": items,
        "warnings": e.warnings,
    });
    let mut out = Rendered::new(&[], rows, json);
    out.header = coord_header(&[], r, last);
    out.notes.push(format!("{} primitive solutions with coordinates <= {cap}", e.primitives.len()));
    for w in &e.warnings {
        eprintln!("warning: {w}");
    }
    Ok(out)
}

pub fn gen_set(p: u32, r: usize) -> Result<Rendered> {
    let fam = generating_family(p, r)?;
    let rows: Vec<Vec<String>> = fam
        .iter()
        .map(|m| {
            let mut row = vec![m.tag.clone()];
            row.extend(vector_cells(&m.vector));
            row
        })
        .collect();
    let json = json!({
        "p": p,
        "r": r,
        "count": fam.len(),
        "family": fam.iter().map(|m| json!({"tag": m.tag, "vector": vector_json(&m.vector)})).collect::<Vec<_>>(),
    });
    let mut out = Rendered::new(&[], rows, json);
    out.header = coord_header(&["tag"], r, &[]);
    Ok(out)
}

pub fn sep_set(p: u32, r: usize) -> Result<Rendered> {
    let set = separating_set(p, r)?;
    let rows: Vec<Vec<String>> = set
        .iter()
        .map(|s| {
            let mut row = vec![s.label.clone()];
            row.extend(vector_cells(&s.exponents));
            row
        })
        .collect();
    let items: Vec<Value> = set
        .iter()
        .map(|s| {
            let mut item = serde_json::to_value(s.kind).expect("plain enum");
            item["label"] = json!(s.label);
            item["exponents"] = vector_json(&s.exponents);
            item
        })
        .collect();
    let mut out = Rendered::new(&[], rows, json!({"p": p, "r": r, "invariants": items}));
    out.header = coord_header(&["label"], r, &[]);
    Ok(out)
}

pub fn separate(f: FieldArgs, r: usize) -> Result<Rendered> {
    let ctx = field(f)?;
    let rep = separation_check(&ctx, r)?;
    let rows: Vec<Vec<String>> = rep
        .fingerprints
        .iter()
        .map(|fp| vec![fp.rep.join(" "), fp.orbit_size.to_string(), fp.values.join(" ")])
        .collect();
    let mut out = Rendered::new(&["rep", "orbit_size", "values"], rows, serde_json::to_value(&rep)?);
    out.notes.push(format!("invariants: {}", rep.invariants.join(" ")));
    out.notes.push(format!(
        "{} orbits, {} unseparated pairs, {} invariance failures",
        rep.orbit_count,
        rep.unseparated_pairs.len(),
        rep.invariance_failures.len()
    ));
    out.exit = if rep.separated() { 0 } else { 2 };
    Ok(out)
}

fn theorem_of(t: TheoremArg) -> (Theorem, usize, &'static [usize]) {
    match t {
        TheoremArg::Field => (Theorem::Field, 4, &[2]),
        TheoremArg::Comp => (Theorem::Comp, 3, &[2]),
        TheoremArg::Codim1 => (Theorem::Codim1, 3, &[]),
        TheoremArg::Embedding => (Theorem::Embedding, 3, &[]),
        TheoremArg::Rk2 => (Theorem::Rk2, 2, &[2]),
        TheoremArg::Rk3 => (Theorem::Rk3, 3, &[]),
        TheoremArg::Rk4 => (Theorem::Rk4, 4, &[]),
        TheoremArg::Rk4p2 => (Theorem::Rk4p2, 4, &[2]),
        TheoremArg::Rk5 => (Theorem::Rk5, 5, &[]),
    }
}

fn conjecture_of(c: ConjectureArg) -> (ConjectureId, usize, &'static [usize]) {
    match c {
        ConjectureArg::Fp3 => (ConjectureId::Rank5Fp3, 5, &[3]),
        ConjectureArg::Subspace => (ConjectureId::Rank5SubspaceVariety, 5, &[2]),
        ConjectureArg::Fp2 => (ConjectureId::Rank5Fp2Variety, 5, &[2]),
    }
}

pub fn verify(theorem: Option<TheoremArg>, conjecture: Option<ConjectureArg>, p: u64, n: Option<usize>) -> Result<Rendered> {
    if let Some(t) = theorem {
        let (t, r, divs) = theorem_of(t);
        let ctx = field(FieldArgs { p, n: n.unwrap_or_else(|| smallest_ambient(r, divs)) })?;
        let rep = verify_theorem(&ctx, t)?;
        let mut rows: Vec<Vec<String>> = rep.tallies.iter().map(|(k, v)| vec![k.clone(), v.to_string()]).collect();
        rows.extend(rep.disagreements.iter().map(|d| {
            vec![format!("disagreement {}", d.basis.join(" ")), format!("theorem {} direct {}", d.theorem, d.direct)]
        }));
        let mut out = Rendered::new(&["tally", "count"], rows, serde_json::to_value(&rep)?);
        out.notes.push(format!(
            "{:?} on GF({}^{}): {} checked, {} disagreements",
            t,
            ctx.p(),
            ctx.n(),
            rep.checked,
            rep.disagreements.len()
        ));
        if !rep.agrees() {
            out.exit = 2;
            out.notes.push(serde_json::to_string(&rep.disagreements[0])?);
        }
        return Ok(out);
    }
    let c = conjecture.context("give --theorem or --conjecture")?;
    let (id, r, divs) = conjecture_of(c);
    let ctx = field(FieldArgs { p, n: n.unwrap_or_else(|| smallest_ambient(r, divs)) })?;
    let rep = conjecture_check(&ctx, id)?;
    let mut rows = vec![
        vec!["tested".into(), rep.tested.to_string()],
        vec!["with_structure".into(), rep.with_structure.to_string()],
        vec!["in_variety".into(), rep.in_variety.to_string()],
        vec!["counterexamples".into(), rep.counterexamples.len().to_string()],
    ];
    rows.extend(rep.counterexamples.iter().map(|w| vec![format!("{:?}", w.direction), w.basis.join(" ")]));
    let mut out = Rendered::new(&["key", "value"], rows, serde_json::to_value(&rep)?);
    out.notes.push(rep.note.clone());
    if !rep.counterexamples.is_empty() {
        out.exit = 2;
        out.notes.push(serde_json::to_string(&rep.counterexamples[0])?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use finsub_core::separating::InvariantKind;

    #[test]
    fn invariant_names() {
        assert_eq!(parse_invariant(2, 4, "v_1").unwrap().kind, InvariantKind::V { i: 1 });
        assert_eq!(parse_invariant(2, 4, "v_32").unwrap().kind, InvariantKind::Vij { i: 3, j: 2 });
        assert_eq!(parse_invariant(2, 6, "u_23").unwrap().kind, InvariantKind::Uij { i: 2, j: 3 });
        assert_eq!(parse_invariant(2, 11, "v_{1,10}").unwrap().kind, InvariantKind::Vij { i: 1, j: 10 });
        assert!(parse_invariant(2, 4, "w_1").is_err());
        assert!(parse_invariant(2, 4, "v_4").is_err());
    }
}
