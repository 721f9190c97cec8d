use std::path::Path;

use rand::Rng;
use serde::Serialize;
use serde_json::json;

use super::args::*;
use super::{read_json, Outcome};
use crate::calibrations::{self, Calibration, COMASS_HIGH, COMASS_LOW};
use crate::cones::{lambda_span, lemma_2_5_check, mass_norm_estimate, positivity_classify, MassOptions};
use crate::currents::mesh::{self, MeshedSubmanifold};
use crate::currents::{
    calibration_gap, green_check, max_principle_check, phi_positive_check, GreenMode, MaxPrincipleMode, PolyhedralCurrent,
};
use crate::duality::{
    assemble_boundary_model, boundary_alternative, jensen_alternative, min_mass, random_boundary_instances,
    random_jensen_instances, support_check, BoundaryFunctional, FiniteDualityModel, InstanceOutcome,
};
use crate::error::{Error, Result};
use crate::exterior::{ExteriorElement, FormSpec, SimplePlane};
use crate::grassmann::{comass, reduce_calibration, sample_grassmannian, ComassOptions, PlaneSampleSet, SampleOptions};
use crate::hessian::{
    hessian_form, normality_check, phi_flat_check, pluriharmonic_mod_d_residual, psh_classify, FlatOptions,
    ScalarField,
};
use crate::linalg::stream_rng;
use crate::polynomial::PolynomialSpec;
use crate::verify;

pub fn dispatch(cfg: &RunConfig) -> Result<Outcome> {
    let seed = cfg.seed;
    match &cfg.command {
        Command::Catalogue(a) => catalogue(a),
        Command::Comass(a) => comass_cmd(a, seed),
        Command::Gsample(a) => gsample(a, seed),
        Command::Reduce(a) => reduce(a, seed),
        Command::Positivity(a) => positivity(a, seed),
        Command::Lemma25(a) => lemma25(a, seed),
        Command::Massnorm(a) => massnorm(a, seed),
        Command::Psh(a) => psh(a, seed),
        Command::Modd(a) => modd(a, seed),
        Command::Flat(a) => flat(a, seed),
        Command::Normality(a) => normality(a, seed),
        Command::CurrentCheck(a) => current_check(a),
        Command::Green(a) => green(a),
        Command::Maxprinciple(a) => maxprinciple(a, seed),
        Command::Duality(a) => duality(a, seed),
        Command::Jensen(a) => jensen(a, seed),
        Command::VerifyAll(a) => verify_all(a),
    }
}

fn required<'a, T: ?Sized>(value: Option<&'a T>, flag: &str) -> Result<&'a T> {
    value.ok_or_else(|| Error::InvalidParameter(format!("{flag} is required")))
}

fn load_cal(sel: Option<&String>) -> Result<Calibration> {
    Calibration::from_selector(required(sel.map(String::as_str), "--cal")?)
}

fn load_form(path: &Path) -> Result<ExteriorElement> {
    let spec: FormSpec = read_json(path)?;
    ExteriorElement::try_from(&spec)
}

fn samples(cal: &Calibration, count: usize, seed: u64) -> Result<PlaneSampleSet> {
    sample_grassmannian(cal, &SampleOptions::new(count, seed))
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| Error::InvalidParameter(format!("bad number `{s}` in {what}"))))
        .collect()
}

fn parse_point(text: Option<&String>, n: usize) -> Result<Vec<f64>> {
    let x = parse_list(required(text.map(String::as_str), "--x")?, "--x")?;
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }
    Ok(x)
}

fn load_field(spec: &str, n: usize) -> Result<ScalarField> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        return ScalarField::builtin(name, n);
    }
    let poly: PolynomialSpec = read_json(Path::new(spec))?;
    if poly.n != n {
        return Err(Error::DimensionMismatch { expected: n, got: poly.n });
    }
    let name = Path::new(spec).file_stem().map_or(spec.to_string(), |s| s.to_string_lossy().into_owned());
    ScalarField::from_spec(&name, &poly)
}

/// `grid:(a..b)^n:k`, `random:N` or `point:x1,…,xn`.
fn parse_probes(spec: &str, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let bad = || Error::InvalidParameter(format!("bad probe spec `{spec}`"));
    if let Some(rest) = spec.strip_prefix("random:") {
        let count: usize = rest.trim().parse().map_err(|_| bad())?;
        let mut rng = stream_rng(seed, 0x70_726f_6265);
        return Ok((0..count).map(|_| (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()).collect());
    }
    if let Some(rest) = spec.strip_prefix("point:") {
        let x = parse_list(rest, "--probes")?;
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.len() });
        }
        return Ok(vec![x]);
    }
    let rest = spec.strip_prefix("grid:(").ok_or_else(bad)?;
    let (range, tail) = rest.split_once(")^").ok_or_else(bad)?;
    let (lo, hi) = range.split_once("..").ok_or_else(bad)?;
    let (dim, k) = tail.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let dim: usize = dim.trim().parse().map_err(|_| bad())?;
    let k: usize = k.trim().parse().map_err(|_| bad())?;
    if dim != n {
        return Err(Error::DimensionMismatch { expected: n, got: dim });
    }
    if k == 0 || k.checked_pow(n as u32).is_none_or(|t| t > 1_000_000) {
        return Err(Error::InvalidParameter(format!("grid of {k}^{n} points is out of range")));
    }
    let axis: Vec<f64> =
        (0..k).map(|i| if k == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * i as f64 / (k - 1) as f64 }).collect();
    let mut points = vec![Vec::with_capacity(n)];
    for _ in 0..n {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    Ok(points)
}

/// Mesh file or generator: `disc:H`, `disc:H,C1,…,Cn` (centre), `tilted:THETA,H`,
/// `graph:H`, `cap:HEIGHT,H`.
fn load_mesh(spec: Option<&String>, n: usize) -> Result<PolyhedralCurrent> {
    let spec = required(spec.map(String::as_str), "--mesh")?;
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        return PolyhedralCurrent::parse(&text).map_err(|e| match e {
            Error::Parse { location, message } => Error::Parse { location: format!("{spec}: {location}"), message },
            other => other,
        });
    }
    let Some((kind, params)) = spec.split_once(':') else {
        return Err(Error::Io(std::io::Error::new(std::io::ErrorKind::NotFound, format!("no mesh file `{spec}`"))));
    };
    let params = parse_list(params, "--mesh")?;
    let arity = |k: usize| -> Result<()> {
        if params.len() != k {
            return Err(Error::InvalidParameter(format!("`{kind}` mesh takes {k} parameters")));
        }
        Ok(())
    };
    match kind {
        "disc" if params.len() == 1 => mesh::disc(n, params[0]),
        "disc" => {
            arity(1 + n)?;
            let mut a = vec![0.0; n];
            let mut b = vec![0.0; n];
            a[0] = 1.0;
            b[1] = 1.0;
            mesh::disc_in_plane(params[0], &params[1..], &a, &b, 1.0)
        }
        "tilted" => {
            arity(2)?;
            mesh::tilted_disc(params[0], params[1])
        }
        "graph" => {
            arity(1)?;
            mesh::graph_curve(params[0])
        }
        "cap" => {
            arity(2)?;
            mesh::cap(params[0], params[1])
        }
        _ => Err(Error::InvalidParameter(format!("unknown mesh generator `{kind}`"))),
    }
}

fn phi_csv(t: &PolyhedralCurrent, phi: &ExteriorElement) -> Result<String> {
    let mut buf = Vec::new();
    t.write_phi_csv(phi, &mut buf)?;
    Ok(String::from_utf8(buf).expect("ascii csv"))
}

fn catalogue(a: &CatalogueArgs) -> Result<Outcome> {
    if let Some(sel) = &a.dump {
        let cal = Calibration::parse_selector(sel)?;
        let mut out = Outcome::new(true, FormSpec::from(&cal.form))?;
        out.raw = Some(cal.form.to_json() + "\n");
        return Ok(out);
    }
    Outcome::new(true, calibrations::list())
}

fn comass_cmd(a: &ComassArgs, seed: u64) -> Result<Outcome> {
    let (form, is_cal) = match (&a.form, &a.cal) {
        (Some(path), None) => (load_form(path)?, false),
        (None, Some(sel)) => (Calibration::parse_selector(sel)?.form, true),
        _ => return Err(Error::InvalidParameter("give exactly one of --form and --cal".into())),
    };
    let opts = ComassOptions { multistarts: a.multistarts, max_iter: a.max_iter, seed, ..ComassOptions::default() };
    let r = comass(&form, &opts)?;
    let in_band = (COMASS_LOW..=COMASS_HIGH).contains(&r.value);
    let passed = if is_cal { in_band } else { r.converged };
    Outcome::new(
        passed,
        json!({
            "value": r.value,
            "frame": r.maximizer,
            "saturated": r.saturated,
            "converged": r.converged,
            "starts_converged": r.starts_converged,
            "multistarts": a.multistarts,
            "comass_one": in_band,
        }),
    )
}

#[derive(Serialize)]
struct PlaneRow<'a> {
    frame: &'a SimplePlane,
    value: f64,
}

fn gsample(a: &GsampleArgs, seed: u64) -> Result<Outcome> {
    let cal = load_cal(a.cal.as_ref())?;
    let s = sample_grassmannian(
        &cal,
        &SampleOptions { tol: a.tol, dedup_angle: a.dedup_angle, ..SampleOptions::new(a.count, seed) },
    )?;
    let planes: Vec<PlaneRow> = s.planes.iter().zip(&s.values).map(|(frame, &value)| PlaneRow { frame, value }).collect();
    let mut csv = Vec::new();
    s.write_csv(&mut csv)?;
    let result = json!({
        "planes": planes,
        "count": s.len(),
        "requested": s.requested,
        "rejected": s.rejected,
        "tolerance": s.tolerance,
        "dedup_angle": s.dedup_angle,
        "multistart_count": s.multistart_count,
    });
    Ok(Outcome::new(!s.is_empty(), result)?.with_csv(String::from_utf8(csv).expect("ascii csv"), false))
}

fn reduce(a: &ReduceArgs, seed: u64) -> Result<Outcome> {
    let cal = load_cal(a.cal.as_ref())?;
    let s = samples(&cal, a.count, seed)?;
    let r = reduce_calibration(&cal, &s)?;
    let basis: Vec<Vec<f64>> = r.w.column_iter().map(|c| c.iter().copied().collect()).collect();
    Outcome::new(
        true,
        json!({
            "w": basis,
            "dim": r.w.ncols(),
            "psi": r.psi,
            "elliptic": r.elliptic,
            "witness": r.witness,
            "samples": s.len(),
        }),
    )
}

fn positivity(a: &PositivityArgs, seed: u64) -> Result<Outcome> {
    let alpha = load_form(required(a.form.as_deref(), "--form")?)?;
    let cal = load_cal(a.cal.as_ref())?;
    let s = samples(&cal, a.count, seed)?;
    let r = positivity_classify(&alpha, &cal, &s, a.tol)?;
    Outcome::new(r.is_member(), r)
}

fn lemma25(a: &Lemma25Args, seed: u64) -> Result<Outcome> {
    let xi = load_form(required(a.pvector.as_deref(), "--pvector")?)?;
    let cal = load_cal(a.cal.as_ref())?;
    let s = samples(&cal, a.count, seed)?;
    let r = lemma_2_5_check(&xi, &cal, &s, &s.planes, a.tol)?;
    Outcome::new(r.agree, r)
}

fn massnorm(a: &MassnormArgs, seed: u64) -> Result<Outcome> {
    let xi = load_form(required(a.pvector.as_deref(), "--pvector")?)?;
    let generators = match &a.cal {
        Some(sel) => samples(&Calibration::from_selector(sel)?, a.count, seed)?.planes,
        None => Vec::new(),
    };
    let opts = MassOptions::default();
    let opts = MassOptions { comass: ComassOptions { seed, ..opts.comass }, ..opts };
    let r = mass_norm_estimate(&xi, &generators, &opts)?;
    Outcome::new(r.lower <= r.upper * (1.0 + 1e-9) + 1e-12, r)
}

fn psh(a: &PshArgs, seed: u64) -> Result<Outcome> {
    let cal = load_cal(a.cal.as_ref())?;
    let f = load_field(required(a.field.as_deref(), "--field")?, cal.n())?;
    let points = parse_probes(&a.probes, cal.n(), seed)?;
    let s = samples(&cal, a.count, seed)?;
    let statuses = psh_classify(&f, &points, &cal, &s, a.tol)?;
    let passed = statuses.iter().all(|s| s.is_psh());
    let min_margin = statuses.iter().map(|s| s.margin()).fold(f64::INFINITY, f64::min);
    let rows: Vec<_> = points.iter().zip(&statuses).map(|(x, st)| json!({ "point": x, "result": st })).collect();
    Outcome::new(passed, json!({ "field": f.name, "probes": rows, "min_margin": min_margin, "psh": passed }))
}

fn modd(a: &ModdArgs, seed: u64) -> Result<Outcome> {
    let cal = load_cal(a.cal.as_ref())?;
    let f = load_field(required(a.field.as_deref(), "--field")?, cal.n())?;
    let x = parse_point(a.x.as_ref(), cal.n())?;
    let s = samples(&cal, a.count, seed)?;
    let span = lambda_span(&s)?;
    let fit = pluriharmonic_mod_d_residual(&f, &x, &cal.form, &span)?;
    let scale = hessian_form(&f, &x, &cal.form)?.norm().max(1.0);
    let relative = fit.residual / scale;
    Outcome::new(
        relative <= a.tol,
        json!({ "residual": fit.residual, "relative_residual": relative, "alpha": fit.alpha, "sigma": fit.sigma }),
    )
}

fn flat(a: &FlatArgs, seed: u64) -> Result<Outcome> {
    let cal = load_cal(a.cal.as_ref())?;
    let f = load_field(required(a.field.as_deref(), "--field")?, cal.n())?;
    let x = parse_point(a.x.as_ref(), cal.n())?;
    let r = phi_flat_check(&f, &x, &cal, &FlatOptions { tol: a.tol, samples: a.samples, seed })?;
    Outcome::new(r.flat, r)
}

fn normality(a: &NormalityArgs, seed: u64) -> Result<Outcome> {
    let cal = load_cal(a.cal.as_ref())?;
    let r = normality_check(&cal, a.trials, seed, a.tol)?;
    Outcome::new(r.normal, r)
}

fn current_check(a: &CurrentCheckArgs) -> Result<Outcome> {
    let cal = load_cal(a.cal.as_ref())?;
    let t = load_mesh(a.mesh.as_ref(), cal.n())?;
    let positivity = phi_positive_check(&t, &cal, a.tol)?;
    let gap = calibration_gap(&t, &cal)?;
    let csv = phi_csv(&t, &cal.form)?;
    if let Some(path) = &a.emit_csv {
        std::fs::write(path, &csv)?;
    }
    let result = json!({
        "positive": positivity.positive,
        "violations": positivity.violations,
        "tphi": gap.tphi,
        "mass": gap.mass,
        "gap": gap.gap,
        "calibrated": gap.gap.abs() <= a.tol * gap.mass.max(1.0),
        "simplices": t.len(),
    });
    Ok(Outcome::new(positivity.positive, result)?.with_csv(csv, false))
}

fn green(a: &GreenArgs) -> Result<Outcome> {
    let cal = load_cal(a.cal.as_ref())?;
    let n = cal.n();
    let m = MeshedSubmanifold::new(load_mesh(a.mesh.as_ref(), n)?, &cal, a.flatness_tol)?;
    let tests = if a.tests == "builtin:set1" {
        verify::set1(n)?
    } else {
        a.tests.split(',').map(|s| load_field(s.trim(), n)).collect::<Result<Vec<_>>>()?
    };
    let mode = match a.mode {
        GreenModeArg::Auto => GreenMode::Auto,
        GreenModeArg::Exact => GreenMode::Exact,
        GreenModeArg::Discrete => GreenMode::Discrete,
    };
    let r = green_check(&m, a.x_index, &tests, &cal, mode)?;
    let csv = phi_csv(&m.current, &cal.form)?;
    let passed = r.max_residual() < a.tol;
    let mut result = serde_json::to_value(&r)?;
    result["max_residual"] = json!(r.max_residual());
    Ok(Outcome::new(passed, result)?.with_csv(csv, false))
}

fn maxprinciple(a: &MaxprincipleArgs, seed: u64) -> Result<Outcome> {
    let cal = load_cal(a.cal.as_ref())?;
    let n = cal.n();
    let m = MeshedSubmanifold::new(load_mesh(a.mesh.as_ref(), n)?, &cal, a.flatness_tol)?;
    let f = load_field(required(a.field.as_deref(), "--field")?, n)?;
    let span = lambda_span(&samples(&cal, a.count, seed)?)?;
    let mode = match a.mode {
        MaxModeArg::Bounds => MaxPrincipleMode::Bounds,
        MaxModeArg::Lemma58 => MaxPrincipleMode::Lemma58,
    };
    let r = max_principle_check(&m, &f, &cal, &span, mode, a.tol)?;
    Outcome::new(r.holds, r)
}

fn batch_outcome(rows: Vec<InstanceOutcome>) -> Result<Outcome> {
    let consistent = rows.iter().filter(|r| r.consistent).count();
    let ties = rows.iter().filter(|r| r.tie).count();
    let feasible = rows.iter().filter(|r| r.feasible).count();
    let passed = rows.iter().all(|r| r.consistent || r.tie);
    let mut csv = String::from(InstanceOutcome::csv_header());
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    let result = json!({
        "instances": rows.len(),
        "consistent": consistent,
        "ties": ties,
        "feasible": feasible,
        "outcomes": rows,
    });
    Ok(Outcome::new(passed, result)?.with_csv(csv, true))
}

fn load_sites(path: Option<&Path>, n: usize) -> Result<Vec<Vec<f64>>> {
    let path = required(path, "--sites")?;
    let sites: Vec<Vec<f64>> = read_json(path)?;
    if let Some(bad) = sites.iter().find(|s| s.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: bad.len() });
    }
    Ok(sites)
}

fn duality(a: &DualityArgs, seed: u64) -> Result<Outcome> {
    let cal = load_cal(a.cal.as_ref())?;
    let s = samples(&cal, a.count, seed)?;
    if let Some(count) = a.random {
        return batch_outcome(random_boundary_instances(&cal, &s, count, seed, a.deg, a.sites_per_instance)?);
    }
    let sites = load_sites(a.sites.as_deref(), cal.n())?;
    let functional: BoundaryFunctional = read_json(required(a.boundary.as_deref(), "--boundary")?)?;
    let model = FiniteDualityModel::new(&cal, sites, &s, a.deg)?;
    let data = assemble_boundary_model(&model, &functional)?;
    let r = boundary_alternative(&model, &data, a.lambda)?;
    let mut result = serde_json::to_value(&r)?;
    result["min_mass"] = json!(min_mass(&data)?);
    Outcome::new(r.consistent, result)
}

fn jensen(a: &JensenArgs, seed: u64) -> Result<Outcome> {
    let cal = load_cal(a.cal.as_ref())?;
    let s = samples(&cal, a.count, seed)?;
    if let Some(count) = a.random {
        return batch_outcome(random_jensen_instances(&cal, &s, count, seed, a.deg, a.k_size)?);
    }
    let sites = load_sites(a.sites.as_deref(), cal.n())?;
    let k: Vec<usize> = required(a.k.as_deref(), "--K")?
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| Error::InvalidParameter(format!("bad site index `{t}` in --K"))))
        .collect::<Result<_>>()?;
    let x = *required(a.x.as_ref(), "--x")?;
    let model = FiniteDualityModel::new(&cal, sites, &s, a.deg)?;
    let r = jensen_alternative(&model, &k, x)?;
    let support = support_check(&model, &k, &r, a.support_tol)?;
    let mut result = serde_json::to_value(&r)?;
    result["support"] = serde_json::to_value(&support)?;
    Outcome::new(r.consistent && support.holds, result)
}

fn verify_all(a: &VerifyAllArgs) -> Result<Outcome> {
    let only: Vec<usize> = match &a.only {
        Some(list) => list
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| Error::InvalidParameter(format!("bad criterion `{t}`"))))
            .collect::<Result<_>>()?,
        None => Vec::new(),
    };
    if let Some(bad) = only.iter().find(|&&id| !(1..=verify::CHECKS.len()).contains(&id)) {
        return Err(Error::InvalidParameter(format!("no criterion {bad}")));
    }
    let results = verify::run_all(&only, |r| eprintln!("{}", r.line()));
    let passed = results.iter().all(|r| r.passed);
    Outcome::new(passed, json!({ "checks": results, "passed": results.iter().filter(|r| r.passed).count() }))
}
