use crate::cli::{self, Command, Common, LatticeAction, LatticeChoice};
use crate::report::{num, to_value, Csv, Reference, Report};
use holodyn::cxcore::{c, CVector, RVector, SpherePoint, C64};
use holodyn::dynamics::{
    cone_splitting, dbar_defect, dbar_defect_sampled, dichotomy_classify, lyapunov, modulus_scan, unstable_holonomy,
    unstable_point, BackwardFrames,
};
use holodyn::lattices::Lattice;
use holodyn::liecx::accessibility_dimension;
use holodyn::measures::{gibbs_u_estimate, limit_average_check, panel_names, FiberDensity};
use holodyn::zoo::{build, registry_names, SystemDescriptor, SystemKind, SystemPoint};
use holodyn::{Error, Execution, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const NEIGHBOR_TOL: f64 = 1e-13;
const NEIGHBOR_MAX_ITER: usize = 200;

fn execution(common: &Common) -> Execution {
    if common.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn samples(sys: &SystemDescriptor, seed: u64, k: usize) -> Result<Vec<SystemPoint>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k).map(|_| sys.sample_point(&mut rng)).collect()
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::ContractViolation(format!("{name} must be positive, got {x}")))
    }
}

fn params(common: &Common, args: impl serde::Serialize) -> Value {
    let mut v = to_value(args);
    if let (Value::Object(m), Value::Object(c)) = (&mut v, to_value(common)) {
        m.extend(c);
    }
    v
}

/// A point of the local unstable leaf of `x` at distance about `scale`.
fn neighbor(sys: &SystemDescriptor, x: &SystemPoint, scale: f64, rng: &mut ChaCha8Rng) -> Result<SystemPoint> {
    let e = BackwardFrames::new(sys, x, 0)?.unstable().clone();
    let v = &e * RVector::from_fn(e.ncols(), |_, _| scale * rng.gen_range(-1.0..1.0));
    unstable_point(sys, x, &v, NEIGHBOR_TOL, NEIGHBOR_MAX_ITER)
}

/// The point over the base of `p` whose center coordinate is `w`.
fn center_fiber_point(sys: &SystemDescriptor, p: &SystemPoint, w: C64) -> Result<SystemPoint> {
    match &sys.kind {
        SystemKind::BlanchardCalabi(b) => b.center_point(p, 0, w),
        SystemKind::HolomorphicSkewProduct(s) => Ok(s.point(&CVector::from_column_slice(&p.coords[..p.coords.len() - 1]), w)),
        _ => Err(Error::UnsupportedKind { operation: "center fiber points", kind: sys.kind_name().into() }),
    }
}

fn cat_exponent() -> f64 {
    ((3.0 + 5f64.sqrt()) / 2.0).ln()
}

pub fn run(cmd: &Command) -> Result<Report> {
    let common = cmd.common();
    let name = common.system.clone().unwrap_or_else(|| cmd.default_system().to_string());
    let seed = common.seed.unwrap_or(0);
    let exec = execution(common);
    let op = cmd.name();
    if let Command::ReportAll { .. } = cmd {
        return report_all(seed, common.sequential);
    }
    let sys = build(&name)?;
    let report = match cmd {
        Command::Splitting { args, .. } => {
            positive("aperture", args.aperture)?;
            let p = samples(&sys, seed, 1)?.remove(0);
            let est = cone_splitting(&sys, &p, args.n, args.aperture)?;
            let mut csv = Csv::new(&["iteration", "gap"]);
            for (k, g) in est.history.iter().enumerate() {
                csv.push(vec![k.to_string(), num(*g)]);
            }
            let dims = json!({
                "stable": est.stable.ncols(),
                "center": est.center.ncols(),
                "unstable": est.unstable.ncols(),
            });
            Report::new(&name, op, params(common, args), json!({ "point": p, "dims": dims, "bundles": est }))
                .residual("invariance", est.residual)
                .iterations(est.iterations)
                .curve(csv)
        }
        Command::Lyapunov { args, .. } => {
            let p = samples(&sys, seed, 1)?.remove(0);
            let r = lyapunov(&sys, &p, args.n, args.inverse)?;
            let mut report = Report::new(&name, op, params(common, args), &r).iterations(r.iterations);
            if name == "cat2c" {
                let lam = cat_exponent();
                let err = r
                    .unstable
                    .iter()
                    .map(|x| (x - lam).abs())
                    .chain(r.stable.iter().map(|x| (x + lam).abs()))
                    .fold(0.0, f64::max);
                report = report
                    .reference(Reference::new(
                        "largest exponent",
                        lam,
                        r.exponents.first(),
                        "log of the eigenvalue (3+√5)/2 of the cat map, closed form",
                    ))
                    .residual("exponent_error", err);
            }
            report
        }
        Command::Holonomy { args, .. } => {
            positive("tol", args.tol)?;
            positive("scale", args.scale)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = sys.sample_point(&mut rng)?;
            let y = neighbor(&sys, &x, args.scale, &mut rng)?;
            let probe = unstable_holonomy(&sys, &x, &y, args.tol, args.max_iter)?;
            let dbar = probe.map.dbar_norm();
            let mut csv = Csv::new(&["iteration", "increment"]);
            for (k, g) in probe.history.iter().enumerate() {
                csv.push(vec![k.to_string(), num(*g)]);
            }
            let mut report = Report::new(&name, op, params(common, args), &probe)
                .residual("antilinear_norm", dbar)
                .iterations(probe.iterations)
                .curve(csv);
            if sys.is_holomorphic() {
                report = report.reference(Reference::new(
                    "antilinear part",
                    0.0,
                    dbar,
                    "holonomy of a holomorphic map along unstable leaves is complex linear",
                ));
            }
            report
        }
        Command::Dbar { args, .. } => {
            let p = samples(&sys, seed, 1)?.remove(0);
            let x = center_fiber_point(&sys, &p, args.from)?;
            let y = center_fiber_point(&sys, &p, args.to)?;
            let defect = dbar_defect(&sys, &x, &y)?;
            let sampled = args.sampled_step.map(|h| dbar_defect_sampled(&sys, &x, &y, h)).transpose()?;
            let mut report =
                Report::new(&name, op, params(common, args), json!({ "from": x, "to": y, "defect": defect, "sampled": sampled }));
            if let Some(s) = sampled {
                report = report.residual("sampled_minus_closed", (s - defect).abs());
            }
            let unit_step = args.from == c(0.0, 0.0) && args.to == c(1.0, 0.0);
            if matches!(sys.kind, SystemKind::BlanchardCalabi(_)) && unit_step {
                report = report.reference(Reference::new(
                    "defect between the fibers over 0 and 1",
                    1.0,
                    defect,
                    "antilinear block [[0,-1],[1,0]] of the closed-form center holonomy",
                ));
            } else if sys.is_holomorphic() {
                report = report.reference(Reference::new(
                    "defect",
                    0.0,
                    defect,
                    "center holonomy of a holomorphic skew product is a complex translation",
                ));
            }
            report
        }
        Command::Dichotomy { args, .. } => {
            positive("bound", args.bound)?;
            let pts = samples(&sys, seed, args.samples)?;
            let r = dichotomy_classify(&sys, &pts, args.n, args.bound, exec)?;
            let mut csv = Csv::new(&["n", "growth"]);
            for (k, g) in r.growth_curve.iter().enumerate() {
                csv.push(vec![k.to_string(), num(*g)]);
            }
            let expected = match name.as_str() {
                "mobius_loxodromic" => Some((SpherePoint::zero(), "eigenvector of the smaller eigenvalue of diag(2, 1/2)")),
                "mobius_parabolic" => Some((SpherePoint::infinity(), "unique eigenvector of [[1,1],[0,1]]")),
                _ => None,
            };
            let mut report = Report::new(&name, op, params(common, args), &r).iterations(args.n).curve(csv);
            if let (Some((b, source)), Some(found)) = (expected, &r.exceptional_point) {
                report = report
                    .residual("exceptional_point_distance", found.distance(&b))
                    .reference(Reference::new("exceptional point", b, found, source));
            }
            report
        }
        Command::Modscan { args, .. } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = sys.sample_point(&mut rng)?;
            let targets = (0..args.samples)
                .map(|_| center_fiber_point(&sys, &x, c(rng.gen(), rng.gen())))
                .collect::<Result<Vec<_>>>()?;
            let scan = modulus_scan(
                &sys,
                &x,
                &targets,
                &CVector::from_column_slice(&args.v1),
                &CVector::from_column_slice(&args.v2),
            )?;
            let mut csv = Csv::new(&["sample", "tau_re", "tau_im"]);
            for (k, t) in scan.taus.iter().enumerate() {
                csv.push(vec![k.to_string(), num(t.re), num(t.im)]);
            }
            let mut report = Report::new(&name, op, params(common, args), &scan)
                .residual("total_variation", scan.total_variation)
                .curve(csv);
            if matches!(sys.kind, SystemKind::HolomorphicSkewProduct(_)) {
                report = report.reference(Reference::new(
                    "total variation",
                    0.0,
                    scan.total_variation,
                    "center holonomy of a holomorphic skew product is a complex translation",
                ));
            }
            report
        }
        Command::Gibbs { args, .. } => {
            let Some(seed) = common.seed else {
                return Err(Error::ContractViolation("gibbs is stochastic and needs --seed".into()));
            };
            positive("radius", args.radius)?;
            let x = samples(&sys, seed, 1)?.remove(0);
            let est = gibbs_u_estimate(&sys, &x, args.radius, args.n, args.samples, seed, exec)?;
            if let Some(path) = &args.particles {
                std::fs::write(path, est.measure.to_csv())
                    .map_err(|e| Error::ContractViolation(format!("cannot write {}: {e}", path.display())))?;
            }
            let names = panel_names();
            let mut csv = Csv::new(&["integral", "mean", "sigma"]);
            let mut worst = 0.0f64;
            let mut report = Report::new(&name, op, params(common, args), &est).iterations(args.n);
            for (n, e) in names.iter().zip(&est.panel) {
                csv.push(vec![n.clone(), num(e.mean), num(e.sigma)]);
                worst = worst.max(e.mean.abs() / e.sigma);
                report = report.reference(Reference::new(n, 0.0, e.mean, "Haar integral of a nonconstant character"));
            }
            report.residual("max_sigma_ratio", worst).curve(csv)
        }
        Command::Heat { args, .. } => {
            positive("t_max", args.t_max)?;
            let lattice = match args.lattice {
                LatticeChoice::Square => Lattice::planar(c(1.0, 0.0), c(0.0, 1.0))?,
                LatticeChoice::Hexagonal => Lattice::planar(c(1.0, 0.0), c(0.5, 3f64.sqrt() / 2.0))?,
                LatticeChoice::System => match &sys.kind {
                    SystemKind::HolomorphicSkewProduct(s) => s.fiber.clone(),
                    _ => return Err(Error::UnsupportedKind { operation: "heat", kind: sys.kind_name().into() }),
                },
            };
            let [k1, k2] = args.mode[..] else {
                return Err(Error::ContractViolation("mode needs two integers".into()));
            };
            if args.steps < 2 {
                return Err(Error::ContractViolation("need at least two time steps".into()));
            }
            let d = FiberDensity::single_mode(&lattice, args.cutoff, (k1, k2), args.amplitude)?;
            let grid: Vec<f64> = (0..args.steps).map(|i| args.t_max * i as f64 / (args.steps - 1) as f64).collect();
            let r = limit_average_check(&d, &grid)?;
            let mut csv = Csv::new(&["t", "l2_to_mean"]);
            for (t, x) in r.times.iter().zip(&r.distances) {
                csv.push(vec![num(*t), num(*x)]);
            }
            let mut report = Report::new(&name, op, params(common, args), &r);
            if let Some(e) = r.relative_error {
                report = report.residual("relative_rate_error", e);
            }
            report
                .reference(Reference::new(
                    "decay rate",
                    r.predicted_rate,
                    r.fitted_rate,
                    "4π² times the squared length of the shortest nonzero dual vector",
                ))
                .curve(csv)
        }
        Command::Nijenhuis { .. } | Command::Accessibility { .. } => {
            let SystemKind::NilmanifoldAutomorphism(n) = &sys.kind else {
                return Err(Error::UnsupportedKind { operation: op, kind: sys.kind_name().into() });
            };
            let entry = n.entry();
            if let Command::Nijenhuis { .. } = cmd {
                let support = entry.algebra.nijenhuis_support()?;
                let pairs: Vec<Value> = support
                    .iter()
                    .map(|(i, j, v)| json!({ "i": i, "j": j, "value": v.iter().map(|r| r.to_string()).collect::<Vec<_>>() }))
                    .collect();
                Report::new(&name, op, params(common, json!({})), json!({ "vanishes": support.is_empty(), "nonzero": pairs }))
                    .reference(Reference::new(
                        "Nijenhuis tensor vanishes",
                        true,
                        support.is_empty(),
                        "integrable left-invariant complex structure, exact rational arithmetic",
                    ))
            } else {
                let acc = accessibility_dimension(&entry.algebra, &entry.map)?;
                let mut report = Report::new(&name, op, params(common, json!({})), &acc).iterations(acc.rounds);
                let expected = match name.as_str() {
                    "iwasawa" => Some((6, "brackets of the stable and unstable spaces span the algebra")),
                    "h5acc" => Some((5, "the generated subalgebra has real dimension 5")),
                    _ => None,
                };
                if let Some((dim, source)) = expected {
                    report = report.reference(Reference::new("accessibility dimension", dim, acc.dim, source));
                }
                report
            }
        }
        Command::Lattice { action, .. } => lattice(&sys, &name, *action, common)?,
        Command::ReportAll { .. } => unreachable!("handled above"),
    };
    Ok(report.seed(common.seed))
}

fn lattice(sys: &SystemDescriptor, name: &str, action: LatticeAction, common: &Common) -> Result<Report> {
    let op = "lattice";
    let p = params(common, json!({ "action": action }));
    match (&sys.kind, action) {
        (SystemKind::EllipticQuotient(q), LatticeAction::SingularFibers) => {
            let fibers = q.singular_fibers()?;
            let check = q.check()?;
            Ok(Report::new(name, op, p, json!({ "count": fibers.len(), "fibers": fibers, "formula_count": check.formula_count }))
                .reference(Reference::new(
                    "singular fibers",
                    16,
                    fibers.len(),
                    "fixed fibers of the involution: 2-torsion points of the base",
                )))
        }
        (SystemKind::EllipticQuotient(q), LatticeAction::Moduli) => {
            let (generic, singular) = (q.generic_fiber_modulus()?, q.singular_fiber_modulus()?);
            let distinct = (generic.tau - singular.tau).norm() > 1e-9;
            Ok(Report::new(name, op, p, json!({ "generic": generic, "singular": singular, "distinct": distinct })))
        }
        (SystemKind::EllipticQuotient(q), LatticeAction::Check) => Ok(Report::new(name, op, p, q.check()?)),
        (SystemKind::BlanchardCalabi(b), LatticeAction::DetDegree) => {
            let r = b.det_degree();
            Ok(Report::new(name, op, p, json!({ "additive_degree": r.degree, "stated_degree": b.stated_degree(), "kahler": r.kahler })))
        }
        _ => Err(Error::UnsupportedKind { operation: "lattice action", kind: sys.kind_name().into() }),
    }
}

/// Operations run by `report-all` for each registry system, with light
/// parameters.
fn battery(sys: &SystemDescriptor) -> Vec<Vec<&'static str>> {
    let mut out: Vec<Vec<&'static str>> = Vec::new();
    if sys.has_points() {
        out.push(vec!["splitting"]);
        out.push(vec!["lyapunov", "--n", "2000"]);
    }
    match &sys.kind {
        SystemKind::TorusAutomorphism(_) => {
            out.push(vec!["holonomy"]);
            out.push(vec!["gibbs", "--n", "100", "--samples", "512"]);
        }
        SystemKind::HolomorphicSkewProduct(_) => {
            out.push(vec!["holonomy"]);
            out.push(vec!["dbar"]);
            out.push(vec!["dichotomy"]);
            out.push(vec!["modscan"]);
            out.push(vec!["heat"]);
        }
        SystemKind::MobiusFiberSystem(_) => out.push(vec!["dichotomy"]),
        SystemKind::BlanchardCalabi(_) => {
            out.push(vec!["dbar", "--sampled-step", "1e-5"]);
            out.push(vec!["lattice", "det-degree"]);
        }
        SystemKind::NilmanifoldAutomorphism(_) => {
            out.push(vec!["nijenhuis"]);
            out.push(vec!["accessibility"]);
        }
        SystemKind::EllipticQuotient(_) => {
            out.push(vec!["holonomy"]);
            out.push(vec!["dichotomy"]);
            out.push(vec!["lattice", "singular-fibers"]);
            out.push(vec!["lattice", "moduli"]);
        }
    }
    out
}

fn report_all(seed: u64, sequential: bool) -> Result<Report> {
    let mut entries = Vec::new();
    for name in registry_names() {
        let sys = build(name)?;
        for argv in battery(&sys) {
            let seed_s = seed.to_string();
            let mut full: Vec<String> = vec!["holodyn".into()];
            full.extend(argv.iter().map(|s| s.to_string()));
            full.extend(["--system".into(), name.into(), "--seed".into(), seed_s]);
            if sequential {
                full.push("--sequential".into());
            }
            let parsed = cli::parse(full.iter().map(Into::into).collect()).expect("battery arguments parse");
            let entry = match run(&parsed.command) {
                Ok(r) => json!({ "status": "ok", "report": r.to_json() }),
                Err(e) => json!({ "status": "error", "operation": parsed.command.name(), "system": name, "error": e.to_string() }),
            };
            entries.push(entry);
        }
    }
    let failed = entries.iter().filter(|e| e["status"] != "ok").count();
    Ok(Report::new("registry", "report-all", json!({ "seed": seed }), json!({ "runs": entries, "failed": failed }))
        .seed(Some(seed)))
}
