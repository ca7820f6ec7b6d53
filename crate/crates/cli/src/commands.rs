use std::path::Path;

use pullback_core::constsigma::{self, CertificateReport, DecompositionInstance};
use pullback_core::cubic;
use pullback_core::moduli::{self, GfMap, ModuliVector};
use pullback_core::render::{self, Label, Palette, Viewport};
use pullback_core::solver::{self, FixedPointConfig};
use pullback_core::sphere::{self, format_complex, format_set};
use pullback_core::{Complex64, ComplexPoly, MapSpec, RamificationPortrait};

use crate::report::{sci, Report};
use crate::{ConstsigmaCmd, CubicCmd, Failure, GfCmd, PcfCmd, PortraitCmd, RenderArgs, RenderCmd};

type Outcome = Result<Report, Failure>;

fn input(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

fn load_portrait(path: &Path) -> Result<RamificationPortrait, Failure> {
    let p = RamificationPortrait::from_file(path)?;
    p.validate()?;
    Ok(p)
}

fn join_complex(v: &[Complex64]) -> String {
    v.iter().map(|z| format_complex(*z)).collect::<Vec<_>>().join(";")
}

fn positive(name: &str, x: f64) -> Result<(), Failure> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(input(format!("--{name} must be a positive number, got {x}")))
    }
}

pub fn portrait(cmd: PortraitCmd) -> Outcome {
    let PortraitCmd::Validate { portrait } = cmd;
    let p = RamificationPortrait::from_file(&portrait)?;
    let v = p.validate()?;
    let mut r = Report::new("portrait validate");
    for l in v.lines() {
        r.line(l);
    }
    let mult: Vec<String> = v.multiplicities.iter().map(|m| m.to_string()).collect();
    r.line(format!("multiplicities={}", mult.join(",")));
    r.check("portrait is well formed", None, true, "");
    let gf_ok = v.polynomial && v.is_permutation && v.all_critical_periodic && p.finite_count() >= 3;
    r.line(format!("gf_applicable={gf_ok}"));
    r.kv("degree", v.degree);
    r.kv("n", v.n);
    r.kv("ordering", v.ordering.join(","));
    r.kv("gf_applicable", gf_ok);
    Ok(r)
}

pub fn gf(cmd: GfCmd) -> Outcome {
    match cmd {
        GfCmd::Eval(args) => {
            let gf = GfMap::build(&load_portrait(&args.portrait)?)?;
            let coords = sphere::parse_coefficients(&args.point)?;
            if coords.len() != gf.dim() {
                return Err(input(format!(
                    "--point needs {} coordinates, got {}",
                    gf.dim(),
                    coords.len()
                )));
            }
            let a = ModuliVector::new(coords);
            let mut r = Report::new("gf eval");
            r.line(format!("ordering={}", gf.labels().join(",")));
            r.line(format!("a={}", join_complex(a.coords())));
            r.line(format!("F_a={}", join_complex(gf.monic_poly(&a).coeffs())));
            let b = gf.eval(&a);
            r.line(format!("G(a)={}", join_complex(b.coords())));
            let on_delta = a.on_delta();
            r.line(format!("on_delta={on_delta}"));
            match gf.eval_chart(&a) {
                Ok(c) => r.line(format!("g(a)={}", join_complex(c.coords()))),
                Err(e) => r.line(format!("g(a)=undefined ({e})")),
            }
            if args.jacobian {
                let (m, det) = gf.jacobian(&a, moduli::DEFAULT_FD_STEP);
                for i in 0..m.nrows() {
                    let row: Vec<Complex64> = (0..m.ncols()).map(|j| m[(i, j)]).collect();
                    r.line(format!("jac[{i}]={}", join_complex(&row)));
                }
                r.line(format!("det={}", format_complex(det)));
                r.line(format!("J={}", format_complex(gf.closed_form_j(&a))));
            }
            r.kv("dim", gf.dim());
            r.kv("on_delta", on_delta);
            Ok(r)
        }
        GfCmd::JacCheck(args) => {
            if args.samples == 0 {
                return Err(input("--samples must be at least 1"));
            }
            positive("tol", args.tol)?;
            let gf = GfMap::build(&load_portrait(&args.portrait)?)?;
            let chk = moduli::jacobian_identity_check(&gf, args.samples, args.rng_seed);
            let mut r = Report::new("gf jac-check");
            r.line(format!("ordering={}", gf.labels().join(",")));
            r.line(format!("samples={} rng_seed={}", args.samples, args.rng_seed));
            r.line(format!("deg_J={} expected={}", gf.j_degree(), gf.dim() * (gf.degree() - 1)));
            r.line(format!("constant={}", format_complex(chk.constant)));
            r.line(format!("relative_spread={}", sci(chk.relative_spread)));
            r.check(
                "det(Jac G_f)/J is constant",
                Some(args.tol),
                chk.relative_spread < args.tol,
                format!("spread={}", sci(chk.relative_spread)),
            );
            r.check(
                "deg J = (n+1)(d-1)",
                None,
                gf.j_degree() == gf.dim() * (gf.degree() - 1),
                "",
            );
            r.kv("constant", format_complex(chk.constant));
            r.kv("relative_spread", sci(chk.relative_spread));
            Ok(r)
        }
        GfCmd::FixedPoints(args) => {
            if args.seeds == 0 {
                return Err(input("--seeds must be at least 1"));
            }
            positive("tol", args.tol)?;
            let gf = GfMap::build(&load_portrait(&args.portrait)?)?;
            let cfg = FixedPointConfig {
                seeds: args.seeds,
                tol: args.tol,
                rng_seed: args.rng_seed,
                ..FixedPointConfig::default()
            };
            let sweep = solver::newton_fixed_points(&gf, &cfg);
            let mut r = Report::new("gf fixed-points");
            r.line(format!("ordering={}", gf.labels().join(",")));
            r.line(format!(
                "seeds={} converged={} non_converged={}",
                args.seeds, sweep.converged_seeds, sweep.non_converged_seeds
            ));
            for (k, rec) in sweep.records.iter().enumerate() {
                let mut line = format!(
                    "fixed[{k}] a={} residual={} delta_distance={} on_delta={}",
                    join_complex(rec.a.coords()),
                    sci(rec.residual),
                    sci(rec.delta_distance),
                    rec.on_delta
                );
                if let Some(p) = &rec.recovered_poly {
                    line.push_str(&format!(" poly={}", join_complex(p.coeffs())));
                }
                if let Some(c) = &rec.certification {
                    line.push_str(&format!(" certified={} max_deviation={}", c.certified, sci(c.max_deviation)));
                    if let Some(f) = &c.failure {
                        line.push_str(&format!(" failure=\"{f}\""));
                    }
                }
                r.line(line);
            }
            let off: Vec<_> = sweep.off_delta().collect();
            let certified = off.iter().filter(|rec| rec.certified).count();
            r.check(
                "off-diagonal fixed points realise the portrait",
                Some(cfg.certify_tol),
                !off.is_empty() && certified == off.len(),
                format!("{certified}/{} certified", off.len()),
            );
            r.kv("classes", sweep.records.len());
            r.kv("off_delta", off.len());
            r.kv("certified", certified);
            Ok(r)
        }
    }
}

pub fn pcf(cmd: PcfCmd) -> Outcome {
    let PcfCmd::Certify { portrait, poly, tol } = cmd;
    positive("tol", tol)?;
    let p = load_portrait(&portrait)?;
    let poly = ComplexPoly::new(sphere::parse_coefficients(&poly)?);
    if poly.degree_or_zero() != p.degree as usize {
        return Err(input(format!(
            "polynomial has degree {}, portrait has degree {}",
            poly.degree_or_zero(),
            p.degree
        )));
    }
    let cert = solver::certify_pcf(&poly, &p, tol, 64)?;
    let mut r = Report::new("pcf certify");
    r.line(format!("poly={}", join_complex(poly.coeffs())));
    for o in &cert.orbits {
        r.line(format!(
            "critical {} multiplicity={} tail={} period={} max_deviation={}",
            o.critical_point,
            o.multiplicity,
            o.tail,
            o.cycle,
            sci(o.max_deviation)
        ));
    }
    for (label, pt) in &cert.assignment {
        r.line(format!("assign {label} -> {pt}"));
    }
    if let Some(f) = &cert.failure {
        r.line(format!("failure: {f}"));
    }
    r.check(
        "critical orbits realise the portrait",
        Some(tol),
        cert.certified,
        format!("max_deviation={}", sci(cert.max_deviation)),
    );
    r.kv("certified", cert.certified);
    r.kv("max_deviation", sci(cert.max_deviation));
    Ok(r)
}

pub fn cubic(cmd: CubicCmd) -> Outcome {
    match cmd {
        CubicCmd::Verify { samples, rng_seed, tol } => {
            positive("tol", tol)?;
            if samples == 0 {
                return Err(input("--samples must be at least 1"));
            }
            let fam = cubic::verify_family(samples, rng_seed, tol)?;
            let theta = cubic::theta_preimages(1e-10)?;
            let mut r = Report::new("cubic verify");
            r.line(format!(
                "samples={} skipped_near_degenerate={} rng_seed={rng_seed}",
                fam.samples, fam.skipped
            ));
            r.check(
                "critical points {1,w,wbar,alpha^2} with 1 fixed and w <-> wbar",
                Some(tol),
                fam.p1_failures == 0,
                format!("failures={} max_residual={}", fam.p1_failures, sci(fam.p1_max_residual)),
            );
            r.check(
                "F_alpha(alpha^2) = Y(alpha) and A(alpha^2, Y(alpha)) = alpha",
                Some(tol),
                fam.diagram_failures == 0,
                format!(
                    "failures={} critical_value_residual={} recovery_residual={}",
                    fam.diagram_failures,
                    sci(fam.diagram_max_residual),
                    sci(fam.recovery_max_residual)
                ),
            );
            r.check("basepoint alpha=0 gives 3z^2/(2z^3+1)", Some(tol), fam.basepoint.passed, "");
            r.check(
                "alpha=inf chart: critical point at inf with F(inf) = Y(inf) = inf",
                Some(tol),
                fam.infinity.passed,
                format!("deviation={}", sci(fam.infinity.critical_set_deviation)),
            );
            let fmt_pre = |v: &[(Complex64, usize)]| {
                v.iter()
                    .map(|(z, m)| format!("{}^{m}", format_complex(*z)))
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            r.line(format!("X^-1(Theta)={}", fmt_pre(&theta.x_preimages)));
            r.line(format!("Y^-1(Theta)={}", fmt_pre(&theta.y_preimages)));
            let mults = |v: Vec<usize>| v.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(",");
            r.line("theta_prime_order=1,-1,w,-w,wbar,-wbar");
            r.line(format!("x_multiplicities={}", mults(theta.x_multiplicities())));
            r.line(format!("y_multiplicities={}", mults(theta.y_multiplicities())));
            r.check(
                "X^-1(Theta) = Theta'",
                Some(theta.tol),
                theta.x_set_matches(),
                format!("deviation={}", sci(theta.x_deviation)),
            );
            r.check(
                "Y^-1(Theta) = Theta'",
                Some(theta.tol),
                theta.y_set_matches(),
                format!("deviation={}", sci(theta.y_deviation)),
            );
            r.check(
                "critical values of Y are Theta",
                Some(theta.tol),
                theta.y_critical_value_deviation < theta.tol,
                format!("values={}", format_set(&theta.y_critical_values)),
            );
            r.kv("samples", fam.samples);
            r.kv("skipped", fam.skipped);
            r.kv("p1_max_residual", sci(fam.p1_max_residual));
            r.kv("diagram_max_residual", sci(fam.diagram_max_residual.max(fam.recovery_max_residual)));
            r.kv("y_multiplicities", mults(theta.y_multiplicities()));
            Ok(r)
        }
        CubicCmd::LocalDegree { radius } => {
            positive("radius", radius)?;
            let fit = cubic::local_degree_at_basepoint(radius)?;
            let mut r = Report::new("cubic local-degree");
            r.line(format!("radius={radius:e} samples={}", fit.samples));
            r.line(format!("exponent={:.6}", fit.exponent));
            r.line(format!("coefficient={:.6}", fit.coefficient));
            r.line(format!("mean_x_over_y2={}", format_complex(fit.complex_coefficient)));
            r.line(format!("fit_residual={}", sci(fit.fit_residual)));
            r.check(
                "local degree two at the basepoint",
                Some(1e-3),
                (fit.exponent - 2.0).abs() < 1e-3,
                format!("exponent={:.6}", fit.exponent),
            );
            r.check(
                "leading coefficient 1/4",
                Some(1e-3),
                (fit.coefficient - 0.25).abs() < 1e-3,
                format!("coefficient={:.6}", fit.coefficient),
            );
            r.kv("exponent", format!("{:.6}", fit.exponent));
            r.kv("coefficient", format!("{:.6}", fit.coefficient));
            Ok(r)
        }
    }
}

fn parse_example(spec: &str) -> Result<(DecompositionInstance, Option<constsigma::SkinnyDimensions>), Failure> {
    let bad = || input(format!("unknown example `{spec}`; use quartic, family:<n> or skinny:<n>,<k>"));
    if spec == "quartic" {
        return Ok((constsigma::example_quartic(), None));
    }
    if let Some(n) = spec.strip_prefix("family:") {
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        return Ok((constsigma::example_family(n)?, None));
    }
    if let Some(rest) = spec.strip_prefix("skinny:") {
        let (n, k) = rest.split_once(',').ok_or_else(bad)?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        let k: usize = k.trim().parse().map_err(|_| bad())?;
        let (inst, dims) = constsigma::skinny_family(n, k)?;
        return Ok((inst, Some(dims)));
    }
    Err(bad())
}

fn certificate_lines(r: &mut Report, rep: &CertificateReport) {
    r.line(format!("A={}", format_set(&rep.a)));
    r.line(format!("V_s={}", format_set(&rep.v_s)));
    r.line(format!("V_g={}", format_set(&rep.v_g)));
    r.line(format!("g(A)={}", format_set(&rep.g_of_a)));
    r.line(format!("s^-1(A)={}", format_set(&rep.s_inv_a)));
    for c in &rep.inclusions {
        let detail = match &c.offending {
            Some(p) => format!("max_deviation={} offending={p}", sci(c.max_deviation)),
            None => format!("max_deviation={}", sci(c.max_deviation)),
        };
        r.check(c.name, Some(rep.tol), c.passed, detail);
    }
    r.line(format!("B={}", format_set(&rep.b)));
    match &rep.postcritical {
        constsigma::Postcritical::Closed(pf) => r.line(format!("P_f={}", format_set(pf))),
        constsigma::Postcritical::NotClosed { reason, .. } => r.line(format!("P_f=not closed ({reason})")),
    }
    r.check("P_f is finite", None, rep.postcritical.set().is_some(), "");
    for c in &rep.sandwich {
        r.check(c.name, Some(rep.tol), c.passed, format!("max_deviation={}", sci(c.max_deviation)));
    }
    r.line(format!("V_f={}", format_set(&rep.v_f_direct)));
    r.check(
        "V_f = V_g u g(V_s)",
        Some(constsigma::CRITICAL_VALUE_TOL),
        rep.v_f_deviation < constsigma::CRITICAL_VALUE_TOL,
        format!("deviation={}", sci(rep.v_f_deviation)),
    );
    r.check(
        "V_f u f(s^-1(A)) = B",
        Some(constsigma::CRITICAL_VALUE_TOL),
        rep.b_deviation < constsigma::CRITICAL_VALUE_TOL,
        format!("deviation={}", sci(rep.b_deviation)),
    );
    r.line(format!("dimension_bound=|A|-3={}", rep.dimension_bound));
    r.line(rep.verdict());
}

pub fn constsigma(cmd: ConstsigmaCmd) -> Outcome {
    let ConstsigmaCmd::Check { example, custom, tol } = cmd;
    positive("tol", tol)?;
    let (inst, dims) = match (example, custom) {
        (Some(spec), None) => parse_example(&spec)?,
        (None, Some(path)) => (DecompositionInstance::from_file(&path)?, None),
        _ => return Err(input("give exactly one of --example or --custom")),
    };
    let rep = constsigma::check_conditions(&inst, tol)?;
    let mut r = Report::new(&format!("constsigma check {}", inst.name));
    certificate_lines(&mut r, &rep);
    if let Some(d) = &dims {
        r.line(format!(
            "skinny n={} k={} m={} teichmuller_dim={} image_dim={} codimension={}",
            d.n, d.k, d.m, d.teichmuller_dim, d.image_dim, d.codimension
        ));
        let pf_ok = rep
            .postcritical
            .set()
            .is_some_and(|pf| constsigma::equals_a_set(pf, d.n, tol));
        r.check("P_f = A_n", Some(tol), pf_ok, "");
        r.check(
            "s^-1(A_m) = A_n",
            Some(tol),
            constsigma::equals_a_set(&rep.s_inv_a, d.n, tol),
            "",
        );
        r.kv("teichmuller_dim", d.teichmuller_dim);
        r.kv("image_dim", d.image_dim);
        r.kv("codimension", d.codimension);
    }
    r.kv("instance", &inst.name);
    r.kv("card_A", rep.a.len());
    r.kv("card_P_f", rep.postcritical.set().map_or("inf".to_string(), |p| p.len().to_string()));
    r.kv("dimension_bound", rep.dimension_bound);
    r.kv("verdict", rep.verdict());
    Ok(r)
}

fn parse_size(text: &str) -> Result<(usize, usize), Failure> {
    let bad = || input(format!("--size must look like 512x512, got `{text}`"));
    let (w, h) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    let w: usize = w.trim().parse().map_err(|_| bad())?;
    let h: usize = h.trim().parse().map_err(|_| bad())?;
    Ok((w, h))
}

fn parse_viewport(text: &str) -> Result<(Complex64, f64), Failure> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| input(format!("--viewport must be cx,cy,width, got `{text}`")))?;
    match parts.as_slice() {
        [cx, cy, w] => Ok((Complex64::new(*cx, *cy), *w)),
        _ => Err(input(format!("--viewport must be cx,cy,width, got `{text}`"))),
    }
}

pub fn render(cmd: RenderCmd) -> Outcome {
    let RenderCmd::Julia(args) = cmd;
    render_julia(args)
}

fn render_julia(args: RenderArgs) -> Outcome {
    positive("tol", args.tol)?;
    if args.max_iter == 0 || args.max_period == 0 {
        return Err(input("--max-iter and --max-period must be at least 1"));
    }
    let (w, h) = parse_size(&args.size)?;
    let preset = if let Some(name) = args.map.strip_prefix("preset:") {
        Some(render::preset(name).ok_or_else(|| input(format!("unknown preset `{name}`")))?)
    } else {
        None
    };
    let (map, default_view) = match &preset {
        Some(p) => (p.map.clone(), Some((p.center, p.width))),
        None => {
            let path = args
                .map
                .strip_prefix("custom:")
                .ok_or_else(|| input("--map must be preset:<name> or custom:<file>"))?;
            let text = std::fs::read_to_string(path).map_err(|e| input(format!("{path}: {e}")))?;
            (MapSpec::map_from_toml_str(&text)?, None)
        }
    };
    let (center, width) = match (&args.viewport, default_view) {
        (Some(v), _) => parse_viewport(v)?,
        (None, Some(v)) => v,
        (None, None) => (Complex64::new(0.0, 0.0), 4.0),
    };
    let vp = Viewport::new(center, width, w, h)?;
    if map.degree() < 2 {
        return Err(input("map must have degree at least 2"));
    }
    let cycles = render::find_attracting_cycles(&map, args.max_period, 1e-9)?;
    let mut palette = match &preset {
        Some(p) => Palette::by_representative(&cycles, &p.colors, 1e-8)?,
        None => Palette::greyscale(&cycles),
    };
    palette.slow_threshold = args.slow_threshold.or(preset.as_ref().and_then(|p| p.slow_threshold));
    let image = render::render_basins(&map, &cycles, &vp, args.max_iter, args.tol);

    let mut r = Report::new("render julia");
    r.line(format!("map={}", args.map));
    r.line(format!(
        "viewport center={} width={} size={w}x{h} max_iter={} tol={:e}",
        format_complex(center),
        width,
        args.max_iter,
        args.tol
    ));
    for (k, c) in cycles.iter().enumerate() {
        let label = if c.is_infinity() { Label::Escape } else { Label::Attractor(k) };
        r.line(format!(
            "cycle[{k}] points={} multiplier={} pixels={} color={:?}",
            format_set(&c.points),
            format_complex(c.multiplier),
            image.count(label),
            palette.color(label)
        ));
    }
    for (label, mean) in image.mean_iterations() {
        r.line(format!("mean_iterations {label:?}={mean:.2}"));
    }
    let unresolved = image.unresolved_fraction();
    r.line(format!("unresolved_fraction={unresolved:.6}"));
    if let Some(p) = &preset {
        r.check(
            "attracting cycles match the preset",
            Some(1e-8),
            render::cycles_match(&cycles, &p.expected_cycles, 1e-8),
            "",
        );
    }
    r.check(
        "unresolved fraction below 0.5%",
        None,
        unresolved < 0.005,
        format!("{:.4}%", 100.0 * unresolved),
    );
    let snd = render::soundness_check(&map, &image, args.tol, 100, 100);
    r.check(
        "labelled pixels stay near their cycle",
        Some(10.0 * args.tol),
        snd.failures == 0,
        format!("checked={} failures={}", snd.checked, snd.failures),
    );
    if let Some(out) = &args.out {
        render::write_ppm(&image, &palette, out).map_err(|e| input(format!("{}: {e}", out.display())))?;
        r.line(format!("wrote {}", out.display()));
    }
    r.kv("cycles", cycles.len());
    r.kv("unresolved_fraction", format!("{unresolved:.6}"));
    r.kv("attracting_sets", cycles.iter().map(|c| format_set(&c.points)).collect::<Vec<_>>().join(" "));
    Ok(r)
}

