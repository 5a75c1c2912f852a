use serde_json::{json, Value};
use treesearch::analytic::{asymptotic_runtime, small_gamma_efficiency, CriticalForm, RootCaseApprox};
use treesearch::centrality::{centrality_report, centrality_table, write_table_csv};
use treesearch::classical::{classical_complexity_class, hitting_times, monte_carlo_hitting_time};
use treesearch::evolution::{linear_grid, sig15};
use treesearch::search::{
    gamma_star_rule, scaling_experiment, sweep_gamma, verification_provenance, FitWindow, GammaPolicy, LevelPolicy,
    ScalingOptions, SweepPolicy,
};
use treesearch::tree::{build_tree, num_sites};
use treesearch::{
    build_full_hamiltonian, evolve_amplitude, reduce_comb, verify_reduction, PeakPolicy, TreeParams,
};

use crate::args::*;
use crate::config::Resolver;
use crate::output::{csv_body, pick, Body, Document};
use crate::Failure;

pub struct Ctx {
    pub format: Option<Format>,
    pub out: bool,
    pub res: Resolver,
}

impl Ctx {
    fn format(&mut self, default: Format) -> Format {
        let f = self.format.unwrap_or(default);
        self.res.record("format", if f == Format::Csv { "csv" } else { "json" });
        f
    }

    fn doc(&self, stem: &str, body: Body) -> Document {
        Document { file_stem: stem.to_string(), config: self.res.echoed.clone(), body }
    }
}

fn to_json<T: serde::Serialize>(x: &T) -> Result<Value, Failure> {
    serde_json::to_value(x).map_err(|e| Failure::new("json", e.to_string()))
}

fn exact_u128(x: u128) -> Value {
    match u64::try_from(x) {
        Ok(v) => json!(v),
        Err(_) => json!(x.to_string()),
    }
}

fn instance(res: &mut Resolver, i: &Instance, default_n: u32) -> Result<TreeParams, Failure> {
    let n = res.get("n", i.n, default_n)?;
    let l = res.get("l", i.l, 1)?;
    let gamma = res.get_with("gamma", i.gamma, || gamma_star_rule(l, n))?;
    Ok(TreeParams::new(n, l, gamma)?)
}

fn peak_policy(res: &mut Resolver, a: &PeakArgs) -> Result<PeakPolicy, Failure> {
    let d = PeakPolicy::default();
    Ok(PeakPolicy {
        threshold: res.get("threshold", a.threshold, d.threshold)?,
        horizon_factor: res.get("horizon-factor", a.horizon_factor, d.horizon_factor)?,
        samples_per_wavelength: res.get("samples-per-wavelength", a.samples_per_wavelength, d.samples_per_wavelength)?,
        max_samples: res.get("max-samples", a.max_samples, d.max_samples)?,
        ..d
    })
}

pub fn reduce(ctx: &mut Ctx, a: &ReduceArgs) -> Result<Vec<Document>, Failure> {
    let p = instance(&mut ctx.res, &a.instance, 3)?;
    let verify = ctx.res.flag("verify", a.verify)?;
    let edges = ctx.res.flag("edges", a.edges)?;
    let format = ctx.format(Format::Json);
    if verify && p.n > 12 {
        return Err(Failure::usage("verification requires n <= 12"));
    }
    if edges && !ctx.out {
        return Err(Failure::usage("--edges writes edges.csv and needs --out"));
    }
    ctx.res.finish()?;

    let red = reduce_comb(p)?;
    let report = if verify {
        let full = build_full_hamiltonian(p, p.marked_site())?;
        Some(verify_reduction(&full, &red.reduction_map()?, &red, 8)?)
    } else {
        None
    };
    let sys = red.to_json();
    let body = pick(
        format,
        || {
            let mut buf = b"i,j,value\n".to_vec();
            for &(i, j, v) in &sys.entries {
                buf.extend_from_slice(format!("{i},{j},{v}\n").as_bytes());
            }
            Ok(Body::Csv(buf))
        },
        || {
            let verification = match &report {
                Some(r) => json!({ "passed": r.passed(), "report": to_json(r)? }),
                None => Value::Null,
            };
            Ok(json!({ "system": to_json(&sys)?, "verification": verification }))
        },
    )?;
    let mut docs = vec![ctx.doc("reduce", body)];
    if edges {
        let tree = build_tree(p.n)?;
        docs.push(ctx.doc("edges", csv_body(|buf| tree.write_edge_csv(buf))?));
    }
    Ok(docs)
}

pub fn evolve(ctx: &mut Ctx, a: &EvolveArgs) -> Result<Vec<Document>, Failure> {
    let p = instance(&mut ctx.res, &a.instance, 10)?;
    let t_max = ctx.res.get_with("t-max", a.t_max, || 4.0 * (p.num_sites() as f64).sqrt())?;
    let samples = ctx.res.get("samples", a.samples, 1001usize)?;
    let approx = ctx.res.optional::<String>("approx", a.approx.map(|f| f.name().to_string()))?;
    let format = ctx.format(Format::Csv);
    ctx.res.finish()?;

    let overlay = match approx.as_deref() {
        None => None,
        Some(_) if p.l != 1 => return Err(Failure::usage("closed-form overlays need a marked root (l = 1)")),
        Some("small-gamma") => Some(RootCaseApprox::small_gamma(p.gamma, p.n)?),
        Some("sine") => Some(RootCaseApprox::critical(p.n, CriticalForm::Sine)?),
        Some("pair") => Some(RootCaseApprox::critical(p.n, CriticalForm::Pair)?),
        Some(other) => return Err(Failure::config(format!("unknown approximation {other}"))),
    };
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(Failure::usage("t-max must be finite and >= 0"));
    }
    let trace = evolve_amplitude(&reduce_comb(p)?, &linear_grid(t_max, samples))?;
    let approx_abs: Option<Vec<f64>> = overlay.map(|o| trace.times.iter().map(|&t| o.eval(t).norm()).collect());

    let body = pick(
        format,
        || match &approx_abs {
            None => csv_body(|buf| trace.write_csv(buf)),
            Some(ap) => {
                let mut buf = b"t,re_amp,im_amp,prob,approx_abs\n".to_vec();
                for ((t, z), x) in trace.times.iter().zip(&trace.amplitudes).zip(ap) {
                    let row = [sig15(*t), sig15(z.re), sig15(z.im), sig15(z.norm_sqr()), sig15(*x)].join(",");
                    buf.extend_from_slice(row.as_bytes());
                    buf.push(b'\n');
                }
                Ok(Body::Csv(buf))
            }
        },
        || {
            Ok(json!({
                "t": trace.times,
                "re_amp": trace.amplitudes.iter().map(|z| z.re).collect::<Vec<_>>(),
                "im_amp": trace.amplitudes.iter().map(|z| z.im).collect::<Vec<_>>(),
                "prob": trace.probabilities(),
                "max_abs_amp": trace.max_probability().sqrt(),
                "approx_abs": approx_abs,
            }))
        },
    )?;
    Ok(vec![ctx.doc("evolve", body)])
}

pub fn sweep(ctx: &mut Ctx, a: &SweepArgs) -> Result<Vec<Document>, Failure> {
    let d = SweepPolicy::default();
    let n = ctx.res.get("n", a.n, 12)?;
    let l = ctx.res.get("l", a.l, 1)?;
    let policy = SweepPolicy {
        gamma_max: ctx.res.get("gamma-max", a.gamma_max, d.gamma_max)?,
        coarse_step: ctx.res.get("coarse-step", a.coarse_step, d.coarse_step)?,
        fine_step: ctx.res.get("fine-step", a.fine_step, d.fine_step)?,
        refine_halfwidth: ctx.res.get("refine-halfwidth", a.refine_halfwidth, d.refine_halfwidth)?,
        peak: peak_policy(&mut ctx.res, &a.peak)?,
    };
    let format = ctx.format(Format::Csv);
    ctx.res.finish()?;

    let sw = sweep_gamma(n, l, &policy)?;
    let body = pick(format, || csv_body(|buf| sw.write_csv(buf)), || to_json(&sw))?;
    Ok(vec![ctx.doc("sweep", body)])
}

fn parse_range(s: &str) -> Result<Vec<u32>, Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums: Vec<u32> = parts
        .iter()
        .map(|p| p.trim().parse::<u32>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::usage(format!("bad depth range {s}; expected start:stop:step")))?;
    match nums[..] {
        [start, stop, step] if step > 0 && start <= stop => Ok((start..=stop).step_by(step as usize).collect()),
        [start, stop] if start <= stop => Ok((start..=stop).collect()),
        _ => Err(Failure::usage(format!("bad depth range {s}; expected start:stop:step"))),
    }
}

fn parse_window(s: &str) -> Result<FitWindow, Failure> {
    match s {
        "all" => Ok(FitWindow::All),
        "upper" => Ok(FitWindow::UpperHalf),
        _ => s
            .strip_prefix("from:")
            .and_then(|v| v.parse().ok())
            .map(FitWindow::From)
            .ok_or_else(|| Failure::usage(format!("bad window {s}; expected all, upper or from:N"))),
    }
}

pub fn scaling(ctx: &mut Ctx, a: &ScalingArgs) -> Result<Vec<Document>, Failure> {
    let range = ctx.res.get("n", a.n.clone(), "8:32:4".to_string())?;
    let sizes = parse_range(&range)?;
    let fixed = ctx.res.optional("l", a.l)?;
    let level = match fixed {
        Some(l) => LevelPolicy::Fixed(l),
        None => LevelPolicy::Proportional(ctx.res.get("l-ratio", a.l_ratio, 0.5)?),
    };
    let gamma = match ctx.res.optional("gamma", a.gamma)? {
        Some(g) => GammaPolicy::Fixed(g),
        None => {
            ctx.res.record("gamma", "rule");
            GammaPolicy::Rule
        }
    };
    let window = parse_window(&ctx.res.get("window", a.window.clone(), "upper".to_string())?)?;
    let verify_n = ctx.res.get("verify-n", a.verify_n, 10)?;
    let options = ScalingOptions { peak: peak_policy(&mut ctx.res, &a.peak)?, window };
    let format = ctx.format(Format::Json);
    ctx.res.finish()?;
    if verify_n > 12 {
        return Err(Failure::usage("verification requires n <= 12"));
    }

    let fit = scaling_experiment(level, &sizes, gamma, &options)?;
    let provenance = if verify_n > 0 { Some(verification_provenance(level, gamma, verify_n)?) } else { None };
    let body = pick(
        format,
        || csv_body(|buf| fit.write_csv(buf)),
        || {
            Ok(json!({
                "beta": fit.beta,
                "beta_stderr": fit.beta_stderr,
                "beta_prediction": fit.beta_prediction,
                "in_sanity_band": fit.in_sanity_band,
                "fit": to_json(&fit)?,
                "provenance": to_json(&provenance)?,
            }))
        },
    )?;
    Ok(vec![ctx.doc("scaling", body)])
}

pub fn classical(ctx: &mut Ctx, a: &ClassicalArgs) -> Result<Vec<Document>, Failure> {
    let n = ctx.res.get("n", a.n, 10)?;
    let walks = ctx.res.get("mc-walks", a.mc_walks, 0)?;
    let mc = if walks > 0 {
        Some((
            ctx.res.get("mc-level", a.mc_level, 2)?,
            ctx.res.get("mc-batches", a.mc_batches, 64)?,
            ctx.res.get("seed", a.seed, 0)?,
        ))
    } else {
        None
    };
    let format = ctx.format(Format::Csv);
    ctx.res.finish()?;

    let h = hitting_times(n)?;
    let report = classical_complexity_class(n)?;
    let estimate = match mc {
        Some((level, batches, seed)) => Some(monte_carlo_hitting_time(n, level, walks, batches, seed)?),
        None => None,
    };
    let body = pick(
        format,
        || csv_body(|buf| h.write_csv(buf)),
        || {
            let exact = h.exact.as_ref().map(|e| {
                json!({
                    "per_level": e.per_level.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
                    "average": e.average.to_string(),
                    "all_integers": e.all_integers(),
                })
            });
            Ok(json!({
                "n": n,
                "per_level": h.per_level,
                "weighted": h.weighted,
                "average": h.average,
                "exact": exact,
                "complexity": to_json(&report)?,
                "monte_carlo": to_json(&estimate)?,
            }))
        },
    )?;
    Ok(vec![ctx.doc("classical", body)])
}

pub fn centrality(ctx: &mut Ctx, a: &CentralityArgs) -> Result<Vec<Document>, Failure> {
    let n = ctx.res.get("n", a.n, 24)?;
    let level = ctx.res.optional("l", a.l)?;
    let format = ctx.format(Format::Csv);
    ctx.res.finish()?;

    let body = match level {
        None => {
            let rows = centrality_table(n)?;
            pick(format, || csv_body(|buf| write_table_csv(&rows, buf)), || to_json(&rows))?
        }
        Some(l) => {
            let r = centrality_report(n, l)?;
            pick(
                format,
                || {
                    let mut buf = b"l,closeness_norm,betweenness_norm,degree,eccentricity\n".to_vec();
                    let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
                    let row = format!(
                        "{l},{},{},{},{}\n",
                        opt(r.closeness.normalized),
                        opt(r.betweenness.normalized),
                        opt(r.degree),
                        r.eccentricity
                    );
                    buf.extend_from_slice(row.as_bytes());
                    Ok(Body::Csv(buf))
                },
                || {
                    Ok(json!({
                        "n": n,
                        "l": l,
                        "distance_sum": exact_u128(r.closeness.distance_sum),
                        "closeness": r.closeness.raw,
                        "closeness_norm": r.closeness.normalized,
                        "betweenness_pairs": exact_u128(r.betweenness.raw),
                        "betweenness_norm": r.betweenness.normalized,
                        "degree": r.degree,
                        "eccentricity": r.eccentricity,
                    }))
                },
            )?
        }
    };
    Ok(vec![ctx.doc("centrality", body)])
}

pub fn analytic(ctx: &mut Ctx, a: &AnalyticArgs) -> Result<Vec<Document>, Failure> {
    let n = ctx.res.get("n", a.n, 15)?;
    let gamma = ctx.res.get("gamma", a.gamma, 1.0)?;
    let default_form = if gamma == 1.0 { "sine" } else { "small-gamma" };
    let form = ctx.res.get("form", a.form.map(|f| f.name().to_string()), default_form.to_string())?;
    let wavelength = 2.0 * std::f64::consts::PI * 2f64.powf((n + 1) as f64 / 2.0);
    let t_max = ctx.res.get("t-max", a.t_max, wavelength)?;
    let samples = ctx.res.get("samples", a.samples, 1001usize)?;
    let format = ctx.format(Format::Csv);
    ctx.res.finish()?;

    let approx = match form.as_str() {
        "small-gamma" => RootCaseApprox::small_gamma(gamma, n)?,
        "sine" | "pair" if gamma != 1.0 => {
            return Err(Failure::usage("the critical forms describe gamma = 1"));
        }
        "sine" => RootCaseApprox::critical(n, CriticalForm::Sine)?,
        "pair" => RootCaseApprox::critical(n, CriticalForm::Pair)?,
        other => return Err(Failure::config(format!("unknown form {other}"))),
    };
    let times = linear_grid(t_max, samples);
    if times.is_empty() {
        return Err(treesearch::Error::EmptyGrid.into());
    }
    let values: Vec<_> = times.iter().map(|&t| approx.eval(t)).collect();
    let big_n = num_sites(n) as f64;
    let body = pick(
        format,
        || {
            let mut buf = b"t,re_amp,im_amp,abs_amp\n".to_vec();
            for (t, z) in times.iter().zip(&values) {
                buf.extend_from_slice([sig15(*t), sig15(z.re), sig15(z.im), sig15(z.norm())].join(",").as_bytes());
                buf.push(b'\n');
            }
            Ok(Body::Csv(buf))
        },
        || {
            Ok(json!({
                "approximation": to_json(&approx)?,
                "asymptotic_runtime": asymptotic_runtime(n).ok(),
                "small_gamma_efficiency": small_gamma_efficiency(gamma, big_n).ok(),
                "t": times,
                "abs_amp": values.iter().map(|z| z.norm()).collect::<Vec<_>>(),
            }))
        },
    )?;
    Ok(vec![ctx.doc("analytic", body)])
}
