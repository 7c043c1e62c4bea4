//! The subcommands and their effective configurations.

use clap::{Args, ValueEnum};
use gue_expand::covariance::{covariance_clt_limit, cov_trace, g2_expansion, g2_ladder};
use gue_expand::montecarlo::empirical_statistics;
use gue_expand::stats::SlopeFit;
use gue_expand::symbolic::{cjr_table, eta};
use gue_expand::transfer::{alpha_j, expand_expectation, expansion_ladder, expectation};
use gue_expand::validation::{run_suite, suite_ids, SuiteConfig, SUITES};
use gue_expand::{
    parse_complex, parse_input, CovConfig, Error, GueSampler, HermiteEvaluator, Precision, Result, TransferConfig,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::{cval, cvals, fval, fvals, Cell, Report, Table};

fn parse_list(s: &str) -> Result<Vec<usize>> {
    let v = s
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::Parse(format!("expected a comma-separated list of sizes, got {s:?}")))?;
    if v.len() < 2 || v.contains(&0) {
        return Err(Error::Domain(format!("a ladder needs at least two positive sizes, got {s:?}")));
    }
    Ok(v)
}

fn slopes_json(fits: &[SlopeFit]) -> Value {
    Value::Array(
        fits.iter()
            .map(|f| json!({"slope": f.slope.map(fval), "used": f.used, "at_floor": f.at_floor}))
            .collect(),
    )
}

fn slope_text(f: &SlopeFit) -> String {
    match f.slope {
        Some(s) => format!("{s:.4}"),
        None => format!("none ({} at floor)", f.at_floor),
    }
}

fn slope_cell(f: &SlopeFit) -> Cell {
    Cell::Num(f.slope.unwrap_or(f64::NAN))
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DensityArgs {
    /// Matrix size.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = -3.0, allow_negative_numbers = true)]
    pub xmin: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    pub xmax: f64,
    /// Number of equally spaced points, endpoints included.
    #[arg(long, default_value_t = 101)]
    pub points: usize,
}

pub fn density(a: &DensityArgs) -> Result<Report> {
    if a.points == 0 || !(a.xmin.is_finite() && a.xmax.is_finite()) || a.xmin > a.xmax {
        return Err(Error::Domain("need points ≥ 1 and finite xmin ≤ xmax".into()));
    }
    let ev = HermiteEvaluator::new(a.n)?;
    let mut table = Table::new(&["x", "h", "h1", "h2", "h3", "residual"]);
    let mut rows = Vec::with_capacity(a.points);
    let mut worst: f64 = 0.0;
    for i in 0..a.points {
        let x = if a.points == 1 {
            a.xmin
        } else {
            a.xmin + (a.xmax - a.xmin) * i as f64 / (a.points - 1) as f64
        };
        let b = ev.bundle(x);
        let r = b.ode_residual().abs();
        worst = worst.max(r);
        table.push(vec![x.into(), b.h.into(), b.h1.into(), b.h2.into(), b.h3.into(), r.into()]);
        rows.push(json!({"x": x, "h": b.h, "h1": b.h1, "h2": b.h2, "h3": b.h3, "residual": r}));
    }
    Ok(Report {
        command: "density",
        config: json!(a),
        result: json!({"rows": rows, "max_residual": worst}),
        table,
        text: vec![format!("n = {}, {} points, max ODE residual {worst:.3e}", a.n, a.points)],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecisionArg {
    Double,
    Extended,
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::Double => Precision::Double,
            PrecisionArg::Extended => Precision::Extended,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExpandArgs {
    /// Input function: poly:<c0,c1,..>, gauss, cos, sin, expi:<z> or
    /// resolvent:<a+bi>, optionally prefixed by re: or im:.
    #[arg(long)]
    pub g: String,
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    /// Truncation order.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = PrecisionArg::Double)]
    pub precision: PrecisionArg,
    /// Comma-separated sizes; when given, remainders and slopes are
    /// reported over this ladder instead of the single n.
    #[arg(long)]
    pub ladder: Option<String>,
}

pub fn expand(a: &ExpandArgs) -> Result<Report> {
    let g = parse_input(&a.g)?;
    let cfg = TransferConfig::default();
    let iterated: Vec<Value> = (1..=a.k)
        .map(|j| alpha_j(&g, j, &cfg).map(|v| json!({"j": j, "iterated": v.iterated.map(cval), "discrepancy": v.discrepancy().map(fval)})))
        .collect::<Result<_>>()?;
    let mut table = Table::new(&["n", "l", "alpha_re", "alpha_im", "partial_re", "partial_im", "remainder", "floor", "slope"]);
    let mut text = Vec::new();
    let (reports, slopes) = match &a.ladder {
        Some(l) => {
            let ladder = expansion_ladder(&g, &parse_list(l)?, a.k, &cfg, a.precision.into())?;
            (ladder.reports, Some(ladder.slopes))
        }
        None => (vec![expand_expectation(&g, a.n, a.k, &cfg, a.precision.into())?], None),
    };
    let mut out = Vec::new();
    for r in &reports {
        for l in 0..=a.k {
            let slope = slopes.as_ref().map_or(Cell::Num(f64::NAN), |s| slope_cell(&s[l]));
            table.push(vec![
                r.n.into(),
                l.into(),
                r.alphas[l].re.into(),
                r.alphas[l].im.into(),
                r.partial_sums[l].re.into(),
                r.partial_sums[l].im.into(),
                r.remainders[l].into(),
                r.floors[l].into(),
                slope,
            ]);
        }
        text.push(format!("n = {}: exact {}, remainders {:?}", r.n, r.exact, r.remainders));
        out.push(json!({
            "n": r.n,
            "exact": cval(r.exact),
            "partial_sums": cvals(&r.partial_sums),
            "remainders": fvals(&r.remainders),
            "floors": fvals(&r.floors),
        }));
    }
    if let Some(s) = &slopes {
        text.push(format!("slopes: {}", s.iter().map(slope_text).collect::<Vec<_>>().join(", ")));
    }
    Ok(Report {
        command: "expand",
        config: json!(a),
        result: json!({
            "input": g.label(),
            "alphas": cvals(&reports[0].alphas),
            "alpha_cross_check": iterated,
            "reports": out,
            "slopes": slopes.as_deref().map(slopes_json),
        }),
        table,
        text,
    })
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EtaArgs {
    #[arg(long)]
    pub j: usize,
    /// Print exact rational coefficients.
    #[arg(long)]
    pub exact: bool,
    /// Also evaluate at this spectral parameter.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
}

pub fn eta_cmd(a: &EtaArgs) -> Result<Report> {
    let e = eta(a.j);
    let value = a.lambda.as_deref().map(parse_complex).transpose()?.map(|l| e.evaluate(l)).transpose()?;
    let mut table = Table::new(&["r", "coefficient", "exponent"]);
    let mut coeffs = Vec::new();
    if a.j > 0 {
        let t = cjr_table(a.j);
        for ((&r, c), (_, cf)) in t.exact_row(a.j).iter().zip(t.row(a.j)) {
            let exponent = format!("-{}/2", 2 * r + 1);
            let coeff: Cell = if a.exact {
                c.to_string().into()
            } else {
                cf.into()
            };
            table.push(vec![r.into(), coeff, exponent.clone().into()]);
            coeffs.push(if a.exact {
                json!({"r": r, "coefficient": c.to_string(), "exponent": exponent})
            } else {
                json!({"r": r, "coefficient": cf, "exponent": exponent})
            });
        }
    }
    let mut text = vec![format!("η_{} = {e}", a.j)];
    if let Some(v) = value {
        text.push(format!("η_{}({}) = {}", a.j, a.lambda.as_deref().unwrap_or(""), v));
    }
    Ok(Report {
        command: "eta",
        config: json!(a),
        result: json!({
            "j": a.j,
            "expression": e.to_string(),
            "canonical": e.to_canonical(),
            "coefficients": coeffs,
            "value": value.map(cval),
        }),
        table,
        text,
    })
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CovArgs {
    #[arg(long)]
    pub f: String,
    /// Second function; defaults to f.
    #[arg(long)]
    pub g: Option<String>,
    /// Matrix size; omit to compute only the n → ∞ limit.
    #[arg(long)]
    pub n: Option<usize>,
    /// Also compute the n → ∞ limit.
    #[arg(long)]
    pub limit: bool,
}

pub fn cov(a: &CovArgs) -> Result<Report> {
    let f = parse_input(&a.f)?;
    let g = parse_input(a.g.as_deref().unwrap_or(&a.f))?;
    let cfg = CovConfig::default();
    let finite = a.n.map(|n| cov_trace(&f, &g, n, &cfg)).transpose()?;
    let limit = if a.limit || a.n.is_none() {
        Some(covariance_clt_limit(&f, &g, &cfg)?)
    } else {
        None
    };
    let mut table = Table::new(&["n", "cov_re", "cov_im"]);
    let mut text = Vec::new();
    if let (Some(n), Some(v)) = (a.n, finite) {
        table.push(vec![n.into(), v.re.into(), v.im.into()]);
        text.push(format!("Cov(Tr {}, Tr {}) at n = {n}: {v}", f.label(), g.label()));
    }
    if let Some(v) = limit {
        table.push(vec!["inf".into(), v.re.into(), v.im.into()]);
        text.push(format!("limit: {v}"));
    }
    Ok(Report {
        command: "cov",
        config: json!(a),
        result: json!({"f": f.label(), "g": g.label(), "covariance": finite.map(cval), "limit": limit.map(cval)}),
        table,
        text,
    })
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct G2Args {
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: String,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: String,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Sizes over which remainder slopes are fitted.
    #[arg(long, default_value = "8,16,32,64")]
    pub ladder: String,
}

pub fn g2(a: &G2Args) -> Result<Report> {
    let l = parse_complex(&a.lambda)?;
    let m = parse_complex(&a.mu)?;
    let cfg = CovConfig::default();
    let r = g2_expansion(a.n, l, m, a.k, &cfg)?;
    let ladder = g2_ladder(&parse_list(&a.ladder)?, l, m, a.k, &cfg)?;
    let mut table = Table::new(&["l", "coefficient_re", "coefficient_im", "partial_re", "partial_im", "remainder", "floor", "slope"]);
    for i in 0..=a.k {
        table.push(vec![
            i.into(),
            r.coefficients[i].re.into(),
            r.coefficients[i].im.into(),
            r.partial_sums[i].re.into(),
            r.partial_sums[i].im.into(),
            r.remainders[i].into(),
            r.floor.into(),
            slope_cell(&ladder.slopes[i]),
        ]);
    }
    Ok(Report {
        command: "g2",
        config: json!(a),
        result: json!({
            "n": r.n,
            "lambda": cval(l),
            "mu": cval(m),
            "diagonal": r.diagonal,
            "exact": cval(r.exact),
            "coefficients": cvals(&r.coefficients),
            "partial_sums": cvals(&r.partial_sums),
            "remainders": fvals(&r.remainders),
            "floor": r.floor,
            "ladder": ladder.reports.iter().map(|x| json!({"n": x.n, "exact": cval(x.exact), "remainders": fvals(&x.remainders)})).collect::<Vec<_>>(),
            "slopes": slopes_json(&ladder.slopes),
        }),
        table,
        text: vec![
            format!("G_{}({l}, {m}) = {}", r.n, r.exact),
            format!("remainders: {:?}", r.remainders),
            format!("slopes: {}", ladder.slopes.iter().map(slope_text).collect::<Vec<_>>().join(", ")),
        ],
    })
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ValidateArgs {
    /// One of golden, hermite, expansion, covariance, mc, fast, all.
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, default_value_t = SuiteConfig::default().seed)]
    pub seed: u64,
    #[arg(long, default_value_t = SuiteConfig::default().mc_draws)]
    pub mc_draws: usize,
}

/// Runs a suite; the flag is whether every criterion passed.
pub fn validate(a: &ValidateArgs) -> Result<(Report, bool)> {
    let ids = suite_ids(&a.suite)
        .ok_or_else(|| Error::Parse(format!("unknown suite {:?}; expected one of {}", a.suite, SUITES.join(", "))))?;
    let cfg = SuiteConfig {
        seed: a.seed,
        mc_draws: a.mc_draws,
        ..SuiteConfig::default()
    };
    let results = run_suite(&ids, &cfg);
    let ok = results.iter().all(|r| r.passed);
    let mut table = Table::new(&["id", "name", "passed", "seconds", "budget_seconds", "detail"]);
    for r in &results {
        table.push(vec![
            r.id.into(),
            r.name.into(),
            (if r.passed { "true" } else { "false" }).into(),
            r.seconds.into(),
            r.budget_seconds.into(),
            r.detail.clone().into(),
        ]);
    }
    let mut text: Vec<String> = results.iter().map(|r| r.line()).collect();
    text.push(format!("{}/{} passed", results.iter().filter(|r| r.passed).count(), results.len()));
    Ok((
        Report {
            command: "validate",
            config: json!(a),
            result: json!({"passed": ok, "criteria": results}),
            table,
            text,
        },
        ok,
    ))
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct McArgs {
    #[arg(long)]
    pub n: usize,
    /// Real-valued input (use re: or im: for complex catalog entries).
    #[arg(long)]
    pub f: String,
    /// Second function; defaults to f.
    #[arg(long)]
    pub g: Option<String>,
    #[arg(long, default_value_t = 100_000)]
    pub draws: usize,
    /// Jackknife blocks.
    #[arg(long, default_value_t = 100)]
    pub blocks: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Entry variance; defaults to 1/n.
    #[arg(long)]
    pub sigma2: Option<f64>,
}

pub fn mc(a: &McArgs) -> Result<Report> {
    let f = parse_input(&a.f)?;
    let g = parse_input(a.g.as_deref().unwrap_or(&a.f))?;
    let sampler = match a.sigma2 {
        Some(s) => GueSampler::new(a.n, s, a.seed)?,
        None => GueSampler::normalized(a.n, a.seed)?,
    };
    let st = empirical_statistics(&sampler, &f, &g, a.draws, a.blocks)?;
    // Deterministic counterparts exist for the normalised ensemble.
    let reference = if a.sigma2.is_none() {
        let line = gue_expand::LineQuadConfig::default();
        Some(json!({
            "mean_f": fval(expectation(&f, a.n, &line)?.re),
            "mean_g": fval(expectation(&g, a.n, &line)?.re),
            "cov_fg": fval(cov_trace(&f, &g, a.n, &CovConfig::default())?.re),
        }))
    } else {
        None
    };
    let mut table = Table::new(&["quantity", "estimate", "stderr"]);
    table.push(vec!["mean_f".into(), st.mean_f.into(), st.mean_f_se.into()]);
    table.push(vec!["mean_g".into(), st.mean_g.into(), st.mean_g_se.into()]);
    table.push(vec!["cov_fg".into(), st.cov_fg.into(), st.cov_fg_se.into()]);
    let text = vec![
        format!("E tr_n {} = {:.6} ± {:.6}", st.f, st.mean_f, st.mean_f_se),
        format!("E tr_n {} = {:.6} ± {:.6}", st.g, st.mean_g, st.mean_g_se),
        format!("Cov(Tr {}, Tr {}) = {:.6} ± {:.6}", st.f, st.g, st.cov_fg, st.cov_fg_se),
    ];
    Ok(Report {
        command: "mc",
        config: json!(a),
        result: json!({"statistics": st, "reference": reference}),
        table,
        text,
    })
}
