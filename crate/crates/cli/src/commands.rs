//! Subcommand implementations. Every command renders its whole output into a
//! string first, so a failure never leaves a partial CSV on stdout.

use std::fmt::Write as _;
use std::fs;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use num_traits::ToPrimitive;

use wcfg_core::asymptotics::{
    check_conditions, coefficient_tail, collection_envelope, collision_envelope, growth_gamma,
};
use wcfg_core::counting::{exact_counts, weight_spectrum};
use wcfg_core::grammar::{builtin, normalize, parse_grammar_with, NormalizedGrammar, ParseOptions, WeightedGrammar};
use wcfg_core::numeric::decimal::{parse_rational, round_significant};
use wcfg_core::rna::{rna_report, rna_sweep, RnaModel, WeightConvention};
use wcfg_core::sampler::{exact_table, float_table, sample_many};
use wcfg_core::scalar::rational_to_f64;
use wcfg_core::urns::{
    analyze, birthday_exact, coupon_bounds, expected_coverage, expected_distinct, from_spectrum, simulate,
    simulate_words, AnalyticsReport, BirthdayOptions, SimOptions, Statistic, UrnModel,
};
use wcfg_core::BigRational;

use crate::{
    AnalyzeArgs, AsymptoticsArgs, Builtin, Command, CountArgs, FigureArgs, Format, GrammarSource, Level, RnaArgs,
    RnaParams, SampleArgs, SimulateArgs, SpectrumArgs, StatisticName,
};

pub fn run(cmd: &Command) -> Result<String> {
    match cmd {
        Command::Count(a) => cmd_count(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Asymptotics(a) => cmd_asymptotics(a),
        Command::Rna(a) => cmd_rna(a),
        Command::Figure(a) => cmd_figure(a),
    }
}

fn csv_string<I, R>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}"))?)?)
}

fn parse_value(text: &str, digits: u32) -> Result<BigRational> {
    let r = parse_rational(text).ok_or_else(|| anyhow!("invalid number `{text}`"))?;
    Ok(if text.contains('/') {
        r
    } else {
        round_significant(&r, digits)
    })
}

fn rna_model(p: &RnaParams) -> Result<RnaModel> {
    let convention = if p.literal {
        WeightConvention::Literal
    } else {
        WeightConvention::Stabilizing
    };
    let energy = parse_rational(&p.energy).ok_or_else(|| anyhow!("invalid energy `{}`", p.energy))?;
    let rt = parse_rational(&p.rt).ok_or_else(|| anyhow!("invalid RT `{}`", p.rt))?;
    Ok(RnaModel::new(p.theta, energy, rt, convention)?)
}

fn load_grammar(src: &GrammarSource) -> Result<WeightedGrammar> {
    let base = match (&src.grammar, src.builtin) {
        (Some(path), None) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_grammar_with(
                &text,
                ParseOptions {
                    significant_digits: src.digits,
                },
            )
            .with_context(|| format!("in {}", path.display()))?
        }
        (None, Some(Builtin::Motzkin)) => builtin::motzkin_uniform(),
        (None, Some(Builtin::Rna)) => rna_model(&src.rna)?.grammar(),
        _ => bail!("give exactly one of --grammar and --builtin"),
    };
    let mut overrides = Vec::new();
    for spec in &src.weights {
        let (sym, value) = spec
            .rsplit_once('=')
            .ok_or_else(|| anyhow!("weight override `{spec}` is not SYM=VALUE"))?;
        overrides.push((sym, parse_value(value, src.digits)?));
    }
    Ok(base.with_weights(overrides)?)
}

fn prepare(src: &GrammarSource) -> Result<(NormalizedGrammar, Vec<BigRational>)> {
    let g = load_grammar(src)?;
    let w = g.weights();
    Ok((normalize(&g)?, w))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Precision {
    Exact,
    Float,
}

fn parse_precision(text: &str) -> Result<Precision> {
    if text == "exact" {
        return Ok(Precision::Exact);
    }
    let bits: u32 = text
        .strip_prefix("float")
        .and_then(|b| b.parse().ok())
        .ok_or_else(|| anyhow!("precision must be `exact` or `floatBITS`, got `{text}`"))?;
    if !(1..=53).contains(&bits) {
        bail!("float precision is limited to 53 mantissa bits, got {bits}");
    }
    Ok(Precision::Float)
}

fn rational_text(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        r.to_string()
    }
}

fn cmd_count(a: &CountArgs) -> Result<String> {
    let (g, w) = prepare(&a.source)?;
    let values: Vec<String> = match parse_precision(&a.precision)? {
        Precision::Exact => exact_counts(&g, &w, a.n)?.totals().iter().map(rational_text).collect(),
        Precision::Float => float_table(&g, &w, a.n)
            .totals()
            .iter()
            .map(|x| format!("{x:.15}"))
            .collect(),
    };
    match a.output.format {
        Format::Text => Ok(format!("{}\n", values[a.n])),
        Format::Csv => csv_string(
            &["n", "count"],
            values.iter().enumerate().map(|(n, v)| [n.to_string(), v.clone()]),
        ),
    }
}

fn cmd_spectrum(a: &SpectrumArgs) -> Result<String> {
    let (g, w) = prepare(&a.source)?;
    let sp = weight_spectrum(&g, &w, a.n, a.cap)?;
    match a.output.format {
        Format::Csv => csv_string(
            &["weight_num", "weight_den", "multiplicity"],
            sp.classes.iter().map(|c| {
                [
                    c.weight.numer().to_string(),
                    c.weight.denom().to_string(),
                    c.multiplicity.to_string(),
                ]
            }),
        ),
        Format::Text => {
            let rows: Vec<(String, String)> = sp
                .classes
                .iter()
                .map(|c| (rational_text(&c.weight), c.multiplicity.to_string()))
                .collect();
            let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max("weight".len());
            let mut out = format!("{:<width$}  multiplicity\n", "weight");
            for (wt, m) in rows {
                writeln!(out, "{wt:<width$}  {m}")?;
            }
            writeln!(out, "{} classes, {} words", sp.classes.len(), sp.word_count())?;
            Ok(out)
        }
    }
}

fn cmd_sample(a: &SampleArgs) -> Result<String> {
    let (g, w) = prepare(&a.source)?;
    let words = match parse_precision(&a.precision)? {
        Precision::Exact => sample_many(Arc::new(exact_table(&g, &w, a.n)), a.n, a.count, a.seed)?,
        Precision::Float => sample_many(Arc::new(float_table(&g, &w, a.n)), a.n, a.count, a.seed)?,
    };
    let original = g.original();
    let sep = match &a.sep {
        Some(s) => s.clone(),
        None if original.terminals().iter().all(|t| t.name.chars().count() == 1) => String::new(),
        None => " ".to_string(),
    };
    let mut out = String::new();
    for word in words {
        writeln!(out, "{}", original.render_word(&word, &sep))?;
    }
    Ok(out)
}

fn urn_model(g: &NormalizedGrammar, w: &[BigRational], n: usize, cap: usize) -> Result<UrnModel> {
    let sp = weight_spectrum(g, w, n, cap)?;
    from_spectrum(&sp).with_context(|| format!("length {n}"))
}

fn render_report(rep: &AnalyticsReport, format: Format) -> Result<String> {
    match format {
        Format::Text => Ok(rep.to_string()),
        Format::Csv => csv_string(&AnalyticsReport::CSV_HEADER, rep.rows.iter().map(|r| r.csv_record())),
    }
}

fn cmd_analyze(a: &AnalyzeArgs) -> Result<String> {
    let (g, w) = prepare(&a.source)?;
    let u = urn_model(&g, &w, a.n, a.cap)?;
    render_report(&analyze(&u, Some(a.n), a.k)?, a.output.format)
}

fn cmd_simulate(a: &SimulateArgs) -> Result<String> {
    let (g, w) = prepare(&a.source)?;
    let stat = match a.statistic {
        StatisticName::FirstCollision => Statistic::FirstCollision,
        StatisticName::FullCollection => Statistic::FullCollection,
        StatisticName::Distinct => Statistic::Distinct(a.k),
        StatisticName::Coverage => Statistic::Coverage(a.k),
    };
    let opts = SimOptions::new(a.trials, a.seed);
    let u = urn_model(&g, &w, a.n, a.cap)?;
    let r = match a.level {
        Level::Urn => simulate(&u, stat, opts)?,
        Level::Word => {
            let table = Arc::new(exact_table(&g, &w, a.n));
            simulate_words(table, a.n, u.urn_count().to_u64(), stat, opts)?
        }
    };
    let (prediction, method) = match stat {
        Statistic::FirstCollision => (birthday_exact(&u, BirthdayOptions::default())?.value, "exact"),
        Statistic::FullCollection => (coupon_bounds(&u).xi, "estimate"),
        Statistic::Distinct(k) => (expected_distinct(&u, k).expected.value, "exact"),
        Statistic::Coverage(k) => (expected_coverage(&u, k).value, "exact"),
    };
    let k = matches!(stat, Statistic::Distinct(_) | Statistic::Coverage(_)).then_some(a.k);
    match a.output.format {
        Format::Text => Ok(format!(
            "statistic   {:?}\nlevel       {:?}\nn           {}\nmean        {:.10}\nstderr      {:.3e}\ntrials      {}\npredicted   {:.10} ({method})\n",
            a.statistic, a.level, a.n, r.mean, r.stderr, r.trials, prediction
        )),
        Format::Csv => csv_string(
            &["statistic", "n", "k", "trials", "mean", "stderr", "predicted"],
            [[
                format!("{:?}", a.statistic).to_lowercase(),
                a.n.to_string(),
                k.map(|k| k.to_string()).unwrap_or_default(),
                r.trials.to_string(),
                r.mean.to_string(),
                r.stderr.to_string(),
                prediction.to_string(),
            ]],
        ),
    }
}

fn cmd_asymptotics(a: &AsymptoticsArgs) -> Result<String> {
    let (g, w) = prepare(&a.source)?;
    if a.output.format == Format::Csv {
        let tail = coefficient_tail(&g, &w, a.terms);
        return csv_string(
            &["n", "coefficient"],
            tail.iter()
                .enumerate()
                .map(|(n, c)| [n.to_string(), format!("{c:.15}")]),
        );
    }
    let gamma = growth_gamma(&g, &w, a.terms)?;
    let conditions = check_conditions(&g, &w, a.probe, a.terms)?;
    let coll = collision_envelope(&g, &w, a.n, a.terms)?;
    let full = collection_envelope(&g, &w, a.n, a.terms)?;
    let mut out = String::new();
    writeln!(out, "singularity of Pi_W ({} terms)\n{}\n", a.terms, gamma.w)?;
    writeln!(out, "singularity of Pi_W^2\n{}\n", gamma.w2)?;
    writeln!(out, "gamma = sqrt(rho_W^2) / rho_W = {:.9}\n", gamma.gamma)?;
    writeln!(out, "{conditions}")?;
    writeln!(out, "first collision at n={}", a.n)?;
    writeln!(out, "  plug-in      {:.10e}", coll.plug_in)?;
    if let Some(f) = coll.fitted {
        writeln!(out, "  fitted       {f:.10e}")?;
    }
    if coll.disagree {
        writeln!(out, "  the two versions differ by more than 5%")?;
    }
    writeln!(out, "full collection at n={}", a.n)?;
    writeln!(
        out,
        "  bounds       [{:.6}, {:.6}]",
        full.finite_lower, full.finite_upper
    )?;
    writeln!(out, "  asymptotic   [{:.6}, {:.6}]", full.lower, full.upper)?;
    if let Some(x) = full.uniform_exact {
        writeln!(out, "  uniform      {x:.10e}")?;
    }
    Ok(out)
}

fn parse_range(text: &str) -> Result<(usize, usize)> {
    let (a, b) = text
        .split_once("..")
        .ok_or_else(|| anyhow!("range must be n1..n2, got `{text}`"))?;
    let a: usize = a.trim().parse().with_context(|| format!("range start `{a}`"))?;
    let b: usize = b
        .trim()
        .trim_start_matches('=')
        .parse()
        .with_context(|| format!("range end `{b}`"))?;
    if a > b {
        bail!("empty range {text}");
    }
    Ok((a, b))
}

fn cmd_rna(a: &RnaArgs) -> Result<String> {
    let model = rna_model(&a.params)?;
    if let Some(range) = &a.sweep {
        let (lo, hi) = parse_range(range)?;
        let rows = rna_sweep(&model, lo..=hi, a.k)?;
        return csv_string(
            &["n", "k", "expected_distinct", "expected_coverage"],
            rows.iter().map(|r| {
                [
                    r.n.to_string(),
                    r.k.to_string(),
                    r.expected_distinct.to_string(),
                    r.expected_coverage.to_string(),
                ]
            }),
        );
    }
    let rep = rna_report(&model, a.n, a.k)?;
    let mut out = String::new();
    if a.output.format == Format::Text {
        writeln!(
            out,
            "theta={} E={} RT={} w={:.12}",
            model.theta,
            rational_text(&model.energy),
            rational_text(&model.rt),
            rational_to_f64(&model.w)
        )?;
    }
    out.push_str(&render_report(&rep, a.output.format)?);
    Ok(out)
}

/// The four energy models of the coverage figure.
const FIGURE2_PANELS: [(usize, i64); 4] = [(1, -1), (1, -3), (3, -1), (3, -3)];

fn cmd_figure(a: &FigureArgs) -> Result<String> {
    if a.n_min > a.n_max {
        bail!("--n-min exceeds --n-max");
    }
    match a.figure {
        1 => {
            let wt = parse_value(&a.w, 30)?;
            let g = builtin::motzkin(wt);
            let w = g.weights();
            let ng = normalize(&g)?;
            let mut rows = Vec::new();
            for n in a.n_min.max(1)..=a.n_max {
                let u = urn_model(&ng, &w, n, 1 << 20)?;
                let p1 = rational_to_f64(u.min_probability());
                rows.push([n.to_string(), (p1 * coupon_bounds(&u).xi).to_string()]);
            }
            csv_string(&["n", "p1_times_xi"], rows)
        }
        _ => {
            let rt = parse_rational(&a.rt).ok_or_else(|| anyhow!("invalid RT `{}`", a.rt))?;
            let mut rows = Vec::new();
            for (theta, e) in FIGURE2_PANELS {
                let model = RnaModel::new(
                    theta,
                    BigRational::from_integer(e.into()),
                    rt.clone(),
                    WeightConvention::Stabilizing,
                )?;
                for r in rna_sweep(&model, a.n_min.max(1)..=a.n_max, a.k)? {
                    rows.push([
                        theta.to_string(),
                        e.to_string(),
                        r.n.to_string(),
                        r.k.to_string(),
                        r.expected_coverage.to_string(),
                        r.distinct_fraction.to_string(),
                    ]);
                }
            }
            csv_string(&["theta", "energy", "n", "k", "coverage", "distinct_fraction"], rows)
        }
    }
}
