use std::fmt;

use anyhow::Result;
use fairrec::closed_form::{two_type_solution, TwoTypeSpec};
use fairrec::io::load_utility_csv;
use fairrec::optimizer::{fairness_prices, price_of_fairness, tradeoff_sweep, TradeoffCurve};
use fairrec::population::{gen_homogeneous, gen_misestimation, gen_two_type};
use fairrec::{
    FairProblem, FairnessMeasure, ItemUtilityModel, TieBreak, TypedPopulation, UtilityMatrix,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{
    config_error, parse_alpha_grid, parse_gamma_grid, GenHomogeneousArgs, GenMisestArgs,
    GenTwoTypeArgs, MisestArgs, PofArgs, PopulationKind, SourceArgs, SweepAlphaArgs,
    TradeoffArgs, ValidateArgs,
};
use crate::output::{num, OutputDir, Provenance};
use crate::svg::{line_chart, Series};

/// A solve that failed or missed its tolerance after results were written.
#[derive(Debug)]
pub struct SolverFailure(pub String);

impl fmt::Display for SolverFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for SolverFailure {}

fn load_source(src: &SourceArgs) -> Result<UtilityMatrix> {
    if let Some(path) = &src.matrix {
        return Ok(load_utility_csv(path)?);
    }
    let values = src
        .values
        .as_ref()
        .ok_or_else(|| config_error("pass --matrix or --values"))?;
    let w = match (src.population, src.alpha) {
        (PopulationKind::TwoType, Some(alpha)) => gen_two_type(values, alpha, src.users)?,
        (PopulationKind::TwoType, None) => {
            return Err(config_error("a two-type population needs --alpha"))
        }
        (PopulationKind::Homogeneous, None) => gen_homogeneous(values, src.users)?,
        (PopulationKind::Homogeneous, Some(_)) => {
            return Err(config_error("--alpha does not apply to a homogeneous population"))
        }
    };
    Ok(w)
}

/// Rows of `w` restricted to random subsets of users and items.
fn subsample(
    w: &UtilityMatrix,
    seed: u64,
    users: Option<usize>,
    items: Option<usize>,
) -> Result<UtilityMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pick = |total: usize, want: Option<usize>, flag: &str| -> Result<Vec<usize>> {
        match want {
            None => Ok((0..total).collect()),
            Some(k) if k == 0 || k > total => Err(config_error(format!(
                "{flag} {k} must be between 1 and {total}"
            ))),
            Some(k) => {
                let mut chosen = rand::seq::index::sample(&mut rng, total, k).into_vec();
                chosen.sort_unstable();
                Ok(chosen)
            }
        }
    };
    let user_idx = pick(w.num_users(), users, "--sample-users")?;
    let item_idx = pick(w.num_items(), items, "--sample-items")?;
    let rows: Vec<Vec<f64>> = user_idx
        .iter()
        .map(|&i| item_idx.iter().map(|&j| w.get(i, j)).collect())
        .collect();
    Ok(UtilityMatrix::from_rows(&rows)?.with_labels(
        user_idx.iter().map(|&i| w.user_label(i)).collect(),
        item_idx.iter().map(|&j| w.item_label(j)).collect(),
    )?)
}

pub fn generate_two_type(args: &GenTwoTypeArgs, command: &str) -> Result<String> {
    let w = gen_two_type(&args.values, args.alpha, args.users)?;
    let mut out = OutputDir::create(&args.out.out, Provenance::new(command, args, vec![])?)?;
    out.matrix("matrix.csv", &w, json!({"users": w.num_users(), "items": w.num_items()}))?;
    out.finish()?;
    Ok(format!("wrote a {}x{} two-type matrix", w.num_users(), w.num_items()))
}

pub fn generate_homogeneous(args: &GenHomogeneousArgs, command: &str) -> Result<String> {
    let w = gen_homogeneous(&args.values, args.users)?;
    let mut out = OutputDir::create(&args.out.out, Provenance::new(command, args, vec![])?)?;
    out.matrix("matrix.csv", &w, json!({"users": w.num_users(), "items": w.num_items()}))?;
    out.finish()?;
    Ok(format!("wrote a {}x{} homogeneous matrix", w.num_users(), w.num_items()))
}

pub fn generate_misest(args: &GenMisestArgs, command: &str) -> Result<String> {
    let pop = gen_misestimation(&args.values, args.beta, args.users, args.seed)?;
    let provenance = Provenance::new(command, args, vec![args.seed])?;
    let mut out = OutputDir::create(&args.out.out, provenance)?;
    let misestimated: Vec<String> = pop.misestimated.iter().map(|&i| pop.truth.user_label(i)).collect();
    out.matrix("truth.csv", &pop.truth, json!({"role": "true utilities"}))?;
    out.matrix(
        "estimate.csv",
        &pop.estimate,
        json!({"role": "estimated utilities", "misestimated_users": misestimated}),
    )?;
    out.finish()?;
    Ok(format!(
        "wrote {} users, {} of them misestimated",
        pop.truth.num_users(),
        pop.misestimated.len()
    ))
}

const CURVE_HEADER: [&str; 7] = [
    "gamma",
    "if_star",
    "if_target",
    "uf_achieved",
    "if_achieved",
    "status",
    "solve_ms",
];

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn curve_rows(curves: &[TradeoffCurve]) -> Vec<Vec<String>> {
    let first = &curves[0];
    if curves.len() == 1 {
        return first
            .rows
            .iter()
            .map(|r| {
                vec![
                    num(r.gamma),
                    num(r.if_star),
                    num(r.if_target),
                    num(r.uf_achieved),
                    num(r.if_achieved),
                    r.status.label(),
                    format!("{:.3}", r.solve_ms),
                ]
            })
            .collect();
    }
    (0..first.rows.len())
        .map(|g| {
            let rows: Vec<_> = curves.iter().map(|c| &c.rows[g]).collect();
            let ok: Vec<_> = rows.iter().filter(|r| r.status.is_ok()).collect();
            let column = |f: fn(&fairrec::optimizer::CurveRow) -> f64| -> Vec<f64> {
                ok.iter().map(|r| f(r)).collect()
            };
            let (if_star, _) = mean_and_stderr(&column(|r| r.if_star));
            let (if_target, _) = mean_and_stderr(&column(|r| r.if_target));
            let (uf, uf_se) = mean_and_stderr(&column(|r| r.uf_achieved));
            let (item, item_se) = mean_and_stderr(&column(|r| r.if_achieved));
            let ms = rows.iter().map(|r| r.solve_ms).sum::<f64>() / rows.len() as f64;
            let status = if ok.len() == rows.len() {
                "ok".to_string()
            } else {
                format!("failed: {} of {} runs", rows.len() - ok.len(), rows.len())
            };
            vec![
                num(rows[0].gamma),
                num(if_star),
                num(if_target),
                num(uf),
                num(item),
                status,
                format!("{ms:.3}"),
                rows.len().to_string(),
                num(uf_se),
                num(item_se),
            ]
        })
        .collect()
}

pub fn tradeoff(args: &TradeoffArgs, command: &str) -> Result<String> {
    let base = load_source(&args.source)?;
    let gammas = parse_gamma_grid(&args.gammas)?;
    let measure = args.solve.measure()?;
    let model = args.solve.item_model()?;
    let tie_break = args.solve.tie_break();
    if args.runs == 0 {
        return Err(config_error("--runs must be at least 1"));
    }
    let sampling = args.sample_users.is_some() || args.sample_items.is_some();
    let seeds: Vec<u64> = (0..args.runs as u64).map(|r| args.seed + r).collect();
    let curves = seeds
        .iter()
        .map(|&seed| {
            let w = if sampling {
                subsample(&base, seed, args.sample_users, args.sample_items)?
            } else {
                base.clone()
            };
            Ok(tradeoff_sweep(&w, &gammas, model, measure, tie_break)?)
        })
        .collect::<Result<Vec<_>>>()?;

    let provenance = Provenance::new(command, args, if sampling { seeds } else { vec![] })?;
    let mut out = OutputDir::create(&args.out.out, provenance)?;
    let mut header = CURVE_HEADER.to_vec();
    if curves.len() > 1 {
        header.extend(["runs", "uf_stderr", "if_stderr"]);
    }
    let rows = curve_rows(&curves);
    out.table("tradeoff.csv", &header, &rows)?;
    if args.svg {
        let parse = |row: &Vec<String>, col: usize| row[col].parse::<f64>().unwrap_or(f64::NAN);
        let series = [
            Series {
                label: "user fairness",
                points: rows.iter().map(|r| (parse(r, 0), parse(r, 3))).collect(),
            },
            Series {
                label: "item fairness",
                points: rows.iter().map(|r| (parse(r, 0), parse(r, 4))).collect(),
            },
        ];
        let title = format!("Tradeoff curve ({})", measure.name());
        out.svg("tradeoff.svg", &line_chart(&title, "gamma", "fairness", &series))?;
    }
    out.finish()?;

    for curve in &curves {
        for problem in curve.check_invariants() {
            eprintln!("warning: {problem}");
        }
    }
    let failed = rows.iter().filter(|r| r[5] != "ok").count();
    if failed > 0 {
        return Err(SolverFailure(format!("{failed} of {} gamma points failed", rows.len())).into());
    }
    Ok(format!("{} gamma points over {} run(s)", rows.len(), curves.len()))
}

pub fn pof(args: &PofArgs, command: &str) -> Result<String> {
    let w = load_source(&args.source)?;
    let measure = args.solve.measure()?;
    let model = args.solve.item_model()?;
    let tie_break = args.solve.tie_break();
    let pof = price_of_fairness(&w, model, measure)?;
    let problem = FairProblem::new(&w, model, measure)?;
    let item = problem.item_optimum()?;
    let free = problem.user_optimum(0.0, &item, tie_break)?;
    let fair = problem.user_optimum(1.0, &item, tie_break)?;

    let mut out = OutputDir::create(&args.out.out, Provenance::new(command, args, vec![])?)?;
    out.table(
        "pof.csv",
        &[
            "measure",
            "delta",
            "users",
            "items",
            "types",
            "if_star",
            "uf_unconstrained",
            "uf_full_fairness",
            "pof",
        ],
        &[vec![
            measure.name().to_string(),
            num(model.delta()),
            w.num_users().to_string(),
            w.num_items().to_string(),
            problem.population().num_types().to_string(),
            num(item.value),
            num(free.value),
            num(fair.value),
            num(pof),
        ]],
    )?;
    out.finish()?;
    Ok(format!("price of fairness {}", num(pof)))
}

pub fn misest(args: &MisestArgs, command: &str) -> Result<String> {
    let (truth, estimate, seeds) = match (&args.matrix, &args.estimate, &args.values) {
        (Some(t), Some(e), _) => (load_utility_csv(t)?, load_utility_csv(e)?, vec![]),
        (None, None, Some(values)) => {
            let beta = args.beta.ok_or_else(|| config_error("--values needs --beta"))?;
            let pop = gen_misestimation(values, beta, args.users, args.seed)?;
            (pop.truth, pop.estimate, vec![args.seed])
        }
        _ => return Err(config_error("pass --matrix with --estimate, or --values with --beta")),
    };
    let gammas = parse_gamma_grid(&args.gammas)?;
    let scope = args.scope.scope();
    let prices = fairness_prices(
        &truth,
        &estimate,
        &gammas,
        args.solve.item_model()?,
        args.solve.measure()?,
        scope,
        args.solve.tie_break(),
    )?;

    let mut out = OutputDir::create(&args.out.out, Provenance::new(command, args, seeds)?)?;
    let rows: Vec<Vec<String>> = prices
        .pom_by_gamma
        .iter()
        .map(|&(g, pom)| vec![num(g), scope.name().to_string(), num(pom), num(prices.pof)])
        .collect();
    out.table("misest.csv", &["gamma", "scope", "pom", "pof"], &rows)?;
    out.finish()?;
    let last = prices.pom_by_gamma.last().expect("nonempty grid");
    Ok(format!(
        "price of misestimation {} at gamma {}",
        num(last.1),
        num(last.0)
    ))
}

/// `(IF*, UF*(1))` on the LP path for exact type masses `(alpha, 1 - alpha)`.
fn lp_two_type(v: &[f64], alpha: f64) -> Result<(f64, f64)> {
    let reversed: Vec<f64> = v.iter().rev().copied().collect();
    let types = UtilityMatrix::from_rows(&[v.to_vec(), reversed])?;
    let population = TypedPopulation::new(types, vec![alpha, 1.0 - alpha])?;
    let problem =
        FairProblem::from_population(population, ItemUtilityModel::SYMMETRIC, FairnessMeasure::MaxMin)?;
    let item = problem.item_optimum()?;
    let fair = problem.user_optimum(1.0, &item, TieBreak::SolverDefault)?;
    Ok((item.value, fair.value))
}

pub fn validate_closed_form(args: &ValidateArgs, command: &str) -> Result<String> {
    let alphas = parse_alpha_grid(&args.alpha)?;
    if !(args.tolerance > 0.0) {
        return Err(config_error("--tolerance must be positive"));
    }
    let mut rows = Vec::with_capacity(alphas.len());
    let (mut if_worst, mut uf_worst) = (0.0f64, 0.0f64);
    for &alpha in &alphas {
        let sol = two_type_solution(&TwoTypeSpec::new(args.values.clone(), alpha)?);
        let (if_lp, uf_lp) = lp_two_type(&args.values, alpha)?;
        let (if_gap, uf_gap) = ((if_lp - sol.if_star).abs(), (uf_lp - sol.uf1).abs());
        if_worst = if_worst.max(if_gap);
        uf_worst = uf_worst.max(uf_gap);
        rows.push(vec![
            num(alpha),
            sol.t.to_string(),
            num(sol.if_star),
            num(if_lp),
            num(if_gap),
            num(sol.uf1),
            num(uf_lp),
            num(uf_gap),
        ]);
    }
    let mut out = OutputDir::create(&args.out.out, Provenance::new(command, args, vec![])?)?;
    out.table(
        "validate.csv",
        &[
            "alpha",
            "pivot",
            "if_analytic",
            "if_lp",
            "if_gap",
            "uf1_analytic",
            "uf1_lp",
            "uf1_gap",
        ],
        &rows,
    )?;
    out.finish()?;
    let summary = format!(
        "max |IF* gap| = {}, max |UF*(1) gap| = {} over {} alpha values",
        num(if_worst),
        num(uf_worst),
        alphas.len()
    );
    if if_worst.max(uf_worst) >= args.tolerance {
        return Err(SolverFailure(format!("{summary}; tolerance {}", num(args.tolerance))).into());
    }
    Ok(summary)
}

pub fn sweep_alpha(args: &SweepAlphaArgs, command: &str) -> Result<String> {
    let alphas = parse_alpha_grid(&args.alpha)?;
    let mut rows = Vec::with_capacity(alphas.len());
    let mut analytic = Vec::new();
    let mut lp = Vec::new();
    for &alpha in &alphas {
        let sol = two_type_solution(&TwoTypeSpec::new(args.values.clone(), alpha)?);
        let mut row = vec![
            num(alpha),
            sol.t.to_string(),
            num(sol.if_star),
            num(sol.uf1),
            num(sol.pof),
        ];
        analytic.push((alpha, sol.pof));
        if args.lp {
            let (_, uf1) = lp_two_type(&args.values, alpha)?;
            row.push(num(1.0 - uf1));
            lp.push((alpha, 1.0 - uf1));
        }
        rows.push(row);
    }
    let mut header = vec!["alpha", "pivot", "if_star", "uf1", "pof"];
    if args.lp {
        header.push("pof_lp");
    }
    let mut out = OutputDir::create(&args.out.out, Provenance::new(command, args, vec![])?)?;
    out.table("sweep_alpha.csv", &header, &rows)?;
    if args.svg {
        let mut series = vec![Series { label: "closed form", points: analytic }];
        if args.lp {
            series.push(Series { label: "LP", points: lp });
        }
        out.svg(
            "sweep_alpha.svg",
            &line_chart("Price of fairness", "alpha", "price of fairness", &series),
        )?;
    }
    out.finish()?;
    Ok(format!("{} alpha values", alphas.len()))
}
