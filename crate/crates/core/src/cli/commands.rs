use crate::asymptotics::{
    capacity_taylor, linear_coefficients, taylor_from_samples, theta_max_taylor, AsymptoticExpansion,
};
use crate::capacity_opt::{capacity_curve, maximize_theta, stochastic_approximation, CapacityPoint, SaConfig};
use crate::constraint::display_word;
use crate::erasure::ErasureProcess;
use crate::error::{Error, Result};
use crate::feedback::{feedback_asymptotics, feedback_capacity, feedback_gain_curve, feedback_taylor};
use crate::markov::{ChainSpec, MarkovInput, RllThetaChain};
use crate::mi_rate::{
    brute_force_h_y, h_y_given_past_exact, mi_rate_finite_n, series_first_order, series_mth_order,
    DEFAULT_K_MAX_M2,
};

use super::config::{CommandConfig, ConstraintSource, InputSpec, MiMethodChoice, QuantityChoice, SaSettings};
use super::output::{Cell, Column, Report};
use super::reproduce;

const DEFAULT_WINDOW: usize = 20;
const DEFAULT_EXACT_N: usize = 10;
const DEFAULT_BRUTE_N: usize = 6;

pub(crate) const GAIN_CAVEAT: &str = "the gap column is descriptive: the first-order capacity only \
     lower-bounds the capacity without feedback, so a positive gap is not by itself a feedback gain; \
     the rigorous comparison is between the linear coefficients";

pub fn execute(cmd: &CommandConfig) -> Result<Report> {
    match cmd {
        CommandConfig::Noiseless { constraint } => noiseless(constraint),
        CommandConfig::Parry { constraint } => parry(constraint),
        CommandConfig::MiRate {
            constraint,
            input,
            erasure,
            method,
            n,
            k_max,
            tol,
        } => {
            let erasure = ErasureProcess::from_spec(erasure)?;
            mi_rate(constraint, input, &erasure, *method, *n, *k_max, *tol)
        }
        CommandConfig::Capacity { eps_grid, tol, sa } => capacity(eps_grid, *tol, sa.as_ref()),
        CommandConfig::Asymptotics {
            order,
            quantity,
            constraint,
        } => asymptotics(*order, *quantity, constraint),
        CommandConfig::Feedback { eps_grid } => feedback(eps_grid),
        CommandConfig::Compare { eps_grid, tol } => compare(eps_grid, *tol),
        CommandConfig::Reproduce { target, tol } => reproduce::run(*target, *tol),
    }
}

fn noiseless(source: &ConstraintSource) -> Result<Report> {
    let g = source.graph()?;
    let perron = g.perron()?;
    let mut r = Report::new(vec![
        Column::plain("constraint"),
        Column::plain("alphabet_size"),
        Column::plain("order"),
        Column::plain("vertices"),
        Column::plain("perron_eigenvalue"),
        Column::info("capacity"),
    ]);
    r.push(vec![
        Cell::Text(source.describe()),
        Cell::Int(g.alphabet_size() as i64),
        Cell::Int(g.order() as i64),
        Cell::Int(g.vertices().len() as i64),
        Cell::Num(perron.eigenvalue),
        Cell::Info(g.noiseless_capacity()?),
    ]);
    Ok(r)
}

fn parry(source: &ConstraintSource) -> Result<Report> {
    let g = source.graph()?;
    let chain = g.parry_chain()?;
    let mut r = Report::new(vec![
        Column::plain("block"),
        Column::plain("stationary"),
        Column::plain("symbol"),
        Column::plain("probability"),
    ]);
    r.summary(Column::info("capacity"), Cell::Info(g.noiseless_capacity()?));
    r.summary(Column::info("entropy_rate"), Cell::Info(chain.step_conditional_entropy()));
    for (u, block) in chain.states().iter().enumerate() {
        for (a, &p) in chain.kernel()[u].iter().enumerate() {
            if p > 0.0 {
                r.push(vec![
                    Cell::Text(display_word(block)),
                    Cell::Num(chain.stationary_distribution()[u]),
                    Cell::Int(a as i64 + 1),
                    Cell::Num(p),
                ]);
            }
        }
    }
    Ok(r)
}

fn load_input(source: &ConstraintSource, input: &InputSpec) -> Result<MarkovInput> {
    let check_support = |chain: MarkovInput| -> Result<MarkovInput> {
        let g = source.graph()?;
        if chain.is_supported_on(&g) {
            Ok(chain)
        } else {
            Err(Error::Precondition(format!(
                "the input chain puts mass outside the constraint {}",
                source.describe()
            )))
        }
    };
    match input {
        InputSpec::Parry => source.graph()?.parry_chain(),
        InputSpec::Uniform => check_support(MarkovInput::uniform(source.load()?.alphabet_size())?),
        InputSpec::Theta(t) => Ok(RllThetaChain::new(*t)?.to_markov()),
        InputSpec::Chain(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let spec: ChainSpec = serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            check_support(MarkovInput::from_spec(&spec)?)
        }
    }
}

fn mi_rate(
    source: &ConstraintSource,
    input: &InputSpec,
    erasure: &ErasureProcess,
    method: MiMethodChoice,
    n: Option<usize>,
    k_max: Option<usize>,
    tol: f64,
) -> Result<Report> {
    let chain = load_input(source, input)?;
    let method = match method {
        MiMethodChoice::Auto if n.is_some() || !erasure.is_iid() => MiMethodChoice::FiniteN,
        MiMethodChoice::Auto if chain.order() == 1 => MiMethodChoice::SeriesFirst,
        MiMethodChoice::Auto => MiMethodChoice::SeriesMth,
        m => m,
    };
    let (quantity, result) = match method {
        MiMethodChoice::FiniteN => (
            "mutual_information",
            mi_rate_finite_n(&chain, erasure, n.unwrap_or(DEFAULT_WINDOW))?,
        ),
        MiMethodChoice::SeriesFirst => ("mutual_information", series_first_order(&chain, erasure, tol)?),
        MiMethodChoice::SeriesMth => (
            "mutual_information",
            series_mth_order(&chain, erasure, k_max.unwrap_or(DEFAULT_K_MAX_M2))?,
        ),
        MiMethodChoice::Exact | MiMethodChoice::Brute => {
            let exact = method == MiMethodChoice::Exact;
            let n = n.unwrap_or(if exact { DEFAULT_EXACT_N } else { DEFAULT_BRUTE_N });
            let value = if exact {
                h_y_given_past_exact(&chain, erasure, n)?
            } else {
                brute_force_h_y(&chain, erasure, n)?
            };
            let method = if exact {
                crate::mi_rate::Method::ExactLemma1
            } else {
                crate::mi_rate::Method::BruteForce
            };
            (
                "output_conditional_entropy",
                crate::mi_rate::MiResult {
                    value,
                    method,
                    truncation: n,
                    tail_bound: 0.0,
                },
            )
        }
        MiMethodChoice::Auto => unreachable!("resolved above"),
    };
    let mut r = Report::new(vec![
        Column::plain("quantity"),
        Column::plain("method"),
        Column::plain("n_or_k"),
        Column::info("value"),
        Column::info("tail_bound"),
    ]);
    r.push(vec![
        Cell::Text(quantity.into()),
        Cell::Text(result.method.to_string()),
        Cell::Int(result.truncation as i64),
        Cell::Info(result.value),
        Cell::Info(result.tail_bound),
    ]);
    if let InputSpec::Theta(_) = input {
        r.note("a θ input always lives on the (1,inf)-RLL constraint; the constraint option is not used");
    }
    Ok(r)
}

pub(crate) fn capacity_report(points: &[CapacityPoint]) -> Report {
    let mut r = Report::new(vec![
        Column::plain("eps"),
        Column::plain("theta_star"),
        Column::info("capacity"),
        Column::plain("method"),
        Column::plain("tol"),
    ]);
    for p in points {
        r.push(vec![
            Cell::Num(p.eps),
            Cell::Num(p.theta_star),
            Cell::Info(p.capacity),
            Cell::Text(p.method.to_string()),
            Cell::Num(p.tol),
        ]);
    }
    r
}

fn capacity(grid: &[f64], tol: f64, sa: Option<&SaSettings>) -> Result<Report> {
    let Some(sa) = sa else {
        return Ok(capacity_report(&capacity_curve(grid, tol)?.points));
    };
    let config = SaConfig {
        steps: sa.steps,
        seed: sa.seed,
        a: sa.a,
        a_scale: sa.a_scale,
        b: sa.b,
        estimator: sa.estimator,
        tol,
        theta0: sa.theta0,
        ..SaConfig::default()
    };
    let points: Vec<CapacityPoint> = grid
        .iter()
        .map(|&e| stochastic_approximation(e, &config).map(|run| run.point))
        .collect::<Result<_>>()?;
    let mut r = capacity_report(&points);
    r.note(format!(
        "step a_n = {}/(1 + n/{}), window exponent b = {}, estimator {:?}, seed {}: \
         engineering defaults, not prescribed by the method",
        sa.a, sa.a_scale, sa.b, sa.estimator, sa.seed
    ));
    Ok(r)
}

/// Taylor coefficients at 0 of a sampled function, for cross-checks.
pub(crate) fn sampled_coefficients<F>(f: F, order: usize) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> Result<f64>,
{
    taylor_from_samples(f, order, 6, 0.01)
}

const ORACLE_MAX_ORDER: usize = 3;

fn expansion_report(exp: &AsymptoticExpansion, oracle: &[f64]) -> Report {
    let capacity = exp.is_capacity();
    let value = |x: f64| if capacity { Cell::Info(x) } else { Cell::Num(x) };
    let col = |name: &str| if capacity { Column::info(name) } else { Column::plain(name) };
    let mut cols = vec![Column::plain("power"), col("coefficient")];
    if capacity {
        cols.push(Column::plain("coefficient_nats"));
    }
    cols.extend([col("fd_oracle"), col("fd_delta")]);
    let mut r = Report::new(cols);
    for (k, &c) in exp.coefficients.iter().enumerate() {
        let mut row = vec![Cell::Int(k as i64), value(c)];
        if capacity {
            row.push(Cell::Num(c));
        }
        match oracle.get(k) {
            Some(&o) => row.extend([value(o), value(c - o)]),
            None => row.extend([Cell::Empty, Cell::Empty]),
        }
        r.push(row);
    }
    r.summary(Column::plain("quantity"), Cell::Text(exp.quantity.to_string()));
    r
}

fn asymptotics(order: usize, quantity: QuantityChoice, source: &ConstraintSource) -> Result<Report> {
    let k = order.min(ORACLE_MAX_ORDER);
    match quantity {
        QuantityChoice::Theta => {
            let exp = theta_max_taylor(order)?;
            let oracle = sampled_coefficients(|e| Ok(maximize_theta(e, 1e-12)?.theta_star), k)?;
            Ok(expansion_report(&exp, &oracle))
        }
        QuantityChoice::C1 => {
            let exp = capacity_taylor(order)?;
            let oracle = sampled_coefficients(|e| Ok(maximize_theta(e, 1e-12)?.capacity), k)?;
            Ok(expansion_report(&exp, &oracle))
        }
        QuantityChoice::Cfb => {
            let exp = feedback_taylor(order)?;
            let oracle = sampled_coefficients(|e| Ok(feedback_capacity(e)?.c_fb), k)?;
            Ok(expansion_report(&exp, &oracle))
        }
        QuantityChoice::Linear => linear(source),
    }
}

fn linear(source: &ConstraintSource) -> Result<Report> {
    let g = source.graph()?;
    let (c0, c1) = linear_coefficients(&g)?;
    let parry = g.parry_chain()?;
    let rate = |eps: f64| -> Result<f64> {
        let e = ErasureProcess::iid(eps)?;
        Ok(if parry.order() == 1 {
            series_first_order(&parry, &e, 1e-15)?.value
        } else {
            series_mth_order(&parry, &e, 10)?.value
        })
    };
    // the Parry input is optimal at ε = 0, so its slope is the capacity slope
    let oracle = taylor_from_samples(rate, 1, 3, 2e-3)?;
    let mut r = Report::new(vec![
        Column::plain("power"),
        Column::info("coefficient"),
        Column::info("fd_oracle"),
        Column::info("fd_delta"),
    ]);
    for (k, c) in [c0, c1].into_iter().enumerate() {
        r.push(vec![
            Cell::Int(k as i64),
            Cell::Info(c),
            Cell::Info(oracle[k]),
            Cell::Info(c - oracle[k]),
        ]);
    }
    r.summary(Column::plain("constraint"), Cell::Text(source.describe()));
    r.summary(Column::plain("order"), Cell::Int(g.order() as i64));
    Ok(r)
}

fn feedback(grid: &[f64]) -> Result<Report> {
    let mut r = Report::new(vec![Column::plain("eps"), Column::plain("p_star"), Column::info("cfb")]);
    let (c0, c1) = feedback_asymptotics();
    r.summary(Column::info("asymptotic_c0"), Cell::Info(c0));
    r.summary(Column::info("asymptotic_c1"), Cell::Info(c1));
    for &e in grid {
        let p = feedback_capacity(e)?;
        r.push(vec![Cell::Num(e), Cell::Num(p.p_star), Cell::Info(p.c_fb)]);
    }
    Ok(r)
}

pub(crate) fn compare(grid: &[f64], tol: f64) -> Result<Report> {
    let mut r = Report::new(vec![
        Column::plain("eps"),
        Column::plain("p_star"),
        Column::info("cfb"),
        Column::info("c1"),
        Column::info("gap"),
    ]);
    let (_, fb1) = feedback_asymptotics();
    let c1 = capacity_taylor(1)?.coefficients[1];
    r.summary(Column::info("linear_coefficient_c1"), Cell::Info(c1));
    r.summary(Column::info("linear_coefficient_cfb"), Cell::Info(fb1));
    r.summary(Column::info("linear_coefficient_difference"), Cell::Info(fb1 - c1));
    for row in feedback_gain_curve(grid, tol)? {
        r.push(vec![
            Cell::Num(row.eps),
            Cell::Num(row.p_star),
            Cell::Info(row.c_fb),
            Cell::Info(row.c1),
            Cell::Info(row.gap),
        ]);
    }
    r.note(GAIN_CAVEAT);
    Ok(r)
}
