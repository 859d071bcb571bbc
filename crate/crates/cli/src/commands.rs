use std::path::{Path, PathBuf};

use bmm_core::amm::{Exponent, Pool};
use bmm_core::sim::{
    run_drs_simulation, run_market_loop, sweep_il, sweep_retention, DrsSimResult,
    MarketLoopResult,
};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::output::{self, companion, render_summary, render_table, Format, Meta, Table};
use crate::{Cli, CliResult, Command, QuoteArgs, OUTPUT_DIR_ENV};

pub fn run(cli: Cli) -> CliResult {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(format) = cli.format {
        config.format = format;
    }

    match &cli.command {
        Command::Quote(args) => quote(args, config.format, cli.out.as_deref()),
        Command::SweepRetention(args) | Command::SweepIl(args) => {
            if let Some(n) = &args.n_values {
                config.sweep.n_values = n.clone();
            }
            if let Some(points) = args.points {
                config.sweep.points = points;
            }
            let config = checked(config)?;
            if matches!(cli.command, Command::SweepRetention(_)) {
                retention(&config, cli.out.as_deref())
            } else {
                il(&config, cli.out.as_deref())
            }
        }
        Command::SimulateDrs(args) => {
            if let Some(days) = args.days {
                config.drs.days = days;
            }
            if let Some(noise) = args.noise_std {
                config.drs.noise_std = noise;
            }
            if let Some(reps) = args.replications {
                config.drs.replications = reps;
            }
            drs(&checked(config)?, cli.out.as_deref())
        }
        Command::MarketLoop(args) => {
            if let Some(epochs) = args.epochs {
                config.market.epochs = epochs;
            }
            if let Some(intensity) = args.intensity {
                config.market.stream.intensity = intensity;
            }
            market(&checked(config)?, cli.out.as_deref())
        }
    }
}

fn checked(config: RunConfig) -> CliResult<RunConfig> {
    let config = config.resolve();
    config.validate()?;
    Ok(config)
}

fn config_json(config: &RunConfig) -> Value {
    serde_json::to_value(config).expect("config serializes")
}

fn primary_path(out: Option<&Path>, name: &str, ext: &str) -> PathBuf {
    match out {
        Some(p) => p.to_owned(),
        None => {
            let dir = std::env::var_os(OUTPUT_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("."));
            dir.join(format!("{name}.{ext}"))
        }
    }
}

fn emit(path: &Path, contents: &str) -> CliResult {
    output::write_file(path, contents)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn quote(args: &QuoteArgs, format: Format, out: Option<&Path>) -> CliResult {
    let pool = Pool::new(args.x, args.y, Exponent::new(args.n)?)?;
    let (side, next, result) = if args.buy_x {
        let (next, r) = pool.swap_y_for_x(args.amount_in, args.fee)?;
        ("buy_x", next, r)
    } else {
        let (next, r) = pool.swap_x_for_y(args.amount_in, args.fee)?;
        ("sell_x", next, r)
    };
    let dx = next.x_reserve() - pool.x_reserve();
    let first_order = pool.slippage_first_order(dx);

    let mut table = Table::new(&[
        "x_reserve",
        "y_reserve",
        "n",
        "side",
        "amount_in",
        "fee_rate",
        "amount_out",
        "fee_paid",
        "price_before",
        "price_after",
        "slippage_exact",
        "slippage_first_order",
    ]);
    table.push(vec![
        args.x.into(),
        args.y.into(),
        args.n.into(),
        side.into(),
        args.amount_in.into(),
        args.fee.into(),
        result.amount_out.into(),
        result.fee_paid.into(),
        result.price_before.into(),
        result.price_after.into(),
        result.slippage_exact.into(),
        first_order.into(),
    ]);
    let meta = Meta {
        command: "quote",
        config: json!({
            "x": args.x, "y": args.y, "n": args.n, "side": side,
            "amount_in": args.amount_in, "fee": args.fee,
        }),
    };
    let text = render_table(&table, &meta, format)?;
    match out {
        Some(path) => emit(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn retention(config: &RunConfig, out: Option<&Path>) -> CliResult {
    let rows = sweep_retention(&config.sweep.grid()?, &config.sweep.exponents()?)?;
    let mut table = Table::new(&["m", "n", "retention_ratio", "depleted_fraction"]);
    for r in rows {
        table.push(vec![r.m.into(), r.n.get().into(), r.retention_ratio.into(), r.depleted_fraction.into()]);
    }
    write_table(config, out, "sweep-retention", "retention", &table)
}

fn il(config: &RunConfig, out: Option<&Path>) -> CliResult {
    let rows = sweep_il(&config.sweep.grid()?, &config.sweep.exponents()?)?;
    let mut table = Table::new(&["m", "n", "il_traditional", "il_scaled", "il_exact", "improvement"]);
    for r in rows {
        table.push(vec![
            r.m.into(),
            r.n.get().into(),
            r.il_traditional.into(),
            r.il_scaled.into(),
            r.il_exact.into(),
            r.improvement.into(),
        ]);
    }
    write_table(config, out, "sweep-il", "il", &table)
}

fn write_table(config: &RunConfig, out: Option<&Path>, command: &str, name: &str, table: &Table) -> CliResult {
    let meta = Meta {
        command,
        config: config_json(config),
    };
    let path = primary_path(out, name, config.format.extension());
    emit(&path, &render_table(table, &meta, config.format)?)
}

fn drs(config: &RunConfig, out: Option<&Path>) -> CliResult {
    let result = run_drs_simulation(&config.drs)?;
    let meta = Meta {
        command: "simulate-drs",
        config: config_json(config),
    };
    let path = primary_path(out, "drs", config.format.extension());
    emit(&path, &render_table(&drs_table(&result), &meta, config.format)?)?;
    emit(&companion(&path, "_summary.json"), &render_summary(&drs_summary(&result), &meta))
}

fn drs_table(result: &DrsSimResult) -> Table {
    let mut table = Table::new(&["day", "static_volume", "dynamic_volume", "rho_applied"]);
    let run = &result.run;
    for day in 0..run.static_series.len() {
        table.push(vec![
            day.into(),
            run.static_series[day].into(),
            run.dynamic_series[day].into(),
            run.rho_applied[day].into(),
        ]);
    }
    table
}

fn drs_summary(result: &DrsSimResult) -> Value {
    json!({
        "days": result.run.static_series.len(),
        "static": result.static_summary,
        "dynamic": result.dynamic_summary,
        "mean_uplift": result.mean_uplift,
        "ensemble": result.ensemble,
    })
}

fn market(config: &RunConfig, out: Option<&Path>) -> CliResult {
    let result = run_market_loop(&config.market, &config.fees)?;
    let meta = Meta {
        command: "market-loop",
        config: config_json(config),
    };
    let path = primary_path(out, "market_loop", "json");
    emit(&path, &render_summary(&market_summary(&result), &meta))?;
    let epochs = companion(&path, &format!("_epochs.{}", config.format.extension()));
    emit(&epochs, &render_table(&epoch_table(&result), &meta, config.format)?)
}

fn market_summary(result: &MarketLoopResult) -> Value {
    let mut regimes = serde_json::Map::new();
    for r in &result.by_regime {
        regimes.insert(
            r.regime.as_str().into(),
            json!({"periods": r.periods, "trades": r.trades, "volume": r.volume, "fees": r.fees}),
        );
    }
    let bucket_sum = result.bucket_sum();
    json!({
        "trades_executed": result.trades_executed,
        "trades_rejected": result.trades_rejected,
        "initial_pool": result.initial_pool,
        "final_pool": result.final_pool,
        "totals": result.totals,
        "conservation": {
            "bucket_sum": bucket_sum,
            "gamma_weighted_volume": result.gamma_weighted_volume,
            "relative_error": relative_gap(bucket_sum, result.gamma_weighted_volume),
        },
        "regime": regimes,
        "sigma_by_period": result.periods.iter().map(|p| p.sigma).collect::<Vec<_>>(),
        "volume_by_period": result.periods.iter().map(|p| p.volume).collect::<Vec<_>>(),
    })
}

fn relative_gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn epoch_table(result: &MarketLoopResult) -> Table {
    let mut table = Table::new(&[
        "epoch",
        "trades",
        "volume",
        "fees",
        "lp",
        "rebate",
        "protocol",
        "reward_pool",
        "distributed",
        "carried_forward",
        "traders_paid",
    ]);
    for e in &result.epochs {
        table.push(vec![
            e.epoch.into(),
            e.trades.into(),
            e.volume.into(),
            e.fees.into(),
            e.lp.into(),
            e.rebate.into(),
            e.protocol.into(),
            e.reward_pool.into(),
            e.distributed.into(),
            e.carried_forward.into(),
            e.traders_paid.into(),
        ]);
    }
    table
}
