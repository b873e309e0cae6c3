use std::io::Write;

use chaosdeg::estimator::{ecd_pipeline, generate_orbit, EcdResult, Outcome};
use chaosdeg::mapdsl::load_map_file;
use chaosdeg::sweep::default_range;
use chaosdeg::{
    builtin, default_partition, lyapunov_spectrum, run_sweep, Analyses, GridPartition, MapSystem, OrbitConfig,
    RowStatus, SweepConfig,
};

use crate::args::{Command, EcdArgs, LyapunovArgs, MapArgs, OrbitArgs, SweepArgs, WindowArgs};
use crate::output::{emit, fmt_exact, fmt_f64, join_exact, Manifest, Table};
use crate::{CliError, EXIT_DIVERGED, EXIT_OK};

type Result<T> = std::result::Result<T, CliError>;

pub fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Ecd(a) => cmd_ecd(&a, stdout, stderr),
        Command::Lyapunov(a) => cmd_lyapunov(&a, stdout, stderr),
        Command::Sweep(a) => cmd_sweep(&a, stdout),
        Command::Orbit(a) => cmd_orbit(&a, stdout, stderr),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_f64(text: &str, what: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| usage(format!("{what}: `{text}` is not a finite number")))
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',').map(|s| parse_f64(s, what)).collect()
}

struct Setup {
    map: MapSystem,
    params: Vec<f64>,
    manifest: Manifest,
}

fn load_map(args: &MapArgs, command: &str) -> Result<Setup> {
    let mut manifest = Manifest::new(command);
    let map = match (&args.map, &args.map_file) {
        (Some(name), _) => {
            manifest.set("map", name.as_str());
            builtin(name)?
        }
        (None, Some(path)) => {
            manifest.set("map_file", path.display().to_string());
            load_map_file(path)?
        }
        (None, None) => return Err(usage("one of --map or --map-file is required")),
    };
    let mut params = map.default_params().to_vec();
    let mut seen = Vec::new();
    for item in &args.params {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| usage(format!("--param expects K=V, got `{item}`")))?;
        let key = key.trim();
        let slot = map
            .param_index(key)
            .ok_or_else(|| usage(format!("map `{}` has no parameter `{key}`", map.name())))?;
        if seen.contains(&slot) {
            return Err(usage(format!("parameter `{key}` given twice")));
        }
        seen.push(slot);
        params[slot] = parse_f64(value, "--param")?;
    }
    let rendered: Vec<String> = map
        .param_names()
        .iter()
        .zip(&params)
        .map(|(k, v)| format!("{k}={}", fmt_exact(*v)))
        .collect();
    manifest.set("params", rendered.join(","));
    Ok(Setup { map, params, manifest })
}

fn orbit_config(setup: &mut Setup, args: &MapArgs, transient: usize, n: usize) -> Result<OrbitConfig> {
    let x0 = match &args.x0 {
        Some(text) => parse_list(text, "--x0")?,
        None => setup.map.default_x0().to_vec(),
    };
    if x0.len() != setup.map.dimension() {
        return Err(usage(format!(
            "--x0 needs {} value(s) for map `{}`",
            setup.map.dimension(),
            setup.map.name()
        )));
    }
    if n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let mut cfg = OrbitConfig::new(x0, transient, n);
    cfg.escape_radius = args.escape_radius;
    cfg.exact_shift = !args.float_shift;
    cfg.validate(setup.map.dimension())?;
    let m = &mut setup.manifest;
    m.set("x0", join_exact(&cfg.x0));
    m.set("transient", transient.to_string());
    m.set("n", n.to_string());
    m.set("escape_radius", fmt_exact(cfg.escape_radius));
    m.set("exact_shift", cfg.exact_shift.to_string());
    Ok(cfg)
}

fn window_config(setup: &mut Setup, args: &MapArgs, window: &WindowArgs) -> Result<OrbitConfig> {
    orbit_config(setup, args, window.transient, window.n)
}

fn partition(setup: &mut Setup, cells: Option<&str>) -> Result<GridPartition> {
    let map = &setup.map;
    let grid = match cells {
        Some(text) => {
            let counts = text
                .split([',', 'x'])
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| usage(format!("--cells: `{s}` is not a cell count")))
                })
                .collect::<Result<Vec<_>>>()?;
            let counts = if counts.len() == 1 {
                vec![counts[0]; map.dimension()]
            } else {
                counts
            };
            if counts.len() != map.dimension() {
                return Err(usage(format!("--cells needs 1 or {} value(s)", map.dimension())));
            }
            GridPartition::new(map.domain().clone(), counts)?
        }
        None if map.is_builtin() => default_partition(map.name())?,
        None => return Err(usage("--cells is required for maps read from a file")),
    };
    let cells_text: Vec<String> = grid.cells_per_axis().iter().map(|c| c.to_string()).collect();
    setup.manifest.set("cells", cells_text.join("x"));
    setup.manifest.set("domain", grid.domain().to_string());
    Ok(grid)
}

fn param_header(map: &MapSystem) -> Vec<String> {
    map.param_names().to_vec()
}

fn param_fields(params: &[f64]) -> Vec<String> {
    params.iter().map(|v| fmt_f64(*v)).collect()
}

const ECD_COLUMNS: [&str; 4] = ["ecd", "shannon_out", "mutual_info", "occupied_cells"];

fn ecd_fields(r: &EcdResult) -> Vec<String> {
    vec![
        fmt_f64(r.ecd),
        fmt_f64(r.shannon_out),
        fmt_f64(r.mutual_info),
        r.occupied_cells.to_string(),
    ]
}

fn lambda_header(m: usize) -> Vec<String> {
    (1..=m).map(|k| format!("lambda_{k}")).collect()
}

fn cmd_ecd(args: &EcdArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let mut setup = load_map(&args.map, "ecd")?;
    let cfg = window_config(&mut setup, &args.map, &args.window)?;
    let grid = partition(&mut setup, args.cells.as_deref())?;
    setup.manifest.set("log_base", args.log_base.to_string());

    let mut header = param_header(&setup.map);
    header.extend(ECD_COLUMNS.map(String::from));
    header.extend(["overflow_fraction".to_string(), "status".to_string()]);
    let mut table = Table::new(&header)?;
    let mut fields = param_fields(&setup.params);
    let code = match ecd_pipeline(&setup.map, &setup.params, &grid, &cfg, args.log_base)? {
        Outcome::Bounded(r) => {
            fields.extend(ecd_fields(&r));
            fields.push(fmt_f64(r.overflow_fraction));
            fields.push(if r.overflow_fraction > 0.0 { "overflow" } else { "ok" }.into());
            EXIT_OK
        }
        Outcome::Diverged { step } => {
            writeln!(stderr, "orbit diverged at step {step}")?;
            fields.extend(std::iter::repeat_n(String::new(), ECD_COLUMNS.len() + 1));
            fields.push("diverged".into());
            EXIT_DIVERGED
        }
    };
    table.row(&fields)?;
    emit(table, &setup.manifest, args.out.out.as_deref(), stdout)?;
    Ok(code)
}

fn cmd_lyapunov(args: &LyapunovArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let mut setup = load_map(&args.map, "lyapunov")?;
    let cfg = window_config(&mut setup, &args.map, &args.window)?;
    if args.renorm_every == 0 {
        return Err(usage("--renorm-every must be at least 1"));
    }
    setup.manifest.set("renorm_every", args.renorm_every.to_string());

    let m = setup.map.dimension();
    let mut header = param_header(&setup.map);
    header.extend(lambda_header(m));
    header.extend(["numeric_jacobian".to_string(), "status".to_string()]);
    let mut table = Table::new(&header)?;
    let mut fields = param_fields(&setup.params);
    let code = match lyapunov_spectrum(&setup.map, &setup.params, &cfg, args.renorm_every)? {
        Outcome::Bounded(s) => {
            fields.extend(s.exponents.iter().map(|v| fmt_f64(*v)));
            fields.push(s.numeric_jacobian.to_string());
            fields.push("ok".into());
            EXIT_OK
        }
        Outcome::Diverged { step } => {
            writeln!(stderr, "orbit diverged at step {step}")?;
            fields.extend(std::iter::repeat_n(String::new(), m + 1));
            fields.push("diverged".into());
            EXIT_DIVERGED
        }
    };
    table.row(&fields)?;
    emit(table, &setup.manifest, args.out.out.as_deref(), stdout)?;
    Ok(code)
}

fn parse_analyses(text: &str) -> Result<Analyses> {
    let mut a = Analyses {
        ecd: false,
        lyapunov: false,
    };
    for item in text.split(',').map(str::trim) {
        match item {
            "ecd" => a.ecd = true,
            "lyapunov" | "le" => a.lyapunov = true,
            other => return Err(usage(format!("--analyses: unknown analysis `{other}`"))),
        }
    }
    Ok(a)
}

fn parse_range(text: &str) -> Result<(String, f64, f64)> {
    let bad = || usage(format!("--sweep expects K=LO:HI, got `{text}`"));
    let (key, range) = text.split_once('=').ok_or_else(bad)?;
    let (lo, hi) = range.split_once(':').ok_or_else(bad)?;
    Ok((
        key.trim().to_string(),
        parse_f64(lo, "--sweep")?,
        parse_f64(hi, "--sweep")?,
    ))
}

fn cmd_sweep(args: &SweepArgs, stdout: &mut dyn Write) -> Result<i32> {
    let mut setup = load_map(&args.map, "sweep")?;
    let orbit = window_config(&mut setup, &args.map, &args.window)?;
    let grid = partition(&mut setup, args.cells.as_deref())?;
    let analyses = parse_analyses(&args.analyses)?;
    let (param, lo, hi) = match &args.sweep {
        Some(text) => parse_range(text)?,
        None => default_range(setup.map.name())
            .filter(|_| setup.map.is_builtin())
            .map(|(p, lo, hi)| (p.to_string(), lo, hi))
            .ok_or_else(|| usage("--sweep K=LO:HI is required for this map"))?,
    };
    if setup.map.param_index(&param).is_none() {
        return Err(usage(format!("map `{}` has no parameter `{param}`", setup.map.name())));
    }
    if args.points < 2 {
        return Err(usage("--points must be at least 2"));
    }
    if lo >= hi {
        return Err(usage(format!("--sweep range needs LO < HI, got {lo}:{hi}")));
    }
    if args.renorm_every == 0 {
        return Err(usage("--renorm-every must be at least 1"));
    }
    let m = &mut setup.manifest;
    m.set("sweep", format!("{param}={}:{}", fmt_exact(lo), fmt_exact(hi)));
    m.set("points", args.points.to_string());
    m.set("analyses", args.analyses.as_str());
    m.set("log_base", args.log_base.to_string());
    m.set("renorm_every", args.renorm_every.to_string());
    m.set("workers", args.workers.to_string());

    let dim = setup.map.dimension();
    let cfg = SweepConfig {
        map: setup.map.clone(),
        param: param.clone(),
        lo,
        hi,
        points: args.points,
        base_params: setup.params.clone(),
        orbit,
        partition: grid,
        analyses,
        log_base: args.log_base,
        renorm_every: args.renorm_every,
        workers: args.workers,
    };
    let rows = run_sweep(&cfg)?;

    let mut header = vec!["index".to_string(), param];
    if analyses.ecd {
        header.extend(ECD_COLUMNS.map(String::from));
        header.push("overflow_fraction".into());
    }
    if analyses.lyapunov {
        header.extend(lambda_header(dim));
    }
    header.extend(["status".to_string(), "diverged_step".to_string()]);
    let mut table = Table::new(&header)?;
    for row in &rows {
        let mut fields = vec![row.index.to_string(), fmt_f64(row.param_value)];
        if analyses.ecd {
            match &row.ecd {
                Some(r) => {
                    fields.extend(ecd_fields(r));
                    fields.push(fmt_f64(r.overflow_fraction));
                }
                None => fields.extend(std::iter::repeat_n(String::new(), ECD_COLUMNS.len() + 1)),
            }
        }
        if analyses.lyapunov {
            match &row.lyapunov {
                Some(s) => fields.extend(s.exponents.iter().map(|v| fmt_f64(*v))),
                None => fields.extend(std::iter::repeat_n(String::new(), dim)),
            }
        }
        fields.push(row.status.label().into());
        fields.push(match row.status {
            RowStatus::Diverged { step } => step.to_string(),
            _ => String::new(),
        });
        table.row(&fields)?;
    }
    emit(table, &setup.manifest, args.out.out.as_deref(), stdout)?;
    Ok(EXIT_OK)
}

fn cmd_orbit(args: &OrbitArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    if args.from == 0 || args.to < args.from {
        return Err(usage(format!(
            "need 1 <= --from <= --to, got --from {} --to {}",
            args.from, args.to
        )));
    }
    let mut setup = load_map(&args.map, "orbit")?;
    let rows = args.to - args.from + 1;
    let cfg = orbit_config(&mut setup, &args.map, args.from - 1, (rows - 1).max(1))?;
    let grid = partition(&mut setup, args.cells.as_deref())?;
    setup.manifest.set("from", args.from.to_string());
    setup.manifest.set("to", args.to.to_string());

    let m = setup.map.dimension();
    let mut header = vec!["step".to_string()];
    header.extend((1..=m).map(|k| format!("x{k}")));
    header.push("cell".into());
    let mut table = Table::new(&header)?;
    let code = match generate_orbit(&setup.map, &setup.params, &cfg)? {
        Outcome::Bounded(orbit) => {
            for (i, x) in orbit.iter().take(rows).enumerate() {
                let mut fields = vec![(orbit.first_step() + i).to_string()];
                fields.extend(x.iter().map(|v| fmt_f64(*v)));
                fields.push(grid.cell_index(x)?.to_string());
                table.row(&fields)?;
            }
            EXIT_OK
        }
        Outcome::Diverged { step } => {
            writeln!(stderr, "orbit diverged at step {step}")?;
            EXIT_DIVERGED
        }
    };
    emit(table, &setup.manifest, args.out.out.as_deref(), stdout)?;
    Ok(code)
}
