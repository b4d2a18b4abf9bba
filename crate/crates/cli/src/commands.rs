use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use evh_core::charge_pump::{
    qv_cycle, vstore_closed_form, Prefactor, PumpSeries, SeriesSource, VstoreVariant,
};
use evh_core::circuit_sim::{
    amplitude_coupling_report, energy_audit, format_float, simulate, voltage_amplitude_correlation,
};
use evh_core::optimizer::{optimize_window, power_surface};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::plot;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::write(&path, content).map_err(io_err(&path))?;
    Ok(path)
}

fn csv_writer(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
    let path = dir.join(name);
    let f = File::create(&path).map_err(io_err(&path))?;
    Ok((path, BufWriter::new(f)))
}

fn prepare(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    write_file(out, "effective_config.txt", &cfg.to_text())?;
    Ok(())
}

/// Per-cycle pump table: `n, v_store_corrected, v_store_as_printed, w_cum, w_cycle`.
///
/// With `c_min = 0` the pump never saturates; the corrected column then comes
/// from the recurrence and the as-printed column is `nan`.
pub fn cmd_pump(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    prepare(cfg, out)?;
    let p = &cfg.pump;
    let saturating = p.c_min > 0.0;
    let source = if saturating {
        SeriesSource::ClosedFormCorrected
    } else {
        SeriesSource::Recurrence
    };
    let series = PumpSeries::build(p, cfg.n_max, source, Prefactor::Exact)?;

    let (path, mut w) = csv_writer(out, "pump.csv")?;
    let mut body = String::from("n,v_store_corrected,v_store_as_printed,w_cum,w_cycle\n");
    for r in &series.entries {
        let printed = if saturating {
            format_float(vstore_closed_form(p, r.n as u32, VstoreVariant::AsPrinted)?)
        } else {
            "nan".to_string()
        };
        let _ = writeln!(
            body,
            "{},{},{},{},{}",
            r.n,
            format_float(r.v_store),
            printed,
            format_float(r.w_cum),
            format_float(r.w_cycle)
        );
    }
    w.write_all(body.as_bytes())
        .and_then(|_| w.flush())
        .map_err(io_err(&path))?;
    write_file(out, "pump.plot", &plot::pump("pump"))?;

    let last = series.entries.last().expect("n_max >= 2");
    let mut msg = format!(
        "cycles = {}\nv_store_final = {}\n",
        cfg.n_max,
        format_float(last.v_store)
    );
    if let Some(n) = series.peak_cycle() {
        let _ = writeln!(msg, "peak_cycle = {n}");
    }
    Ok(msg)
}

/// Power surface `n1, n2, power` and the optimum report.
pub fn cmd_optimize(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let oc = cfg.optimizer_config();
    oc.validate()?;
    prepare(cfg, out)?;
    let grid = power_surface(&oc)?;
    let best = optimize_window(&oc)?;

    let (path, mut w) = csv_writer(out, "optimize.csv")?;
    let mut body = String::from("n1,n2,power\n");
    for pt in &grid {
        let _ = writeln!(body, "{},{},{}", pt.n1, pt.n2, format_float(pt.power));
    }
    w.write_all(body.as_bytes())
        .and_then(|_| w.flush())
        .map_err(io_err(&path))?;
    write_file(
        out,
        "optimize.plot",
        &plot::surface("optimize", best.n1, best.n2),
    )?;

    let report = format!(
        "n1 = {}\nn2 = {}\nv1 = {}\nv2 = {}\npower = {}\nt_cycle = {}\nw_switch = {}\n",
        best.n1,
        best.n2,
        format_float(best.v1),
        format_float(best.v2),
        format_float(best.power),
        format_float(oc.t_cycle),
        format_float(oc.w_switch),
    );
    write_file(out, "optimum.txt", &report)?;
    Ok(report)
}

/// Transient trace, energy audit and amplitude-coupling report.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let sc = cfg.sim_config()?;
    sc.validate()?;
    prepare(cfg, out)?;
    let trace = simulate(&sc)?;

    let (path, mut w) = csv_writer(out, "simulate.csv")?;
    trace
        .write_csv(&mut w)
        .and_then(|_| w.flush())
        .map_err(io_err(&path))?;

    let audit = energy_audit(&trace);
    write_file(out, "audit.txt", &audit.to_string())?;

    let flybacks = trace.flybacks();
    let mut coupling = format!("flybacks = {}\n", flybacks.len());
    for r in amplitude_coupling_report(&trace) {
        let i = r.flyback_index;
        let _ = writeln!(
            coupling,
            "flyback.{i}.amp_before = {}",
            format_float(r.amp_before)
        );
        let _ = writeln!(
            coupling,
            "flyback.{i}.amp_after = {}",
            format_float(r.amp_after)
        );
    }
    let corr = voltage_amplitude_correlation(&trace).map_or("nan".into(), format_float);
    let _ = writeln!(coupling, "rank_correlation_v_store_amplitude = {corr}");
    write_file(out, "coupling.txt", &coupling)?;

    let zoom = flybacks.first().map(|&(on, off)| {
        let pad = sc.flyback_ring_period();
        (on - pad, off + 2.0 * pad)
    });
    write_file(out, "simulate.plot", &plot::simulation("simulate", zoom))?;

    Ok(format!(
        "records = {}\n{coupling}{audit}",
        trace.records.len()
    ))
}

/// QV polygons of the requested cycles plus bounding lines; with `trace`,
/// the simulated `(v_var, q_var)` path is extracted for overlay.
pub fn cmd_qv(
    cfg: &RunConfig,
    cycles: &[usize],
    trace: Option<&Path>,
    out: &Path,
) -> Result<String, CliError> {
    cfg.pump.validate_saturating()?;
    let polys = cycles
        .iter()
        .map(|&n| qv_cycle(&cfg.pump, n))
        .collect::<Result<Vec<_>, _>>()?;
    let overlay = trace.map(extract_qv_path).transpose()?;
    prepare(cfg, out)?;

    let mut body = String::from("cycle,corner,v,q\n");
    let mut v_hi = cfg.pump.v0;
    for poly in &polys {
        // the first vertex is repeated so that the polygon closes when drawn
        let closing = poly.vertices.first().map(|v| (v, "close"));
        let rows = poly
            .vertices
            .iter()
            .map(|v| (v, corner_name(v.corner)))
            .chain(closing);
        for (vx, label) in rows {
            v_hi = v_hi.max(vx.v);
            let _ = writeln!(
                body,
                "{},{},{},{}",
                poly.n,
                label,
                format_float(vx.v),
                format_float(vx.q)
            );
        }
    }
    write_file(out, "qv.csv", &body)?;

    let p = &cfg.pump;
    let v_end = 1.1 * v_hi;
    let mut bounds = String::from("line,v,q\n");
    for (line, q0, q1) in [
        ("c_min", 0.0, p.c_min * v_end),
        ("c_max", 0.0, p.c_max * v_end),
        ("q_top", p.c_max * p.v0, p.c_max * p.v0),
    ] {
        let _ = writeln!(bounds, "{line},{},{}", format_float(0.0), format_float(q0));
        let _ = writeln!(
            bounds,
            "{line},{},{}",
            format_float(v_end),
            format_float(q1)
        );
    }
    write_file(out, "qv_bounds.csv", &bounds)?;

    if let Some(path) = &overlay {
        write_file(out, "qv_trace.csv", path)?;
    }
    write_file(out, "qv.plot", &plot::qv("qv", cycles, trace.is_some()))?;

    let mut msg = String::new();
    for poly in &polys {
        let _ = writeln!(msg, "cycle.{}.vertices = {}", poly.n, poly.vertices.len());
        let _ = writeln!(msg, "cycle.{}.area = {}", poly.n, format_float(poly.area()));
    }
    Ok(msg)
}

fn corner_name(c: evh_core::charge_pump::QvCorner) -> &'static str {
    use evh_core::charge_pump::QvCorner::*;
    match c {
        Start => "start",
        StoreReached => "store_reached",
        TransferEnd => "transfer_end",
        RechargeStart => "recharge_start",
    }
}

fn extract_qv_path(src: &Path) -> Result<String, CliError> {
    let mut rdr = csv::Reader::from_path(src).map_err(|e| trace_err(src, e))?;
    let headers = rdr.headers().map_err(|e| trace_err(src, e))?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            CliError::invalid("trace", format!("{} has no '{name}' column", src.display()))
        })
    };
    let (iv, iq) = (col("v_var")?, col("q_var")?);
    let mut out = String::from("v_var,q_var\n");
    for rec in rdr.records() {
        let rec = rec.map_err(|e| trace_err(src, e))?;
        let _ = writeln!(out, "{},{}", &rec[iv], &rec[iq]);
    }
    Ok(out)
}

fn trace_err(src: &Path, e: csv::Error) -> CliError {
    CliError::invalid("trace", format!("{}: {e}", src.display()))
}
