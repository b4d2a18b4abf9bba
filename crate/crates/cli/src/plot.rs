//! Gnuplot scripts for the emitted CSV files. Each script reads the CSV next
//! to it and writes a PNG of the same base name.

const PREAMBLE: &str = "set datafile separator ','\nset terminal pngcairo size 1000,800 noenhanced\nset grid\nset key autotitle columnhead\n";

fn header(title: &str, name: &str) -> String {
    format!("# {title}\n# usage: gnuplot {name}.plot\n{PREAMBLE}set output '{name}.png'\n")
}

/// Stored voltage and per-cycle harvest against the cycle index.
pub fn pump(name: &str) -> String {
    let mut s = header("pump voltages and per-cycle energy", name);
    s.push_str(&format!(
        "set multiplot layout 2,1
set xlabel 'cycle n'
set ylabel 'V_store (V)'
plot '{name}.csv' using 1:2 with lines title 'corrected', \\
     '{name}.csv' using 1:3 with lines dashtype 2 title 'as printed'
set ylabel 'energy per cycle (J)'
plot '{name}.csv' using 1:5 with linespoints pointsize 0.5 title 'w_cycle'
unset multiplot
"
    ));
    s
}

/// Average power over the `(n1, n2)` window grid.
pub fn surface(name: &str, n1: usize, n2: usize) -> String {
    let mut s = header("average power over switching windows", name);
    s.push_str(&format!(
        "set xlabel 'n1'
set ylabel 'n2'
set zlabel 'P (W)'
set view map
set palette rgbformulae 33,13,10
set label 1 'optimum ({n1}, {n2})' at {n1},{n2} point pointtype 7 front
splot '{name}.csv' using 1:2:3 with points pointtype 5 pointsize 0.4 palette notitle
"
    ));
    s
}

/// Time histories in four panels plus a zoom on the first flyback.
pub fn simulation(name: &str, zoom: Option<(f64, f64)>) -> String {
    let mut s = header("coupled transient", name);
    s.push_str(&format!(
        "set multiplot layout 4,1
set xlabel 't (s)'
set ylabel 'x (m)'
plot '{name}.csv' using 't':'x' with lines notitle
set ylabel 'V (V)'
plot '{name}.csv' using 't':'v_store' with lines title 'V_store', \\
     '{name}.csv' using 't':'v_res' with lines title 'V_res'
set ylabel 'Q_var (C)'
plot '{name}.csv' using 't':'q_var' with lines notitle
set ylabel 'F_elec (N)'
plot '{name}.csv' using 't':'f_elec' with lines notitle
unset multiplot
"
    ));
    if let Some((a, b)) = zoom {
        s.push_str(&format!(
            "set output '{name}_flyback.png'
set multiplot layout 2,1
set xrange [{a:e}:{b:e}]
set ylabel 'V (V)'
plot '{name}.csv' using 't':'v_store' with linespoints pointsize 0.5 title 'V_store', \\
     '{name}.csv' using 't':'v_res' with linespoints pointsize 0.5 title 'V_res'
set ylabel 'i_L (A)'
plot '{name}.csv' using 't':'i_l' with linespoints pointsize 0.5 notitle
unset multiplot
"
        ));
    }
    s
}

/// QV polygons with the bounding lines, optionally over a simulated path.
pub fn qv(name: &str, cycles: &[usize], overlay: bool) -> String {
    let mut s = header("QV cycles of the charge pump", name);
    s.push_str("set xlabel 'V (V)'\nset ylabel 'Q (C)'\nplot ");
    let mut parts = vec![format!(
        "'{name}_bounds.csv' using 'v':(strcol('line') eq 'c_min' ? column('q') : NaN) with lines dashtype 2 title 'Q = C_min V'"
    )];
    parts.push(format!(
        "'{name}_bounds.csv' using 'v':(strcol('line') eq 'c_max' ? column('q') : NaN) with lines dashtype 2 title 'Q = C_max V'"
    ));
    parts.push(format!(
        "'{name}_bounds.csv' using 'v':(strcol('line') eq 'q_top' ? column('q') : NaN) with lines dashtype 3 title 'Q = C_max V0'"
    ));
    for c in cycles {
        parts.push(format!(
            "'{name}.csv' using 'v':(column('cycle') == {c} ? column('q') : NaN) with linespoints title 'cycle {c}'"
        ));
    }
    if overlay {
        parts.push(format!(
            "'{name}_trace.csv' using 'v_var':'q_var' with lines lc rgb 'gray' title 'simulated'"
        ));
    }
    s.push_str(&parts.join(", \\\n     "));
    s.push('\n');
    s
}
