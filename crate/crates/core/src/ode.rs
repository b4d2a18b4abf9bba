//! Dormand-Prince 5(4) stepper with its 4th-order continuous extension.
//!
//! The stepper only advances one accepted step at a time; event detection and
//! topology switching live in the caller, which inspects the dense output of
//! each step before committing to it.

/// Absolute/relative error weights for an `N`-dimensional state.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances<const N: usize> {
    pub rel: f64,
    pub abs: [f64; N],
}

impl<const N: usize> Tolerances<N> {
    pub fn uniform(rel: f64, abs: f64) -> Self {
        Self { rel, abs: [abs; N] }
    }

    fn norm(&self, y0: &[f64; N], y1: &[f64; N], err: &[f64; N]) -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            let sc = self.abs[i] + self.rel * y0[i].abs().max(y1[i].abs());
            let e = err[i] / sc;
            acc += e * e;
        }
        (acc / N as f64).sqrt()
    }
}

/// An accepted step together with what is needed to interpolate inside it.
#[derive(Debug, Clone)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    rcont: [[f64; N]; 4],
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// State at `t` in `[t0, t0 + h]`.
    pub fn at(&self, t: f64) -> [f64; N] {
        if t >= self.t1() {
            return self.y1;
        }
        let th = ((t - self.t0) / self.h).clamp(0.0, 1.0);
        let th1 = 1.0 - th;
        let [r2, r3, r4, r5] = &self.rcont;
        let mut y = [0.0; N];
        for i in 0..N {
            y[i] = self.y0[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
        }
        y
    }
}

/// Outcome of [`Dopri5::advance`].
#[derive(Debug, Clone)]
pub struct Advance<const N: usize> {
    pub step: DenseStep<N>,
    /// Suggested size for the next step.
    pub h_next: f64,
    pub rejected: u32,
}

#[derive(Debug, Clone, Copy)]
pub struct Dopri5<const N: usize> {
    pub tol: Tolerances<N>,
    pub h_min: f64,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn combo<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for &(c, k) in terms {
        if c != 0.0 {
            for i in 0..N {
                out[i] += h * c * k[i];
            }
        }
    }
    out
}

impl<const N: usize> Dopri5<N> {
    pub fn new(tol: Tolerances<N>) -> Self {
        Self { tol, h_min: 1e-18 }
    }

    /// Takes one accepted step from `(t, y)` starting with trial size `h`
    /// (never exceeding `h_max`). Returns `None` if the step size fell below
    /// `h_min` before the error test passed.
    pub fn advance<F>(&self, f: &F, t: f64, y: &[f64; N], h: f64, h_max: f64) -> Option<Advance<N>>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let mut h = h.min(h_max);
        let k1 = f(t, y);
        let mut rejected = 0;
        loop {
            if !(h >= self.h_min) {
                return None;
            }
            let k2 = f(t + C2 * h, &combo(y, h, &[(A21, &k1)]));
            let k3 = f(t + C3 * h, &combo(y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(
                t + C4 * h,
                &combo(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            );
            let k5 = f(
                t + C5 * h,
                &combo(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                t + h,
                &combo(
                    y,
                    h,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            );
            let y1 = combo(
                y,
                h,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let k7 = f(t + h, &y1);

            let mut err = [0.0; N];
            for i in 0..N {
                err[i] = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            let e = self.tol.norm(y, &y1, &err);
            if !e.is_finite() {
                h *= 0.1;
                rejected += 1;
                continue;
            }
            let factor = if e == 0.0 {
                5.0
            } else {
                (0.9 * e.powf(-0.2)).clamp(0.2, 5.0)
            };
            if e <= 1.0 {
                let mut rcont = [[0.0; N]; 4];
                for i in 0..N {
                    let ydiff = y1[i] - y[i];
                    let bspl = h * k1[i] - ydiff;
                    rcont[0][i] = ydiff;
                    rcont[1][i] = bspl;
                    rcont[2][i] = ydiff - h * k7[i] - bspl;
                    rcont[3][i] = h
                        * (D1 * k1[i]
                            + D3 * k3[i]
                            + D4 * k4[i]
                            + D5 * k5[i]
                            + D6 * k6[i]
                            + D7 * k7[i]);
                }
                let h_next = if rejected > 0 {
                    h * factor.min(1.0)
                } else {
                    h * factor
                };
                return Some(Advance {
                    step: DenseStep {
                        t0: t,
                        h,
                        y0: *y,
                        y1,
                        rcont,
                    },
                    h_next: h_next.min(h_max),
                    rejected,
                });
            }
            h *= factor.min(0.9);
            rejected += 1;
        }
    }
}
