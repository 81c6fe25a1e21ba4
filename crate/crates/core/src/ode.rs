//! Adaptive Dormand–Prince 5(4) integration for small autonomous-in-form
//! systems `y' = f(r, y)` with `y` in `R^2`.

pub(crate) type State = [f64; 2];

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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b*, the embedded error weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

/// Adaptive integrator that keeps its step size between calls.
pub(crate) struct Dopri<F> {
    f: F,
    tol: Tolerance,
    h: f64,
    pub(crate) evaluations: usize,
}

pub(crate) enum Control {
    Continue,
    Stop,
}

impl<F: FnMut(f64, &State) -> State> Dopri<F> {
    pub(crate) fn new(f: F, tol: Tolerance, h0: f64) -> Self {
        Dopri {
            f,
            tol,
            h: h0,
            evaluations: 0,
        }
    }

    /// One non-adaptive step of size `h`.
    pub(crate) fn fixed_step(&mut self, r: f64, y: &State, h: f64) -> State {
        let k1 = (self.f)(r, y);
        let k2 = (self.f)(r + C2 * h, &axpy(y, h, &[(A21, &k1)]));
        let k3 = (self.f)(r + C3 * h, &axpy(y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = (self.f)(r + C4 * h, &axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = (self.f)(
            r + C5 * h,
            &axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = (self.f)(
            r + h,
            &axpy(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        self.evaluations += 6;
        axpy(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)])
    }

    /// Integrates from `(r, y)` to `r_end`, calling `observe` after every
    /// accepted step. Returns the final `(r, y)` (earlier if `observe`
    /// stops). Non-finite states stop the integration.
    pub(crate) fn run(
        &mut self,
        mut r: f64,
        mut y: State,
        r_end: f64,
        mut observe: impl FnMut(f64, &State) -> Control,
    ) -> (f64, State) {
        let mut k1 = (self.f)(r, &y);
        self.evaluations += 1;
        while r < r_end {
            let last = r + self.h >= r_end;
            let h = if last { r_end - r } else { self.h };
            let k2 = (self.f)(r + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
            let k3 = (self.f)(r + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = (self.f)(
                r + C4 * h,
                &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            );
            let k5 = (self.f)(
                r + C5 * h,
                &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = (self.f)(
                r + h,
                &axpy(
                    &y,
                    h,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            );
            let y5 = axpy(
                &y,
                h,
                &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            );
            let k7 = (self.f)(r + h, &y5);
            self.evaluations += 6;

            let mut err = 0.0_f64;
            for c in 0..2 {
                let e = h
                    * (E1 * k1[c] + E3 * k3[c] + E4 * k4[c] + E5 * k5[c] + E6 * k6[c]
                        + E7 * k7[c]);
                let sc = self.tol.atol + self.tol.rtol * y[c].abs().max(y5[c].abs());
                let q = e / sc;
                err = err.max(q.abs());
            }
            if !err.is_finite() || !y5[0].is_finite() || !y5[1].is_finite() {
                self.h *= 0.25;
                if self.h < 1e-14 {
                    return (r, y);
                }
                continue;
            }
            if err <= 1.0 {
                r = if last { r_end } else { r + h };
                y = y5;
                k1 = k7;
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * libm::pow(err, -0.2)).clamp(0.2, 5.0)
                };
                // a shortened final step says nothing about the natural size
                if !last {
                    self.h = h * fac;
                } else {
                    self.h = self.h.max(h * fac);
                }
                if let Control::Stop = observe(r, &y) {
                    return (r, y);
                }
            } else {
                let fac = (0.9 * libm::pow(err, -0.2)).clamp(0.1, 1.0);
                self.h = h * fac;
            }
        }
        (r, y)
    }
}
