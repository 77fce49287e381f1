//! Dormand–Prince 5(4) stepping and quintic Hermite interpolation.

pub type State = [f64; 2];

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince step. Returns the fifth-order solution and the
/// embedded error estimate.
pub fn dopri5_step<F: Fn(f64, &State) -> State>(rhs: &F, t: f64, y: &State, h: f64) -> (State, State) {
    let mut k = [[0.0; 2]; 7];
    for s in 0..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            for d in 0..2 {
                ys[d] += h * A[s][j] * kj[d];
            }
        }
        k[s] = rhs(t + C[s] * h, &ys);
    }
    let mut y5 = *y;
    let mut err = [0.0; 2];
    for s in 0..7 {
        for d in 0..2 {
            y5[d] += h * B5[s] * k[s][d];
            err[d] += h * (B5[s] - B4[s]) * k[s][d];
        }
    }
    (y5, err)
}

/// Scaled error norm for step acceptance (accept when `<= 1`).
pub fn error_norm(y: &State, y_new: &State, err: &State, atol: f64, rtol: f64) -> f64 {
    (0..2)
        .map(|d| err[d].abs() / (atol + rtol * y[d].abs().max(y_new[d].abs())))
        .fold(0.0, f64::max)
}

/// Quintic Hermite interpolant through value, first and second derivative at
/// both ends of `[x0, x1]`. Returns `(value, derivative)` at `x`.
#[allow(clippy::too_many_arguments)]
pub fn hermite5(x0: f64, x1: f64, y0: [f64; 3], y1: [f64; 3], x: f64) -> (f64, f64) {
    let h = x1 - x0;
    let s = (x - x0) / h;
    let (s2, s3) = (s * s, s * s * s);
    let (s4, s5) = (s3 * s, s3 * s2);
    let h00 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
    let h10 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
    let h20 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
    let h01 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
    let h11 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
    let h21 = 0.5 * s3 - s4 + 0.5 * s5;
    let value = h00 * y0[0] + h * h10 * y0[1] + h * h * h20 * y0[2] + h01 * y1[0] + h * h11 * y1[1] + h * h * h21 * y1[2];

    let d00 = -30.0 * s2 + 60.0 * s3 - 30.0 * s4;
    let d10 = 1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4;
    let d20 = s - 4.5 * s2 + 6.0 * s3 - 2.5 * s4;
    let d01 = 30.0 * s2 - 60.0 * s3 + 30.0 * s4;
    let d11 = -12.0 * s2 + 28.0 * s3 - 15.0 * s4;
    let d21 = 1.5 * s2 - 4.0 * s3 + 2.5 * s4;
    let deriv = (d00 * y0[0] + d01 * y1[0]) / h + d10 * y0[1] + d11 * y1[1] + h * (d20 * y0[2] + d21 * y1[2]);
    (value, deriv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_step() {
        let rhs = |_t: f64, y: &State| [y[1], -y[0]];
        let mut y = [1.0, 0.0];
        let h = 0.01;
        for i in 0..100 {
            let (yn, _) = dopri5_step(&rhs, i as f64 * h, &y, h);
            y = yn;
        }
        assert!((y[0] - 1f64.cos()).abs() < 1e-12);
        assert!((y[1] + 1f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn hermite_reproduces_quintic() {
        let p = |x: f64| [x.powi(5) - 2.0 * x * x + 1.0, 5.0 * x.powi(4) - 4.0 * x, 20.0 * x.powi(3) - 4.0];
        let (x0, x1) = (0.3, 1.1);
        for x in [0.3, 0.5, 0.77, 1.1] {
            let (v, d) = hermite5(x0, x1, p(x0), p(x1), x);
            assert!((v - p(x)[0]).abs() < 1e-13);
            assert!((d - p(x)[1]).abs() < 1e-12);
        }
    }
}
