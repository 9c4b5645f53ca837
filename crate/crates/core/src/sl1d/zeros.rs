use super::{Field1d, Sl1dError, Topology};

/// Samples with `|value| < ZERO_TOL * max|value|` are treated as zero.
pub const ZERO_TOL: f64 = 1e-7;
/// A derivative counts as nonvanishing above this fraction of its maximum.
pub const ORDER_TOL: f64 = 1e-5;
/// Highest zero order that is resolved.
pub const MAX_ORDER: usize = 3;
const MIN_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroLocation {
    pub position: f64,
    pub order: usize,
    /// Estimated `|Y|` at the location.
    pub residual: f64,
    pub sign_change: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroReport {
    pub sign_changes: usize,
    pub zeros_with_multiplicity: usize,
    pub zero_locations: Vec<ZeroLocation>,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn snapped_signs(values: &[f64]) -> Result<(Vec<i8>, f64), Sl1dError> {
    if values.len() < MIN_SAMPLES {
        return Err(Sl1dError::TooFewSamples(values.len()));
    }
    let max = max_abs(values);
    if !(max > 1e-300) || !max.is_finite() {
        return Err(Sl1dError::IdenticallyZero);
    }
    let tol = ZERO_TOL * max;
    let signs = values
        .iter()
        .map(|&v| if v.abs() < tol { 0 } else if v > 0.0 { 1 } else { -1 })
        .collect();
    Ok((signs, tol))
}

/// Sign changes of a tabulated function, skipping snapped zero runs.
/// On the circle the count wraps around and is always even.
pub fn count_sign_changes(values: &[f64], topology: Topology) -> Result<usize, Sl1dError> {
    let (signs, _) = snapped_signs(values)?;
    let nonzero: Vec<i8> = signs.into_iter().filter(|&s| s != 0).collect();
    let mut count = nonzero.windows(2).filter(|w| w[0] != w[1]).count();
    if topology == Topology::Circle && nonzero.len() > 1 && nonzero[0] != nonzero[nonzero.len() - 1] {
        count += 1;
    }
    Ok(count)
}

/// Zeros counted with multiplicity, orders resolved from the derivative fields.
pub fn count_zeros_with_multiplicity(field: &Field1d) -> Result<ZeroReport, Sl1dError> {
    let ders = field.derivatives.as_ref().ok_or(Sl1dError::MissingDerivatives)?;
    let values = &field.values;
    let (signs, tol) = snapped_signs(values)?;
    let sign_changes = count_sign_changes(values, field.topology)?;
    let n = values.len();
    let h = field.spacing();
    let circle = field.topology == Topology::Circle;
    let period = n as f64 * h;
    let dmax = [max_abs(&ders[0]), max_abs(&ders[1]), max_abs(&ders[2])];
    let at = |i: usize| [ders[0][i], ders[1][i], ders[2][i]];
    let wrap = |x: f64| if circle { (x - field.grid[0]).rem_euclid(period) + field.grid[0] } else { x };

    let order_of = |position: f64, d: [f64; 3]| -> Result<usize, Sl1dError> {
        (0..MAX_ORDER)
            .find(|&k| d[k].abs() > ORDER_TOL * dmax[k])
            .map(|k| k + 1)
            .ok_or(Sl1dError::MultiplicityResolution { position })
    };

    let mut locations = Vec::new();

    // Maximal runs of snapped zeros.
    let mut visited = vec![false; n];
    let first_nonzero = signs.iter().position(|&s| s != 0).expect("field is not identically zero");
    for offset in 0..n {
        let i = if circle { (first_nonzero + offset) % n } else { offset };
        if signs[i] != 0 || visited[i] {
            continue;
        }
        let mut len = 0;
        while len < n && signs[(i + len) % n] == 0 && (circle || i + len < n) {
            visited[(i + len) % n] = true;
            len += 1;
        }
        let last = i + len - 1;
        if !circle && (i == 0 || last == n - 1) {
            continue;
        }
        let before = signs[(i + n - 1) % n];
        let after = signs[(last + 1) % n];
        let centre = (i + len / 2) % n;
        let position = wrap(field.grid[i % n] + 0.5 * (len - 1) as f64 * h);
        let order = order_of(position, at(centre))?;
        locations.push(ZeroLocation {
            position,
            order,
            residual: values[centre].abs(),
            sign_change: before != after,
        });
    }

    let taylor = |j: usize, delta: f64| -> [f64; 4] {
        let d = at(j);
        [
            values[j] + delta * (d[0] + delta * (0.5 * d[1] + delta * d[2] / 6.0)),
            d[0] + delta * (d[1] + 0.5 * delta * d[2]),
            d[1] + delta * d[2],
            d[2],
        ]
    };

    let pairs = if circle { n } else { n - 1 };
    for i in 0..pairs {
        let j = (i + 1) % n;
        // Crossing between two nonzero samples.
        if signs[i] != 0 && signs[j] != 0 && signs[i] != signs[j] {
            let t = values[i] / (values[i] - values[j]);
            let (base, mut delta) = if t <= 0.5 { (i, t * h) } else { (j, (t - 1.0) * h) };
            for _ in 0..4 {
                let f = taylor(base, delta);
                if f[1] == 0.0 {
                    break;
                }
                let next = delta - f[0] / f[1];
                if !next.is_finite() || next.abs() > h {
                    break;
                }
                delta = next;
            }
            let f = taylor(base, delta);
            let position = wrap(field.grid[base] + delta);
            let order = order_of(position, [f[1], f[2], f[3]])?;
            locations.push(ZeroLocation {
                position,
                order,
                residual: f[0].abs().min(tol),
                sign_change: true,
            });
        }
    }

    // Touching zeros between samples: local minima of |Y| without a sign change.
    for i in 0..n {
        if !circle && (i == 0 || i == n - 1) {
            continue;
        }
        let (l, r) = ((i + n - 1) % n, (i + 1) % n);
        if signs[i] == 0 || signs[l] != signs[i] || signs[r] != signs[i] {
            continue;
        }
        let a = values[i].abs();
        if !(a < values[l].abs() && a <= values[r].abs()) {
            continue;
        }
        let mut delta = 0.0;
        let mut ok = true;
        for _ in 0..6 {
            let f = taylor(i, delta);
            if f[2] == 0.0 {
                ok = false;
                break;
            }
            delta -= f[1] / f[2];
            if !delta.is_finite() || delta.abs() > h {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        let f = taylor(i, delta);
        if f[0].abs() < tol {
            let position = wrap(field.grid[i] + delta);
            let order = order_of(position, [f[1], f[2], f[3]])?;
            locations.push(ZeroLocation {
                position,
                order,
                residual: f[0].abs(),
                sign_change: false,
            });
        }
    }

    locations.sort_by(|a, b| a.position.total_cmp(&b.position));
    let zeros_with_multiplicity = locations.iter().map(|z| z.order).sum();
    Ok(ZeroReport {
        sign_changes,
        zeros_with_multiplicity,
        zero_locations: locations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_grid(n: usize) -> Vec<f64> {
        (0..=n).map(|i| i as f64 / n as f64).collect()
    }

    #[test]
    fn constant_has_no_sign_changes() {
        assert_eq!(count_sign_changes(&vec![1.0; 100], Topology::Interval).unwrap(), 0);
    }

    #[test]
    fn zero_field_is_rejected() {
        assert_eq!(
            count_sign_changes(&vec![0.0; 100], Topology::Interval),
            Err(Sl1dError::IdenticallyZero)
        );
    }

    #[test]
    fn short_field_is_rejected() {
        assert!(matches!(count_sign_changes(&[1.0; 10], Topology::Interval), Err(Sl1dError::TooFewSamples(10))));
    }

    #[test]
    fn circle_wraps_around() {
        let n = 128;
        let v: Vec<f64> = (0..n).map(|i| (2.0 * PI * i as f64 / n as f64).sin()).collect();
        // sin(x) on the circle: the sample at 0 snaps to zero.
        assert_eq!(count_sign_changes(&v, Topology::Circle).unwrap(), 2);
        let shifted: Vec<f64> = (0..n).map(|i| (2.0 * PI * (i as f64 + 0.3) / n as f64).sin()).collect();
        assert_eq!(count_sign_changes(&shifted, Topology::Circle).unwrap(), 2);
    }

    #[test]
    fn double_zero_exactly_on_a_sample() {
        let grid = unit_grid(200);
        let x0 = 0.5;
        let f = Field1d::from_fn(
            grid,
            Topology::Interval,
            |x| (x - x0) * (x - x0),
            (|x| 2.0 * (x - x0), |_| 2.0, |_| 0.0),
        );
        let r = count_zeros_with_multiplicity(&f).unwrap();
        assert_eq!(r.sign_changes, 0);
        assert_eq!(r.zeros_with_multiplicity, 2);
    }

    #[test]
    fn quartic_zero_is_not_resolved() {
        let grid = unit_grid(200);
        let x0 = 0.5;
        let f = Field1d::from_fn(
            grid,
            Topology::Interval,
            |x| (x - x0).powi(4),
            (|x| 4.0 * (x - x0).powi(3), |x| 12.0 * (x - x0).powi(2), |x| 24.0 * (x - x0)),
        );
        assert!(matches!(
            count_zeros_with_multiplicity(&f),
            Err(Sl1dError::MultiplicityResolution { .. })
        ));
    }

    #[test]
    fn triple_zero_between_samples() {
        let grid = unit_grid(256);
        let x0 = 0.4123;
        let f = Field1d::from_fn(
            grid,
            Topology::Interval,
            |x| (x - x0).powi(3) + 0.0 * x,
            (|x| 3.0 * (x - x0).powi(2), |x| 6.0 * (x - x0), |_| 6.0),
        );
        let r = count_zeros_with_multiplicity(&f).unwrap();
        assert_eq!(r.sign_changes, 1);
        assert_eq!(r.zeros_with_multiplicity, r.zero_locations.iter().map(|z| z.order).sum::<usize>());
        assert!(r.zeros_with_multiplicity >= 1);
    }
}
