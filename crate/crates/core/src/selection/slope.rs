use super::{CriterionPoint, DistortionCurve, SelectionMethod, SelectionReport, WindowRow};
use crate::error::{Error, Result};

/// `max(3, ⌊0.3·k_max⌋)`.
pub fn default_min_window(k_max: usize) -> usize {
    (3 * k_max / 10).max(3)
}

/// Ordinary least-squares slope of `ys` on `xs`.
fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// First index of the minimum.
fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// Slope-heuristic choice of `k`.
///
/// For every window size `m` from `min_window` to `K − 1` (with `K` curve
/// points), `−W_n(k)` is regressed on `√(k/n)` over the `m` largest `k`; the
/// slope, clamped at zero, gives `k̂(m) = argmin_k W_n(k) + 2·Ŝ(m)·√(k/n)`.
/// The reported `k̂` is the value holding over the longest run of
/// consecutive window sizes (ties: the run at larger `m`), and the constant
/// is the slope at the largest window of that run.
pub fn slope_select(curve: &DistortionCurve, min_window: usize) -> Result<SelectionReport> {
    curve.validate()?;
    let count = curve.entries.len();
    if count < 3 {
        return Err(Error::input(format!(
            "slope heuristic needs at least 3 curve points, got {count}"
        )));
    }
    if min_window < 2 {
        return Err(Error::input("min_window must be at least 2"));
    }
    if count < min_window {
        return Err(Error::input(format!(
            "curve has {count} points but min_window is {min_window}"
        )));
    }
    let n = curve.n as f64;
    let ks: Vec<usize> = curve.entries.iter().map(|e| e.k).collect();
    let shape: Vec<f64> = ks.iter().map(|&k| (k as f64 / n).sqrt()).collect();
    let w = curve.distortions();
    let neg_w: Vec<f64> = w.iter().map(|v| -v).collect();

    let largest = if min_window < count { count - 1 } else { count };
    let crit_for = |slope: f64| -> Vec<f64> {
        w.iter()
            .zip(&shape)
            .map(|(wk, xk)| wk + 2.0 * slope * xk)
            .collect()
    };

    let mut table = Vec::with_capacity(largest + 1 - min_window);
    let mut raw_slopes = Vec::with_capacity(table.capacity());
    for m in min_window..=largest {
        let fitted = ols_slope(&shape[count - m..], &neg_w[count - m..]);
        let slope = fitted.max(0.0);
        let k_hat = ks[argmin(&crit_for(slope))];
        table.push(WindowRow {
            window: m,
            slope,
            k_hat,
        });
        raw_slopes.push(fitted);
    }

    // Longest run of equal k̂ over consecutive windows; `>=` lets a later run
    // of equal length win.
    let mut best = (0usize, 0usize); // (start, len)
    let mut start = 0;
    for i in 1..=table.len() {
        if i == table.len() || table[i].k_hat != table[start].k_hat {
            let len = i - start;
            if len >= best.1 {
                best = (start, len);
            }
            start = i;
        }
    }
    let chosen = best.0 + best.1 - 1;
    let row = table[chosen];
    let crit = crit_for(row.slope);

    Ok(SelectionReport {
        method: SelectionMethod::Slope,
        k_hat: row.k_hat,
        criterion_values: ks
            .iter()
            .zip(crit)
            .map(|(&k, value)| CriterionPoint { k, value })
            .collect(),
        slope_constant: Some(row.slope),
        slope_clamped: raw_slopes[chosen] < 0.0,
        window_table: Some(table),
        chosen_window: Some(row.window),
        gap_sd: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn curve(n: usize, w: &[f64]) -> DistortionCurve {
        DistortionCurve::from_values(n, 1, w).unwrap()
    }

    #[test]
    fn pure_penalty_curve_selects_one() {
        let n = 200;
        let s = 3.0;
        let w: Vec<f64> = (1..=25).map(|k| 5.0 - s * (k as f64 / n as f64).sqrt()).collect();
        let r = slope_select(&curve(n, &w), 5).unwrap();
        assert_eq!(r.k_hat, 1);
        for row in r.window_table.as_ref().unwrap() {
            assert!((row.slope - s).abs() < 1e-9, "{row:?}");
        }
        assert!((r.slope_constant.unwrap() - s).abs() < 1e-9);
    }

    #[test]
    fn kinked_curve_selects_kink() {
        // Independent check: every window regresses on a flat tail or a
        // short ramp, and crit is minimized at the first flat point.
        let w: Vec<f64> = (1..=20).map(|k| (10.0 - 2.0 * k as f64).max(2.0) / 10.0).collect();
        let r = slope_select(&curve(100, &w), 5).unwrap();
        assert_eq!(r.k_hat, 4);
        let table = r.window_table.unwrap();
        assert_eq!(table.len(), 15);
        assert!(table.iter().all(|row| row.k_hat == 4));
        // windows 18 and 19 reach back into the ramp: slopes 0.260884 and 0.656132
        assert!((table[13].slope - 0.260884).abs() < 1e-6);
        assert!((table[14].slope - 0.656132).abs() < 1e-6);
        assert_eq!(r.chosen_window, Some(19));
    }

    #[test]
    fn noise_curve_is_clamped() {
        // increasing distortion ⇒ negative fitted slope
        let w: Vec<f64> = (1..=10).map(|k| 1.0 + 0.01 * k as f64).collect();
        let r = slope_select(&curve(50, &w), 3).unwrap();
        assert_eq!(r.slope_constant, Some(0.0));
        assert!(r.slope_clamped);
        assert_eq!(r.k_hat, 1);
    }

    #[test]
    fn plateau_prefers_longest_run() {
        let w = [1.0, 0.55, 0.5, 0.46, 0.43, 0.41, 0.40, 0.395, 0.39];
        let r = slope_select(&curve(100, &w), 3).unwrap();
        let table = r.window_table.clone().unwrap();
        // recount runs by hand
        let mut runs: Vec<(usize, usize)> = Vec::new();
        for row in &table {
            match runs.last_mut() {
                Some((k, len)) if *k == row.k_hat => *len += 1,
                _ => runs.push((row.k_hat, 1)),
            }
        }
        let longest = runs.iter().map(|r| r.1).max().unwrap();
        let winner = runs.iter().rev().find(|r| r.1 == longest).unwrap().0;
        assert_eq!(r.k_hat, winner);
    }

    #[test]
    fn rejects_short_curves() {
        assert!(slope_select(&curve(10, &[1.0, 0.5]), 2).is_err());
        assert!(slope_select(&curve(10, &[1.0, 0.5, 0.4]), 4).is_err());
        assert!(slope_select(&curve(10, &[1.0, 0.5, 0.4]), 1).is_err());
        // min_window equal to the curve length uses the single full window
        let r = slope_select(&curve(10, &[1.0, 0.5, 0.4]), 3).unwrap();
        assert_eq!(r.window_table.unwrap().len(), 1);
    }

    #[test]
    fn default_window() {
        assert_eq!(default_min_window(5), 3);
        assert_eq!(default_min_window(20), 6);
        assert_eq!(default_min_window(35), 10);
    }

    fn decreasing_curve() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.001f64..1.0, 6..30).prop_map(|steps| {
            let mut acc = steps.iter().sum::<f64>() + 0.5;
            steps
                .iter()
                .map(|s| {
                    acc -= s;
                    acc
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn penalty_increases_with_k(s in 0.001f64..100.0, n in 10usize..10_000) {
            let mut prev = f64::NEG_INFINITY;
            for k in 1..=n.min(50) {
                let pen = 2.0 * s * (k as f64 / n as f64).sqrt();
                prop_assert!(pen > prev);
                prev = pen;
            }
        }

        #[test]
        fn scale_and_shift_invariance(w in decreasing_curve(), exp in -4i32..5, shift in -3.0f64..3.0) {
            let n = 500;
            let base = slope_select(&curve(n, &w), 3).unwrap();
            // powers of two keep the rescaled arithmetic exact
            let lambda = 2f64.powi(exp);
            let scaled: Vec<f64> = w.iter().map(|v| v * lambda).collect();
            let rs = slope_select(&curve(n, &scaled), 3).unwrap();
            prop_assert_eq!(rs.k_hat, base.k_hat);
            let (s0, s1) = (base.slope_constant.unwrap(), rs.slope_constant.unwrap());
            prop_assert!((s1 - lambda * s0).abs() <= 1e-9 * (1.0 + lambda * s0));

            let shifted: Vec<f64> = w.iter().map(|v| v + shift.abs() + 1.0).collect();
            let rt = slope_select(&curve(n, &shifted), 3).unwrap();
            prop_assert!((rt.slope_constant.unwrap() - s0).abs() <= 1e-6 * (1.0 + s0));
            prop_assert_eq!(rt.k_hat, base.k_hat);
        }
    }
}
