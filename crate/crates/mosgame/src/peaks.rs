//! Local-maximum detection with prominence filtering on sampled series.

/// One detected local maximum. `time` and `value` are refined by parabolic
/// interpolation through the neighbouring samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    pub time: f64,
    pub value: f64,
    pub prominence: f64,
}

/// Find local maxima whose prominence reaches `min_prominence`.
///
/// Prominence of a peak is its height above the higher of the two valley
/// floors separating it from taller terrain (or from the series ends).
/// Plateaus report their first sample.
pub fn find_peaks(times: &[f64], values: &[f64], min_prominence: f64) -> Vec<Peak> {
    assert_eq!(times.len(), values.len());
    let n = values.len();
    let mut peaks = Vec::new();
    if n < 3 {
        return peaks;
    }

    let mut i = 1;
    while i + 1 < n {
        if values[i] > values[i - 1] {
            // Walk over a possible plateau.
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < n && values[j + 1] < values[i] {
                let prominence = prominence_at(values, i);
                if prominence >= min_prominence {
                    let (time, value) = refine(times, values, i);
                    peaks.push(Peak {
                        index: i,
                        time,
                        value,
                        prominence,
                    });
                }
                i = j + 1;
                continue;
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

fn prominence_at(values: &[f64], peak: usize) -> f64 {
    let height = values[peak];
    // Lowest point between the peak and the nearest higher ground on each
    // side (or the series end).
    let mut left_base = height;
    for &v in values[..peak].iter().rev() {
        if v > height {
            break;
        }
        left_base = left_base.min(v);
    }
    let mut right_base = height;
    for &v in &values[peak + 1..] {
        if v > height {
            break;
        }
        right_base = right_base.min(v);
    }
    height - left_base.max(right_base)
}

/// Quadratic refinement of peak position through three samples.
fn refine(times: &[f64], values: &[f64], i: usize) -> (f64, f64) {
    let (ym, y0, yp) = (values[i - 1], values[i], values[i + 1]);
    let denom = ym - 2.0 * y0 + yp;
    if denom >= 0.0 || denom.abs() < 1e-300 {
        return (times[i], y0);
    }
    let delta = 0.5 * (ym - yp) / denom;
    let dt = (times[i + 1] - times[i - 1]) / 2.0;
    (
        times[i] + delta.clamp(-0.5, 0.5) * dt,
        y0 - 0.25 * (ym - yp) * delta,
    )
}
