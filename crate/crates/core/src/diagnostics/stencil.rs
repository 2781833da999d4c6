//! Sixth-order centered first derivatives at cell centers of a uniform grid.
//!
//! Values left of the origin come from the parity of the harmonic mode: even
//! for `ℓ = 0`, odd for `ℓ = 1`. Near the outer boundary the stencil falls back
//! to lower-order centered differences and a one-sided difference in the last cell.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

const C6: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
const C4: [f64; 2] = [2.0 / 3.0, -1.0 / 12.0];

pub fn derivative(f: &[f64], dr: f64, parity: Parity) -> Vec<f64> {
    let m = f.len();
    let sign = match parity {
        Parity::Even => 1.0,
        Parity::Odd => -1.0,
    };
    let at = |k: isize| -> f64 {
        if k < 0 {
            sign * f[(-k - 1) as usize]
        } else {
            f[k as usize]
        }
    };
    (0..m)
        .map(|i| {
            let i = i as isize;
            let room = m as isize - 1 - i;
            let d = if room >= 3 {
                C6.iter().enumerate().map(|(k, c)| c * (at(i + k as isize + 1) - at(i - k as isize - 1))).sum::<f64>()
            } else if room == 2 {
                C4.iter().enumerate().map(|(k, c)| c * (at(i + k as isize + 1) - at(i - k as isize - 1))).sum::<f64>()
            } else if room == 1 {
                0.5 * (at(i + 1) - at(i - 1))
            } else {
                at(i) - at(i - 1)
            };
            d / dr
        })
        .collect()
}
