//! Central finite-difference verification of analytic gradients.

/// Outcome of a gradient check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdReport {
    /// Worst relative error over checked coordinates.
    pub max_rel_error: f64,
    /// Coordinates compared against finite differences.
    pub checked: usize,
    /// Coordinates skipped because the function was detectably non-smooth
    /// within the probe window (a hinge kink closer than ~2 eps).
    pub skipped: usize,
    /// Index of the worst coordinate.
    pub worst_coord: usize,
}

/// Compares `analytic` to central finite differences of `f` at `x`,
/// coordinate by coordinate.
///
/// Smoothness is probed by comparing the central difference at `eps` and
/// `eps/2`: where the two disagree the point sits next to a hinge kink
/// and the coordinate is reported as skipped instead of checked. The
/// relative error uses `max(|analytic|, |fd|, 1e-6)` as denominator.
pub fn finite_difference_check(
    f: &mut dyn FnMut(&[f64]) -> f64,
    analytic: &[f64],
    x: &[f64],
    eps: f64,
) -> FdReport {
    assert!(
        (1e-6..=1e-2).contains(&eps),
        "eps must lie in [1e-6, 1e-2]"
    );
    assert_eq!(analytic.len(), x.len());
    let mut probe = x.to_vec();
    let mut report = FdReport {
        max_rel_error: 0.0,
        checked: 0,
        skipped: 0,
        worst_coord: 0,
    };
    for i in 0..x.len() {
        let mut central = |h: f64| {
            probe[i] = x[i] + h;
            let fp = f(&probe);
            probe[i] = x[i] - h;
            let fm = f(&probe);
            probe[i] = x[i];
            (fp - fm) / (2.0 * h)
        };
        let fd_full = central(eps);
        let fd_half = central(0.5 * eps);
        let smooth_scale = fd_full.abs().max(fd_half.abs()).max(1e-3);
        if (fd_full - fd_half).abs() > 0.02 * smooth_scale {
            report.skipped += 1;
            continue;
        }
        let rel = (analytic[i] - fd_full).abs() / analytic[i].abs().max(fd_full.abs()).max(1e-6);
        if rel > report.max_rel_error {
            report.max_rel_error = rel;
            report.worst_coord = i;
        }
        report.checked += 1;
    }
    report
}
