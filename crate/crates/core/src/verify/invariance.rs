use super::{Verdict, VerdictKind, VerifyError, Witness};
use crate::dynsys::{flow, DynSystem};
use crate::expr::Expr;
use crate::partition::{level_set_points, Grid};

const INVARIANCE_SLACK: f64 = 1e-8;

/// Whether `{x : pred(x) <= threshold}` is positively invariant, probed by
/// flowing from `n_samples` points of its boundary for `t_probe` time units.
///
/// An empty boundary passes vacuously. Steps after a domain exit are not
/// checked.
pub fn check_positive_invariance(
    sys: &DynSystem,
    pred: &Expr,
    threshold: f64,
    grid: &Grid,
    n_samples: usize,
    t_probe: f64,
    h: f64,
) -> Result<Verdict, VerifyError> {
    let values = grid.sample(pred)?;
    let boundary = level_set_points(grid, pred, &values, threshold, n_samples)?;
    let mut verdict = Verdict::new(
        VerdictKind::Invariance,
        format!("{{ {pred} <= {threshold} }}"),
    )
    .tolerance("slack", INVARIANCE_SLACK)
    .tolerance("t_probe", t_probe);
    if boundary.is_empty() {
        verdict.note("empty boundary on the lattice");
        return Ok(verdict.coverage("0 boundary points"));
    }
    let mut exits = 0usize;
    for x0 in &boundary {
        let fs = flow(sys, x0, t_probe, h)?;
        if fs.exit_time.is_some() {
            exits += 1;
        }
        let mut worst: Option<(f64, usize)> = None;
        for (i, x) in fs.states.iter().enumerate() {
            let v = pred.eval(x)?;
            if v > threshold + INVARIANCE_SLACK && worst.map_or(true, |(w, _)| v > w) {
                worst = Some((v, i));
            }
        }
        if let Some((v, i)) = worst {
            if !verdict.failed() {
                verdict.fail();
            }
            if verdict.witnesses.len() < 5 {
                verdict.witness(
                    Witness::new(format!("trajectory from {x0:?} leaves the set"))
                        .at(&fs.states[i])
                        .time(fs.times[i])
                        .value(v),
                );
            }
        }
    }
    Ok(verdict.coverage(format!(
        "{} boundary points over [0, {t_probe}], {exits} left the domain",
        boundary.len()
    )))
}
