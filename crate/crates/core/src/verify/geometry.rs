use super::{Verdict, VerdictKind, VerifyError, Witness};
use crate::abstraction::has_critical_point;
use crate::config::Options;
use crate::dynsys::{approximate_manifold, Branch, DynSystem, Equilibrium};
use crate::partition::{level_set_points, Grid, PartitionFunction};

/// Whether `psi` is constant on `phi^-1(a)`, up to
/// `max(1e-8, 1e-6 |mean psi|)` over `m_samples` level-set points.
pub fn check_levelset_sync(
    pf: &PartitionFunction,
    grid: &Grid,
    a: f64,
    m_samples: usize,
    tol_grad: f64,
) -> Result<Verdict, VerifyError> {
    let subject = format!("{} level {}", pf.name(), a);
    let values = grid.sample(pf.phi())?;
    let pts = level_set_points(grid, pf.phi(), &values, a, m_samples)?;
    if pts.is_empty() {
        return Err(VerifyError::EmptyLevel {
            family: pf.name().to_string(),
            level: a,
        });
    }
    let verdict = Verdict::new(VerdictKind::LevelsetSync, subject)
        .tolerance("abs", 1e-8)
        .tolerance("rel", 1e-6)
        .tolerance("grad", tol_grad)
        .coverage(format!("{} level-set points", pts.len()));
    if has_critical_point(pf, &pts, tol_grad) {
        return Ok(verdict.not_applicable("critical value"));
    }
    let mut verdict = verdict;
    let psi: Vec<f64> = pts
        .iter()
        .map(|p| pf.psi().eval(p))
        .collect::<Result<_, _>>()?;
    let (mut imin, mut imax) = (0, 0);
    for (i, &v) in psi.iter().enumerate() {
        if v < psi[imin] {
            imin = i;
        }
        if v > psi[imax] {
            imax = i;
        }
    }
    let mean = psi.iter().sum::<f64>() / psi.len() as f64;
    let spread = psi[imax] - psi[imin];
    if spread > 1e-8_f64.max(1e-6 * mean.abs()) {
        verdict.fail();
        verdict.witness(Witness::new("min psi").at(&pts[imin]).value(psi[imin]));
        verdict.witness(Witness::new("max psi").at(&pts[imax]).value(psi[imax]));
    }
    verdict.note(format!("psi spread {spread:e}, mean {mean}"));
    Ok(verdict)
}

/// Every equilibrium must be a critical point of `phi`.
pub fn check_critical_points(
    pf: &PartitionFunction,
    equilibria: &[Equilibrium],
    tol_grad: f64,
) -> Result<Verdict, VerifyError> {
    let mut verdict = Verdict::new(VerdictKind::CriticalPoints, pf.name())
        .tolerance("grad", tol_grad)
        .coverage(format!("{} equilibria", equilibria.len()));
    for eq in equilibria {
        let g = pf.grad_norm(&eq.point)?;
        if g > tol_grad {
            verdict.fail();
            let grad: Vec<f64> = pf
                .grad()
                .iter()
                .map(|e| e.eval(&eq.point))
                .collect::<Result<_, _>>()?;
            verdict.witness(
                Witness::new(format!("equilibrium with gradient {grad:?}"))
                    .at(&eq.point)
                    .value(g),
            );
        }
    }
    Ok(verdict)
}

fn thin(points: &[Vec<f64>], spacing: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for p in points {
        if out
            .last()
            .map_or(true, |q| crate::dynsys::distance(p, q) >= spacing)
        {
            out.push(p.clone());
        }
    }
    if let (Some(last), Some(kept)) = (points.last(), out.last()) {
        if last != kept {
            out.push(last.clone());
        }
    }
    out
}

fn segment_distance(x: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab: Vec<f64> = a.iter().zip(b).map(|(p, q)| q - p).collect();
    let ax: Vec<f64> = a.iter().zip(x).map(|(p, q)| q - p).collect();
    let len2: f64 = ab.iter().map(|v| v * v).sum();
    let s = if len2 == 0.0 {
        0.0
    } else {
        (ab.iter().zip(&ax).map(|(u, v)| u * v).sum::<f64>() / len2).clamp(0.0, 1.0)
    };
    ab.iter()
        .zip(&ax)
        .map(|(u, v)| (v - s * u).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Unstable-manifold containment in the level set through a saddle.
///
/// Not applicable unless some sampled point of the stable manifold is a
/// regular point of `phi`. A pass also reports whether the containment is
/// proper, via lattice points (and `opts.proper_candidates`) on the level
/// that lie farther than `opts.proper_radius` from the manifold.
pub fn check_unstable_manifold_containment(
    sys: &DynSystem,
    pf: &PartitionFunction,
    eq: &Equilibrium,
    grid: &Grid,
    opts: &Options,
) -> Result<Verdict, VerifyError> {
    let h = opts.rk4_step;
    let stable = approximate_manifold(
        sys,
        eq,
        Branch::Stable,
        opts.manifold_delta,
        opts.manifold_horizon,
        h,
    )?;
    let unstable = approximate_manifold(
        sys,
        eq,
        Branch::Unstable,
        opts.manifold_delta,
        opts.manifold_horizon,
        h,
    )?;
    let subject = format!("{} at {:?}", pf.name(), eq.point);
    let verdict = Verdict::new(VerdictKind::ManifoldContainment, subject)
        .tolerance("containment", opts.manifold_tol)
        .tolerance("proper_tol", opts.proper_tol)
        .tolerance("proper_radius", opts.proper_radius);
    let stable_pts: Vec<&Vec<f64>> = stable.iter().flat_map(|m| &m.points).collect();
    let regular = stable_pts
        .iter()
        .any(|p| pf.grad_norm(p).map_or(false, |g| g >= opts.tol_grad));
    if !regular {
        return Ok(verdict
            .coverage(format!("{} stable-manifold points", stable_pts.len()))
            .not_applicable("hypothesis not met: no regular point on the stable manifold"));
    }
    let mut verdict = verdict;
    let level = pf.phi().eval(&eq.point)?;
    let mut worst = (0.0_f64, None);
    let mut count = 0usize;
    for m in &unstable {
        for p in &m.points {
            count += 1;
            let dev = (pf.phi().eval(p)? - level).abs();
            if dev > worst.0 || worst.1.is_none() {
                worst = (dev, Some(p.clone()));
            }
        }
    }
    if worst.0 > opts.manifold_tol {
        verdict.fail();
        let p = worst.1.expect("unstable manifold has points");
        verdict.witness(
            Witness::new("unstable-manifold point off the level")
                .at(&p)
                .value(worst.0),
        );
        return Ok(verdict.coverage(format!("{count} unstable-manifold points")));
    }

    // proper containment: points of the level set away from the manifold
    let mut curve = vec![eq.point.clone()];
    let mut polylines: Vec<Vec<Vec<f64>>> = Vec::new();
    for m in &unstable {
        let mut line = vec![eq.point.clone()];
        line.extend(thin(&m.points, opts.proper_radius / 10.0));
        curve.extend(line.iter().cloned());
        polylines.push(line);
    }
    let dist = |x: &[f64]| -> f64 {
        polylines
            .iter()
            .flat_map(|l| l.windows(2).map(|w| segment_distance(x, &w[0], &w[1])))
            .fold(crate::dynsys::distance(x, &eq.point), f64::min)
    };
    let mut candidates: Vec<Vec<f64>> = opts.proper_candidates.clone();
    let values = grid.sample(pf.phi())?;
    candidates.extend(
        values
            .iter()
            .enumerate()
            .filter(|(_, v)| (*v - level).abs() <= opts.proper_tol)
            .map(|(i, _)| grid.point(i)),
    );
    let mut proper = None;
    for x in &candidates {
        if !sys.domain().contains(x) {
            continue;
        }
        if (pf.phi().eval(x)? - level).abs() <= opts.proper_tol && dist(x) > opts.proper_radius {
            proper = Some(x.clone());
            break;
        }
    }
    match proper {
        Some(x) => {
            verdict.note("containment is proper");
            verdict.witness(
                Witness::new("level point off the unstable manifold")
                    .at(&x)
                    .value(dist(&x)),
            );
        }
        None => verdict.note("containment is equality up to grid tolerance"),
    }
    Ok(verdict.coverage(format!(
        "{count} unstable-manifold points, {} level-set candidates",
        candidates.len()
    )))
}

/// Whether containment was found to be proper by
/// [`check_unstable_manifold_containment`].
pub fn containment_is_proper(v: &Verdict) -> bool {
    v.notes.iter().any(|n| n == "containment is proper")
}
