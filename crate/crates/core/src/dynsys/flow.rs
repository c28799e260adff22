use super::DynSystem;
use crate::expr::{EvalError, Expr};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum FlowError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("state became non-finite at t = {time}")]
    NonFinite { time: f64 },
    #[error("step size must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("integration horizon must be nonnegative and finite, got {0}")]
    BadHorizon(f64),
    #[error("initial state has dimension {got}, system has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("initial state {0:?} lies outside the domain")]
    OutsideDomain(Vec<f64>),
    #[error("initial state already lies on the target level")]
    StartsOnLevel,
}

/// Trajectory samples at `0, h, 2h, ...` plus a final partial step.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowSample {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Set when integration stopped because the state left the domain; the
    /// value is the time of the first out-of-domain step, which is not
    /// included in `states`.
    pub exit_time: Option<f64>,
}

impl FlowSample {
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("flow samples are never empty")
    }
}

/// Result of integrating until a level set is reached.
#[derive(Clone, Debug, PartialEq)]
pub enum LevelCrossing {
    Crossed {
        time: f64,
        point: Vec<f64>,
    },
    /// `t_max` elapsed inside the domain without crossing.
    TimeLimit,
    /// The trajectory left the domain before crossing.
    DomainExit {
        time: f64,
    },
}

impl LevelCrossing {
    pub fn time(&self) -> Option<f64> {
        match self {
            LevelCrossing::Crossed { time, .. } => Some(*time),
            _ => None,
        }
    }
}

/// Classical fixed-step RK4 with reusable stage buffers. `sign = -1` integrates
/// the reversed field.
pub(crate) struct Rk4<'a> {
    sys: &'a DynSystem,
    sign: f64,
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl<'a> Rk4<'a> {
    pub(crate) fn new(sys: &'a DynSystem, sign: f64) -> Self {
        let n = sys.dim();
        Rk4 {
            sys,
            sign,
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    fn rhs(sys: &DynSystem, sign: f64, x: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        sys.eval_field(x, out)?;
        if sign < 0.0 {
            out.iter_mut().for_each(|v| *v = -*v);
        }
        Ok(())
    }

    /// One step of size `h` from `x` into `out`.
    pub(crate) fn step(&mut self, x: &[f64], h: f64, out: &mut [f64]) -> Result<(), EvalError> {
        let n = x.len();
        Self::rhs(self.sys, self.sign, x, &mut self.k1)?;
        for i in 0..n {
            self.tmp[i] = x[i] + 0.5 * h * self.k1[i];
        }
        Self::rhs(self.sys, self.sign, &self.tmp, &mut self.k2)?;
        for i in 0..n {
            self.tmp[i] = x[i] + 0.5 * h * self.k2[i];
        }
        Self::rhs(self.sys, self.sign, &self.tmp, &mut self.k3)?;
        for i in 0..n {
            self.tmp[i] = x[i] + h * self.k3[i];
        }
        Self::rhs(self.sys, self.sign, &self.tmp, &mut self.k4)?;
        for i in 0..n {
            out[i] =
                x[i] + h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
        Ok(())
    }
}

fn check_start(sys: &DynSystem, x0: &[f64], h: f64) -> Result<(), FlowError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(FlowError::BadStep(h));
    }
    if x0.len() != sys.dim() {
        return Err(FlowError::DimensionMismatch {
            expected: sys.dim(),
            got: x0.len(),
        });
    }
    if !sys.domain().contains(x0) {
        return Err(FlowError::OutsideDomain(x0.to_vec()));
    }
    Ok(())
}

fn finite(x: &[f64], time: f64) -> Result<(), FlowError> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(FlowError::NonFinite { time })
    }
}

/// Steps on the grid `i * h` up to `t_end`; a trailing remainder shorter than
/// this is treated as zero.
const REMAINDER_EPS: f64 = 1e-12;

pub(crate) fn integrate(
    sys: &DynSystem,
    x0: &[f64],
    t_end: f64,
    h: f64,
    sign: f64,
) -> Result<FlowSample, FlowError> {
    check_start(sys, x0, h)?;
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(FlowError::BadHorizon(t_end));
    }
    let mut rk = Rk4::new(sys, sign);
    let mut sample = FlowSample {
        times: vec![0.0],
        states: vec![x0.to_vec()],
        exit_time: None,
    };
    let mut x = x0.to_vec();
    let mut next = vec![0.0; x.len()];
    let mut i: u64 = 0;
    let mut t = 0.0;
    loop {
        let grid_next = (i + 1) as f64 * h;
        let (t_next, dt) = if grid_next <= t_end {
            (grid_next, h)
        } else if t_end - t > REMAINDER_EPS * h {
            (t_end, t_end - t)
        } else {
            break;
        };
        rk.step(&x, dt, &mut next)?;
        finite(&next, t_next)?;
        if !sys.domain().contains(&next) {
            sample.exit_time = Some(t_next);
            break;
        }
        std::mem::swap(&mut x, &mut next);
        t = t_next;
        i += 1;
        sample.times.push(t);
        sample.states.push(x.clone());
        if t >= t_end {
            break;
        }
    }
    Ok(sample)
}

/// Numerical flow of `sys` from `x0` over `[0, t_end]` with step `h`.
///
/// Stops early, recording `exit_time`, once a step leaves the domain.
pub fn flow(sys: &DynSystem, x0: &[f64], t_end: f64, h: f64) -> Result<FlowSample, FlowError> {
    integrate(sys, x0, t_end, h, 1.0)
}

/// States at each of the nondecreasing `times`, using the same step grid as
/// [`flow`]. Entries after the trajectory leaves the domain are `None`.
pub fn flow_at_times(
    sys: &DynSystem,
    x0: &[f64],
    times: &[f64],
    h: f64,
) -> Result<Vec<Option<Vec<f64>>>, FlowError> {
    check_start(sys, x0, h)?;
    let mut rk = Rk4::new(sys, 1.0);
    let mut out = Vec::with_capacity(times.len());
    let mut x = x0.to_vec();
    let mut next = vec![0.0; x.len()];
    let mut partial = vec![0.0; x.len()];
    let mut i: u64 = 0;
    let mut exited = false;
    for &target in times {
        if !(target >= 0.0 && target.is_finite()) {
            return Err(FlowError::BadHorizon(target));
        }
        while !exited && ((i + 1) as f64) * h <= target {
            let t_next = (i + 1) as f64 * h;
            rk.step(&x, h, &mut next)?;
            finite(&next, t_next)?;
            if !sys.domain().contains(&next) {
                exited = true;
                break;
            }
            std::mem::swap(&mut x, &mut next);
            i += 1;
        }
        if exited {
            out.push(None);
            continue;
        }
        let dt = target - i as f64 * h;
        if dt > REMAINDER_EPS * h {
            rk.step(&x, dt, &mut partial)?;
            finite(&partial, target)?;
            out.push(sys.domain().contains(&partial).then(|| partial.clone()));
        } else {
            out.push(Some(x.clone()));
        }
    }
    Ok(out)
}

/// Integrates from `x0` until `phi(x(t)) = target`.
///
/// A sign change of `phi - target` between consecutive steps is refined by
/// bisection over the step length; the crossing is reported even if the step
/// that overshot it left the domain.
pub fn flow_until_level(
    sys: &DynSystem,
    x0: &[f64],
    phi: &Expr,
    target: f64,
    t_max: f64,
    h: f64,
) -> Result<LevelCrossing, FlowError> {
    check_start(sys, x0, h)?;
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(FlowError::BadHorizon(t_max));
    }
    let start = phi.eval(x0)? - target;
    if start == 0.0 {
        return Err(FlowError::StartsOnLevel);
    }
    let side = start.signum();
    let mut rk = Rk4::new(sys, 1.0);
    let mut x = x0.to_vec();
    let mut next = vec![0.0; x.len()];
    let mut i: u64 = 0;
    loop {
        let t = i as f64 * h;
        if t >= t_max {
            return Ok(LevelCrossing::TimeLimit);
        }
        let t_next = (i + 1) as f64 * h;
        rk.step(&x, h, &mut next)?;
        finite(&next, t_next)?;
        let v = phi.eval(&next)? - target;
        if v == 0.0 {
            return Ok(LevelCrossing::Crossed {
                time: t_next,
                point: next,
            });
        }
        if v.signum() != side {
            let (dt, point) = bisect_step(&mut rk, &x, h, phi, target, side)?;
            return Ok(LevelCrossing::Crossed {
                time: t + dt,
                point,
            });
        }
        if !sys.domain().contains(&next) {
            return Ok(LevelCrossing::DomainExit { time: t_next });
        }
        std::mem::swap(&mut x, &mut next);
        i += 1;
    }
}

fn bisect_step(
    rk: &mut Rk4<'_>,
    x: &[f64],
    h: f64,
    phi: &Expr,
    target: f64,
    side: f64,
) -> Result<(f64, Vec<f64>), FlowError> {
    let mut lo = 0.0;
    let mut hi = h;
    let mut y = vec![0.0; x.len()];
    let mut best = (h, f64::INFINITY, Vec::new());
    // Bisect to the resolution of the step rather than stopping once
    // |phi - target| <= 1e-8: crossing-time error is |dphi| / |psi| and
    // transit spreads are compared at 1e-6.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        rk.step(x, mid, &mut y)?;
        let v = phi.eval(&y)? - target;
        if v.abs() < best.1 {
            best = (mid, v.abs(), y.clone());
        }
        if v == 0.0 || hi - lo <= 1e-15 * h.max(1.0) {
            break;
        }
        if v.signum() == side {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((best.0, best.2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::testing::saddle;
    use crate::dynsys::BoxDomain;
    use crate::expr::parse;

    #[test]
    fn saddle_matches_closed_form() {
        let sys = saddle();
        let t = 2f64.ln();
        let s = flow(&sys, &[4.0, 0.1], t, 1e-3).unwrap();
        let end = s.last();
        assert!((end[0] - 2.0).abs() < 1e-8, "{end:?}");
        assert!((end[1] - 0.2).abs() < 1e-8, "{end:?}");
        assert!((s.times.last().unwrap() - t).abs() < 1e-15);
        assert!(s.times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn zero_horizon_is_identity() {
        let s = flow(&saddle(), &[1.0, 2.0], 0.0, 1e-3).unwrap();
        assert_eq!(s.states, vec![vec![1.0, 2.0]]);
        assert_eq!(s.times, vec![0.0]);
    }

    #[test]
    fn equilibrium_is_fixed() {
        let s = flow(&saddle(), &[0.0, 0.0], 3.0, 1e-3).unwrap();
        assert!(s
            .states
            .iter()
            .all(|x| x[0].abs() < 1e-12 && x[1].abs() < 1e-12));
    }

    #[test]
    fn exit_is_reported() {
        let s = flow(&saddle(), &[1.0, 1.0], 10.0, 1e-3).unwrap();
        let exit = s.exit_time.unwrap();
        // x2 = e^t leaves [-4, 4] at ln 4
        assert!((exit - 4f64.ln()).abs() < 2e-3);
        assert!(s.states.iter().all(|x| sys_contains(x)));
    }

    fn sys_contains(x: &[f64]) -> bool {
        saddle().domain().contains(x)
    }

    #[test]
    fn flow_at_times_matches_flow() {
        let sys = saddle();
        let times = [0.0, 0.25, 0.5, 0.7, 1.0];
        let pts = flow_at_times(&sys, &[3.0, 0.1], &times, 1e-3).unwrap();
        for (t, p) in times.iter().zip(&pts) {
            let p = p.as_ref().unwrap();
            let end = flow(&sys, &[3.0, 0.1], *t, 1e-3).unwrap();
            assert_eq!(p, end.last());
        }
        let late = flow_at_times(&sys, &[3.0, 1.0], &[1.0, 2.0], 1e-3).unwrap();
        assert!(late[0].is_some() && late[1].is_none());
    }

    #[test]
    fn level_crossing_time() {
        let sys = saddle();
        let phi = parse("x1^2", 2).unwrap();
        let c = flow_until_level(&sys, &[4.0, 0.1], &phi, 4.0, 50.0, 1e-3).unwrap();
        let t = c.time().unwrap();
        assert!((t - 2f64.ln()).abs() < 1e-6, "{t}");
    }

    #[test]
    fn invariant_axis_never_crosses() {
        let sys = saddle();
        let phi = parse("x1^2", 2).unwrap();
        let c = flow_until_level(&sys, &[0.0, 0.1], &phi, 1.0, 50.0, 1e-3).unwrap();
        assert!(c.time().is_none());
    }

    #[test]
    fn asymptotic_approach_is_no_crossing() {
        // x1 decays to 0 without reaching it; keep x2 on its invariant axis
        let sys = saddle();
        let phi = parse("x1^2", 2).unwrap();
        let c = flow_until_level(&sys, &[1.0, 0.0], &phi, 0.0, 50.0, 1e-3).unwrap();
        assert_eq!(c, LevelCrossing::TimeLimit);
        let c = flow_until_level(&sys, &[1.0, 0.1], &phi, 0.0, 50.0, 1e-3).unwrap();
        assert!(matches!(c, LevelCrossing::DomainExit { .. }));
    }

    #[test]
    fn crossing_on_domain_edge_is_found() {
        // |x2| reaches 4 exactly on the boundary of the domain
        let sys = saddle();
        let phi = parse("-x2^2", 2).unwrap();
        let c = flow_until_level(&sys, &[1.0, 2.0], &phi, -16.0, 50.0, 1e-3).unwrap();
        assert!((c.time().unwrap() - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn precondition_errors() {
        let sys = saddle();
        let phi = parse("x1^2", 2).unwrap();
        assert_eq!(
            flow_until_level(&sys, &[2.0, 0.0], &phi, 4.0, 1.0, 1e-3).unwrap_err(),
            FlowError::StartsOnLevel
        );
        assert!(matches!(
            flow(&sys, &[5.0, 0.0], 1.0, 1e-3),
            Err(FlowError::OutsideDomain(_))
        ));
        assert!(matches!(
            flow(&sys, &[1.0, 0.0], 1.0, 0.0),
            Err(FlowError::BadStep(_))
        ));
        assert!(matches!(
            flow(&sys, &[1.0], 1.0, 1e-3),
            Err(FlowError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn domain_violation_mid_flight() {
        let sys = DynSystem::new(
            vec![parse("ln(x1)", 1).unwrap()],
            BoxDomain::from_intervals(&[(-1.0, 2.0)]).unwrap(),
            None,
        )
        .unwrap();
        assert!(matches!(
            flow(&sys, &[0.5], 5.0, 1e-2),
            Err(FlowError::Eval(_))
        ));
    }

    #[test]
    fn deterministic() {
        let sys = saddle();
        let a = flow(&sys, &[1.3, -0.2], 1.7, 1e-3).unwrap();
        let b = flow(&sys, &[1.3, -0.2], 1.7, 1e-3).unwrap();
        assert_eq!(a, b);
    }
}
