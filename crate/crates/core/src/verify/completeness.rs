use super::{Verdict, VerdictKind, VerifyError, Witness};
use crate::abstraction::{has_critical_point, measure_transit, SliceStatus, TransitTimeTable};
use crate::config::Options;
use crate::dynsys::DynSystem;
use crate::partition::{level_set_points, validate_nonincreasing, Grid, PartitionFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PAIR_ATTEMPTS: usize = 50;

fn within(t_low: f64, t_high: f64, opts: &Options) -> bool {
    t_high.is_finite() && t_high - t_low <= opts.tol_complete.max(opts.tol_complete_rel * t_low)
}

/// Equal transit times across every regular slice of every family, plus
/// `extra_level_pairs` random regular value pairs per family.
///
/// Families that fail the nonincreasing test fail here too. Slices bounded
/// by a critical, empty or infinite level are excluded and listed in the
/// coverage note.
pub fn check_completeness(
    sys: &DynSystem,
    families: &[PartitionFunction],
    tables: &[TransitTimeTable],
    grid: &Grid,
    opts: &Options,
) -> Result<Verdict, VerifyError> {
    let mut verdict = Verdict::new(VerdictKind::Complete, "abstraction")
        .tolerance("tol_abs", opts.tol_complete)
        .tolerance("tol_rel", opts.tol_complete_rel)
        .tolerance("grad", opts.tol_grad);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checked = 0usize;
    let mut excluded = Vec::new();
    let mut extra_done = 0usize;
    for (fam, table) in families.iter().zip(tables) {
        let ni = validate_nonincreasing(fam, grid, opts.tol_psi);
        if ni.failed() {
            verdict.fail();
            for w in ni.witnesses {
                verdict.witness(Witness {
                    label: format!("{}: psi > 0", fam.name()),
                    ..w
                });
            }
            continue;
        }
        let mut regular = Vec::new();
        for s in &table.slices {
            if s.status != SliceStatus::Regular {
                excluded.push(format!("{}[{}] {:?}", fam.name(), s.slice, s.status).to_lowercase());
                continue;
            }
            checked += 1;
            regular.push((s.stats.lower, s.stats.upper));
            if !within(s.stats.t_low, s.stats.t_high, opts) {
                verdict.fail();
                verdict.witness(
                    Witness::new(format!(
                        "{} slice {} [{}, {}]: t_low = {}, t_high = {}",
                        fam.name(),
                        s.slice,
                        s.stats.lower,
                        s.stats.upper,
                        s.stats.t_low,
                        s.stats.t_high
                    ))
                    .value(s.stats.spread()),
                );
            }
        }
        if regular.is_empty() {
            continue;
        }
        let values = grid.sample(fam.phi())?;
        let mut pairs = 0;
        let mut attempts = 0;
        while pairs < opts.extra_level_pairs
            && attempts < PAIR_ATTEMPTS * opts.extra_level_pairs.max(1)
        {
            attempts += 1;
            let (lo, hi) = regular[rng.gen_range(0..regular.len())];
            let (mut a, mut b) = (rng.gen_range(lo..hi), rng.gen_range(lo..hi));
            if a == b {
                continue;
            }
            if a < b {
                std::mem::swap(&mut a, &mut b);
            }
            let upper_pts = level_set_points(grid, fam.phi(), &values, a, opts.samples_per_level)?;
            let lower_pts = level_set_points(grid, fam.phi(), &values, b, opts.samples_per_level)?;
            if upper_pts.is_empty()
                || has_critical_point(fam, &upper_pts, opts.tol_grad)
                || has_critical_point(fam, &lower_pts, opts.tol_grad)
            {
                continue;
            }
            let stats = measure_transit(sys, fam, &upper_pts, a, b, opts.t_max, opts.rk4_step)?;
            pairs += 1;
            if !within(stats.t_low, stats.t_high, opts) {
                verdict.fail();
                verdict.witness(
                    Witness::new(format!(
                        "{} levels {} -> {}: t_low = {}, t_high = {}",
                        fam.name(),
                        a,
                        b,
                        stats.t_low,
                        stats.t_high
                    ))
                    .value(stats.spread()),
                );
            }
        }
        extra_done += pairs;
    }
    if checked == 0 && verdict.pass {
        return Ok(verdict.not_applicable("no regular slices"));
    }
    let mut coverage =
        format!("{checked} declared regular slices and {extra_done} sampled level pairs");
    if !excluded.is_empty() {
        coverage.push_str(&format!("; excluded: {}", excluded.join(", ")));
    }
    Ok(verdict.coverage(coverage))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::testing::saddle_abstraction;

    #[test]
    fn saddle_is_complete() {
        let (sys, a) = saddle_abstraction();
        let opts = Options::default();
        let v = check_completeness(
            sys,
            a.partition.families(),
            &a.tables,
            a.partition.grid(),
            &opts,
        )
        .unwrap();
        assert!(v.pass, "{v} {:?}", v.witnesses);
        assert!(
            v.coverage
                .contains("4 declared regular slices and 10 sampled"),
            "{}",
            v.coverage
        );
        assert!(v.coverage.contains("phi1[1] critical"));
    }

    #[test]
    fn spread_table_fails() {
        let (sys, a) = saddle_abstraction();
        let mut tables = a.tables.clone();
        tables[0].slices[2].stats.t_high += 0.01;
        let opts = Options {
            extra_level_pairs: 0,
            ..Options::default()
        };
        let v = check_completeness(
            sys,
            a.partition.families(),
            &tables,
            a.partition.grid(),
            &opts,
        )
        .unwrap();
        assert!(v.failed());
        assert!(v.witnesses[0].label.contains("phi1 slice 3"));
    }

    #[test]
    fn increasing_family_fails() {
        let (sys, a) = saddle_abstraction();
        let bad = PartitionFunction::new(
            "shifted",
            crate::expr::parse("(x1 - 1)^2", 2).unwrap(),
            vec![0.0, 25.0],
            sys,
        )
        .unwrap();
        let v = check_completeness(
            sys,
            &[bad],
            &a.tables[..1],
            a.partition.grid(),
            &Options::default(),
        )
        .unwrap();
        assert!(v.failed());
        assert!(v.witnesses[0].label.contains("psi > 0"));
    }
}
