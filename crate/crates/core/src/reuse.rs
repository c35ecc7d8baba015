//! Reuse-probability curves and their power-law fits.
//!
//! For every test user and every tag in that user's training vocabulary,
//! the tag instance is pooled by a factor value (training frequency,
//! recency in days, or context co-occurrence) and counted as reused when it
//! appears in the user's test post. A linear regression on the log-log
//! points gives the slope k and determination coefficient R^2: a power
//! law p ~ x^k.

use std::collections::BTreeMap;
use std::io::Write;

use crate::cooc::CoocMatrix;
use crate::error::{Error, Result};
use crate::folksonomy::SECONDS_PER_DAY;
use crate::ids::TagId;
use crate::split::ChronoSplit;

/// One pooled point: all tag instances sharing the factor value `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReusePoint {
    pub x: f64,
    pub n_total: u64,
    pub n_reused: u64,
}

impl ReusePoint {
    pub fn probability(&self) -> f64 {
        self.n_reused as f64 / self.n_total as f64
    }
}

/// The factor a curve was pooled by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Factor {
    Frequency,
    Recency,
    Context,
}

impl Factor {
    pub fn as_str(self) -> &'static str {
        match self {
            Factor::Frequency => "frequency",
            Factor::Recency => "recency",
            Factor::Context => "context",
        }
    }
}

/// Pooled curve, points ascending by x.
#[derive(Debug, Clone, PartialEq)]
pub struct ReuseCurve {
    pub factor: Factor,
    pub points: Vec<ReusePoint>,
}

/// Ordinary least squares fit of log10(p) on log10(x).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    /// Every pooled point counts once.
    #[default]
    Uniform,
    /// Points weighted by their instance support.
    BySupport,
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Drop points with fewer pooled instances before fitting.
    pub min_support: u64,
    pub weighting: Weighting,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            min_support: 1,
            weighting: Weighting::Uniform,
        }
    }
}

impl ReuseCurve {
    pub fn fit(&self, opts: &FitOptions) -> Result<PowerLawFit> {
        fit_points(&self.points, opts)
    }

    /// Re-pools points onto power-of-two bins (x -> 2^floor(log2 x)),
    /// merging counts. Useful for sparse high-value tails.
    pub fn rebin_log2(&self) -> ReuseCurve {
        let mut bins: BTreeMap<u32, (u64, u64)> = BTreeMap::new();
        for p in &self.points {
            debug_assert!(p.x >= 1.0);
            let bin = (p.x.max(1.0)).log2().floor() as u32;
            let e = bins.entry(bin).or_insert((0, 0));
            e.0 += p.n_total;
            e.1 += p.n_reused;
        }
        ReuseCurve {
            factor: self.factor,
            points: bins
                .into_iter()
                .map(|(bin, (n_total, n_reused))| ReusePoint {
                    x: 2f64.powi(bin as i32),
                    n_total,
                    n_reused,
                })
                .collect(),
        }
    }

    /// CSV rows `x,n_total,n_reused,p`, points ascending by x.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,n_total,n_reused,p")?;
        for p in &self.points {
            writeln!(w, "{},{},{},{}", p.x, p.n_total, p.n_reused, p.probability())?;
        }
        Ok(())
    }
}

/// Unweighted OLS over eligible points (x > 0, p > 0); the default
/// regression entry point.
pub fn loglog_regression(points: &[ReusePoint]) -> Result<PowerLawFit> {
    fit_points(points, &FitOptions::default())
}

fn fit_points(points: &[ReusePoint], opts: &FitOptions) -> Result<PowerLawFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    for p in points {
        if p.x > 0.0 && p.n_reused > 0 && p.n_total >= opts.min_support {
            xs.push(p.x.log10());
            ys.push(p.probability().log10());
            ws.push(match opts.weighting {
                Weighting::Uniform => 1.0,
                Weighting::BySupport => p.n_total as f64,
            });
        }
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "regression needs >= 2 eligible points, found {}",
            xs.len()
        )));
    }
    let wsum: f64 = ws.iter().sum();
    let mean_x: f64 = xs.iter().zip(&ws).map(|(x, w)| x * w).sum::<f64>() / wsum;
    let mean_y: f64 = ys.iter().zip(&ws).map(|(y, w)| y * w).sum::<f64>() / wsum;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..xs.len() {
        sxx += ws[i] * (xs[i] - mean_x) * (xs[i] - mean_x);
        sxy += ws[i] * (xs[i] - mean_x) * (ys[i] - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientData(
            "all regression points share one x value".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for i in 0..xs.len() {
        let fitted = slope * xs[i] + intercept;
        ss_res += ws[i] * (ys[i] - fitted) * (ys[i] - fitted);
        ss_tot += ws[i] * (ys[i] - mean_y) * (ys[i] - mean_y);
    }
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(PowerLawFit {
        slope,
        intercept,
        r2,
        points_used: xs.len(),
    })
}

fn pooled_curve(factor: Factor, pools: BTreeMap<u64, (u64, u64)>) -> ReuseCurve {
    ReuseCurve {
        factor,
        points: pools
            .into_iter()
            .map(|(x, (n_total, n_reused))| ReusePoint {
                x: x as f64,
                n_total,
                n_reused,
            })
            .collect(),
    }
}

/// Pools each (test user, train tag) instance by the tag's training usage
/// count.
pub fn pool_by_frequency(split: &ChronoSplit) -> Result<ReuseCurve> {
    if split.test.is_empty() {
        return Err(Error::InsufficientData("no test users".into()));
    }
    let mut pools: BTreeMap<u64, (u64, u64)> = BTreeMap::new();
    for post in &split.test {
        let mut counts: BTreeMap<TagId, u64> = BTreeMap::new();
        for &i in split.train.user_post_indices(post.user) {
            for &t in split.train.posts()[i].tags() {
                *counts.entry(t).or_insert(0) += 1;
            }
        }
        for (&tag, &count) in &counts {
            let e = pools.entry(count).or_insert((0, 0));
            e.0 += 1;
            e.1 += post.has_tag(tag) as u64;
        }
    }
    Ok(pooled_curve(Factor::Frequency, pools))
}

/// Pools by whole days elapsed since the tag's last training usage,
/// clamped to >= 1 day.
pub fn pool_by_recency(split: &ChronoSplit) -> Result<ReuseCurve> {
    if split.test.is_empty() {
        return Err(Error::InsufficientData("no test users".into()));
    }
    let mut pools: BTreeMap<u64, (u64, u64)> = BTreeMap::new();
    for post in &split.test {
        let mut last_use: BTreeMap<TagId, i64> = BTreeMap::new();
        for &i in split.train.user_post_indices(post.user) {
            let train_post = &split.train.posts()[i];
            for &t in train_post.tags() {
                let e = last_use.entry(t).or_insert(train_post.timestamp);
                *e = (*e).max(train_post.timestamp);
            }
        }
        for (&tag, &last) in &last_use {
            let days = ((post.timestamp - last) / SECONDS_PER_DAY).max(1) as u64;
            let e = pools.entry(days).or_insert((0, 0));
            e.0 += 1;
            e.1 += post.has_tag(tag) as u64;
        }
    }
    Ok(pooled_curve(Factor::Recency, pools))
}

/// Pools by the summed co-occurrence between each candidate tag and the
/// tags other users already assigned to the test post's resource. Posts
/// with no foreign context contribute nothing; the curve may be empty
/// (fully narrow systems).
pub fn pool_by_context(split: &ChronoSplit, cooc: &CoocMatrix) -> Result<ReuseCurve> {
    let mut pools: BTreeMap<u64, (u64, u64)> = BTreeMap::new();
    for post in &split.test {
        let context = split.train.resource_context(post.resource, post.user);
        if context.is_empty() {
            continue;
        }
        let mut vocabulary: BTreeMap<TagId, ()> = BTreeMap::new();
        for &i in split.train.user_post_indices(post.user) {
            for &t in split.train.posts()[i].tags() {
                vocabulary.insert(t, ());
            }
        }
        for &tag in vocabulary.keys() {
            let mut value = 0u64;
            for (&c, &mult) in &context {
                value += mult as u64 * cooc.count(c, tag) as u64;
            }
            if value > 0 {
                let e = pools.entry(value).or_insert((0, 0));
                e.0 += 1;
                e.1 += post.has_tag(tag) as u64;
            }
        }
    }
    Ok(pooled_curve(Factor::Context, pools))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cooc::build_cooccurrence;
    use crate::folksonomy::parse_posts;
    use crate::split::chronological_split;
    use std::io::Cursor;

    fn split_of(text: &str) -> ChronoSplit {
        chronological_split(&parse_posts(Cursor::new(text)).unwrap())
    }

    #[test]
    fn frequency_single_user_reused() {
        // Tag a used 3x in train, present in test: one point (3, 1, 1).
        let split = split_of(concat!(
            "u\tr1\t1\ta\n",
            "u\tr2\t2\ta\n",
            "u\tr3\t3\ta\n",
            "u\tr4\t4\ta\n",
        ));
        let curve = pool_by_frequency(&split).unwrap();
        assert_eq!(
            curve.points,
            vec![ReusePoint {
                x: 3.0,
                n_total: 1,
                n_reused: 1
            }]
        );
        assert_eq!(curve.points[0].probability(), 1.0);
    }

    #[test]
    fn frequency_not_reused_scores_zero() {
        let split = split_of("u\tr1\t1\tb\nu\tr2\t2\tz\n");
        let curve = pool_by_frequency(&split).unwrap();
        assert_eq!(
            curve.points,
            vec![ReusePoint {
                x: 1.0,
                n_total: 1,
                n_reused: 0
            }]
        );
    }

    #[test]
    fn recency_floors_and_clamps_days() {
        let half_day = SECONDS_PER_DAY / 2;
        // Last use half a day before the test post: pooled at 1 day.
        let split = split_of(&format!(
            "u\tr1\t0\ta\nu\tr2\t{half_day}\ta\n"
        ));
        let curve = pool_by_recency(&split).unwrap();
        assert_eq!(curve.points.len(), 1);
        assert_eq!(curve.points[0].x, 1.0);
        assert_eq!(curve.points[0].n_reused, 1);

        // Ten days back, reused.
        let ten = SECONDS_PER_DAY * 10;
        let split = split_of(&format!("u\tr1\t0\ta\nu\tr2\t{ten}\ta\n"));
        let curve = pool_by_recency(&split).unwrap();
        assert_eq!(curve.points[0].x, 10.0);
        assert_eq!(curve.points[0].n_reused, 1);
    }

    #[test]
    fn context_pools_cooccurrence_values() {
        // Tag i co-occurs with context tag a with value 4 (four shared
        // posts); u's test resource carries a from another user.
        let mut text = String::new();
        for n in 0..4 {
            text.push_str(&format!("w{n}\tx{n}\t{}\ta,i\n", n + 1));
        }
        text.push_str("other\trshared\t10\ta\n");
        text.push_str("u\tr0\t11\ti\n");
        text.push_str("u\trshared\t12\ti\n");
        let split = split_of(&text);
        let cooc = build_cooccurrence(&split.train);
        let curve = pool_by_context(&split, &cooc).unwrap();
        assert_eq!(
            curve.points,
            vec![ReusePoint {
                x: 4.0,
                n_total: 1,
                n_reused: 1
            }]
        );
    }

    #[test]
    fn context_empty_for_narrow_data() {
        let split = split_of("u1\tr1\t1\ta\nu1\tr2\t2\tb\nu2\tr3\t3\tc\nu2\tr4\t4\td\n");
        let cooc = build_cooccurrence(&split.train);
        let curve = pool_by_context(&split, &cooc).unwrap();
        assert!(curve.points.is_empty());
        assert!(curve.fit(&FitOptions::default()).is_err());
    }

    #[test]
    fn no_test_users_is_an_error_for_frequency_and_recency() {
        let split = split_of("u1\tr1\t1\ta\nu2\tr2\t2\tb\n");
        assert!(pool_by_frequency(&split).is_err());
        assert!(pool_by_recency(&split).is_err());
    }

    #[test]
    fn exact_power_law_recovers_slope() {
        // p = x^0.5 over x in {0.01, ..} scaled to stay <= 1: use
        // p = (x/100)^0.5 so intercept shifts but slope is 0.5.
        let points: Vec<ReusePoint> = (1..=8)
            .map(|i| {
                let x = i as f64;
                let p = (x / 100.0).sqrt();
                let n_total = 1_000_000u64;
                ReusePoint {
                    x,
                    n_total,
                    n_reused: (p * n_total as f64).round() as u64,
                }
            })
            .collect();
        let fit = loglog_regression(&points).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-3, "slope {}", fit.slope);
        assert!(fit.r2 > 0.999_99);
    }

    #[test]
    fn planted_fractional_negative_slope_recovery() {
        // Points exactly on p = c * x^-1.074 recover the slope with r2 = 1.
        let c = 0.9;
        let xs: [f64; 7] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
        let points: Vec<ReusePoint> = xs
            .iter()
            .map(|&x| {
                let p: f64 = c * x.powf(-1.074);
                // Choose n_total so that n_reused/n_total is *exactly* p in
                // floating point: represent p as a dyadic fraction.
                let n_total = 1u64 << 40;
                let n_reused = (p * n_total as f64) as u64;
                ReusePoint {
                    x,
                    n_total,
                    n_reused,
                }
            })
            .collect();
        let fit = loglog_regression(&points).unwrap();
        assert!((fit.slope - (-1.074)).abs() < 1e-6, "slope {}", fit.slope);
        assert!((fit.r2 - 1.0).abs() < 1e-9, "r2 {}", fit.r2);
    }

    #[test]
    fn insufficient_points_error() {
        assert!(loglog_regression(&[]).is_err());
        let one = [ReusePoint {
            x: 2.0,
            n_total: 5,
            n_reused: 1,
        }];
        assert!(loglog_regression(&one).is_err());
        // Two points but one has p = 0.
        let two = [
            ReusePoint {
                x: 1.0,
                n_total: 5,
                n_reused: 0,
            },
            ReusePoint {
                x: 2.0,
                n_total: 5,
                n_reused: 1,
            },
        ];
        assert!(loglog_regression(&two).is_err());
    }

    #[test]
    fn min_support_filters_points() {
        let points = [
            ReusePoint {
                x: 1.0,
                n_total: 100,
                n_reused: 50,
            },
            ReusePoint {
                x: 2.0,
                n_total: 100,
                n_reused: 60,
            },
            ReusePoint {
                x: 50.0,
                n_total: 1,
                n_reused: 1,
            },
        ];
        let all = fit_points(&points, &FitOptions::default()).unwrap();
        let filtered = fit_points(
            &points,
            &FitOptions {
                min_support: 10,
                weighting: Weighting::Uniform,
            },
        )
        .unwrap();
        assert_eq!(all.points_used, 3);
        assert_eq!(filtered.points_used, 2);
    }

    #[test]
    fn weighted_fit_differs_from_uniform() {
        let points = [
            ReusePoint {
                x: 1.0,
                n_total: 1000,
                n_reused: 100,
            },
            ReusePoint {
                x: 2.0,
                n_total: 1000,
                n_reused: 300,
            },
            ReusePoint {
                x: 4.0,
                n_total: 2,
                n_reused: 2,
            },
        ];
        let uniform = fit_points(&points, &FitOptions::default()).unwrap();
        let weighted = fit_points(
            &points,
            &FitOptions {
                min_support: 1,
                weighting: Weighting::BySupport,
            },
        )
        .unwrap();
        assert!((uniform.slope - weighted.slope).abs() > 1e-6);
    }

    #[test]
    fn rebin_log2_merges_counts() {
        let curve = ReuseCurve {
            factor: Factor::Context,
            points: vec![
                ReusePoint {
                    x: 1.0,
                    n_total: 2,
                    n_reused: 1,
                },
                ReusePoint {
                    x: 2.0,
                    n_total: 3,
                    n_reused: 1,
                },
                ReusePoint {
                    x: 3.0,
                    n_total: 5,
                    n_reused: 2,
                },
                ReusePoint {
                    x: 5.0,
                    n_total: 7,
                    n_reused: 3,
                },
            ],
        };
        let binned = curve.rebin_log2();
        assert_eq!(
            binned.points,
            vec![
                ReusePoint {
                    x: 1.0,
                    n_total: 2,
                    n_reused: 1
                },
                ReusePoint {
                    x: 2.0,
                    n_total: 8,
                    n_reused: 3
                },
                ReusePoint {
                    x: 4.0,
                    n_total: 7,
                    n_reused: 3
                },
            ]
        );
    }

    #[test]
    fn frequency_pooling_conserves_instances() {
        let split = split_of(concat!(
            "u1\tr1\t1\ta,b\n",
            "u1\tr2\t2\tb,c\n",
            "u1\tr3\t3\ta\n",
            "u2\tr4\t4\tx,b\n",
            "u2\tr5\t5\tx,y\n",
        ));
        let curve = pool_by_frequency(&split).unwrap();
        let pooled: u64 = curve.points.iter().map(|p| p.n_total).sum();
        let mut expected = 0u64;
        for post in &split.test {
            let mut vocab = std::collections::BTreeSet::new();
            for &i in split.train.user_post_indices(post.user) {
                vocab.extend(split.train.posts()[i].tags().iter().copied());
            }
            expected += vocab.len() as u64;
        }
        assert_eq!(pooled, expected);
    }

    #[test]
    fn csv_emission_shape() {
        let split = split_of("u\tr1\t1\ta\nu\tr2\t2\ta\n");
        let curve = pool_by_frequency(&split).unwrap();
        let mut out = Vec::new();
        curve.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("x,n_total,n_reused,p\n"));
        assert_eq!(text.lines().count(), 1 + curve.points.len());
    }
}
