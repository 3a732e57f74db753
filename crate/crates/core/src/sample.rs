//! Sample ingestion, quartiles, the classical boxplot rule and the
//! lower-tail transforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest sample the boxplot and tail machinery accept.
pub const MIN_SAMPLE_SIZE: usize = 3;

/// Where the values of an [`OrderedSample`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Raw,
    Dithered { halfwidth: f64 },
    TransformedReciprocal,
    TransformedNegated,
}

/// How lower-tail analysis is mapped onto the upper tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerTransform {
    /// Reciprocal when every value is positive, negation otherwise.
    #[default]
    Auto,
    Reciprocal,
    Negate,
}

/// A finite sample sorted in ascending order.
///
/// `origin()[i]` is the position in the caller's raw input of the value at
/// sorted position `i`. Transformed samples keep pointing at the raw input
/// of the sample they were derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedSample {
    values: Vec<f64>,
    origin: Vec<usize>,
    provenance: Provenance,
}

impl OrderedSample {
    /// Sorts `values` without dithering.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        ingest_vec(values, 0.0, 0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn origin(&self) -> &[usize] {
        &self.origin
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// The j-th largest observation `X_{n-j+1,n}`, for `1 <= j <= n`.
    #[inline]
    pub fn top(&self, j: usize) -> f64 {
        self.values[self.values.len() - j]
    }

    /// Replaces the values while keeping order-statistic positions and
    /// provenance. Used by outlier injection, which perturbs the top block in
    /// place.
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        debug_assert_eq!(values.len(), self.values.len());
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::argument("perturbed values are no longer sorted"));
        }
        Ok(Self {
            values,
            origin: self.origin.clone(),
            provenance: self.provenance,
        })
    }
}

/// Validates, optionally dithers and sorts a raw sample.
///
/// With `dither_halfwidth > 0` each value receives an independent
/// `U(-h, h)` perturbation drawn from a generator seeded with `seed`, before
/// sorting.
pub fn ingest(raw: &[f64], dither_halfwidth: f64, seed: u64) -> Result<OrderedSample> {
    ingest_vec(raw.to_vec(), dither_halfwidth, seed)
}

fn ingest_vec(mut values: Vec<f64>, dither_halfwidth: f64, seed: u64) -> Result<OrderedSample> {
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    if values.len() < MIN_SAMPLE_SIZE {
        return Err(Error::TooSmall {
            got: values.len(),
            min: MIN_SAMPLE_SIZE,
        });
    }
    if !(dither_halfwidth.is_finite() && dither_halfwidth >= 0.0) {
        return Err(Error::argument(format!(
            "dither half-width must be finite and non-negative, got {dither_halfwidth}"
        )));
    }
    let provenance = if dither_halfwidth > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in values.iter_mut() {
            *v += rng.random_range(-dither_halfwidth..dither_halfwidth);
        }
        Provenance::Dithered {
            halfwidth: dither_halfwidth,
        }
    } else {
        Provenance::Raw
    };

    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let sorted = order.iter().map(|&i| values[i]).collect();
    Ok(OrderedSample {
        values: sorted,
        origin: order,
        provenance,
    })
}

/// Maps the lower tail onto the upper tail: `1/x` for positive samples,
/// `-x` otherwise (unless forced by `mode`).
///
/// The result is sorted ascending, so its j-th largest value corresponds to
/// the j-th smallest original: transformed position `i` holds the image of
/// original position `n - 1 - i`.
pub fn transform_lower(s: &OrderedSample, mode: LowerTransform) -> Result<OrderedSample> {
    let reciprocal = match mode {
        LowerTransform::Auto => s.min() > 0.0,
        LowerTransform::Reciprocal => {
            if s.min() <= 0.0 {
                return Err(Error::argument(format!(
                    "reciprocal transform needs positive data, minimum is {}",
                    s.min()
                )));
            }
            true
        }
        LowerTransform::Negate => false,
    };
    let n = s.len();
    let values = (0..n)
        .map(|i| {
            let x = s.values[n - 1 - i];
            if reciprocal {
                1.0 / x
            } else {
                -x
            }
        })
        .collect();
    let origin = (0..n).map(|i| s.origin[n - 1 - i]).collect();
    Ok(OrderedSample {
        values,
        origin,
        provenance: if reciprocal {
            Provenance::TransformedReciprocal
        } else {
            Provenance::TransformedNegated
        },
    })
}

/// Quartiles and the classical 1.5 IQR fences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuartileSummary {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub iqr: f64,
    pub lower_fence: f64,
    pub upper_fence: f64,
}

impl QuartileSummary {
    fn from_quartiles(q1: f64, median: f64, q3: f64) -> Self {
        let iqr = q3 - q1;
        Self {
            q1,
            median,
            q3,
            iqr,
            lower_fence: q1 - 1.5 * iqr,
            upper_fence: q3 + 1.5 * iqr,
        }
    }
}

/// Sample quantile by linear interpolation between order statistics at
/// position `1 + p (n - 1)` (R's type 7).
pub fn quantile(s: &OrderedSample, p: f64) -> f64 {
    let v = &s.values;
    let h = p.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    let frac = h - lo as f64;
    v[lo] + frac * (v[hi] - v[lo])
}

pub fn quartiles(s: &OrderedSample) -> QuartileSummary {
    QuartileSummary::from_quartiles(quantile(s, 0.25), quantile(s, 0.5), quantile(s, 0.75))
}

/// Classical boxplot flags, per sorted position: true when the value lies
/// outside the open interval between the fences.
pub fn classical_flags(s: &OrderedSample) -> Vec<bool> {
    let q = quartiles(s);
    s.values
        .iter()
        .map(|&x| x < q.lower_fence || x > q.upper_fence)
        .collect()
}

/// Population probability of exceeding the classical upper fence,
/// `P(X > Q3 + 1.5 IQR)`, from a quantile function and a survival function.
pub fn fence_exceedance_probability<Q, S>(quantile: Q, survival: S) -> f64
where
    Q: Fn(f64) -> f64,
    S: Fn(f64) -> f64,
{
    let q = QuartileSummary::from_quartiles(quantile(0.25), quantile(0.5), quantile(0.75));
    survival(q.upper_fence)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn ingest_sorts() {
        let s = ingest(&[3.0, 1.0, 2.0], 0.0, 0).unwrap();
        assert_eq!(s.values(), &[1.0, 2.0, 3.0]);
        assert_eq!(s.origin(), &[1, 2, 0]);
        assert_eq!(s.provenance(), Provenance::Raw);
    }

    #[test]
    fn dither_breaks_ties_within_halfwidth() {
        let s = ingest(&[1.0, 1.0, 1.0], 0.01, 7).unwrap();
        let v = s.values();
        assert!(v[0] < v[1] && v[1] < v[2]);
        assert!(v.iter().all(|x| (x - 1.0).abs() <= 0.01));
        assert_eq!(s.provenance(), Provenance::Dithered { halfwidth: 0.01 });
    }

    #[test]
    fn ingest_rejects_bad_input() {
        assert_eq!(
            ingest(&[1.0, 2.0, f64::NAN], 0.0, 0),
            Err(Error::NonFinite { index: 2 })
        );
        assert_eq!(
            ingest(&[1.0, f64::INFINITY, 0.0], 0.0, 0),
            Err(Error::NonFinite { index: 1 })
        );
        assert_eq!(
            ingest(&[1.0, 2.0], 0.0, 0),
            Err(Error::TooSmall { got: 2, min: 3 })
        );
        assert!(matches!(
            ingest(&[1.0, 2.0, 3.0], -0.1, 0),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn reciprocal_and_negation_paths() {
        let s = ingest(&[1.0, 2.0, 4.0], 0.0, 0).unwrap();
        let t = transform_lower(&s, LowerTransform::Auto).unwrap();
        assert_eq!(t.values(), &[0.25, 0.5, 1.0]);
        assert_eq!(t.provenance(), Provenance::TransformedReciprocal);
        // top of the transform is the minimum of the original
        assert_eq!(t.origin()[2], s.origin()[0]);

        let s = ingest(&[-3.0, -1.0, 2.0], 0.0, 0).unwrap();
        let t = transform_lower(&s, LowerTransform::Auto).unwrap();
        assert_eq!(t.values(), &[-2.0, 1.0, 3.0]);
        assert_eq!(t.provenance(), Provenance::TransformedNegated);
        assert_eq!(t.top(1), -s.min());

        assert!(transform_lower(&s, LowerTransform::Reciprocal).is_err());
        let pos = ingest(&[1.0, 2.0, 4.0], 0.0, 0).unwrap();
        let forced = transform_lower(&pos, LowerTransform::Negate).unwrap();
        assert_eq!(forced.values(), &[-4.0, -2.0, -1.0]);
    }

    #[test]
    fn type7_quartiles() {
        let q = quartiles(&ingest(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.0, 0).unwrap());
        assert_eq!((q.q1, q.median, q.q3, q.iqr), (2.0, 3.0, 4.0, 2.0));
        assert_eq!((q.lower_fence, q.upper_fence), (-1.0, 7.0));

        // positions 1.75 and 3.25 on [1,2,3,4]
        let q = quartiles(&ingest(&[1.0, 2.0, 3.0, 4.0], 0.0, 0).unwrap());
        assert_abs_diff_eq!(q.q1, 1.75, epsilon = 1e-15);
        assert_abs_diff_eq!(q.q3, 3.25, epsilon = 1e-15);

        let q = quartiles(&ingest(&[5.0, 5.0, 5.0], 0.0, 0).unwrap());
        assert_eq!((q.iqr, q.lower_fence, q.upper_fence), (0.0, 5.0, 5.0));
    }

    #[test]
    fn classical_rule() {
        let s = ingest(&[1.0, 2.0, 3.0, 4.0, 100.0], 0.0, 0).unwrap();
        assert_eq!(classical_flags(&s), vec![false, false, false, false, true]);

        let grid: Vec<f64> = (1..=9).map(f64::from).collect();
        let s = ingest(&grid, 0.0, 0).unwrap();
        assert!(classical_flags(&s).iter().all(|f| !f));

        // values sitting exactly on a degenerate fence are inside
        let s = ingest(&[5.0, 5.0, 5.0], 0.0, 0).unwrap();
        assert!(classical_flags(&s).iter().all(|f| !f));
    }

    #[test]
    fn fence_probabilities_from_closed_forms() {
        // exponential: Q1 = ln(4/3), Q3 = ln 4, fence = ln 4 + 1.5 ln 3
        let exp = fence_exceedance_probability(|p| -(1.0 - p).ln(), |x| (-x).exp());
        assert_abs_diff_eq!(exp, 0.25 * 3f64.powf(-1.5), epsilon = 1e-14);

        // Pareto(alpha): Q(p) = (1-p)^(-1/alpha)
        let pareto = |alpha: f64| {
            fence_exceedance_probability(
                move |p| (1.0 - p).powf(-1.0 / alpha),
                move |x| x.powf(-alpha),
            )
        };
        assert_abs_diff_eq!(pareto(1.0), 0.125, epsilon = 1e-14);
        assert_abs_diff_eq!(pareto(4.0), 0.073, epsilon = 1e-3);
    }

    proptest! {
        #[test]
        fn sorting_is_idempotent(raw in prop::collection::vec(-1e6f64..1e6, 3..60)) {
            let once = ingest(&raw, 0.0, 0).unwrap();
            let twice = ingest(once.values(), 0.0, 0).unwrap();
            prop_assert_eq!(once.values(), twice.values());
        }

        #[test]
        fn dithering_is_deterministic_and_bounded(
            raw in prop::collection::vec(-100f64..100.0, 3..40),
            h in 1e-4f64..1.0,
            seed in any::<u64>(),
        ) {
            let a = ingest(&raw, h, seed).unwrap();
            let b = ingest(&raw, h, seed).unwrap();
            prop_assert_eq!(&a, &b);
            for (i, &x) in a.values().iter().enumerate() {
                prop_assert!((x - raw[a.origin()[i]]).abs() <= h);
            }
        }

        #[test]
        fn lower_transform_reverses_order(
            raw in prop::collection::vec(-100f64..100.0, 3..40),
            seed in any::<u64>(),
        ) {
            let s = ingest(&raw, 0.01, seed).unwrap();
            let t = transform_lower(&s, LowerTransform::Auto).unwrap();
            let n = s.len();
            for i in 0..n {
                prop_assert_eq!(t.origin()[i], s.origin()[n - 1 - i]);
            }
            prop_assert!(t.values().windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn quartile_invariants(raw in prop::collection::vec(-1e3f64..1e3, 3..80)) {
            let q = quartiles(&ingest(&raw, 0.0, 0).unwrap());
            prop_assert!(q.q1 <= q.median && q.median <= q.q3);
            prop_assert!(q.iqr >= 0.0);
            prop_assert_eq!(q.upper_fence, q.q3 + 1.5 * q.iqr);
            prop_assert_eq!(q.lower_fence, q.q1 - 1.5 * q.iqr);
        }
    }
}
