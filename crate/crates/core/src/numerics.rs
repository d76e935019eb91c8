//! Adaptive Gauss-Kronrod quadrature with caller-supplied breakpoints, a
//! nested 2-D driver, and empirical-distribution utilities.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{invalid, Error, Result};

/// Tolerances and known non-smooth abscissae for one quadrature call.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Points where the integrand has kinks or jumps. Points outside the
    /// integration interval are ignored.
    pub breakpoints: Vec<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_subdivisions: 4096,
            breakpoints: Vec::new(),
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    pub fn with_breakpoints(&self, breakpoints: Vec<f64>) -> Self {
        Self {
            breakpoints,
            ..self.clone()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(invalid("quadrature tolerances must be positive"));
        }
        if self.max_subdivisions < 16 {
            return Err(invalid("max_subdivisions must be at least 16"));
        }
        Ok(())
    }
}

/// Value, error estimate and panel count of a converged quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

// 15-point Kronrod extension of the 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    splittable: bool,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // unsplittable panels sink to the bottom of the heap
        self.splittable
            .cmp(&other.splittable)
            .then(self.error.total_cmp(&other.error))
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    let abs_int: f64 = {
        let mut s = WGK[7] * fc.abs();
        for j in 0..7 {
            s += WGK[j] * (fv1[j].abs() + fv2[j].abs());
        }
        s * half.abs()
    };
    let roundoff = 50.0 * f64::EPSILON * abs_int;
    if roundoff > f64::MIN_POSITIVE {
        error = error.max(roundoff);
    }
    (value, error)
}

fn make_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let (value, error) = gauss_kronrod(f, a, b);
    let mid = 0.5 * (a + b);
    let splittable = mid > a && mid < b && (b - a) > 1e-14 * (a.abs() + b.abs()).max(1e-300);
    Panel {
        a,
        b,
        value,
        error,
        splittable,
    }
}

/// Adaptive quadrature returning the estimate together with its error bound.
pub fn integrate_1d_detailed<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Quadrature> {
    spec.validate()?;
    if a.is_nan() || b.is_nan() || a > b {
        return Err(invalid(format!("integration interval [{a}, {b}] is empty or reversed")));
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
            panels: 0,
        });
    }

    let mut cuts: Vec<f64> = spec
        .breakpoints
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut heap = BinaryHeap::new();
    let mut lo = a;
    for &c in cuts.iter().chain(std::iter::once(&b)) {
        heap.push(make_panel(&f, lo, c));
        lo = c;
    }

    loop {
        let (total, err): (f64, f64) = heap
            .iter()
            .fold((0.0, 0.0), |(s, e), p| (s + p.value, e + p.error));
        let target = spec.abs_tol.max(spec.rel_tol * total.abs());
        if err <= target {
            return Ok(Quadrature {
                value: total,
                error: err,
                panels: heap.len(),
            });
        }
        let worst = heap.peek().expect("at least one panel");
        if heap.len() >= spec.max_subdivisions || !worst.splittable {
            return Err(Error::NumericFailure {
                estimate: total,
                error_bound: err,
                subdivisions: heap.len(),
            });
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(make_panel(&f, worst.a, mid));
        heap.push(make_panel(&f, mid, worst.b));
    }
}

/// Adaptive composite Gauss-Kronrod quadrature of `f` over `[a, b]`.
pub fn integrate_1d<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    integrate_1d_detailed(f, a, b, spec).map(|q| q.value)
}

/// Inner integration domain for a fixed outer abscissa.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InnerSupport {
    /// Disjoint `(lower, upper)` intervals; empty or reversed ones are skipped.
    pub intervals: Vec<(f64, f64)>,
    /// Kinks of the inner integrand.
    pub breakpoints: Vec<f64>,
}

impl From<Vec<(f64, f64)>> for InnerSupport {
    fn from(intervals: Vec<(f64, f64)>) -> Self {
        Self {
            intervals,
            breakpoints: Vec::new(),
        }
    }
}

/// Iterated integral `int_{r0}^{r1} sum_k int_{I_k(r)} f(r, s) ds dr`.
///
/// `spec` governs the outer integral; inner integrals use the same
/// tolerances with their own breakpoints.
pub fn integrate_2d_nested<F, S>(
    f: F,
    r_interval: (f64, f64),
    inner_support: S,
    spec: &QuadratureSpec,
) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
    S: Fn(f64) -> InnerSupport,
{
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let inner_spec = QuadratureSpec {
        breakpoints: Vec::new(),
        ..spec.clone()
    };
    let outer = |r: f64| -> f64 {
        let support = inner_support(r);
        let local = inner_spec.with_breakpoints(support.breakpoints);
        let mut acc = 0.0;
        for &(lo, hi) in &support.intervals {
            if !(hi > lo) {
                continue;
            }
            match integrate_1d(|s| f(r, s), lo, hi, &local) {
                Ok(v) => acc += v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                }
            }
        }
        acc
    };
    let value = integrate_1d(outer, r_interval.0, r_interval.1, spec)?;
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// Sorted sample set supporting empirical CDF, quantile and KS queries.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    sorted: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(invalid("empirical distribution needs at least one sample"));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(invalid("samples must not contain NaN"));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { sorted: samples })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// Right-continuous empirical CDF.
    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }

    /// Smallest sample `s` with empirical CDF at least `p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.sorted.len();
        let k = (p.clamp(0.0, 1.0) * n as f64).ceil() as usize;
        self.sorted[k.clamp(1, n) - 1]
    }

    /// Kolmogorov-Smirnov distance to `cdf`.
    ///
    /// Tied samples are grouped, so an atom in `cdf` at a repeated sample
    /// value is compared against the jump of the empirical CDF rather than
    /// against each tied order statistic. The left limit of `cdf` is taken
    /// at the next representable value below each sample.
    pub fn ks_distance<F: Fn(f64) -> f64>(&self, cdf: F) -> f64 {
        let n = self.sorted.len() as f64;
        let mut sup: f64 = 0.0;
        let mut i = 0;
        while i < self.sorted.len() {
            let v = self.sorted[i];
            let mut j = i;
            while j < self.sorted.len() && self.sorted[j] == v {
                j += 1;
            }
            let below = i as f64 / n;
            let at = j as f64 / n;
            let f_at = cdf(v);
            let f_below = if j - i == 1 { f_at } else { cdf(v.next_down()) };
            sup = sup.max((at - f_at).abs()).max((below - f_below).abs());
            i = j;
        }
        sup
    }
}

impl EmpiricalDistribution {
    /// Left limit of the empirical CDF at `x`.
    pub fn cdf_below(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s < x) as f64 / self.sorted.len() as f64
    }

    /// Upper bound on the KS distance from a monotone CDF known only at
    /// `nodes = (x, F(x-), F(x))`, sorted by `x`.
    ///
    /// Between consecutive nodes both CDFs are non-decreasing, so the gap is
    /// bounded by the node values. The bound is tight when the nodes are
    /// dense in the empirical quantiles.
    pub fn ks_upper_bound(&self, nodes: &[(f64, f64, f64)]) -> f64 {
        let mut sup: f64 = 0.0;
        let first = match nodes.first() {
            Some(n) => n,
            None => return 1.0,
        };
        sup = sup.max(self.cdf_below(first.0)).max(first.1);
        for (k, &(x, left, right)) in nodes.iter().enumerate() {
            sup = sup
                .max((self.cdf(x) - right).abs())
                .max((self.cdf_below(x) - left).abs());
            if let Some(&(xn, left_n, _)) = nodes.get(k + 1) {
                sup = sup
                    .max(self.cdf_below(xn) - right)
                    .max(left_n - self.cdf(x));
            }
        }
        let &(x_last, _, f_last) = nodes.last().expect("non-empty");
        sup.max(1.0 - f_last).max(1.0 - self.cdf(x_last))
    }
}

/// KS distance between `samples` and an analytical CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &EmpiricalDistribution, cdf: F) -> f64 {
    samples.ks_distance(cdf)
}

/// Total-variation distance `0.5 * sum |p_k - q_k|` between two PMFs on a common support.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "PMFs must share a support");
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
