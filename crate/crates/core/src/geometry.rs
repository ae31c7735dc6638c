//! Point collections, center sets and the k-means risk functions.
//!
//! All collections store coordinates in one flat row-major buffer. A
//! [`Points`] is a borrowed view used by every routine that only reads
//! points, so prefixes of a [`Dataset`] can be processed without copying.

use crate::error::{Error, Result};

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

#[inline]
pub fn sq_euclidean(a: &[f64], b: &[f64]) -> f64 {
    // four independent lanes let the adds pipeline
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            let t = x[l] - y[l];
            acc[l] += t * t;
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| (x - y) * (x - y)).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn check_coords(dim: usize, coords: &[f64]) -> Result<()> {
    if dim == 0 {
        return Err(Error::param("dimension must be positive"));
    }
    if coords.len() % dim != 0 {
        return Err(Error::DimensionMismatch { expected: dim, got: coords.len() % dim });
    }
    if let Some(pos) = coords.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index: pos / dim });
    }
    Ok(())
}

fn flatten(rows: Vec<Vec<f64>>) -> Result<(usize, Vec<f64>)> {
    let dim = rows.first().map(Vec::len).ok_or(Error::Empty("no rows"))?;
    let mut coords = Vec::with_capacity(dim * rows.len());
    for row in rows {
        if row.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: row.len() });
        }
        coords.extend_from_slice(&row);
    }
    Ok((dim, coords))
}

/// Borrowed, read-only view of `len` points of dimension `dim`.
#[derive(Debug, Clone, Copy)]
pub struct Points<'a> {
    dim: usize,
    coords: &'a [f64],
}

impl<'a> Points<'a> {
    pub fn new(dim: usize, coords: &'a [f64]) -> Result<Self> {
        check_coords(dim, coords)?;
        Ok(Self { dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &'a [f64] {
        self.coords
    }

    #[inline]
    pub fn get(&self, i: usize) -> &'a [f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'a, f64> {
        self.coords.chunks_exact(self.dim)
    }

    /// The first `m` points (all of them if `m` exceeds the length).
    pub fn head(&self, m: usize) -> Points<'a> {
        let m = m.min(self.len());
        Points { dim: self.dim, coords: &self.coords[..m * self.dim] }
    }

    pub fn to_dataset(&self) -> Result<Dataset> {
        Dataset::new(self.dim, self.coords.to_vec())
    }

    /// Copy of the points at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Vec<f64> {
        let mut out = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            out.extend_from_slice(self.get(i));
        }
        out
    }
}

/// The sample X_1..X_n: `n >= 1` finite points of dimension `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    coords: Vec<f64>,
    radius: Option<f64>,
}

impl Dataset {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        check_coords(dim, &coords)?;
        if coords.is_empty() {
            return Err(Error::Empty("dataset"));
        }
        Ok(Self { dim, coords, radius: None })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let (dim, coords) = flatten(rows)?;
        Self::new(dim, coords)
    }

    /// Attach a known support radius B (all points within `||x|| <= B`).
    pub fn with_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::param(format!("radius must be positive, got {radius}")));
        }
        self.radius = Some(radius);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> Points<'_> {
        Points { dim: self.dim, coords: &self.coords }
    }

    pub fn head(&self, m: usize) -> Points<'_> {
        self.points().head(m)
    }

    /// Support radius B: the stored bound, or the largest point norm.
    pub fn radius(&self) -> f64 {
        self.radius.unwrap_or_else(|| {
            self.points().iter().map(|p| p.iter().map(|x| x * x).sum::<f64>()).fold(0.0, f64::max).sqrt()
        })
    }

    pub fn explicit_radius(&self) -> Option<f64> {
        self.radius
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        Dataset::new(self.dim, self.points().select(indices))
    }
}

impl<'a> From<&'a Dataset> for Points<'a> {
    fn from(d: &'a Dataset) -> Self {
        d.points()
    }
}

/// A set of `k >= 1` centers of a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Centers {
    dim: usize,
    coords: Vec<f64>,
}

impl Centers {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        check_coords(dim, &coords)?;
        if coords.is_empty() {
            return Err(Error::Empty("centers"));
        }
        Ok(Self { dim, coords })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let (dim, coords) = flatten(rows)?;
        Self::new(dim, coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn center(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub(crate) fn center_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.iter().map(<[f64]>::to_vec).collect()
    }

    /// Index and squared distance of the nearest center; ties go to the
    /// lowest index. `x` must have the centers' dimension.
    #[inline]
    pub fn nearest(&self, x: &[f64]) -> (usize, f64) {
        debug_assert_eq!(x.len(), self.dim);
        let mut best = (0, f64::INFINITY);
        for (i, c) in self.iter().enumerate() {
            let d2 = sq_euclidean(x, c);
            if d2 < best.1 {
                best = (i, d2);
            }
        }
        best
    }
}

/// Points with nonnegative weights: a coreset, or a uniformly weighted
/// subsample.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSet {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedSet {
    pub fn new(dim: usize, coords: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        check_coords(dim, &coords)?;
        let len = coords.len() / dim;
        if len != weights.len() {
            return Err(Error::InvalidWeights(format!("{} points but {} weights", len, weights.len())));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidWeights(format!("weight {w} is not a finite nonnegative number")));
        }
        if !weights.iter().any(|&w| w > 0.0) {
            return Err(Error::InvalidWeights("all weights are zero".into()));
        }
        Ok(Self { dim, coords, weights })
    }

    /// Every point weighted `1/len`, so the weighted risk equals the
    /// empirical risk.
    pub fn uniform(points: Points<'_>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("points"));
        }
        let w = 1.0 / points.len() as f64;
        Self::new(points.dim(), points.coords().to_vec(), vec![w; points.len()])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn points(&self) -> Points<'_> {
        Points { dim: self.dim, coords: &self.coords }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().copied().collect::<CompensatedSum>().value()
    }
}

/// `d²(c, x) = min_i ||c_i - x||²`.
pub fn squared_dist(x: &[f64], centers: &Centers) -> Result<f64> {
    if x.len() != centers.dim() {
        return Err(Error::DimensionMismatch { expected: centers.dim(), got: x.len() });
    }
    Ok(centers.nearest(x).1)
}

/// Empirical risk `R_n(c) = (1/n) Σ d²(c, X_i)`.
pub fn empirical_risk<'a>(points: impl Into<Points<'a>>, centers: &Centers) -> Result<f64> {
    let points = points.into();
    if points.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    if points.dim() != centers.dim() {
        return Err(Error::DimensionMismatch { expected: centers.dim(), got: points.dim() });
    }
    let total: CompensatedSum = points.iter().map(|x| centers.nearest(x).1).collect();
    Ok(total.value() / points.len() as f64)
}

/// Weighted risk `Σ_j w_j d²(c, Y_j)`: a sum, not a mean.
pub fn weighted_risk(ws: &WeightedSet, centers: &Centers) -> Result<f64> {
    if ws.dim() != centers.dim() {
        return Err(Error::DimensionMismatch { expected: centers.dim(), got: ws.dim() });
    }
    let total: CompensatedSum = ws
        .points()
        .iter()
        .zip(ws.weights())
        .filter(|(_, &w)| w > 0.0)
        .map(|(x, &w)| w * centers.nearest(x).1)
        .collect();
    Ok(total.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn centers(rows: &[&[f64]]) -> Centers {
        Centers::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn data(rows: &[&[f64]]) -> Dataset {
        Dataset::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn squared_dist_examples() {
        let c = centers(&[&[0.0, 0.0], &[3.0, 4.0]]);
        assert_eq!(squared_dist(&[0.0, 0.0], &c).unwrap(), 0.0);
        assert_eq!(squared_dist(&[3.0, 4.0], &centers(&[&[0.0, 0.0]])).unwrap(), 25.0);
        let tie = centers(&[&[0.0, 0.0], &[2.0, 2.0]]);
        assert_eq!(squared_dist(&[1.0, 1.0], &tie).unwrap(), 2.0);
        assert_eq!(tie.nearest(&[1.0, 1.0]).0, 0);
    }

    #[test]
    fn squared_dist_dimension_mismatch() {
        let c = centers(&[&[0.0, 0.0]]);
        assert!(matches!(squared_dist(&[1.0], &c), Err(Error::DimensionMismatch { expected: 2, got: 1 })));
    }

    #[test]
    fn empirical_risk_examples() {
        let c = centers(&[&[1.0, 0.0]]);
        assert_eq!(empirical_risk(&data(&[&[0.0, 0.0], &[2.0, 0.0]]), &c).unwrap(), 1.0);
        assert_eq!(empirical_risk(&data(&[&[0.0, 0.0]]), &centers(&[&[0.0, 0.0]])).unwrap(), 0.0);
        let r = empirical_risk(&data(&[&[0.0], &[1.0], &[2.0]]), &centers(&[&[1.0]])).unwrap();
        assert!((r - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(matches!(Dataset::new(2, vec![]), Err(Error::Empty(_))));
        let d = data(&[&[0.0]]);
        assert!(matches!(empirical_risk(d.head(0), &centers(&[&[0.0]])), Err(Error::Empty(_))));
    }

    #[test]
    fn invariants_enforced_on_construction() {
        assert!(matches!(Dataset::new(2, vec![1.0, f64::NAN]), Err(Error::NonFinite { index: 0 })));
        assert!(Dataset::from_rows(vec![vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(Centers::new(2, vec![0.0, f64::INFINITY]).is_err());
        assert!(WeightedSet::new(1, vec![0.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(WeightedSet::new(1, vec![0.0, 1.0], vec![-1.0, 2.0]).is_err());
        assert!(WeightedSet::new(1, vec![0.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn weighted_risk_examples() {
        let ws = WeightedSet::new(1, vec![0.0, 2.0], vec![0.5, 0.5]).unwrap();
        assert_eq!(weighted_risk(&ws, &centers(&[&[1.0]])).unwrap(), 1.0);
        let ws = WeightedSet::new(1, vec![0.0, 2.0], vec![1.0, 0.0]).unwrap();
        assert_eq!(weighted_risk(&ws, &centers(&[&[0.0]])).unwrap(), 0.0);
    }

    #[test]
    fn weighted_risk_matches_scalar_recomputation() {
        // Six 2-D points with positive weights, checked against a plain
        // loop written independently of the library path.
        let pts: [[f64; 2]; 6] = [[0.3, -1.2], [2.5, 0.7], [-0.4, 0.0], [1.1, 1.9], [3.0, -2.2], [-1.7, 0.6]];
        let w = [0.11, 0.42, 0.05, 0.97, 0.33, 0.21];
        let cs = [[0.0, 0.0], [2.0, 1.0]];
        let mut expected = 0.0;
        for (p, wi) in pts.iter().zip(w) {
            let mut best = f64::MAX;
            for c in &cs {
                let d = (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2);
                best = best.min(d);
            }
            expected += wi * best;
        }
        let ws = WeightedSet::new(2, pts.iter().flatten().copied().collect(), w.to_vec()).unwrap();
        let c = Centers::new(2, cs.iter().flatten().copied().collect()).unwrap();
        assert!((weighted_risk(&ws, &c).unwrap() - expected).abs() <= 1e-14 * expected);
    }

    #[test]
    fn radius_defaults_to_max_norm() {
        let d = data(&[&[3.0, 4.0], &[1.0, 0.0]]);
        assert_eq!(d.radius(), 5.0);
        assert_eq!(d.with_radius(10.0).unwrap().radius(), 10.0);
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let mut acc = CompensatedSum::new();
        acc.add(1e16);
        for _ in 0..1000 {
            acc.add(1.0);
        }
        acc.add(-1e16);
        assert_eq!(acc.value(), 1000.0);
    }

    fn point_cloud() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>)> {
        (1usize..4, 1usize..20, 1usize..5).prop_flat_map(|(d, n, k)| {
            (Just(d), prop::collection::vec(-10.0..10.0f64, n * d), prop::collection::vec(-10.0..10.0f64, k * d))
        })
    }

    proptest! {
        #[test]
        fn empirical_equals_uniform_weighted((d, xs, cs) in point_cloud()) {
            let data = Dataset::new(d, xs).unwrap();
            let c = Centers::new(d, cs).unwrap();
            let a = empirical_risk(&data, &c).unwrap();
            let b = weighted_risk(&WeightedSet::uniform(data.points()).unwrap(), &c).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
        }

        #[test]
        fn adding_a_center_never_increases_risk((d, xs, cs) in point_cloud(), extra in prop::collection::vec(-10.0..10.0f64, 3)) {
            let data = Dataset::new(d, xs).unwrap();
            let c = Centers::new(d, cs.clone()).unwrap();
            let mut more = cs;
            more.extend_from_slice(&extra[..d]);
            let c2 = Centers::new(d, more).unwrap();
            for x in data.points().iter() {
                prop_assert!(squared_dist(x, &c2).unwrap() <= squared_dist(x, &c).unwrap());
            }
            prop_assert!(empirical_risk(&data, &c2).unwrap() <= empirical_risk(&data, &c).unwrap());
        }

        #[test]
        fn risk_is_translation_invariant((d, xs, cs) in point_cloud(), shift in prop::collection::vec(-50.0..50.0f64, 3)) {
            let data = Dataset::new(d, xs.clone()).unwrap();
            let c = Centers::new(d, cs.clone()).unwrap();
            let moved: Vec<f64> = xs.iter().enumerate().map(|(i, x)| x + shift[i % d]).collect();
            let moved_c: Vec<f64> = cs.iter().enumerate().map(|(i, x)| x + shift[i % d]).collect();
            let a = empirical_risk(&data, &c).unwrap();
            let b = empirical_risk(&Dataset::new(d, moved).unwrap(), &Centers::new(d, moved_c).unwrap()).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1e-6));
        }

        #[test]
        fn squared_dist_zero_only_on_centers((d, xs, cs) in point_cloud()) {
            let c = Centers::new(d, cs).unwrap();
            for x in xs.chunks_exact(d) {
                let v = squared_dist(x, &c).unwrap();
                let on_center = c.iter().any(|ci| ci == x);
                prop_assert!(v >= 0.0);
                prop_assert_eq!(v == 0.0, on_center);
            }
            for ci in c.iter() {
                prop_assert_eq!(squared_dist(ci, &c).unwrap(), 0.0);
            }
        }
    }
}
