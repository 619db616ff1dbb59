//! Growing radial-basis-function expansion.
//!
//! The network stores centers in insertion order together with one
//! coefficient per center and predicts with
//!
//! ```text
//! f(u) = sum_j a_j * k(u, c_j)
//! ```
//!
//! An empty network predicts zero. Centers are never removed.

use std::fmt::Write as _;

use crate::error::{check_dim, Error, Result};
use crate::kernels::{squared_distance, KernelParams};

const SNAPSHOT_HEADER: &str = "krmn-rbf-network v1";

#[derive(Debug, Clone, PartialEq)]
pub struct RbfNetwork {
    kernel: KernelParams,
    dim: Option<usize>,
    /// Row-major center storage, `len() == size * dim`.
    centers: Vec<f64>,
    coefficients: Vec<f64>,
}

impl RbfNetwork {
    pub fn new(kernel: KernelParams) -> Self {
        Self {
            kernel,
            dim: None,
            centers: Vec::new(),
            coefficients: Vec::new(),
        }
    }

    /// An empty network whose center dimension is fixed up front.
    pub fn with_dim(kernel: KernelParams, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("center dimension must be positive"));
        }
        Ok(Self {
            dim: Some(dim),
            ..Self::new(kernel)
        })
    }

    pub fn kernel(&self) -> &KernelParams {
        &self.kernel
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn center(&self, index: usize) -> Option<&[f64]> {
        let dim = self.dim?;
        (index < self.len()).then(|| &self.centers[index * dim..(index + 1) * dim])
    }

    pub fn centers(&self) -> impl Iterator<Item = &[f64]> {
        let dim = self.dim.unwrap_or(1);
        self.centers.chunks_exact(dim)
    }

    fn check_input(&self, u: &[f64]) -> Result<()> {
        match self.dim {
            Some(d) => check_dim(d, u.len()),
            None if u.is_empty() => Err(Error::invalid("input vector must be nonempty")),
            None => Ok(()),
        }
    }

    /// Kernel value between `u` and center `index`. No bounds or dimension checks.
    #[inline]
    pub(crate) fn kernel_to_center(&self, index: usize, u: &[f64]) -> f64 {
        let dim = u.len();
        self.kernel
            .eval_unchecked(u, &self.centers[index * dim..(index + 1) * dim])
    }

    pub fn predict(&self, u: &[f64]) -> Result<f64> {
        if self.is_empty() {
            return Ok(0.0);
        }
        self.check_input(u)?;
        Ok(self.predict_unchecked(u))
    }

    #[inline]
    pub(crate) fn predict_unchecked(&self, u: &[f64]) -> f64 {
        let h = self.kernel.bandwidth();
        self.centers
            .chunks_exact(u.len())
            .zip(&self.coefficients)
            .map(|(c, a)| a * (-h * squared_distance(u, c)).exp())
            .sum()
    }

    pub fn append_center(&mut self, u: &[f64], coefficient: f64) -> Result<()> {
        self.check_input(u)?;
        self.dim.get_or_insert(u.len());
        self.centers.extend_from_slice(u);
        self.coefficients.push(coefficient);
        Ok(())
    }

    pub fn merge_coefficient(&mut self, index: usize, delta: f64) -> Result<()> {
        let size = self.len();
        let a = self.coefficients.get_mut(index).ok_or_else(|| {
            Error::invalid(format!("center index {index} out of range for size {size}"))
        })?;
        *a += delta;
        Ok(())
    }

    /// Textual checkpoint: header, bandwidth, dimension, size, one center per
    /// line (space separated, row-major), then one coefficient per line.
    /// Floats use the shortest representation that round-trips exactly.
    pub fn to_snapshot(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{SNAPSHOT_HEADER}");
        let _ = writeln!(out, "bandwidth {}", self.kernel.bandwidth());
        let _ = writeln!(out, "dimension {}", self.dim.unwrap_or(0));
        let _ = writeln!(out, "size {}", self.len());
        for c in self.centers() {
            let row: Vec<String> = c.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        for a in &self.coefficients {
            let _ = writeln!(out, "{a}");
        }
        out
    }

    pub fn from_snapshot(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::invalid(format!("malformed network snapshot: {msg}"));
        let mut lines = text.lines();
        if lines.next() != Some(SNAPSHOT_HEADER) {
            return Err(bad("missing header"));
        }
        let mut keyed = |key: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| bad(&format!("missing `{key}`")))?;
            line.strip_prefix(key)
                .and_then(|rest| rest.strip_prefix(' '))
                .map(str::to_owned)
                .ok_or_else(|| bad(&format!("expected `{key}`")))
        };
        let parse_f = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("bad number `{s}`")));
        let parse_u = |s: &str| s.trim().parse::<usize>().map_err(|_| bad(&format!("bad count `{s}`")));

        let kernel = KernelParams::new(parse_f(&keyed("bandwidth")?)?)?;
        let dim = parse_u(&keyed("dimension")?)?;
        let size = parse_u(&keyed("size")?)?;
        if size > 0 && dim == 0 {
            return Err(bad("nonempty network with zero dimension"));
        }

        let mut net = if dim == 0 {
            Self::new(kernel)
        } else {
            Self::with_dim(kernel, dim)?
        };
        let mut centers = Vec::with_capacity(size * dim);
        for _ in 0..size {
            let line = lines.next().ok_or_else(|| bad("too few center rows"))?;
            let row = line.split_whitespace().map(parse_f).collect::<Result<Vec<_>>>()?;
            check_dim(dim, row.len())?;
            centers.extend(row);
        }
        let mut coefficients = Vec::with_capacity(size);
        for _ in 0..size {
            let line = lines.next().ok_or_else(|| bad("too few coefficients"))?;
            coefficients.push(parse_f(line)?);
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(bad("trailing content"));
        }
        net.centers = centers;
        net.coefficients = coefficients;
        Ok(net)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::eval_gaussian;
    use proptest::prelude::*;

    fn kp() -> KernelParams {
        KernelParams::new(0.1).unwrap()
    }

    #[test]
    fn empty_network_predicts_zero() {
        let net = RbfNetwork::new(kp());
        assert_eq!(net.predict(&[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert!(net.is_empty());
    }

    #[test]
    fn single_center_at_query() {
        let mut net = RbfNetwork::new(kp());
        net.append_center(&[0.4, -1.0], 0.5).unwrap();
        assert_eq!(net.predict(&[0.4, -1.0]).unwrap(), 0.5);
    }

    #[test]
    fn two_centers_sum_kernel_terms() {
        let k = kp();
        let mut net = RbfNetwork::new(k);
        net.append_center(&[0.0, 0.0], 0.7).unwrap();
        net.append_center(&[3.0, 4.0], -0.2).unwrap();
        let q = [1.0, 1.0];
        let oracle = 0.7 * eval_gaussian(&q, &[0.0, 0.0], &k).unwrap()
            + -0.2 * eval_gaussian(&q, &[3.0, 4.0], &k).unwrap();
        assert!((net.predict(&q).unwrap() - oracle).abs() < 1e-15);
        // distances^2 are 2 and 13
        let closed = 0.7 * (-0.2f64).exp() - 0.2 * (-1.3f64).exp();
        assert!((net.predict(&q).unwrap() - closed).abs() < 1e-15);
    }

    #[test]
    fn append_then_predict() {
        let mut net = RbfNetwork::new(kp());
        net.append_center(&[1.0], 0.3).unwrap();
        assert_eq!(net.len(), 1);
        assert_eq!(net.predict(&[1.0]).unwrap(), 0.3);

        let far = [40.0];
        let before = net.predict(&far).unwrap();
        net.append_center(&[39.0], 1.5).unwrap();
        let term = 1.5 * eval_gaussian(&far, &[39.0], &kp()).unwrap();
        assert!((net.predict(&far).unwrap() - (before + term)).abs() < 1e-15);
    }

    #[test]
    fn append_keeps_order_and_coefficients() {
        let mut net = RbfNetwork::new(kp());
        net.append_center(&[1.0, 2.0], 0.1).unwrap();
        net.append_center(&[3.0, 4.0], 0.2).unwrap();
        assert_eq!(net.center(0).unwrap(), &[1.0, 2.0]);
        assert_eq!(net.center(1).unwrap(), &[3.0, 4.0]);
        assert_eq!(net.coefficients(), &[0.1, 0.2]);
    }

    #[test]
    fn append_rejects_wrong_dim() {
        let mut net = RbfNetwork::new(kp());
        net.append_center(&[1.0, 2.0], 0.1).unwrap();
        assert!(matches!(
            net.append_center(&[1.0], 0.1),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
        assert!(net.predict(&[1.0]).is_err());
    }

    #[test]
    fn merge_adds_delta() {
        let mut net = RbfNetwork::new(kp());
        net.append_center(&[0.0], 0.2).unwrap();
        net.merge_coefficient(0, 0.1).unwrap();
        assert!((net.coefficients()[0] - 0.3).abs() < 1e-15);

        let snapshot = net.clone();
        net.merge_coefficient(0, 0.0).unwrap();
        assert_eq!(net, snapshot);

        assert!(net.merge_coefficient(1, 0.1).is_err());
    }

    #[test]
    fn merge_shifts_prediction_by_kernel_term() {
        let k = kp();
        let mut net = RbfNetwork::new(k);
        net.append_center(&[0.0, 1.0], 0.4).unwrap();
        net.append_center(&[2.0, -1.0], -0.9).unwrap();
        let q = [0.5, 0.5];
        let before = net.predict(&q).unwrap();
        net.merge_coefficient(1, 0.25).unwrap();
        let expected = before + 0.25 * eval_gaussian(&q, &[2.0, -1.0], &k).unwrap();
        assert!((net.predict(&q).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn snapshot_rejects_garbage() {
        assert!(RbfNetwork::from_snapshot("nope").is_err());
        let mut net = RbfNetwork::new(kp());
        net.append_center(&[1.0, 2.0], 0.5).unwrap();
        let text = net.to_snapshot().replace("size 1", "size 2");
        assert!(RbfNetwork::from_snapshot(&text).is_err());
    }

    proptest! {
        #[test]
        fn snapshot_round_trips(
            rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 3), 0..8),
            h in 0.001f64..10.0,
        ) {
            let mut net = RbfNetwork::new(KernelParams::new(h).unwrap());
            for (i, r) in rows.iter().enumerate() {
                net.append_center(r, i as f64 * 0.37 - 1.0 / 3.0).unwrap();
            }
            let back = RbfNetwork::from_snapshot(&net.to_snapshot()).unwrap();
            prop_assert_eq!(back.coefficients(), net.coefficients());
            prop_assert_eq!(back.centers().collect::<Vec<_>>(), net.centers().collect::<Vec<_>>());
            prop_assert_eq!(back.kernel(), net.kernel());
        }

        #[test]
        fn prediction_is_linear_in_coefficients(
            centers in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 2), 1..6),
            a in prop::collection::vec(-1.0f64..1.0, 6),
            b in prop::collection::vec(-1.0f64..1.0, 6),
            q in prop::collection::vec(-2.0f64..2.0, 2),
        ) {
            let build = |coef: &dyn Fn(usize) -> f64| {
                let mut net = RbfNetwork::new(kp());
                for (i, c) in centers.iter().enumerate() {
                    net.append_center(c, coef(i)).unwrap();
                }
                net.predict(&q).unwrap()
            };
            let sum = build(&|i| a[i] + b[i]);
            let split = build(&|i| a[i]) + build(&|i| b[i]);
            prop_assert!((sum - split).abs() < 1e-12);
        }
    }
}
