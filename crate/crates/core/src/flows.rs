//! Catalog of exact Ricci-flow solutions with closed-form curvature data.
//!
//! Every chart is conformally flat, g(t) = e^{2φ(x,t)} δ, so curvature and
//! its derivatives are available in closed form.  Sample points are drawn
//! from a seeded disk of chart radius 0.8, clear of chart-boundary
//! differencing artifacts.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{laplacian, partial_d1, DiffConfig, MetricField, TensorField};
use crate::linalg::derive_seed;
use crate::tensor::CurvatureTensor;

pub const CHART_RADIUS: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    /// ℝⁿ with the static flat metric.
    Flat { n: usize },
    /// Shrinking round sphere: g(t) = (1 − 2(n−1)K₀ t) g_round in a
    /// stereographic chart; collapses at t = 1/(2(n−1)K₀).
    Sphere { n: usize, k0: f64 },
    /// Expanding hyperbolic space: g(t) = (1 + 2(n−1) t) g_hyp in the
    /// Poincaré ball chart.
    Hyperbolic { n: usize },
    /// The steady 2-d soliton g(t) = (dx² + dy²)/(e^{4t} + x² + y²).
    Cigar,
}

/// Closed-form geometric data of a flow at one point (x, t).
#[derive(Debug, Clone)]
pub struct CurvatureData {
    pub n: usize,
    pub t: f64,
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    /// Spatial Christoffel symbols of g(t), indexed (k, i, j).
    pub christoffel: Vec<f64>,
    pub ric: DMatrix<f64>,
    pub scalar: f64,
    /// ∂_i R
    pub grad_scalar: Vec<f64>,
    /// ∇_i ∇_j R
    pub hess_scalar: DMatrix<f64>,
    /// ∇_k Ric_ij, indexed (k, i, j)
    pub nabla_ric: Vec<f64>,
    /// Δ Ric_ij
    pub lap_ric: DMatrix<f64>,
    pub riemann: CurvatureTensor,
    /// ∂R/∂t
    pub scalar_dt: f64,
}

impl CurvatureData {
    pub fn ric_upper(&self) -> DMatrix<f64> {
        &self.g_inv * &self.ric * &self.g_inv
    }

    /// R_i^j = g^{jk} R_ik
    pub fn ric_mixed(&self) -> DMatrix<f64> {
        &self.ric * &self.g_inv
    }

    pub fn grad_scalar_sq(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += self.g_inv[(i, j)] * self.grad_scalar[i] * self.grad_scalar[j];
            }
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct FlowModel {
    kind: ModelKind,
}

impl FlowModel {
    pub fn flat(n: usize) -> Self {
        Self {
            kind: ModelKind::Flat { n },
        }
    }

    pub fn sphere(n: usize, k0: f64) -> Self {
        Self {
            kind: ModelKind::Sphere { n, k0 },
        }
    }

    pub fn hyperbolic(n: usize) -> Self {
        Self {
            kind: ModelKind::Hyperbolic { n },
        }
    }

    pub fn cigar() -> Self {
        Self {
            kind: ModelKind::Cigar,
        }
    }

    /// The model catalog exposed by the CLI.
    pub fn catalog() -> Vec<FlowModel> {
        vec![
            Self::flat(2),
            Self::sphere(3, 1.0),
            Self::hyperbolic(2),
            Self::cigar(),
        ]
    }

    pub fn by_name(name: &str) -> Result<FlowModel> {
        Self::catalog()
            .into_iter()
            .find(|m| m.name() == name)
            .ok_or_else(|| Error::UnknownModel(name.to_string()))
    }

    pub fn name(&self) -> String {
        match self.kind {
            ModelKind::Flat { .. } => "flat".into(),
            ModelKind::Sphere { .. } => "sphere".into(),
            ModelKind::Hyperbolic { .. } => "hyperbolic".into(),
            ModelKind::Cigar => "cigar".into(),
        }
    }

    pub fn describe(&self) -> String {
        match self.kind {
            ModelKind::Flat { n } => format!("flat(n={n})"),
            ModelKind::Sphere { n, k0 } => format!("sphere(n={n}, K0={k0})"),
            ModelKind::Hyperbolic { n } => format!("hyperbolic(n={n})"),
            ModelKind::Cigar => "cigar".into(),
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn spatial_dim(&self) -> usize {
        match self.kind {
            ModelKind::Flat { n } => n,
            ModelKind::Sphere { n, .. } => n,
            ModelKind::Hyperbolic { n } => n,
            ModelKind::Cigar => 2,
        }
    }

    /// Upper end of the validity interval (the sphere collapses in finite
    /// time; the other charts exist for all t > 0).
    pub fn time_upper_bound(&self) -> Option<f64> {
        match self.kind {
            ModelKind::Sphere { n, k0 } => Some(1.0 / (2.0 * (n as f64 - 1.0) * k0)),
            _ => None,
        }
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        if t <= 0.0 {
            return Err(Error::OutOfRange(format!("t = {t} must be positive")));
        }
        if let Some(tmax) = self.time_upper_bound() {
            if t >= tmax {
                return Err(Error::OutOfRange(format!(
                    "t = {t} reaches the collapse time {tmax} of {}",
                    self.describe()
                )));
            }
        }
        Ok(())
    }

    /// Interior times used by the verification sweeps.
    pub fn sample_times(&self) -> Vec<f64> {
        match self.kind {
            ModelKind::Sphere { .. } => vec![0.05, 0.1, 0.2],
            _ => vec![0.25, 0.5, 1.0],
        }
    }

    /// Conformal factor: g(t) = e^{2φ(x,t)} δ.
    fn phi(&self, x: &[f64], t: f64) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        match self.kind {
            ModelKind::Flat { .. } => 0.0,
            ModelKind::Sphere { n, k0 } => {
                let c = 1.0 - 2.0 * (n as f64 - 1.0) * k0 * t;
                0.5 * (4.0 * c / k0).ln() - (1.0 + r2).ln()
            }
            ModelKind::Hyperbolic { n } => {
                let c = 1.0 + 2.0 * (n as f64 - 1.0) * t;
                0.5 * (4.0 * c).ln() - (1.0 - r2).ln()
            }
            ModelKind::Cigar => -0.5 * ((4.0 * t).exp() + r2).ln(),
        }
    }

    fn dphi(&self, x: &[f64], t: f64) -> Vec<f64> {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        match self.kind {
            ModelKind::Flat { .. } => vec![0.0; x.len()],
            ModelKind::Sphere { .. } => x.iter().map(|v| -2.0 * v / (1.0 + r2)).collect(),
            ModelKind::Hyperbolic { .. } => x.iter().map(|v| 2.0 * v / (1.0 - r2)).collect(),
            ModelKind::Cigar => {
                let c = (4.0 * t).exp();
                x.iter().map(|v| -v / (c + r2)).collect()
            }
        }
    }

    pub fn metric_at(&self, x: &[f64], t: f64) -> DMatrix<f64> {
        let n = self.spatial_dim();
        DMatrix::identity(n, n) * (2.0 * self.phi(x, t)).exp()
    }

    /// The spatial slice g(t) as a metric field usable by the engine.
    pub fn spatial_metric_field(&self, t: f64, config: DiffConfig) -> MetricField {
        let model = self.clone();
        MetricField::new(self.spatial_dim(), move |x| model.metric_at(x, t), config)
    }

    /// All closed-form curvature data at (x, t).
    pub fn data(&self, x: &[f64], t: f64) -> Result<CurvatureData> {
        self.check_time(t)?;
        let n = self.spatial_dim();
        if x.len() != n {
            return Err(Error::DimMismatch {
                expected: n,
                got: x.len(),
            });
        }
        let g = self.metric_at(x, t);
        let g_inv = g.clone().try_inverse().ok_or(Error::SingularMetric)?;
        let dphi = self.dphi(x, t);
        let mut christoffel = vec![0.0; n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut v = 0.0;
                    if k == i {
                        v += dphi[j];
                    }
                    if k == j {
                        v += dphi[i];
                    }
                    if i == j {
                        v -= dphi[k];
                    }
                    christoffel[(k * n + i) * n + j] = v;
                }
            }
        }

        let r2: f64 = x.iter().map(|v| v * v).sum();
        let nf = n as f64;
        let (ric, scalar, grad_scalar, hess_scalar, nabla_ric, lap_ric, riemann, scalar_dt);
        match self.kind {
            ModelKind::Flat { .. } => {
                ric = DMatrix::zeros(n, n);
                scalar = 0.0;
                grad_scalar = vec![0.0; n];
                hess_scalar = DMatrix::zeros(n, n);
                nabla_ric = vec![0.0; n * n * n];
                lap_ric = DMatrix::zeros(n, n);
                riemann = CurvatureTensor::zeros(n);
                scalar_dt = 0.0;
            }
            ModelKind::Sphere { n: _, k0 } => {
                let c = 1.0 - 2.0 * (nf - 1.0) * k0 * t;
                let k = k0 / c;
                ric = &g * ((nf - 1.0) * k);
                scalar = nf * (nf - 1.0) * k;
                grad_scalar = vec![0.0; n];
                hess_scalar = DMatrix::zeros(n, n);
                nabla_ric = vec![0.0; n * n * n];
                lap_ric = DMatrix::zeros(n, n);
                riemann = CurvatureTensor::constant_curvature(n, k, &g);
                scalar_dt = 2.0 * (nf - 1.0) * k0 / c * scalar;
            }
            ModelKind::Hyperbolic { n: _ } => {
                let c = 1.0 + 2.0 * (nf - 1.0) * t;
                let k = -1.0 / c;
                ric = &g * ((nf - 1.0) * k);
                scalar = nf * (nf - 1.0) * k;
                grad_scalar = vec![0.0; n];
                hess_scalar = DMatrix::zeros(n, n);
                nabla_ric = vec![0.0; n * n * n];
                lap_ric = DMatrix::zeros(n, n);
                riemann = CurvatureTensor::constant_curvature(n, k, &g);
                scalar_dt = 2.0 * nf * (nf - 1.0) * (nf - 1.0) / (c * c);
            }
            ModelKind::Cigar => {
                let c = (4.0 * t).exp();
                let d = c + r2;
                scalar = 4.0 * c / d;
                ric = &g * (0.5 * scalar);
                grad_scalar = x.iter().map(|v| -8.0 * c * v / (d * d)).collect();
                hess_scalar = DMatrix::from_fn(n, n, |i, j| {
                    let mut v = 16.0 * c * x[i] * x[j] / (d * d * d);
                    if i == j {
                        v -= 8.0 * c * c / (d * d * d);
                    }
                    v
                });
                // In 2-d, Ric = ½ R g, so ∇Ric = ½ ∇R ⊗ g and ΔRic = ½ (ΔR) g.
                let mut nr = vec![0.0; n * n * n];
                for k in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            nr[(k * n + i) * n + j] = 0.5 * grad_scalar[k] * g[(i, j)];
                        }
                    }
                }
                nabla_ric = nr;
                let lap_scalar = 16.0 * c * (r2 - c) / (d * d);
                lap_ric = &g * (0.5 * lap_scalar);
                riemann = CurvatureTensor::constant_curvature(n, 0.5 * scalar, &g);
                scalar_dt = 16.0 * c * r2 / (d * d);
            }
        }

        Ok(CurvatureData {
            n,
            t,
            g,
            g_inv,
            christoffel,
            ric,
            scalar,
            grad_scalar,
            hess_scalar,
            nabla_ric,
            lap_ric,
            riemann,
            scalar_dt,
        })
    }

    /// Seeded sample points in the chart disk of radius 0.8.
    pub fn sample_points(&self, seed: u64, count: usize) -> Vec<Vec<f64>> {
        let n = self.spatial_dim();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xF10));
        let mut pts = Vec::with_capacity(count);
        while pts.len() < count {
            let p: Vec<f64> = (0..n)
                .map(|_| rng.gen_range(-CHART_RADIUS..CHART_RADIUS))
                .collect();
            if p.iter().map(|v| v * v).sum::<f64>() <= CHART_RADIUS * CHART_RADIUS {
                pts.push(p);
            }
        }
        pts
    }
}

/// Residuals of the flow and curvature-evolution equations at seeded
/// sample points, together with the per-model scalar-curvature supremum.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EvolutionReport {
    pub model: String,
    /// max |∂_t g + 2 Ric| over samples
    pub flow_residual: f64,
    /// max relative residual of ∂_t R_i^j = Δ R_i^j + 2 R^j_{nim} R^{mn}
    pub ricci_evolution_residual: f64,
    /// max relative residual of ∂_t R = Δ R + 2 |Ric|²
    pub scalar_evolution_residual: f64,
    /// max |closed-form − engine| across Ric, R, Rm, relative
    pub closed_vs_engine: f64,
    /// max |∇_i R^i_j − ½ ∇_j R|, relative
    pub bianchi_residual: f64,
    /// sup of R over the sampled chart disk and times
    pub scalar_sup: f64,
    pub points: usize,
}

/// Verify the defining equation and the evolution identities of a model.
pub fn validate_evolution(model: &FlowModel, seed: u64) -> Result<EvolutionReport> {
    let n = model.spatial_dim();
    let cfg = DiffConfig::default();
    let points = model.sample_points(seed, 20);
    let times = model.sample_times();

    let mut flow_residual = 0.0f64;
    let mut ricci_res = 0.0f64;
    let mut scalar_res = 0.0f64;
    let mut closed_vs_engine = 0.0f64;
    let mut bianchi = 0.0f64;
    let mut scalar_sup = f64::NEG_INFINITY;

    for t in &times {
        let t = *t;
        let field = model.spatial_metric_field(t, cfg);
        for x in &points {
            let data = model.data(x, t)?;
            scalar_sup = scalar_sup.max(data.scalar);

            // ∂_t g + 2 Ric = 0, differenced in t
            {
                let m = model.clone();
                let xv = x.clone();
                let f: std::sync::Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync> =
                    std::sync::Arc::new(move |tv: &[f64]| {
                        let g = m.metric_at(&xv, tv[0]);
                        g.iter().copied().collect()
                    });
                let dg = partial_d1(&f, &[t], 0, &cfg)?;
                let mut worst = 0.0f64;
                for (idx, v) in dg.iter().enumerate() {
                    let (c, r) = (idx / n, idx % n);
                    worst = worst.max((v + 2.0 * data.ric[(r, c)]).abs());
                }
                flow_residual = flow_residual.max(worst);
            }

            // closed form vs engine recomputation
            {
                let eng_ric = field.ricci(x)?;
                let eng_riem = field.riemann(x)?;
                let scale = data
                    .riemann
                    .max_abs()
                    .max(data.ric.amax())
                    .max(data.scalar.abs())
                    .max(1e-12);
                let mut worst = (eng_ric.mat() - &data.ric).amax();
                worst = worst.max((field.scalar(x)? - data.scalar).abs());
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            for d in 0..n {
                                worst = worst.max(
                                    (eng_riem.get(a, b, c, d) - data.riemann.get(a, b, c, d)).abs(),
                                );
                            }
                        }
                    }
                }
                closed_vs_engine = closed_vs_engine.max(worst / scale);
            }

            // scalar evolution: R_t − ΔR − 2|Ric|² = 0
            {
                let m = model.clone();
                let xv = x.clone();
                let f: std::sync::Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync> =
                    std::sync::Arc::new(move |tv: &[f64]| vec![m.data(&xv, tv[0]).unwrap().scalar]);
                let rt_fd = partial_d1(&f, &[t], 0, &cfg)?[0];
                let scalar_field = {
                    let m = model.clone();
                    TensorField::new(n, 0, move |q| vec![m.data(q, t).unwrap().scalar])
                };
                let lap_r = laplacian(&field, &scalar_field, x)?[0];
                let ric_up = data.ric_upper();
                let ric_sq = (0..n)
                    .flat_map(|i| (0..n).map(move |j| (i, j)))
                    .map(|(i, j)| data.ric[(i, j)] * ric_up[(i, j)])
                    .sum::<f64>();
                let resid = (rt_fd - lap_r - 2.0 * ric_sq).abs();
                let scale = rt_fd.abs().max(lap_r.abs()).max(2.0 * ric_sq).max(1e-12);
                scalar_res = scalar_res.max(resid / scale);
                // and the closed-form supplier must match the FD derivative
                scalar_res = scalar_res.max((data.scalar_dt - rt_fd).abs() / scale.max(1.0));
            }

            // Ricci evolution for the mixed tensor:
            // ∂_t R_i^j = Δ R_i^j + 2 R^j_{nim} R^{mn}
            {
                let m = model.clone();
                let xv = x.clone();
                let f: std::sync::Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync> =
                    std::sync::Arc::new(move |tv: &[f64]| {
                        let d = m.data(&xv, tv[0]).unwrap();
                        d.ric_mixed().iter().copied().collect()
                    });
                let dt_mixed = partial_d1(&f, &[t], 0, &cfg)?;
                let ric_field = {
                    let m = model.clone();
                    TensorField::new(n, 2, move |q| {
                        let d = m.data(q, t).unwrap();
                        let mut v = Vec::with_capacity(n * n);
                        for i in 0..n {
                            for j in 0..n {
                                v.push(d.ric[(i, j)]);
                            }
                        }
                        v
                    })
                };
                let lap = laplacian(&field, &ric_field, x)?;
                let ric_up = data.ric_upper();
                let mut worst = 0.0f64;
                let mut scale = 1e-12f64;
                for i in 0..n {
                    for j in 0..n {
                        // Δ(R_i^j) = g^{jk} (ΔRic)_ik since ∇g = 0
                        let mut lap_mixed = 0.0;
                        for k in 0..n {
                            lap_mixed += lap[i * n + k] * data.g_inv[(k, j)];
                        }
                        let mut quad = 0.0;
                        for nn in 0..n {
                            for mm in 0..n {
                                for p in 0..n {
                                    quad += 2.0
                                        * data.g_inv[(j, p)]
                                        * data.riemann.get(p, nn, i, mm)
                                        * ric_up[(mm, nn)];
                                }
                            }
                        }
                        // nalgebra iterates column-major: entry (i,j) of the
                        // mixed matrix sits at j*n+i in the flattened vector
                        let dt_ij = dt_mixed[j * n + i];
                        let resid = (dt_ij - lap_mixed - quad).abs();
                        worst = worst.max(resid);
                        scale = scale.max(dt_ij.abs()).max(lap_mixed.abs()).max(quad.abs());
                    }
                }
                ricci_res = ricci_res.max(worst / scale);
            }

            // contracted second Bianchi from closed-form data
            {
                let conn = field.levi_civita();
                let ric_field = {
                    let m = model.clone();
                    TensorField::new(n, 2, move |q| {
                        let d = m.data(q, t).unwrap();
                        let mut v = Vec::with_capacity(n * n);
                        for i in 0..n {
                            for j in 0..n {
                                v.push(d.ric[(i, j)]);
                            }
                        }
                        v
                    })
                };
                let nabla_ric = crate::geometry::covariant_derivative(&conn, &ric_field, x)?;
                let scale = data.ric.amax().max(data.scalar.abs()).max(1.0);
                for j in 0..n {
                    let mut div = 0.0;
                    for i in 0..n {
                        for k in 0..n {
                            div += data.g_inv[(i, k)] * nabla_ric[k * n * n + i * n + j];
                        }
                    }
                    bianchi = bianchi.max((div - 0.5 * data.grad_scalar[j]).abs() / scale);
                }
            }
        }
    }

    Ok(EvolutionReport {
        model: model.describe(),
        flow_residual,
        ricci_evolution_residual: ricci_res,
        scalar_evolution_residual: scalar_res,
        closed_vs_engine,
        bianchi_residual: bianchi,
        scalar_sup,
        points: points.len() * times.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tol;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_scalar_curvature_value() {
        // shrinking 3-sphere: R(t) = 6/(1−4t), so R(0.1) = 10
        let m = FlowModel::sphere(3, 1.0);
        let d = m.data(&[0.2, -0.1, 0.3], 0.1).unwrap();
        assert_relative_eq!(d.scalar, 10.0, epsilon = 1e-12);
        assert_relative_eq!(d.scalar_dt, 24.0 / 0.36, epsilon = 1e-9);
    }

    #[test]
    fn flat_model_is_totally_flat() {
        let m = FlowModel::flat(2);
        let d = m.data(&[0.3, 0.4], 0.7).unwrap();
        assert_eq!(d.scalar, 0.0);
        assert_eq!(d.ric.amax(), 0.0);
        assert_eq!(d.riemann.max_abs(), 0.0);
    }

    #[test]
    fn cigar_origin_values() {
        let m = FlowModel::cigar();
        // R(0, t) = 4 e^{4t}/e^{4t} = 4 for all t
        let d = m.data(&[0.0, 0.0], 1e-9).unwrap();
        assert_relative_eq!(d.scalar, 4.0, epsilon = 1e-7);
        // ∂_t g_ij(0, t) = −4 δ_ij / e^{4t}
        let cfg = DiffConfig::default();
        let f: std::sync::Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync> =
            std::sync::Arc::new(move |tv: &[f64]| {
                FlowModel::cigar()
                    .metric_at(&[0.0, 0.0], tv[0])
                    .iter()
                    .copied()
                    .collect()
            });
        let dg = partial_d1(&f, &[0.05], 0, &cfg).unwrap();
        let c = (4.0f64 * 0.05).exp();
        assert_relative_eq!(dg[0], -4.0 / c, epsilon = 1e-8);
    }

    #[test]
    fn sphere_validity_window() {
        let m = FlowModel::sphere(3, 1.0);
        assert!(m.check_time(0.2).is_ok());
        assert!(m.check_time(0.25).is_err());
        assert!(m.check_time(0.5).is_err());
        assert!(m.check_time(-0.1).is_err());
    }

    #[test]
    fn catalog_passes_evolution_suite() {
        for model in FlowModel::catalog() {
            let report = validate_evolution(&model, 42).unwrap();
            assert!(
                report.flow_residual < tol::FLOW_EQUATION,
                "{}: flow residual {:.3e}",
                report.model,
                report.flow_residual
            );
            assert!(
                report.ricci_evolution_residual < tol::CURVATURE_EVOLUTION,
                "{}: Ricci evolution residual {:.3e}",
                report.model,
                report.ricci_evolution_residual
            );
            assert!(
                report.scalar_evolution_residual < tol::CURVATURE_EVOLUTION,
                "{}: scalar evolution residual {:.3e}",
                report.model,
                report.scalar_evolution_residual
            );
            assert!(
                report.closed_vs_engine < tol::CURVATURE_EVOLUTION,
                "{}: closed vs engine {:.3e}",
                report.model,
                report.closed_vs_engine
            );
            assert!(
                report.bianchi_residual < tol::CURVATURE_EVOLUTION,
                "{}: Bianchi residual {:.3e}",
                report.model,
                report.bianchi_residual
            );
            assert!(report.scalar_sup.is_finite());
        }
    }

    #[test]
    fn sample_points_are_deterministic_and_in_disk() {
        let m = FlowModel::cigar();
        let a = m.sample_points(7, 20);
        let b = m.sample_points(7, 20);
        assert_eq!(a, b);
        for p in &a {
            assert!(p.iter().map(|v| v * v).sum::<f64>() <= CHART_RADIUS * CHART_RADIUS);
        }
    }
}
