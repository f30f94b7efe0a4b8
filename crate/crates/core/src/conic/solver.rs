//! Dense homogeneous self-dual interior-point solver.
//!
//! Solves standard-form programs over a product of real symmetric PSD cones,
//!
//! ```text
//! minimize    ⟨c, x⟩
//! subject to  ⟨a_i, x⟩ = b_i,  i = 1..m,     x ⪰ 0 blockwise,
//! ```
//!
//! via the homogeneous self-dual embedding: find `(x, y, z, τ, κ)` with
//! `x, z ⪰ 0`, `τ, κ ≥ 0` driving the residuals of
//!
//! ```text
//! A x − b τ = 0,   A^T y + z − c τ = 0,   c^T x − b^T y + κ = 0
//! ```
//!
//! and the complementarity products to zero. A strictly complementary limit
//! with `τ > 0` yields an optimal pair `(x, y, z)/τ`; one with `κ > 0` yields
//! a Farkas certificate of primal or dual infeasibility. Search directions
//! use Nesterov-Todd scaling with a Mehrotra predictor-corrector; each
//! iteration factors one dense Schur complement and reuses the factor for
//! all right-hand sides.

use nalgebra::{Cholesky, Dyn, SymmetricEigen};

use crate::{RMat, RVec};

/// Element of the product cone: one dense symmetric matrix per block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVec {
    pub blocks: Vec<RMat>,
}

impl BlockVec {
    pub fn zeros(dims: &[usize]) -> Self {
        BlockVec { blocks: dims.iter().map(|&n| RMat::zeros(n, n)).collect() }
    }

    pub fn identity(dims: &[usize]) -> Self {
        BlockVec { blocks: dims.iter().map(|&n| RMat::identity(n, n)).collect() }
    }

    /// `Σ_j tr(A_j B_j)`, evaluated entrywise (the blocks are symmetric).
    pub fn dot(&self, other: &BlockVec) -> f64 {
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.dot(b)).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn axpy(&mut self, alpha: f64, other: &BlockVec) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a += b * alpha;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for a in &mut self.blocks {
            *a *= alpha;
        }
    }

    /// Replace each block by its symmetric part, shedding roundoff drift.
    pub fn symmetrize(&mut self) {
        for a in &mut self.blocks {
            let t = a.transpose();
            *a += t;
            *a *= 0.5;
        }
    }
}

/// Standard-form data. Every row and the cost share the block structure.
#[derive(Debug, Clone)]
pub struct StandardSdp {
    pub dims: Vec<usize>,
    pub cost: BlockVec,
    pub rows: Vec<BlockVec>,
    pub rhs: RVec,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IpmOptions {
    /// Residual target; iteration stops early once reached.
    pub tol: f64,
    /// Looser threshold accepted when the iteration cap is hit first.
    pub accept_tol: f64,
    pub max_iter: usize,
}

impl Default for IpmOptions {
    fn default() -> Self {
        IpmOptions { tol: 1e-9, accept_tol: 1e-7, max_iter: 200 }
    }
}

/// Iterations allowed without improving any residual or certificate before
/// the loop stops early instead of wandering to numerical breakdown.
const STALL_PATIENCE: usize = 8;

/// Worst relative KKT residual of a returned point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IpmQuality {
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub enum IpmOutcome {
    /// `(x, y, z)` already de-homogenized by `τ`.
    Optimal { x: BlockVec, y: RVec, z: BlockVec, quality: IpmQuality, accurate: bool },
    /// Farkas certificate: `A^T y + z = 0`, `b^T y = 1`, `z ⪰ 0`.
    PrimalInfeasible { y: RVec, z: BlockVec, residual: f64 },
    /// Farkas certificate: `A x = 0`, `⟨c, x⟩ = −1`, `x ⪰ 0`.
    DualInfeasible { x: BlockVec, residual: f64 },
    /// No point or certificate reached the acceptable tolerance.
    Indeterminate { reason: String, quality: IpmQuality },
}

/// Per-block Nesterov-Todd scaling: `R^{-1} X R^{-T} = R^T Z R = diag(λ)`.
struct Scaling {
    r: RMat,
    lambda: RVec,
}

fn nt_scaling(x: &RMat, z: &RMat) -> Option<Scaling> {
    let lx = Cholesky::new(x.clone())?.l();
    let lz = Cholesky::new(z.clone())?.l();
    let svd = (lz.transpose() * &lx).svd(false, true);
    let v_t = svd.v_t?;
    let sigma = svd.singular_values;
    if sigma.iter().any(|&s| s <= 0.0) {
        return None;
    }
    let inv_sqrt = RMat::from_diagonal(&sigma.map(|s| 1.0 / s.sqrt()));
    let r = &lx * v_t.transpose() * &inv_sqrt;
    Some(Scaling { r, lambda: sigma })
}

impl Scaling {
    /// `R^T A R`: maps cost/row/dual-residual data into the scaled space.
    fn hat(&self, a: &RMat) -> RMat {
        self.r.transpose() * a * &self.r
    }

    /// `R Δx̂ R^T`: primal directions back to the original space.
    fn unhat_primal(&self, dxh: &RMat) -> RMat {
        &self.r * dxh * self.r.transpose()
    }

    /// Solve `λ ∘ U = D` for symmetric `D`: `U_ij = 2 D_ij / (λ_i + λ_j)`.
    fn lyapunov(&self, d: &RMat) -> RMat {
        RMat::from_fn(d.nrows(), d.ncols(), |i, j| {
            2.0 * d[(i, j)] / (self.lambda[i] + self.lambda[j])
        })
    }

    /// Largest `α` keeping `Λ + α Δ ⪰ 0`, via the minimum eigenvalue of
    /// `Λ^{-1/2} Δ Λ^{-1/2}`.
    fn step_to_boundary(&self, delta: &RMat) -> f64 {
        let g = RMat::from_fn(delta.nrows(), delta.ncols(), |i, j| {
            delta[(i, j)] / (self.lambda[i] * self.lambda[j]).sqrt()
        });
        let min = SymmetricEigen::new(g)
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |m, &v| m.min(v));
        if min < 0.0 {
            -1.0 / min
        } else {
            f64::INFINITY
        }
    }
}

/// One Newton direction of the embedding.
struct Direction {
    dx: BlockVec,
    dy: RVec,
    dz: BlockVec,
    dtau: f64,
    dkappa: f64,
    dx_hat: BlockVec,
    dz_hat: BlockVec,
}

struct Iterate {
    x: BlockVec,
    y: RVec,
    z: BlockVec,
    tau: f64,
    kappa: f64,
}

pub fn solve(problem: &StandardSdp, options: &IpmOptions) -> IpmOutcome {
    let dims = &problem.dims;
    let m = problem.rows.len();
    let degree: usize = dims.iter().sum();
    let norm_b = problem.rhs.norm().max(1.0);
    let norm_c = problem.cost.norm().max(1.0);

    let mut it = Iterate {
        x: BlockVec::identity(dims),
        y: RVec::zeros(m),
        z: BlockVec::identity(dims),
        tau: 1.0,
        kappa: 1.0,
    };

    let mut best: Option<(IpmQuality, Iterate)> = None;
    let mut best_pinf: Option<(f64, RVec, BlockVec)> = None;
    let mut best_dinf: Option<(f64, BlockVec)> = None;
    let mut since_improvement = 0usize;

    for iter in 0..=options.max_iter {
        // De-homogenized KKT quality of the current iterate.
        let inv_tau = 1.0 / it.tau;
        let ax = apply(&problem.rows, &it.x);
        let aty = adjoint(&problem.rows, &it.y, dims);
        let ctx = problem.cost.dot(&it.x);
        let bty = problem.rhs.dot(&it.y);

        let pvec = &ax * inv_tau - &problem.rhs;
        let pres = pvec.norm() / norm_b;
        let mut dvec = aty.clone();
        dvec.axpy(1.0, &it.z);
        dvec.scale(inv_tau);
        dvec.axpy(-1.0, &problem.cost);
        let dres = dvec.norm() / norm_c;
        let pobj = ctx * inv_tau;
        let dobj = bty * inv_tau;
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs().max(dobj.abs()));
        let quality = IpmQuality {
            primal_residual: pres,
            dual_residual: dres,
            gap,
            iterations: iter,
        };
        let score = pres.max(dres).max(gap);
        if best.as_ref().map_or(true, |(q, _)| {
            score < q.primal_residual.max(q.dual_residual).max(q.gap)
        }) {
            since_improvement = 0;
            best = Some((
                quality,
                Iterate {
                    x: scaled(&it.x, inv_tau),
                    y: &it.y * inv_tau,
                    z: scaled(&it.z, inv_tau),
                    tau: 1.0,
                    kappa: it.kappa * inv_tau,
                },
            ));
        } else {
            since_improvement += 1;
        }
        if score <= options.tol {
            let (q, pt) = best.unwrap();
            return IpmOutcome::Optimal { x: pt.x, y: pt.y, z: pt.z, quality: q, accurate: true };
        }

        // Farkas certificates, checked on the raw homogeneous iterate.
        if bty > 0.0 {
            let mut infres = aty.clone();
            infres.axpy(1.0, &it.z);
            let res = infres.norm() / bty;
            if best_pinf.as_ref().map_or(true, |(r, _, _)| res < *r) {
                since_improvement = 0;
                best_pinf = Some((res, &it.y / bty, scaled(&it.z, 1.0 / bty)));
            }
            if res <= options.tol {
                let (residual, y, z) = best_pinf.unwrap();
                return IpmOutcome::PrimalInfeasible { y, z, residual };
            }
        }
        if ctx < 0.0 {
            let res = ax.norm() / (-ctx);
            if best_dinf.as_ref().map_or(true, |(r, _)| res < *r) {
                since_improvement = 0;
                best_dinf = Some((res, scaled(&it.x, -1.0 / ctx)));
            }
            if res <= options.tol {
                let (residual, x) = best_dinf.unwrap();
                return IpmOutcome::DualInfeasible { x, residual };
            }
        }
        // Give up once the iteration has gone a while without tightening any
        // certificate; the tail fallback then classifies by the best point.
        if iter == options.max_iter || since_improvement >= STALL_PATIENCE {
            break;
        }

        // Homogeneous residuals for the Newton system.
        let r_p = &ax - &problem.rhs * it.tau;
        let mut r_d = aty.clone();
        r_d.axpy(1.0, &it.z);
        r_d.axpy(-it.tau, &problem.cost);
        let r_g = ctx - bty + it.kappa;
        let mu = (it.x.dot(&it.z) + it.tau * it.kappa) / (degree + 1) as f64;

        // Nesterov-Todd scaling per block, plus the scaled data and the
        // Schur complement M_ij = Σ ⟨Â_i, Â_j⟩ shared by all solves.
        let scalings: Vec<Scaling> = match it
            .x
            .blocks
            .iter()
            .zip(&it.z.blocks)
            .map(|(x, z)| nt_scaling(x, z))
            .collect::<Option<Vec<_>>>()
        {
            Some(s) => s,
            None => break,
        };
        let hat_rows: Vec<BlockVec> = problem
            .rows
            .iter()
            .map(|row| hat_all(&scalings, row))
            .collect();
        let c_hat = hat_all(&scalings, &problem.cost);
        let rd_hat = hat_all(&scalings, &r_d);
        let mut schur = RMat::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let v = hat_rows[i].dot(&hat_rows[j]);
                schur[(i, j)] = v;
                schur[(j, i)] = v;
            }
        }
        let chol = match factor_with_ridge(&schur) {
            Some(c) => c,
            None => break,
        };

        let u_c = RVec::from_fn(m, |i, _| hat_rows[i].dot(&c_hat));
        let q = &u_c + &problem.rhs;
        let g1 = solve_refined(&chol, &schur, &q);
        let cc = c_hat.dot(&c_hat);
        let shared = Shared {
            scalings: &scalings,
            rows: &problem.rows,
            cost: &problem.cost,
            dims,
            hat_rows: &hat_rows,
            c_hat: &c_hat,
            r_d: &r_d,
            rd_hat: &rd_hat,
            r_p: &r_p,
            r_g,
            rhs: &problem.rhs,
            u_c: &u_c,
            g1: &g1,
            cc,
            schur: &schur,
            chol: &chol,
            tau: it.tau,
            kappa: it.kappa,
        };

        // Predictor: affine direction toward zero residuals and products.
        let lam_sq: Vec<RMat> = scalings
            .iter()
            .map(|s| RMat::from_diagonal(&s.lambda.map(|l| -l * l)))
            .collect();
        let aff = match newton(&shared, BlockVec { blocks: lam_sq }, -it.tau * it.kappa) {
            Some(d) => d,
            None => break,
        };
        let alpha_aff = step_length(&scalings, &aff, it.tau, it.kappa).min(1.0);

        // Centering weight from the predicted gap.
        let mut gap_aff = it.tau * it.kappa
            + (it.tau * aff.dkappa + it.kappa * aff.dtau) * alpha_aff
            + aff.dtau * aff.dkappa * alpha_aff * alpha_aff;
        for (bi, s) in scalings.iter().enumerate() {
            let lam = RMat::from_diagonal(&s.lambda);
            let xa = &lam + &aff.dx_hat.blocks[bi] * alpha_aff;
            let za = &lam + &aff.dz_hat.blocks[bi] * alpha_aff;
            gap_aff += xa.dot(&za);
        }
        let mu_aff = gap_aff / (degree + 1) as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // Corrector: re-center and subtract the second-order products.
        let target = sigma * mu;
        let mut d = BlockVec::zeros(dims);
        for (bi, s) in scalings.iter().enumerate() {
            let cross = &aff.dx_hat.blocks[bi] * &aff.dz_hat.blocks[bi];
            let mut block = RMat::from_diagonal(&s.lambda.map(|l| target - l * l));
            block -= (&cross + cross.transpose()) * 0.5;
            d.blocks[bi] = block;
        }
        let d_tk = target - it.tau * it.kappa - aff.dtau * aff.dkappa;
        let dir = match newton(&shared, d, d_tk) {
            Some(d) => d,
            None => break,
        };
        let alpha = (0.99 * step_length(&scalings, &dir, it.tau, it.kappa)).min(1.0);

        it.x.axpy(alpha, &dir.dx);
        it.x.symmetrize();
        it.y += &dir.dy * alpha;
        it.z.axpy(alpha, &dir.dz);
        it.z.symmetrize();
        it.tau += alpha * dir.dtau;
        it.kappa += alpha * dir.dkappa;
        if it.tau <= 0.0 || it.kappa <= 0.0 {
            break;
        }
    }

    // The cap was reached or the iteration broke down; fall back to the best
    // point or certificate seen if it clears the acceptable tolerance.
    let (quality, point) = best.expect("at least the initial iterate was scored");
    let score = quality.primal_residual.max(quality.dual_residual).max(quality.gap);
    if score <= options.accept_tol {
        return IpmOutcome::Optimal {
            x: point.x,
            y: point.y,
            z: point.z,
            quality,
            accurate: score <= options.tol,
        };
    }
    if let Some((residual, y, z)) = best_pinf {
        if residual <= options.accept_tol {
            return IpmOutcome::PrimalInfeasible { y, z, residual };
        }
    }
    if let Some((residual, x)) = best_dinf {
        if residual <= options.accept_tol {
            return IpmOutcome::DualInfeasible { x, residual };
        }
    }
    IpmOutcome::Indeterminate {
        reason: format!(
            "no point within tolerance after {} iterations (best residual {:.2e})",
            quality.iterations, score
        ),
        quality,
    }
}

struct Shared<'a> {
    scalings: &'a [Scaling],
    rows: &'a [BlockVec],
    cost: &'a BlockVec,
    dims: &'a [usize],
    hat_rows: &'a [BlockVec],
    c_hat: &'a BlockVec,
    r_d: &'a BlockVec,
    rd_hat: &'a BlockVec,
    r_p: &'a RVec,
    r_g: f64,
    rhs: &'a RVec,
    u_c: &'a RVec,
    g1: &'a RVec,
    cc: f64,
    schur: &'a RMat,
    chol: &'a Cholesky<f64, Dyn>,
    tau: f64,
    kappa: f64,
}

/// Solve the Newton system for complementarity right-hand side `(d, d_tk)`
/// with full residual right-hand sides, reusing the shared factorization.
fn newton(s: &Shared, d: BlockVec, d_tk: f64) -> Option<Direction> {
    let m = s.hat_rows.len();
    let h = BlockVec {
        blocks: s
            .scalings
            .iter()
            .zip(&d.blocks)
            .map(|(sc, blk)| sc.lyapunov(blk))
            .collect(),
    };
    let mut rd_plus_h = s.rd_hat.clone();
    rd_plus_h.axpy(1.0, &h);

    let rhs0 = RVec::from_fn(m, |i, _| -s.r_p[i] - s.hat_rows[i].dot(&rd_plus_h));
    let g2 = solve_refined(s.chol, s.schur, &rhs0);

    let ub = s.u_c - s.rhs;
    let den = ub.dot(s.g1) - s.cc - s.kappa / s.tau;
    if den.abs() < 1e-300 {
        return None;
    }
    let num = -s.r_g - ub.dot(&g2) - s.c_hat.dot(&rd_plus_h) - d_tk / s.tau;
    let dtau = num / den;
    let dy = &g2 + &(s.g1 * dtau);
    let dkappa = (d_tk - s.kappa * dtau) / s.tau;

    let mut dx_hat = rd_plus_h;
    dx_hat.axpy(-dtau, s.c_hat);
    for (i, row) in s.hat_rows.iter().enumerate() {
        dx_hat.axpy(dy[i], row);
    }
    dx_hat.symmetrize();
    let mut dz_hat = h;
    dz_hat.axpy(-1.0, &dx_hat);

    let dx = BlockVec {
        blocks: s
            .scalings
            .iter()
            .zip(&dx_hat.blocks)
            .map(|(sc, blk)| sc.unhat_primal(blk))
            .collect(),
    };
    // Recover dz from the dual equation in the original space,
    // dz = −r_d − A^T dy + dτ c, instead of un-scaling dz_hat: the NT
    // round-trip amplifies roundoff by the scaling's condition number and
    // floors the attainable dual residual. dz_hat still certifies the step.
    let mut dz = BlockVec::zeros(s.dims);
    dz.axpy(-1.0, s.r_d);
    for (i, row) in s.rows.iter().enumerate() {
        dz.axpy(-dy[i], row);
    }
    dz.axpy(dtau, s.cost);
    Some(Direction { dx, dy, dz, dtau, dkappa, dx_hat, dz_hat })
}

fn step_length(scalings: &[Scaling], dir: &Direction, tau: f64, kappa: f64) -> f64 {
    let mut alpha = f64::INFINITY;
    for (bi, s) in scalings.iter().enumerate() {
        alpha = alpha.min(s.step_to_boundary(&dir.dx_hat.blocks[bi]));
        alpha = alpha.min(s.step_to_boundary(&dir.dz_hat.blocks[bi]));
    }
    if dir.dtau < 0.0 {
        alpha = alpha.min(-tau / dir.dtau);
    }
    if dir.dkappa < 0.0 {
        alpha = alpha.min(-kappa / dir.dkappa);
    }
    alpha
}

fn apply(rows: &[BlockVec], x: &BlockVec) -> RVec {
    RVec::from_fn(rows.len(), |i, _| rows[i].dot(x))
}

fn adjoint(rows: &[BlockVec], y: &RVec, dims: &[usize]) -> BlockVec {
    let mut out = BlockVec::zeros(dims);
    for (i, row) in rows.iter().enumerate() {
        out.axpy(y[i], row);
    }
    out
}

fn hat_all(scalings: &[Scaling], v: &BlockVec) -> BlockVec {
    BlockVec {
        blocks: scalings.iter().zip(&v.blocks).map(|(s, b)| s.hat(b)).collect(),
    }
}

fn scaled(v: &BlockVec, alpha: f64) -> BlockVec {
    let mut out = v.clone();
    out.scale(alpha);
    out
}

/// Cholesky of the Schur complement, retried with an escalating diagonal
/// ridge when roundoff makes it indefinite.
fn factor_with_ridge(schur: &RMat) -> Option<Cholesky<f64, Dyn>> {
    let scale = schur.diagonal().iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1.0);
    if let Some(c) = Cholesky::new(schur.clone()) {
        return Some(c);
    }
    let mut ridge = 1e-14 * scale;
    while ridge <= 1e-6 * scale {
        let mut bumped = schur.clone();
        for i in 0..bumped.nrows() {
            bumped[(i, i)] += ridge;
        }
        if let Some(c) = Cholesky::new(bumped) {
            return Some(c);
        }
        ridge *= 100.0;
    }
    None
}

/// Cholesky solve plus a few rounds of iterative refinement against the
/// unridged matrix. The epigraph blocks can push the Schur complement's
/// condition number past `1/√eps`, where a single solve (or one through a
/// ridged factor) loses enough digits to stall the iteration; refinement
/// recovers them at the cost of one matrix-vector product per round.
fn solve_refined(chol: &Cholesky<f64, Dyn>, schur: &RMat, b: &RVec) -> RVec {
    let mut x = chol.solve(b);
    let mut residual = b - schur * &x;
    let mut res_norm = residual.norm();
    let scale = b.norm().max(f64::MIN_POSITIVE);
    for _ in 0..3 {
        if res_norm <= 1e-14 * scale {
            break;
        }
        let candidate = &x + chol.solve(&residual);
        let cand_residual = b - schur * &candidate;
        let cand_norm = cand_residual.norm();
        if cand_norm >= res_norm {
            break;
        }
        x = candidate;
        residual = cand_residual;
        res_norm = cand_norm;
    }
    x
}
