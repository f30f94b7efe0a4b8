//! Hermitian semidefinite programming.
//!
//! Problems are stated over complex Hermitian PSD matrix variables and
//! nonnegative real scalars, with real-linear trace functionals
//! `Σ_v tr(A_v X_v)` (coefficients `A_v` Hermitian, so every term is real)
//! as constraints and objective. The builder lowers everything to a real
//! standard-form program: a Hermitian variable of dimension `n` becomes a
//! real symmetric PSD block of dimension `2n` through
//!
//! ```text
//! T(H) = [ Re H  −Im H ]
//!        [ Im H   Re H ]
//! ```
//!
//! with coefficient matrices embedded as `T(A)/2` so that
//! `⟨T(A)/2, T(X)⟩ = tr(A X)` exactly; inequality constraints gain a
//! nonnegative slack; `minimize` is the native sense. The real program is
//! solved by the dense homogeneous interior-point method in [`solver`], and
//! solutions are pulled back by averaging the two redundant copies inside
//! each real block, which preserves semidefiniteness.
//!
//! Dual sign convention: each constraint carries one multiplier `y_i`;
//! `≥` constraints get `y_i ≥ 0`, `≤` constraints `y_i ≤ 0`, equalities are
//! unsigned, and the dual slack `Z_v = C_v − Σ_i y_i A_{i,v}` is PSD for
//! every variable.
//!
//! The epigraph helper encodes `tr(X^{-1})` for an affine Hermitian
//! expression `X`: it appends a `2n × 2n` Hermitian variable `S`, ties its
//! upper-left block to `X` and its off-diagonal block to the identity, and
//! charges `tr` of the lower-right block to the objective; `S ⪰ 0` then
//! forces that block to dominate `X^{-1}`.

pub mod solver;

use std::fmt::{self, Write as _};

use num_complex::Complex64;

use crate::linalg;
use crate::{CMat, RMat, RVec};
use solver::{BlockVec, IpmOptions, IpmOutcome, StandardSdp};

/// Handle to a variable of a [`ConicProblem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VarId(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    /// Complex Hermitian PSD matrix of the given dimension.
    Hermitian { dim: usize },
    /// Nonnegative real scalar.
    Scalar,
}

impl VarKind {
    fn dim(&self) -> usize {
        match self {
            VarKind::Hermitian { dim } => *dim,
            VarKind::Scalar => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Eq,
    Le,
    Ge,
}

/// Real-valued linear functional `Σ_v tr(A_v X_v)` with Hermitian `A_v`.
#[derive(Debug, Clone, Default)]
pub struct LinComb {
    pub terms: Vec<(VarId, CMat)>,
}

impl LinComb {
    pub fn new() -> Self {
        LinComb { terms: Vec::new() }
    }

    /// Add `tr(A X_v)`; `A` must be Hermitian of the variable's dimension.
    pub fn trace_term(mut self, var: VarId, a: CMat) -> Self {
        self.terms.push((var, a));
        self
    }

    /// Add `coeff · x` for a scalar variable.
    pub fn scalar_term(self, var: VarId, coeff: f64) -> Self {
        self.trace_term(var, CMat::from_element(1, 1, Complex64::new(coeff, 0.0)))
    }

    /// Evaluate against a full assignment of variable values.
    pub fn evaluate(&self, values: &[CMat]) -> f64 {
        self.terms
            .iter()
            .map(|(v, a)| (a * &values[v.0]).diagonal().iter().map(|c| c.re).sum::<f64>())
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub lhs: LinComb,
    pub sense: Sense,
    pub rhs: f64,
    pub label: String,
}

/// Affine Hermitian expression `constant + Σ_t M_t X_{v_t} M_t^H`.
#[derive(Debug, Clone)]
pub struct AffineHermitian {
    pub dim: usize,
    pub constant: CMat,
    pub terms: Vec<(VarId, CMat)>,
}

impl AffineHermitian {
    pub fn constant(value: CMat) -> Self {
        assert_eq!(value.nrows(), value.ncols(), "constant must be square");
        AffineHermitian { dim: value.nrows(), constant: value, terms: Vec::new() }
    }

    pub fn zero(dim: usize) -> Self {
        AffineHermitian { dim, constant: CMat::zeros(dim, dim), terms: Vec::new() }
    }

    /// Add a congruence term `M X_v M^H`; `M` must have `dim` rows.
    pub fn congruence(mut self, var: VarId, m: CMat) -> Self {
        assert_eq!(m.nrows(), self.dim, "congruence factor has wrong height");
        self.terms.push((var, m));
        self
    }

    /// Evaluate against a full assignment of variable values.
    pub fn evaluate(&self, values: &[CMat]) -> CMat {
        let mut out = self.constant.clone();
        for (v, m) in &self.terms {
            out += m * &values[v.0] * m.adjoint();
        }
        out
    }
}

/// Builder for a minimization problem over Hermitian PSD and nonnegative
/// scalar variables.
#[derive(Debug, Clone, Default)]
pub struct ConicProblem {
    vars: Vec<VarKind>,
    objective: LinComb,
    objective_offset: f64,
    constraints: Vec<Constraint>,
}

impl ConicProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_hermitian(&mut self, dim: usize) -> VarId {
        assert!(dim >= 1, "variables must have positive dimension");
        self.vars.push(VarKind::Hermitian { dim });
        VarId(self.vars.len() - 1)
    }

    pub fn add_scalar(&mut self) -> VarId {
        self.vars.push(VarKind::Scalar);
        VarId(self.vars.len() - 1)
    }

    pub fn vars(&self) -> &[VarKind] {
        &self.vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> (&LinComb, f64) {
        (&self.objective, self.objective_offset)
    }

    /// Add `weight · tr(A X_v)` to the minimized objective.
    pub fn add_objective_trace(&mut self, var: VarId, a: CMat) {
        self.check_coeff(var, &a);
        self.objective.terms.push((var, a));
    }

    pub fn add_objective_scalar(&mut self, var: VarId, coeff: f64) {
        assert!(matches!(self.vars[var.0], VarKind::Scalar));
        self.objective
            .terms
            .push((var, CMat::from_element(1, 1, Complex64::new(coeff, 0.0))));
    }

    /// Constant added to the reported objective value.
    pub fn add_objective_offset(&mut self, offset: f64) {
        self.objective_offset += offset;
    }

    pub fn add_constraint(&mut self, lhs: LinComb, sense: Sense, rhs: f64, label: impl Into<String>) {
        for (var, a) in &lhs.terms {
            self.check_coeff(*var, a);
        }
        self.constraints.push(Constraint { lhs, sense, rhs, label: label.into() });
    }

    fn check_coeff(&self, var: VarId, a: &CMat) {
        let dim = self.vars[var.0].dim();
        assert_eq!(a.nrows(), dim, "coefficient height mismatch");
        assert_eq!(a.ncols(), dim, "coefficient width mismatch");
        let asym = linalg::asymmetry(a);
        assert!(asym <= 1e-12, "coefficient must be Hermitian (asymmetry {asym:.2e})");
    }

    /// Append the epigraph of `weight · tr(X^{-1})` for affine Hermitian `X`
    /// to the objective. Returns the auxiliary `2n × 2n` variable whose
    /// lower-right block carries the epigraph value. Feasibility forces
    /// `X ≻ 0`.
    pub fn add_trace_inverse_epigraph(&mut self, x: &AffineHermitian, weight: f64) -> VarId {
        self.add_trace_inverse_epigraph_scaled(x, weight, 1.0)
    }

    /// Same epigraph with the identity pin scaled to `pin · I`, so the corner
    /// block carries `pin² · X^{-1}` and the objective gains
    /// `weight · pin² · tr(X^{-1})`. A pin near `tr(X^{-1})^{-1/2}` keeps the
    /// corner block near unit magnitude, which the interior-point iteration
    /// needs when `X` is badly conditioned: with the default pin the corner
    /// dwarfs the rest of the iterate and the homogeneous embedding loses
    /// accuracy exactly where the epigraph is largest.
    pub fn add_trace_inverse_epigraph_scaled(
        &mut self,
        x: &AffineHermitian,
        weight: f64,
        pin: f64,
    ) -> VarId {
        assert!(pin > 0.0, "pin must be positive");
        let n = x.dim;
        assert_eq!(x.constant.nrows(), n, "constant dimension mismatch");
        let s = self.add_hermitian(2 * n);

        // tr of the lower-right block enters the objective.
        let mut corner = CMat::zeros(2 * n, 2 * n);
        for i in 0..n {
            corner[(n + i, n + i)] = Complex64::new(weight, 0.0);
        }
        self.add_objective_trace(s, corner);

        // Upper-left block equals X: one constraint per real degree of
        // freedom, phrased through the Hermitian basis functionals
        // tr(E H) = 2 Re H_ij (off-diagonal) or Re H_ii (diagonal).
        for i in 0..n {
            for j in i..n {
                for im in [false, true] {
                    if im && i == j {
                        continue;
                    }
                    let e = hermitian_basis(n, i, j, im);
                    let mut big = CMat::zeros(2 * n, 2 * n);
                    big.view_mut((0, 0), (n, n)).copy_from(&e);
                    let mut lhs = LinComb::new().trace_term(s, big);
                    for (var, m) in &x.terms {
                        // tr(E · M X M^H) = tr((M^H E M) X), moved to the
                        // left-hand side.
                        lhs = lhs.trace_term(*var, -linalg::hermitize(&(m.adjoint() * &e * m)));
                    }
                    let rhs = (&e * &x.constant).diagonal().iter().map(|c| c.re).sum::<f64>();
                    self.add_constraint(
                        lhs,
                        Sense::Eq,
                        rhs,
                        format!("epigraph tie ({i},{j},{})", if im { "im" } else { "re" }),
                    );
                }
            }
        }

        // Off-diagonal block pinned to `pin · I`.
        for i in 0..n {
            for j in 0..n {
                for im in [false, true] {
                    let e = hermitian_basis(2 * n, i, n + j, im);
                    let want = if !im && i == j { 2.0 * pin } else { 0.0 };
                    self.add_constraint(
                        LinComb::new().trace_term(s, e),
                        Sense::Eq,
                        want,
                        format!("epigraph identity ({i},{j},{})", if im { "im" } else { "re" }),
                    );
                }
            }
        }
        s
    }

    /// Human-readable dump of the problem structure for debugging.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "minimize ({} terms, offset {:.6e})", self.objective.terms.len(), self.objective_offset);
        for (var, a) in &self.objective.terms {
            let _ = writeln!(out, "  + tr(A·x{}), ‖A‖_F = {:.6e}", var.0, linalg::frob(a));
        }
        let _ = writeln!(out, "variables:");
        for (i, kind) in self.vars.iter().enumerate() {
            match kind {
                VarKind::Hermitian { dim } => {
                    let _ = writeln!(out, "  x{i}: hermitian {dim}x{dim} ⪰ 0");
                }
                VarKind::Scalar => {
                    let _ = writeln!(out, "  x{i}: scalar ≥ 0");
                }
            }
        }
        let _ = writeln!(out, "constraints:");
        for c in &self.constraints {
            let op = match c.sense {
                Sense::Eq => "=",
                Sense::Le => "≤",
                Sense::Ge => "≥",
            };
            let terms: Vec<String> = c
                .lhs
                .terms
                .iter()
                .map(|(v, a)| format!("tr(A·x{}):{:.3e}", v.0, linalg::frob(a)))
                .collect();
            let _ = writeln!(out, "  [{}] {} {op} {:.6e}", c.label, terms.join(" + "), c.rhs);
        }
        out
    }

    /// Lower to the real standard form and solve.
    pub fn solve(&self, options: &SolverOptions) -> ConicSolution {
        let m = self.constraints.len();
        // Block layout: one per declared variable, then one 1×1 slack per
        // inequality.
        let mut dims: Vec<usize> = self
            .vars
            .iter()
            .map(|k| match k {
                VarKind::Hermitian { dim } => 2 * dim,
                VarKind::Scalar => 1,
            })
            .collect();
        let mut slack_block = vec![usize::MAX; m];
        for (i, c) in self.constraints.iter().enumerate() {
            if c.sense != Sense::Eq {
                slack_block[i] = dims.len();
                dims.push(1);
            }
        }

        let mut cost = BlockVec::zeros(&dims);
        for (var, a) in &self.objective.terms {
            add_embedded(&mut cost.blocks[var.0], &self.vars[var.0], a);
        }
        let mut rows = Vec::with_capacity(m);
        let mut rhs = RVec::zeros(m);
        for (i, c) in self.constraints.iter().enumerate() {
            let mut row = BlockVec::zeros(&dims);
            for (var, a) in &c.lhs.terms {
                add_embedded(&mut row.blocks[var.0], &self.vars[var.0], a);
            }
            match c.sense {
                Sense::Eq => {}
                Sense::Le => row.blocks[slack_block[i]][(0, 0)] = 1.0,
                Sense::Ge => row.blocks[slack_block[i]][(0, 0)] = -1.0,
            }
            rows.push(row);
            rhs[i] = c.rhs;
        }

        let problem = StandardSdp { dims, cost, rows, rhs };
        let ipm = IpmOptions {
            tol: options.tol,
            accept_tol: options.accept_tol,
            max_iter: options.max_iter,
        };
        match solver::solve(&problem, &ipm) {
            IpmOutcome::Optimal { x, y, z, quality, accurate } => {
                let values: Vec<CMat> = self
                    .vars
                    .iter()
                    .enumerate()
                    .map(|(i, kind)| extract_value(&x.blocks[i], kind))
                    .collect();
                let dual_slacks: Vec<CMat> = self
                    .vars
                    .iter()
                    .enumerate()
                    .map(|(i, kind)| extract_value(&z.blocks[i], kind))
                    .collect();
                let objective = self.objective.evaluate(&values) + self.objective_offset;
                ConicSolution {
                    status: if accurate { SolveStatus::Optimal } else { SolveStatus::NearOptimal },
                    values,
                    duals: y,
                    dual_slacks,
                    objective,
                    residuals: Residuals {
                        primal: quality.primal_residual,
                        dual: quality.dual_residual,
                        gap: quality.gap,
                    },
                    iterations: quality.iterations,
                }
            }
            IpmOutcome::PrimalInfeasible { y, z, residual } => ConicSolution {
                status: SolveStatus::Infeasible,
                values: Vec::new(),
                duals: y,
                dual_slacks: self
                    .vars
                    .iter()
                    .enumerate()
                    .map(|(i, kind)| extract_value(&z.blocks[i], kind))
                    .collect(),
                objective: f64::INFINITY,
                residuals: Residuals { primal: residual, dual: residual, gap: residual },
                iterations: 0,
            },
            IpmOutcome::DualInfeasible { x, residual } => ConicSolution {
                status: SolveStatus::Unbounded,
                values: self
                    .vars
                    .iter()
                    .enumerate()
                    .map(|(i, kind)| extract_value(&x.blocks[i], kind))
                    .collect(),
                duals: RVec::zeros(m),
                dual_slacks: Vec::new(),
                objective: f64::NEG_INFINITY,
                residuals: Residuals { primal: residual, dual: residual, gap: residual },
                iterations: 0,
            },
            IpmOutcome::Indeterminate { reason, quality } => ConicSolution {
                status: SolveStatus::Stalled(reason),
                values: Vec::new(),
                duals: RVec::zeros(m),
                dual_slacks: Vec::new(),
                objective: f64::NAN,
                residuals: Residuals {
                    primal: quality.primal_residual,
                    dual: quality.dual_residual,
                    gap: quality.gap,
                },
                iterations: quality.iterations,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub accept_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-9, accept_tol: 1e-7, max_iter: 200 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveStatus {
    Optimal,
    /// Converged past the acceptable tolerance but not the target.
    NearOptimal,
    Infeasible,
    Unbounded,
    Stalled(String),
}

impl SolveStatus {
    pub fn is_solved(&self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::NearOptimal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

/// Solution of a [`ConicProblem`], pulled back to the complex level.
#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: SolveStatus,
    /// Per-variable values; scalars are 1×1 matrices. Empty unless solved
    /// (for [`SolveStatus::Unbounded`] this is the improving ray).
    pub values: Vec<CMat>,
    /// One multiplier per constraint, in declaration order. For
    /// [`SolveStatus::Infeasible`] this is the Farkas certificate.
    pub duals: RVec,
    /// Dual slack `Z_v = C_v − Σ_i y_i A_{i,v}` per variable.
    pub dual_slacks: Vec<CMat>,
    pub objective: f64,
    pub residuals: Residuals,
    pub iterations: usize,
}

impl ConicSolution {
    pub fn value(&self, var: VarId) -> &CMat {
        &self.values[var.0]
    }

    pub fn scalar(&self, var: VarId) -> f64 {
        self.values[var.0][(0, 0)].re
    }
}

/// Real symmetric embedding `T(H) = [[Re H, −Im H], [Im H, Re H]]`.
pub fn embed_hermitian(h: &CMat) -> RMat {
    let n = h.nrows();
    let mut out = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let v = h[(i, j)];
            out[(i, j)] = v.re;
            out[(i, n + j)] = -v.im;
            out[(n + i, j)] = v.im;
            out[(n + i, n + j)] = v.re;
        }
    }
    out
}

/// Pull a `2n × 2n` real symmetric block back to Hermitian form, averaging
/// the two embedded copies; exact on matrices in the image of
/// [`embed_hermitian`] and PSD-preserving in general.
pub fn extract_hermitian(r: &RMat) -> CMat {
    let n = r.nrows() / 2;
    assert_eq!(r.nrows(), 2 * n, "embedded block must have even dimension");
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let re = 0.5 * (r[(i, j)] + r[(n + i, n + j)]);
            let im = 0.5 * (r[(n + i, j)] - r[(i, n + j)]);
            out[(i, j)] = Complex64::new(re, im);
        }
    }
    linalg::hermitize(&out)
}

/// Hermitian basis element with support on entry `(i, j)`:
/// `tr(E H) = Re H_ii` for `i = j`, `2 Re H_ij` (real flavor) or
/// `2 Im H_ij` (imaginary flavor) otherwise.
fn hermitian_basis(n: usize, i: usize, j: usize, imaginary: bool) -> CMat {
    let mut e = CMat::zeros(n, n);
    if i == j {
        assert!(!imaginary, "no imaginary basis element on the diagonal");
        e[(i, i)] = Complex64::new(1.0, 0.0);
    } else if imaginary {
        e[(i, j)] = Complex64::new(0.0, 1.0);
        e[(j, i)] = Complex64::new(0.0, -1.0);
    } else {
        e[(i, j)] = Complex64::new(1.0, 0.0);
        e[(j, i)] = Complex64::new(1.0, 0.0);
    }
    e
}

/// Accumulate a complex-level coefficient into a real block: `T(A)/2` for
/// Hermitian variables, the bare real part for scalars.
fn add_embedded(block: &mut RMat, kind: &VarKind, a: &CMat) {
    match kind {
        VarKind::Hermitian { .. } => {
            *block += embed_hermitian(a) * 0.5;
        }
        VarKind::Scalar => {
            block[(0, 0)] += a[(0, 0)].re;
        }
    }
}

fn extract_value(block: &RMat, kind: &VarKind) -> CMat {
    match kind {
        VarKind::Hermitian { .. } => extract_hermitian(block),
        VarKind::Scalar => CMat::from_element(1, 1, Complex64::new(block[(0, 0)], 0.0)),
    }
}

impl fmt::Display for ConicProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{complex_normal_matrix, stream_rng, Stream};
    use crate::CVec;
    use approx::assert_relative_eq;

    fn hermitian_from(seed: u64) -> CMat {
        let mut rng = stream_rng(seed, Stream::BsSimChannel);
        let a = complex_normal_matrix(3, 3, &mut rng);
        linalg::hermitize(&(&a + a.adjoint()))
    }

    #[test]
    fn embedding_preserves_inner_products_up_to_two() {
        let a = hermitian_from(11);
        let b = hermitian_from(12);
        let ta = embed_hermitian(&a);
        let tb = embed_hermitian(&b);
        let complex = (&a * &b).diagonal().iter().map(|c| c.re).sum::<f64>();
        assert_relative_eq!(ta.dot(&tb), 2.0 * complex, max_relative = 1e-12);
        let back = extract_hermitian(&ta);
        assert!(linalg::frob(&(&back - &a)) < 1e-14);
    }

    #[test]
    fn single_user_power_minimization_is_matched_filter() {
        // min tr(W) s.t. tr(h h^H W) ≥ γσ²: the optimum is the rank-one
        // matched filter with power γσ²/‖h‖².
        let mut rng = stream_rng(5, Stream::DirectChannel(0));
        let h = complex_normal_matrix(3, 1, &mut rng);
        let h = CVec::from_column_slice(h.as_slice());
        let gamma = 2.5;
        let sigma = 0.7;
        let mut problem = ConicProblem::new();
        let w = problem.add_hermitian(3);
        problem.add_objective_trace(w, linalg::eye(3));
        let hh = CMat::from_fn(3, 3, |i, j| h[i] * h[j].conj());
        problem.add_constraint(
            LinComb::new().trace_term(w, hh),
            Sense::Ge,
            gamma * sigma * sigma,
            "snr",
        );
        let sol = problem.solve(&SolverOptions::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        let expect = gamma * sigma * sigma / h.norm_squared();
        assert_relative_eq!(sol.objective, expect, max_relative = 1e-7);
        // Multiplier of the ≥ constraint is nonnegative.
        assert!(sol.duals[0] >= -1e-10);
        // The optimizer returns (up to tolerance) a rank-one matrix aligned
        // with h.
        let w_val = sol.value(w);
        let quad = (w_val * &h).dotc(&h).re;
        assert_relative_eq!(quad, gamma * sigma * sigma, max_relative = 1e-6);
    }

    #[test]
    fn epigraph_of_constant_matrix_is_trace_inverse() {
        let x = CMat::from_diagonal(&CVec::from_column_slice(&[
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(4.0, 0.0),
        ]));
        let mut problem = ConicProblem::new();
        let s = problem.add_trace_inverse_epigraph(&AffineHermitian::constant(x), 1.0);
        let sol = problem.solve(&SolverOptions::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_relative_eq!(sol.objective, 1.75, max_relative = 1e-7);
        // The corner block converges to X^{-1}.
        let s_val = sol.value(s);
        assert_relative_eq!(s_val[(3, 3)].re, 1.0, epsilon = 1e-5);
        assert_relative_eq!(s_val[(5, 5)].re, 0.25, epsilon = 1e-5);
    }

    #[test]
    fn epigraph_couples_to_variables() {
        // min tr(W^{-1}) s.t. tr(W) ≤ 1: equal eigenvalues are optimal,
        // value n² = 4.
        let mut problem = ConicProblem::new();
        let w = problem.add_hermitian(2);
        let x = AffineHermitian::zero(2).congruence(w, linalg::eye(2));
        problem.add_trace_inverse_epigraph(&x, 1.0);
        problem.add_constraint(
            LinComb::new().trace_term(w, linalg::eye(2)),
            Sense::Le,
            1.0,
            "power",
        );
        let sol = problem.solve(&SolverOptions::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_relative_eq!(sol.objective, 4.0, max_relative = 1e-6);
        // ≤ constraint multiplier is nonpositive.
        assert!(sol.duals[sol.duals.len() - 1] <= 1e-10);
        let w_val = sol.value(w);
        assert_relative_eq!(w_val[(0, 0)].re, 0.5, epsilon = 1e-5);
        assert_relative_eq!(w_val[(1, 1)].re, 0.5, epsilon = 1e-5);
        assert!(w_val[(0, 1)].norm() < 1e-5);
    }

    #[test]
    fn infeasible_threshold_reports_certificate() {
        // tr(W) ≤ 1 together with tr(h h^H W) ≥ 10‖h‖² cannot hold.
        let h = CVec::from_column_slice(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]);
        let hh = CMat::from_fn(2, 2, |i, j| h[i] * h[j].conj());
        let mut problem = ConicProblem::new();
        let w = problem.add_hermitian(2);
        problem.add_objective_trace(w, linalg::eye(2));
        problem.add_constraint(
            LinComb::new().trace_term(w, linalg::eye(2)),
            Sense::Le,
            1.0,
            "power",
        );
        problem.add_constraint(
            LinComb::new().trace_term(w, hh),
            Sense::Ge,
            10.0 * h.norm_squared(),
            "snr",
        );
        let sol = problem.solve(&SolverOptions::default());
        assert_eq!(sol.status, SolveStatus::Infeasible);
        // Farkas: y has the signs of the senses and certifies b^T y > 0.
        assert!(sol.duals[0] <= 0.0);
        assert!(sol.duals[1] >= 0.0);
    }

    #[test]
    fn scalar_variables_form_linear_programs() {
        // max ϱ s.t. ϱ ≤ 3, ϱ ≤ 5 → minimize −ϱ → −3.
        let mut problem = ConicProblem::new();
        let rho = problem.add_scalar();
        problem.add_objective_scalar(rho, -1.0);
        problem.add_constraint(LinComb::new().scalar_term(rho, 1.0), Sense::Le, 3.0, "a");
        problem.add_constraint(LinComb::new().scalar_term(rho, 1.0), Sense::Le, 5.0, "b");
        let sol = problem.solve(&SolverOptions::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_relative_eq!(sol.scalar(rho), 3.0, epsilon = 1e-7);
        assert_relative_eq!(sol.duals[0], -1.0, epsilon = 1e-6);
        assert!(sol.duals[1].abs() < 1e-6);
    }

    #[test]
    fn mixed_complex_problem_is_deterministic() {
        let a = hermitian_from(21);
        let spd = &a * a.adjoint() + linalg::eye(3) * Complex64::new(0.5, 0.0);
        let run = || {
            let mut problem = ConicProblem::new();
            let w = problem.add_hermitian(3);
            problem.add_objective_trace(w, linalg::hermitize(&spd));
            problem.add_constraint(
                LinComb::new().trace_term(w, linalg::eye(3)),
                Sense::Ge,
                1.0,
                "norm",
            );
            problem.solve(&SolverOptions::default())
        };
        let s1 = run();
        let s2 = run();
        assert_eq!(s1.status, SolveStatus::Optimal);
        assert_eq!(s1.objective.to_bits(), s2.objective.to_bits());
        assert_eq!(s1.values[0], s2.values[0]);
    }

    #[test]
    fn dump_mentions_every_constraint() {
        let mut problem = ConicProblem::new();
        let w = problem.add_hermitian(2);
        problem.add_objective_trace(w, linalg::eye(2));
        problem.add_constraint(
            LinComb::new().trace_term(w, linalg::eye(2)),
            Sense::Le,
            1.0,
            "budget",
        );
        let dump = problem.dump();
        assert!(dump.contains("budget"));
        assert!(dump.contains("hermitian 2x2"));
    }
}
