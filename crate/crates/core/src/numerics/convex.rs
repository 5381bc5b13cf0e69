//! Log-barrier Newton method for small smooth convex programs.
//!
//! ```text
//! minimize    f(x)
//! subject to  g_i(x) <= 0          (smooth convex)
//!             a_k . x  = b_k       (affine)
//!             x_j     >= lb_j      (optional bounds)
//! ```
//!
//! Each centering step solves the Newton KKT system by eliminating the
//! equality multipliers through a Schur complement. The barrier Hessian is
//! kept as `diag + sum of rank-one terms` whenever every function reports a
//! diagonal Hessian, so the inner solves go through the Woodbury identity
//! and cost `O(n r)` for `r` nonlinear constraints. Anything else falls back
//! to dense LU.

use crate::error::NumericsError;
use crate::numerics::linalg::{Cholesky, Lu, SquareMatrix};
use crate::scalar::Real;

/// A smooth convex function of the full variable vector.
///
/// Outside its domain `value` must return `+inf` or NaN; the line search uses
/// that to stay in the domain.
pub trait ConvexFn<T: Real>: Send + Sync {
    fn value(&self, x: &[T]) -> T;
    /// `grad += scale * ∇f(x)`
    fn add_gradient(&self, x: &[T], scale: T, grad: &mut [T]);
    /// `hess += scale * ∇²f(x)`
    fn add_hessian(&self, x: &[T], scale: T, hess: &mut Hessian<T>);
}

/// Hessian accumulator: diagonal until an off-diagonal entry is added.
#[derive(Debug, Clone)]
pub struct Hessian<T> {
    diag: Vec<T>,
    dense: Option<SquareMatrix<T>>,
}

impl<T: Real> Hessian<T> {
    pub fn new(n: usize) -> Self {
        Self { diag: vec![T::zero(); n], dense: None }
    }

    #[inline]
    pub fn add_diag(&mut self, i: usize, v: T) {
        self.diag[i] += v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: T) {
        if i == j {
            self.diag[i] += v;
        } else {
            let n = self.diag.len();
            self.dense.get_or_insert_with(|| SquareMatrix::zeros(n)).add(i, j, v);
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.dense.is_none()
    }
}

/// `sum_k coeffs[k].1 * x[coeffs[k].0] = rhs`
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint<T> {
    pub coeffs: Vec<(usize, T)>,
    pub rhs: T,
}

impl<T: Real> LinearConstraint<T> {
    pub fn new(coeffs: Vec<(usize, T)>, rhs: T) -> Self {
        Self { coeffs, rhs }
    }

    fn dot(&self, x: &[T]) -> T {
        self.coeffs.iter().map(|&(i, a)| a * x[i]).sum()
    }

    fn residual(&self, x: &[T]) -> T {
        self.rhs - self.dot(x)
    }
}

pub struct ConvexProgram<'a, T: Real> {
    pub dim: usize,
    pub objective: Box<dyn ConvexFn<T> + 'a>,
    pub inequalities: Vec<Box<dyn ConvexFn<T> + 'a>>,
    pub equalities: Vec<LinearConstraint<T>>,
    /// Empty, or one entry per variable.
    pub lower_bounds: Vec<Option<T>>,
}

impl<'a, T: Real> ConvexProgram<'a, T> {
    pub fn new(dim: usize, objective: Box<dyn ConvexFn<T> + 'a>) -> Self {
        Self {
            dim,
            objective,
            inequalities: Vec::new(),
            equalities: Vec::new(),
            lower_bounds: Vec::new(),
        }
    }

    pub fn with_inequality(mut self, g: Box<dyn ConvexFn<T> + 'a>) -> Self {
        self.inequalities.push(g);
        self
    }

    pub fn with_equality(mut self, c: LinearConstraint<T>) -> Self {
        self.equalities.push(c);
        self
    }

    pub fn with_lower_bounds(mut self, lb: Vec<Option<T>>) -> Self {
        self.lower_bounds = lb;
        self
    }

    fn check(&self) -> Result<(), NumericsError> {
        if !self.lower_bounds.is_empty() && self.lower_bounds.len() != self.dim {
            return Err(NumericsError::InvalidProgram(format!(
                "{} lower bounds for {} variables",
                self.lower_bounds.len(),
                self.dim
            )));
        }
        for (k, c) in self.equalities.iter().enumerate() {
            if let Some(&(i, _)) = c.coeffs.iter().find(|(i, _)| *i >= self.dim) {
                return Err(NumericsError::InvalidProgram(format!(
                    "equality {k} references variable {i} of {}",
                    self.dim
                )));
            }
        }
        Ok(())
    }

    fn bounds(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.lower_bounds
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.map(|v| (i, v)))
    }

    /// Largest value of `g_i(x)` and `lb_j - x_j`; negative iff strictly feasible.
    pub fn max_violation(&self, x: &[T]) -> (T, usize) {
        let mut worst = (T::neg_infinity(), usize::MAX);
        for (i, g) in self.inequalities.iter().enumerate() {
            let v = g.value(x);
            let v = if v.is_nan() { T::infinity() } else { v };
            if v > worst.0 {
                worst = (v, i);
            }
        }
        for (j, lb) in self.bounds() {
            let v = lb - x[j];
            if v > worst.0 {
                worst = (v, self.inequalities.len() + j);
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConvexOptions<T> {
    /// Target for every KKT residual.
    pub tol: T,
    /// Factor applied to the barrier weight `t` after each centering.
    pub barrier_growth: T,
    pub initial_t: T,
    pub max_newton_steps: usize,
}

impl<T: Real> Default for ConvexOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-8),
            barrier_growth: T::lit(2.0),
            initial_t: T::one(),
            max_newton_steps: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KktResiduals<T> {
    pub stationarity: T,
    pub primal: T,
    pub dual: T,
    pub complementarity: T,
}

impl<T: Real> KktResiduals<T> {
    pub fn max(&self) -> T {
        self.stationarity
            .max(self.primal)
            .max(self.dual)
            .max(self.complementarity)
    }
}

#[derive(Debug, Clone)]
pub struct ConvexSolution<T> {
    pub x: Vec<T>,
    pub objective: T,
    /// One per entry of `inequalities`.
    pub inequality_multipliers: Vec<T>,
    /// One per variable; zero where no bound is set.
    pub bound_multipliers: Vec<T>,
    pub equality_multipliers: Vec<T>,
    pub kkt: KktResiduals<T>,
    pub newton_steps: usize,
}

/// Minimizes `program` from `start`.
///
/// `start` is first projected onto the equality constraints. If the projected
/// point is not strictly feasible a phase-I program `min s, g_i(x) <= s` is
/// solved first; a non-negative optimum is reported as
/// [`NumericsError::Infeasible`] carrying the smallest achievable violation.
pub fn minimize_convex<T: Real>(
    program: &ConvexProgram<'_, T>,
    start: &[T],
    opts: &ConvexOptions<T>,
) -> Result<ConvexSolution<T>, NumericsError> {
    program.check()?;
    if start.len() != program.dim {
        return Err(NumericsError::InvalidProgram(format!(
            "start has {} entries for {} variables",
            start.len(),
            program.dim
        )));
    }
    let mut x = project_onto_equalities(&program.equalities, start)?;
    let mut steps = 0;

    let (viol, _) = program.max_violation(&x);
    if !(viol < T::zero()) || !program.objective.value(&x).is_finite() {
        let (xf, used) = phase_one(program, &x, opts)?;
        x = xf;
        steps += used;
    }

    let view = BarrierView::plain(program);
    let mut t = opts.initial_t;
    loop {
        steps += center(&view, &mut x, t, opts.max_newton_steps.saturating_sub(steps), None)?;
        let sol = finish(program, &x, t, steps)?;
        if sol.kkt.max() <= opts.tol {
            return Ok(sol);
        }
        if steps >= opts.max_newton_steps {
            return Err(NumericsError::NoConvergence(steps));
        }
        t *= opts.barrier_growth;
        if !t.is_finite() {
            return Err(NumericsError::NoConvergence(steps));
        }
    }
}

fn project_onto_equalities<T: Real>(
    eqs: &[LinearConstraint<T>],
    x: &[T],
) -> Result<Vec<T>, NumericsError> {
    let mut x = x.to_vec();
    if eqs.is_empty() {
        return Ok(x);
    }
    let p = eqs.len();
    let mut gram = SquareMatrix::zeros(p);
    let n = x.len();
    let mut dense_rows = vec![vec![T::zero(); n]; p];
    for (k, c) in eqs.iter().enumerate() {
        for &(i, a) in &c.coeffs {
            dense_rows[k][i] += a;
        }
    }
    for k in 0..p {
        for l in 0..p {
            let v: T = dense_rows[k].iter().zip(&dense_rows[l]).map(|(&a, &b)| a * b).sum();
            gram.set(k, l, v);
        }
    }
    let r: Vec<T> = eqs.iter().map(|c| c.residual(&x)).collect();
    let lambda = Lu::factor(gram)?.solve(&r);
    for k in 0..p {
        for i in 0..n {
            x[i] += dense_rows[k][i] * lambda[k];
        }
    }
    Ok(x)
}

/// Objective, inequality list and bounds as seen by the centering loop.
struct BarrierView<'p, 'a, T: Real> {
    dim: usize,
    objective: Objective<'p, 'a, T>,
    inequalities: Vec<Ineq<'p, 'a, T>>,
    equalities: &'p [LinearConstraint<T>],
}

enum Objective<'p, 'a, T: Real> {
    Fn(&'p (dyn ConvexFn<T> + 'a)),
    /// Phase I: minimize the last variable.
    Slack,
}

enum Ineq<'p, 'a, T: Real> {
    Fn(&'p (dyn ConvexFn<T> + 'a)),
    Bound { var: usize, lb: T },
    /// Phase I: `g(x) - s <= 0`, with `s` the last variable.
    ShiftedFn(&'p (dyn ConvexFn<T> + 'a)),
    ShiftedBound { var: usize, lb: T },
}

impl<'p, 'a, T: Real> BarrierView<'p, 'a, T> {
    fn plain(p: &'p ConvexProgram<'a, T>) -> Self {
        let mut inequalities: Vec<Ineq<'p, 'a, T>> =
            p.inequalities.iter().map(|g| Ineq::Fn(g.as_ref())).collect();
        inequalities.extend(p.bounds().map(|(var, lb)| Ineq::Bound { var, lb }));
        Self {
            dim: p.dim,
            objective: Objective::Fn(p.objective.as_ref()),
            inequalities,
            equalities: &p.equalities,
        }
    }

    fn phase_one(p: &'p ConvexProgram<'a, T>) -> Self {
        let mut inequalities: Vec<Ineq<'p, 'a, T>> =
            p.inequalities.iter().map(|g| Ineq::ShiftedFn(g.as_ref())).collect();
        inequalities.extend(p.bounds().map(|(var, lb)| Ineq::ShiftedBound { var, lb }));
        // keeps phase I bounded when the feasible set has no finite minimizer of max g
        inequalities.push(Ineq::Bound { var: p.dim, lb: -T::one() });
        Self {
            dim: p.dim + 1,
            objective: Objective::Slack,
            inequalities,
            equalities: &p.equalities,
        }
    }

    fn objective_value(&self, x: &[T]) -> T {
        match self.objective {
            Objective::Fn(f) => f.value(x),
            Objective::Slack => x[self.dim - 1],
        }
    }

    fn ineq_value(&self, g: &Ineq<'p, 'a, T>, x: &[T]) -> T {
        match *g {
            Ineq::Fn(f) => f.value(x),
            Ineq::Bound { var, lb } => lb - x[var],
            Ineq::ShiftedFn(f) => f.value(&x[..self.dim - 1]) - x[self.dim - 1],
            Ineq::ShiftedBound { var, lb } => lb - x[var] - x[self.dim - 1],
        }
    }

    /// Barrier function `t f(x) - sum log(-g_i(x))`, or `+inf` outside the interior.
    fn barrier_value(&self, x: &[T], t: T) -> T {
        let f = self.objective_value(x);
        if !f.is_finite() {
            return T::infinity();
        }
        let mut acc = t * f;
        for g in &self.inequalities {
            let v = self.ineq_value(g, x);
            if !(v < T::zero()) {
                return T::infinity();
            }
            acc -= (-v).ln();
        }
        acc
    }
}

struct NewtonSystem<T> {
    grad: Vec<T>,
    diag: Vec<T>,
    dense: Option<SquareMatrix<T>>,
    /// Rank-one terms `w v v^T`, stored as `sqrt(w) v`.
    low_rank: Vec<Vec<T>>,
}

impl<'p, 'a, T: Real> BarrierView<'p, 'a, T> {
    fn assemble(&self, x: &[T], t: T) -> NewtonSystem<T> {
        let n = self.dim;
        let mut grad = vec![T::zero(); n];
        let mut hess = Hessian::new(n);
        let mut low_rank = Vec::new();
        let inner_n = n.saturating_sub(1);
        match self.objective {
            Objective::Fn(f) => {
                f.add_gradient(x, t, &mut grad);
                f.add_hessian(x, t, &mut hess);
            }
            Objective::Slack => grad[n - 1] += t,
        }
        for g in &self.inequalities {
            let v = self.ineq_value(g, x);
            let inv = T::one() / (-v);
            match *g {
                Ineq::Bound { var, .. } => {
                    grad[var] -= inv;
                    hess.add_diag(var, inv * inv);
                }
                Ineq::Fn(f) => {
                    let mut gg = vec![T::zero(); n];
                    f.add_gradient(x, T::one(), &mut gg);
                    f.add_hessian(x, inv, &mut hess);
                    for (a, b) in grad.iter_mut().zip(&gg) {
                        *a += inv * *b;
                    }
                    for e in gg.iter_mut() {
                        *e *= inv;
                    }
                    low_rank.push(gg);
                }
                Ineq::ShiftedFn(f) => {
                    let mut gg = vec![T::zero(); n];
                    f.add_gradient(&x[..inner_n], T::one(), &mut gg[..inner_n]);
                    gg[n - 1] = -T::one();
                    let mut inner = Hessian::new(inner_n);
                    f.add_hessian(&x[..inner_n], inv, &mut inner);
                    merge_hessian(&mut hess, &inner);
                    for (a, b) in grad.iter_mut().zip(&gg) {
                        *a += inv * *b;
                    }
                    for e in gg.iter_mut() {
                        *e *= inv;
                    }
                    low_rank.push(gg);
                }
                Ineq::ShiftedBound { var, .. } => {
                    let mut gg = vec![T::zero(); n];
                    gg[var] = -inv;
                    gg[n - 1] = -inv;
                    grad[var] -= inv;
                    grad[n - 1] -= inv;
                    low_rank.push(gg);
                }
            }
        }
        NewtonSystem { grad, diag: hess.diag, dense: hess.dense, low_rank }
    }
}

fn merge_hessian<T: Real>(into: &mut Hessian<T>, from: &Hessian<T>) {
    for (i, &v) in from.diag.iter().enumerate() {
        into.add_diag(i, v);
    }
    if let Some(d) = &from.dense {
        for i in 0..d.dim() {
            for j in 0..d.dim() {
                if i != j {
                    into.add(i, j, d.get(i, j));
                }
            }
        }
    }
}

enum Factor<T> {
    Woodbury {
        dinv: Vec<T>,
        u: Vec<Vec<T>>,
        cap: Cholesky<T>,
    },
    Dense(Lu<T>),
}

impl<T: Real> Factor<T> {
    fn new(sys: &NewtonSystem<T>) -> Result<Self, NumericsError> {
        let n = sys.diag.len();
        let dmax = sys.diag.iter().fold(T::zero(), |m, &d| m.max(d.abs()));
        let structured = sys.dense.is_none()
            && sys.low_rank.len() * 2 <= n.max(1)
            && sys.diag.iter().all(|&d| d > dmax * T::epsilon() * T::lit(1e3));
        if structured {
            let dinv: Vec<T> = sys.diag.iter().map(|&d| T::one() / d).collect();
            let r = sys.low_rank.len();
            let mut cap = SquareMatrix::zeros(r);
            for a in 0..r {
                for b in a..r {
                    let v: T = (0..n)
                        .map(|i| sys.low_rank[a][i] * dinv[i] * sys.low_rank[b][i])
                        .sum();
                    let v = if a == b { v + T::one() } else { v };
                    cap.set(a, b, v);
                    cap.set(b, a, v);
                }
            }
            if let Ok(cap) = Cholesky::factor(&cap) {
                return Ok(Factor::Woodbury { dinv, u: sys.low_rank.clone(), cap });
            }
        }
        let mut m = sys.dense.clone().unwrap_or_else(|| SquareMatrix::zeros(n));
        for (i, &d) in sys.diag.iter().enumerate() {
            m.add(i, i, d);
        }
        for v in &sys.low_rank {
            for i in 0..n {
                if v[i] == T::zero() {
                    continue;
                }
                for j in 0..n {
                    m.add(i, j, v[i] * v[j]);
                }
            }
        }
        let reg = m.max_abs_diag().max(T::one()) * T::epsilon() * T::lit(16.0);
        for i in 0..n {
            m.add(i, i, reg);
        }
        Ok(Factor::Dense(Lu::factor(m)?))
    }

    fn solve(&self, b: &[T]) -> Vec<T> {
        match self {
            Factor::Dense(lu) => lu.solve(b),
            Factor::Woodbury { dinv, u, cap } => {
                let db: Vec<T> = b.iter().zip(dinv).map(|(&b, &d)| b * d).collect();
                if u.is_empty() {
                    return db;
                }
                let ut: Vec<T> = u.iter().map(|col| col.iter().zip(&db).map(|(&a, &b)| a * b).sum()).collect();
                let c = cap.solve(&ut);
                let mut out = db;
                for (col, &ck) in u.iter().zip(&c) {
                    for i in 0..out.len() {
                        out[i] -= dinv[i] * col[i] * ck;
                    }
                }
                out
            }
        }
    }
}

/// Newton direction for the equality-constrained barrier subproblem.
fn newton_direction<T: Real>(
    view: &BarrierView<'_, '_, T>,
    sys: &NewtonSystem<T>,
    x: &[T],
) -> Result<Vec<T>, NumericsError> {
    let factor = Factor::new(sys)?;
    let neg_grad: Vec<T> = sys.grad.iter().map(|&g| -g).collect();
    let base = factor.solve(&neg_grad);
    let eqs = view.equalities;
    if eqs.is_empty() {
        return Ok(base);
    }
    let n = view.dim;
    let p = eqs.len();
    let cols: Vec<Vec<T>> = eqs
        .iter()
        .map(|c| {
            let mut a = vec![T::zero(); n];
            for &(i, v) in &c.coeffs {
                a[i] += v;
            }
            factor.solve(&a)
        })
        .collect();
    let mut schur = SquareMatrix::zeros(p);
    for (k, c) in eqs.iter().enumerate() {
        for (l, col) in cols.iter().enumerate() {
            schur.set(k, l, c.dot(col));
        }
    }
    let rhs: Vec<T> = eqs
        .iter()
        .map(|c| c.dot(&base) - c.residual(&x[..n.min(x.len())]))
        .collect();
    let nu = Lu::factor(schur)?.solve(&rhs);
    let mut dx = base;
    for (col, &v) in cols.iter().zip(&nu) {
        for i in 0..n {
            dx[i] -= col[i] * v;
        }
    }
    Ok(dx)
}

/// Centers at barrier weight `t`; returns the number of Newton steps taken.
fn center<T: Real>(
    view: &BarrierView<'_, '_, T>,
    x: &mut Vec<T>,
    t: T,
    budget: usize,
    stop: Option<&dyn Fn(&[T]) -> bool>,
) -> Result<usize, NumericsError> {
    let alpha = T::lit(0.01);
    let half = T::lit(0.5);
    let mut steps = 0;
    let mut fx = view.barrier_value(x, t);
    while steps < budget {
        let sys = view.assemble(x, t);
        let dx = newton_direction(view, &sys, x)?;
        steps += 1;
        let slope: T = sys.grad.iter().zip(&dx).map(|(&g, &d)| g * d).sum();
        let decrement = -slope;
        if !(decrement > T::epsilon() * T::lit(64.0) * (T::one() + fx.abs())) {
            break;
        }
        let mut s = T::one();
        let mut accepted = false;
        for _ in 0..80 {
            let trial: Vec<T> = x.iter().zip(&dx).map(|(&a, &d)| a + s * d).collect();
            let ft = view.barrier_value(&trial, t);
            if ft.is_finite() && ft <= fx + alpha * s * slope {
                *x = trial;
                fx = ft;
                accepted = true;
                break;
            }
            s *= half;
        }
        if !accepted || decrement * half <= T::lit(1e-13) {
            break;
        }
        if stop.is_some_and(|f| f(x)) {
            break;
        }
    }
    if steps >= budget {
        return Err(NumericsError::NoConvergence(steps));
    }
    Ok(steps)
}

fn phase_one<T: Real>(
    program: &ConvexProgram<'_, T>,
    x0: &[T],
    opts: &ConvexOptions<T>,
) -> Result<(Vec<T>, usize), NumericsError> {
    let view = BarrierView::phase_one(program);
    let (viol, _) = program.max_violation(x0);
    if !viol.is_finite() {
        return Err(NumericsError::InvalidProgram(
            "start point outside the constraint domain".into(),
        ));
    }
    let mut z = x0.to_vec();
    z.push(viol.max(T::zero()) + T::one());
    let mut t = T::one();
    let mut steps = 0;
    loop {
        let done = |z: &[T]| {
            let x = &z[..program.dim];
            program.max_violation(x).0 < T::zero() && program.objective.value(x).is_finite()
        };
        steps += center(
            &view,
            &mut z,
            t,
            opts.max_newton_steps.saturating_sub(steps),
            Some(&done),
        )?;
        let x = &z[..program.dim];
        let (v, worst) = program.max_violation(x);
        if v < T::zero() && program.objective.value(x).is_finite() {
            return Ok((x.to_vec(), steps));
        }
        let gap = T::lit(view.inequalities.len() as f64) / t;
        if gap < opts.tol || steps >= opts.max_newton_steps {
            return Err(NumericsError::Infeasible {
                violation: v.to_f64().unwrap_or(f64::NAN),
                constraint: worst,
            });
        }
        t *= opts.barrier_growth * T::lit(4.0);
    }
}

fn finish<T: Real>(
    program: &ConvexProgram<'_, T>,
    x: &[T],
    t: T,
    steps: usize,
) -> Result<ConvexSolution<T>, NumericsError> {
    let n = program.dim;
    let mut r = vec![T::zero(); n];
    program.objective.add_gradient(x, T::one(), &mut r);
    let mut primal = T::zero();
    let mut comp = T::zero();
    let mut dual = T::zero();
    let mut ineq_mult = Vec::with_capacity(program.inequalities.len());
    for g in &program.inequalities {
        let v = g.value(x);
        let lam = T::one() / (t * (-v));
        g.add_gradient(x, lam, &mut r);
        primal = primal.max(v);
        comp = comp.max((lam * v).abs());
        dual = dual.max(-lam);
        ineq_mult.push(lam);
    }
    let mut bound_mult = vec![T::zero(); n];
    for (j, lb) in program.bounds() {
        let v = lb - x[j];
        let lam = T::one() / (t * (-v));
        r[j] -= lam;
        primal = primal.max(v);
        comp = comp.max((lam * v).abs());
        dual = dual.max(-lam);
        bound_mult[j] = lam;
    }
    let eqs = &program.equalities;
    let mut nu = Vec::new();
    if !eqs.is_empty() {
        // least-squares equality multipliers: (A A^T) nu = -A r
        let p = eqs.len();
        let mut rows = vec![vec![T::zero(); n]; p];
        for (k, c) in eqs.iter().enumerate() {
            for &(i, a) in &c.coeffs {
                rows[k][i] += a;
            }
        }
        let mut gram = SquareMatrix::zeros(p);
        for k in 0..p {
            for l in 0..p {
                gram.set(k, l, rows[k].iter().zip(&rows[l]).map(|(&a, &b)| a * b).sum());
            }
        }
        let rhs: Vec<T> = rows
            .iter()
            .map(|row| -row.iter().zip(&r).map(|(&a, &b)| a * b).sum::<T>())
            .collect();
        nu = Lu::factor(gram)?.solve(&rhs);
        for k in 0..p {
            for i in 0..n {
                r[i] += rows[k][i] * nu[k];
            }
        }
        for c in eqs {
            primal = primal.max(c.residual(x).abs());
        }
    }
    let stationarity = r.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    Ok(ConvexSolution {
        x: x.to_vec(),
        objective: program.objective.value(x),
        inequality_multipliers: ineq_mult,
        bound_multipliers: bound_mult,
        equality_multipliers: nu,
        kkt: KktResiduals {
            stationarity,
            primal: primal.max(T::zero()),
            dual: dual.max(T::zero()),
            complementarity: comp,
        },
        newton_steps: steps,
    })
}

/// `sum_i weights[i] * x_i^2`
#[derive(Debug, Clone)]
pub struct WeightedSquares<T> {
    pub weights: Vec<T>,
}

impl<T: Real> ConvexFn<T> for WeightedSquares<T> {
    fn value(&self, x: &[T]) -> T {
        self.weights.iter().zip(x).map(|(&w, &v)| w * v * v).sum()
    }
    fn add_gradient(&self, x: &[T], scale: T, grad: &mut [T]) {
        for (i, &w) in self.weights.iter().enumerate() {
            grad[i] += scale * T::lit(2.0) * w * x[i];
        }
    }
    fn add_hessian(&self, _x: &[T], scale: T, hess: &mut Hessian<T>) {
        for (i, &w) in self.weights.iter().enumerate() {
            hess.add_diag(i, scale * T::lit(2.0) * w);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `a . x - b <= 0`
    struct Affine {
        a: Vec<f64>,
        b: f64,
    }
    impl ConvexFn<f64> for Affine {
        fn value(&self, x: &[f64]) -> f64 {
            self.a.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() - self.b
        }
        fn add_gradient(&self, _x: &[f64], scale: f64, grad: &mut [f64]) {
            for (g, a) in grad.iter_mut().zip(&self.a) {
                *g += scale * a;
            }
        }
        fn add_hessian(&self, _: &[f64], _: f64, _: &mut Hessian<f64>) {}
    }

    /// `(x0 - 1)^2 + (x1 - 2)^2 + x0 x1`, a coupled quadratic
    struct Coupled;
    impl ConvexFn<f64> for Coupled {
        fn value(&self, x: &[f64]) -> f64 {
            (x[0] - 1.0).powi(2) + (x[1] - 2.0).powi(2) + x[0] * x[1]
        }
        fn add_gradient(&self, x: &[f64], s: f64, g: &mut [f64]) {
            g[0] += s * (2.0 * (x[0] - 1.0) + x[1]);
            g[1] += s * (2.0 * (x[1] - 2.0) + x[0]);
        }
        fn add_hessian(&self, _: &[f64], s: f64, h: &mut Hessian<f64>) {
            h.add(0, 0, 2.0 * s);
            h.add(1, 1, 2.0 * s);
            h.add(0, 1, s);
            h.add(1, 0, s);
        }
    }

    #[test]
    fn square_with_lower_bound() {
        let p = ConvexProgram::new(1, Box::new(WeightedSquares { weights: vec![1.0_f64] }))
            .with_lower_bounds(vec![Some(1.0)]);
        let sol = minimize_convex(&p, &[3.0], &ConvexOptions::default()).unwrap();
        assert!((sol.x[0] - 1.0).abs() < 1e-7, "{:?}", sol.x);
        assert!(sol.kkt.max() <= 1e-8);
        assert!((sol.bound_multipliers[0] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn symmetric_simplex() {
        let p = ConvexProgram::new(3, Box::new(WeightedSquares { weights: vec![1.0_f64; 3] }))
            .with_equality(LinearConstraint::new(vec![(0, 1.0), (1, 1.0), (2, 1.0)], 1.0));
        let sol = minimize_convex(&p, &[1.0, 0.0, 0.0], &ConvexOptions::default()).unwrap();
        for v in &sol.x {
            assert!((v - 1.0 / 3.0).abs() < 1e-10);
        }
        assert!((sol.equality_multipliers[0] + 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_start_goes_through_phase_one() {
        // minimize x^2 + y^2  s.t. x + y >= 2 written as 2 - x - y <= 0; start infeasible
        let p = ConvexProgram::new(2, Box::new(WeightedSquares { weights: vec![1.0, 1.0] }))
            .with_inequality(Box::new(Affine { a: vec![-1.0, -1.0], b: -2.0 }));
        let sol = minimize_convex(&p, &[0.0, 0.0], &ConvexOptions::default()).unwrap();
        assert!((sol.x[0] - 1.0).abs() < 1e-7 && (sol.x[1] - 1.0).abs() < 1e-7);
        assert!(sol.kkt.max() <= 1e-8);
        assert!(sol.inequality_multipliers[0] >= 0.0);
    }

    #[test]
    fn infeasible_program_reports_violation() {
        // x <= -1 and x >= 1
        let p = ConvexProgram::new(1, Box::new(WeightedSquares { weights: vec![1.0_f64] }))
            .with_inequality(Box::new(Affine { a: vec![1.0], b: -1.0 }))
            .with_lower_bounds(vec![Some(1.0)]);
        match minimize_convex(&p, &[0.0], &ConvexOptions::default()) {
            Err(NumericsError::Infeasible { violation, .. }) => {
                assert!((violation - 1.0).abs() < 1e-3, "{violation}")
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn dense_hessian_fallback() {
        let p = ConvexProgram::new(2, Box::new(Coupled))
            .with_equality(LinearConstraint::new(vec![(0, 1.0), (1, 1.0)], 1.0));
        let sol = minimize_convex(&p, &[0.5, 0.5], &ConvexOptions::default()).unwrap();
        // on x0 + x1 = 1 the objective is 3 x0^2 - 3 x0 + const... minimized at x0 = 0
        // d/dx0 [(x0-1)^2 + (-x0-1)^2 + x0(1-x0)] = 2(x0-1) + 2(x0+1) + 1 - 2x0 = 2 x0 + 1
        assert!((sol.x[0] + 0.5).abs() < 1e-9, "{:?}", sol.x);
        assert!(sol.kkt.max() <= 1e-8);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let p = ConvexProgram::new(2, Box::new(WeightedSquares { weights: vec![1.0, 1.0] }))
            .with_lower_bounds(vec![Some(0.0)]);
        assert!(matches!(
            minimize_convex(&p, &[1.0, 1.0], &ConvexOptions::default()),
            Err(NumericsError::InvalidProgram(_))
        ));
    }
}
