//! Parameter recipes. Each family follows its construction: the printed
//! inequalities fix explicit constants, and the remaining "large enough" or
//! "small enough" constants are found by a geometric search driven by
//! [`verify_candidate`].

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::domain::{gradient_magnitude, DomainDescriptor, Grid};
use crate::model::{DiscreteProblem, ProblemSpec, TemporalForm};
use crate::numerics::{adaptive_simpson, integrate_scalar_ode, linspace, pow_nonneg};
use crate::spectral::{aligned_for_window, EigenPair, EnlargedEigenPair, Normalization};

use super::verify::{default_time_grid, verify_candidate, ResidualReport};
use super::{const_c_a, Candidate, CandidateKind, CertificateError, Family, Params};

fn default_horizon() -> f64 {
    1.0
}
fn default_samples() -> usize {
    21
}
fn default_tol() -> f64 {
    1e-8
}
fn default_steps() -> usize {
    60
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecipeOptions {
    /// Time horizon `T` over which sups and infs of the coefficients are taken.
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_samples")]
    pub time_samples: usize,
    /// Relative residual tolerance accepted by the search.
    #[serde(default = "default_tol")]
    pub tolerance: f64,
    /// Geometric search steps (factor 2 each).
    #[serde(default = "default_steps")]
    pub max_steps: usize,
}

impl Default for RecipeOptions {
    fn default() -> Self {
        RecipeOptions {
            horizon: default_horizon(),
            time_samples: default_samples(),
            tolerance: default_tol(),
            max_steps: default_steps(),
        }
    }
}

struct Ctx<'a> {
    spec: &'a ProblemSpec,
    grid: &'a Grid,
    prob: DiscreteProblem,
    opts: &'a RecipeOptions,
    family: Family,
}

impl Ctx<'_> {
    fn hypothesis<T>(&self, requirement: &str) -> Result<T, CertificateError> {
        Err(CertificateError::Hypothesis { family: self.family, requirement: requirement.to_string() })
    }

    fn verify(&self, cand: &Candidate) -> Result<ResidualReport, CertificateError> {
        verify_candidate(cand, self.spec, self.grid, &default_time_grid(cand, self.opts.time_samples))
    }

    /// `M = max(sup_{Q_T} a, sup k)`
    fn big_m(&self) -> f64 {
        self.prob.a_sup_horizon(self.opts.horizon).max(self.prob.k_sup_horizon(self.opts.horizon))
    }

    fn b_low(&self) -> f64 {
        self.prob.b_inf_horizon(self.opts.horizon)
    }

    fn quad(&self, f: impl Fn(f64) -> f64, v: &[f64]) -> f64 {
        self.grid.quad_weights.iter().zip(v).map(|(w, &x)| w * f(x)).sum()
    }

    fn sup_u0(&self) -> Result<f64, CertificateError> {
        Ok(self.spec.u0.eval(self.grid)?.sup_norm())
    }

    /// Runs `build` and `adjust` until the interior and boundary relations
    /// hold (and the initial ordering when `need_initial`).
    fn search<S>(
        &self,
        mut state: S,
        need_initial: bool,
        build: impl Fn(&S) -> Result<Candidate, CertificateError>,
        mut adjust: impl FnMut(&mut S, &ResidualReport),
    ) -> Result<Candidate, CertificateError> {
        let tol = self.opts.tolerance;
        let mut last = String::from("no candidate built");
        for _ in 0..self.opts.max_steps.max(1) {
            let cand = build(&state)?;
            let rep = self.verify(&cand)?;
            if rep.inequalities_hold(tol) && (!need_initial || rep.initial_ordering) {
                return Ok(cand);
            }
            last = format!(
                "interior {:e}, boundary {:e}, initial ordering {}",
                rep.interior_min_relative, rep.boundary_min_relative, rep.initial_ordering
            );
            adjust(&mut state, &rep);
        }
        Err(CertificateError::SearchExhausted { family: self.family, steps: self.opts.max_steps, last })
    }
}

struct Ex {
    r: Rational64,
    p: Rational64,
    q: Rational64,
    l: Rational64,
}

fn rat(v: i64) -> Rational64 {
    Rational64::from_integer(v)
}

/// Depth of the boundary collar used by the layer families.
fn collar_depth(desc: &DomainDescriptor) -> f64 {
    match *desc {
        DomainDescriptor::Interval { a, b } => 0.25 * (b - a),
        DomainDescriptor::Disc { radius } => 0.5 * radius,
    }
}

/// `lim_{t→∞} T'/T`
fn rate_at_infinity(form: TemporalForm) -> f64 {
    match form {
        TemporalForm::Exp { rho } => rho,
        _ => 0.0,
    }
}

/// `sup_{t ≥ 0} T'/T`
fn sup_log_rate(form: TemporalForm) -> f64 {
    match form {
        TemporalForm::Exp { rho } => rho,
        TemporalForm::Power { alpha } => alpha.max(0.0),
        TemporalForm::Constant => 0.0,
    }
}

/// Asymptotic slope of `∫₀ᵗ c·T`; infinite for super-linear growth.
fn integral_slope(c: f64, form: TemporalForm) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    match form {
        TemporalForm::Constant => c,
        TemporalForm::Exp { rho } if rho > 0.0 => f64::INFINITY,
        TemporalForm::Exp { rho } if rho == 0.0 => c,
        TemporalForm::Power { alpha } if alpha > 0.0 => f64::INFINITY,
        TemporalForm::Power { alpha } if alpha == 0.0 => c,
        _ => 0.0,
    }
}

/// `∫₀^∞ f` by doubling the upper limit until the added piece is negligible.
fn improper_integral(f: impl Fn(f64) -> f64, first: f64) -> Option<f64> {
    let mut hi = first;
    let mut total = adaptive_simpson(&f, 0.0, hi, 1e-13);
    for _ in 0..60 {
        let piece = adaptive_simpson(&f, hi, 2.0 * hi, 1e-13);
        total += piece;
        hi *= 2.0;
        if piece.abs() <= 1e-14 * total.abs().max(1e-300) {
            return Some(total);
        }
    }
    None
}

fn window_pair(ctx: &Ctx, eig: &EigenPair, lo: f64) -> Result<EnlargedEigenPair, CertificateError> {
    aligned_for_window(ctx.grid, lo.max(0.0), eig.lambda1, 0.5, Normalization::SupOne).map_err(|e| {
        CertificateError::InfeasibleWindow(format!("enlarged eigenvalue λ̃ ∈ ({}, λ₁ = {}): {e}", lo.max(0.0), eig.lambda1))
    })
}

/// Builds a candidate of `family` for `spec` by following its construction.
/// `eig` must be the first eigenpair of `grid` (any normalization).
pub fn make_recipe(
    family: Family,
    spec: &ProblemSpec,
    grid: &Grid,
    eig: &EigenPair,
    options: &RecipeOptions,
) -> Result<Candidate, CertificateError> {
    if eig.phi.len() != grid.len() {
        return Err(CertificateError::GridMismatch { expected: eig.phi.len(), got: grid.len() });
    }
    if !(options.horizon > 0.0) {
        return Err(CertificateError::InvalidArgument("recipe horizon must be positive".into()));
    }
    let ctx = Ctx { spec, grid, prob: DiscreteProblem::new(spec, grid)?, opts: options, family };
    let e = spec.exponents;
    let ex = Ex { r: e.r.0, p: e.p.0, q: e.q.0, l: e.l.0 };
    match family {
        Family::EigenQuotient => eigen_quotient(&ctx, &ex, eig),
        Family::LayerPower => layer_power(&ctx, &ex),
        Family::TemporalPower => temporal_power(&ctx, &ex),
        Family::LayerLinearPower => layer_linear_power(&ctx, &ex),
        Family::SelfSimilar => self_similar(&ctx, &ex),
        Family::EnlargedEigenF => enlarged_eigen_f(&ctx, &ex, eig),
        Family::EnlargedEigenExp => enlarged_eigen_exp(&ctx, &ex, eig),
        Family::FlatExp => flat_exp(&ctx, &ex),
        Family::EigenExp => eigen_exp(&ctx, &ex, eig),
        Family::EigenOde => eigen_ode(&ctx, &ex, eig),
        Family::ExactRemark310 => match spec.exact_solution_rate() {
            Some(rate) => Ok(Candidate {
                kind: CandidateKind::ExactSolution,
                region_end: options.horizon,
                params: Params::ExactRemark310 { rate },
            }),
            None => ctx.hypothesis("the exact-solution fixture for a, b and k with u₀ ≡ 1"),
        },
    }
}

fn eigen_quotient(ctx: &Ctx, ex: &Ex, eig: &EigenPair) -> Result<Candidate, CertificateError> {
    let one = rat(1);
    let b_low = ctx.b_low();
    let rp = ex.r + ex.p;
    let branch_i = rp.max(ex.l) <= one;
    let branch_ii = ex.l <= one && one < rp && rp < ex.q && b_low > 0.0;
    if !branch_i && !branch_ii {
        return ctx.hypothesis("max(r+p, l) ≤ 1, or l ≤ 1 and 1 < r+p < q with inf b > 0");
    }
    let (r, p, q, l) = (ctx.prob.r, ctx.prob.p, ctx.prob.q, ctx.prob.l);
    let m = ctx.big_m();
    let phi = eig.renormalized(ctx.grid, Normalization::SupOne).phi.into_inner();
    let eps = 0.5;
    // scale φ until M ∫(cφ + ε)^{−l} ≤ 1
    let mut c = 1.0;
    let boundary_load = |c: f64| m * ctx.quad(|v| (c * v + eps).powf(-l), &phi);
    let mut steps = 0;
    while boundary_load(c) > 1.0 {
        c *= 2.0;
        steps += 1;
        if steps > ctx.opts.max_steps {
            return Err(CertificateError::InfeasibleWindow("no scaling of φ gives M∫(φ+ε)^{−l} ≤ 1".into()));
        }
    }
    let sup_u0 = ctx.sup_u0()?;
    let lambda = eig.lambda1;
    let build = |&(c, mu_mult, eta_mult): &(f64, f64, f64)| {
        let psi: Vec<f64> = phi.iter().map(|v| c * v + eps).collect();
        let grad = gradient_magnitude(ctx.grid, &psi);
        let grad_term = grad.iter().zip(&psi).map(|(g, s)| 2.0 * g * g / (s * s)).fold(0.0, f64::max);
        let sup_psi = psi.iter().copied().fold(0.0, f64::max);
        let inv_p = ctx.quad(|s| s.powf(-p), &psi);
        let mut eta = (sup_u0 * sup_psi).max(1.0);
        let mut mu = lambda + grad_term;
        if branch_i {
            mu += m * psi.iter().map(|s| s.powf(1.0 - r)).fold(0.0, f64::max) * inv_p;
        } else {
            let sup_qr = psi.iter().map(|s| s.powf(q - r)).fold(0.0, f64::max);
            eta = eta.max((m / b_low * sup_qr * inv_p).powf(1.0 / (q - r - p)));
        }
        Ok(Candidate {
            kind: CandidateKind::Supersolution,
            region_end: ctx.opts.horizon,
            params: Params::EigenQuotient {
                eta: eta * eta_mult,
                mu: mu * mu_mult,
                eps,
                phi: phi.iter().map(|v| c * v).collect(),
            },
        })
    };
    let tol = ctx.opts.tolerance;
    ctx.search((c, 1.0, 1.0), true, build, |s, rep| {
        if !rep.interior_ok(tol) {
            s.1 *= 2.0;
        }
        if !rep.boundary_ok(tol) {
            s.0 *= 2.0;
        }
        if !rep.initial_ordering {
            s.2 *= 2.0;
        }
    })
}

fn layer_power(ctx: &Ctx, ex: &Ex) -> Result<Candidate, CertificateError> {
    let (one, two) = (rat(1), rat(2));
    if !(ctx.b_low() > 0.0) {
        return ctx.hypothesis("b ≥ b̲ > 0 on the horizon");
    }
    if !(one < ex.l && ex.l < (ex.q + one) / two && (ex.r + ex.p).max(two * ex.p + one) < ex.q) {
        return ctx.hypothesis("1 < l < (q+1)/2 and max(r+p, 2p+1) < q");
    }
    let (p, q, l) = (ctx.prob.p, ctx.prob.q, ctx.prob.l);
    let beta_lo = 2.0 / (q - 1.0);
    let beta_hi = (1.0 / p).min(1.0 / (l - 1.0));
    if !(beta_lo < beta_hi) {
        return Err(CertificateError::InfeasibleWindow(format!("2/(q−1) = {beta_lo} < β < min(1/p, 1/(l−1)) = {beta_hi}")));
    }
    let beta = 0.5 * (beta_lo + beta_hi);
    let gamma = 0.25 * beta;
    let desc = ctx.grid.descriptor;
    let delta = collar_depth(&desc);
    let c_bar = desc.curvature_bound(delta)?;
    let j_bar = desc.jacobian_bound();
    let omega = 0.5 * delta.min(1.0);
    let amp0 = ctx.sup_u0()?.max(1.0);
    let build = |&(eps, amp): &(f64, f64)| {
        Ok(Candidate {
            kind: CandidateKind::Supersolution,
            region_end: ctx.opts.horizon,
            params: Params::LayerPower { eps, omega, beta, gamma, amp, delta, c_bar, j_bar },
        })
    };
    let tol = ctx.opts.tolerance;
    ctx.search((0.5 * omega, amp0), true, build, |s, rep| {
        if !rep.interior_ok(tol) {
            // A carries the sink away from ∂Ω; next to ∂Ω only a thinner
            // layer helps
            s.1 *= 2.0;
            if desc.distance_to_boundary(rep.worst_point[0]) < 2.0 * s.0 {
                s.0 *= 0.5;
            }
        }
        if !rep.boundary_ok(tol) {
            s.0 *= 0.5;
        }
        if !rep.initial_ordering {
            s.1 *= 2.0;
        }
    })
}

fn temporal_power(ctx: &Ctx, ex: &Ex) -> Result<Candidate, CertificateError> {
    let one = rat(1);
    if !(ex.q < (ex.r + ex.p).min(one) && ex.l > one) {
        return ctx.hypothesis("q < min(r+p, 1) and l > 1");
    }
    let b_low = ctx.b_low();
    if !(b_low > 0.0) {
        return ctx.hypothesis("b > 0 near t = 0");
    }
    let q = ctx.prob.q;
    let t_star = 0.5 * ctx.opts.horizon;
    let e = 1.0 / (1.0 - q);
    // β^{1−q} ≤ b̲(1−q)/2 makes the sink beat g' on (0, T)
    let beta0 = (0.5 * b_low * (1.0 - q)).powf(e);
    let eps0 = beta0 * t_star.powf(e);
    let build = |&(beta, eps): &(f64, f64)| {
        Ok(Candidate {
            kind: CandidateKind::Supersolution,
            region_end: ctx.opts.horizon,
            params: Params::TemporalPower { beta, eps, t_star, q },
        })
    };
    ctx.search((beta0, eps0), false, build, |s, _| {
        s.0 *= 0.5;
        s.1 *= 0.5;
    })
}

fn layer_linear_power(ctx: &Ctx, ex: &Ex) -> Result<Candidate, CertificateError> {
    let (one, two) = (rat(1), rat(2));
    if !(ex.r >= ex.q && (ex.q + one) / two < ex.l && ex.l <= one) {
        return ctx.hypothesis("r ≥ q and (q+1)/2 < l ≤ 1");
    }
    if !(ctx.b_low() > 0.0) {
        return ctx.hypothesis("b > 0 near t = 0");
    }
    let (q, l) = (ctx.prob.q, ctx.prob.l);
    let gamma_lo = 2.0 / (1.0 - q);
    let gamma = if ex.l < one { 0.5 * (gamma_lo + 1.0 / (1.0 - l)) } else { gamma_lo + 1.0 };
    let desc = ctx.grid.descriptor;
    let m = ctx.big_m();
    let j_bar = desc.jacobian_bound();
    let delta_max = if m > 0.0 {
        ((gamma * l + 1.0) / (2.0 * m * j_bar)).powf(1.0 / (gamma * (l - 1.0) + 1.0))
    } else {
        f64::INFINITY
    };
    let measure = desc.measure();
    let build = |&(delta, eps_mult): &(f64, f64)| {
        let t0 = 0.5 * delta;
        let room = (delta - t0).powf(gamma);
        let eps_max = if m > 0.0 { (room / (2.0 * m * measure)).powf(1.0 / l) } else { room };
        Ok(Candidate {
            kind: CandidateKind::Supersolution,
            region_end: t0,
            params: Params::LayerLinearPower { delta, eps: 0.5 * eps_max * eps_mult, gamma, t0 },
        })
    };
    let tol = ctx.opts.tolerance;
    let delta0 = 0.5 * delta_max.min(collar_depth(&desc)).min(1.0);
    ctx.search((delta0, 1.0), false, build, |s, rep| {
        if !rep.interior_ok(tol) {
            s.0 *= 0.5;
        }
        if !rep.boundary_ok(tol) {
            s.1 *= 0.5;
        }
    })
}

fn self_similar(ctx: &Ctx, ex: &Ex) -> Result<Candidate, CertificateError> {
    let one = rat(1);
    let rp_ex = ex.r + ex.p;
    if !(rp_ex > ex.q.max(one)) {
        return ctx.hypothesis("r + p > max(q, 1)");
    }
    let h = ctx.opts.horizon;
    if !(ctx.prob.a_inf(0.0).min(ctx.prob.a_inf(h)) > 0.0) {
        return ctx.hypothesis("a ≥ a₀ > 0 on the horizon");
    }
    let (p, q) = (ctx.prob.p, ctx.prob.q);
    let rp = ctx.prob.r + p;
    let desc = ctx.grid.descriptor;
    let dim = desc.dim();
    let n = dim as f64;
    let amp = 3.0 * n.sqrt();
    let gamma = 1.1 * (n / (2.0 * (rp - q))).max((n + 2.0) / (2.0 * (rp - 1.0)));
    let theta2 = (gamma + 0.5) / (gamma + 1.0);
    let c_a = const_c_a(p, amp, dim)?;
    // the support A√T must stay inside Ω
    let t_fit = (desc.inradius() / amp).powi(2);
    let build = |&t_star: &f64| {
        Ok(Candidate {
            kind: CandidateKind::Subsolution,
            region_end: t_star,
            params: Params::SelfSimilar { gamma, amp, theta2, t_star, c_a, dim },
        })
    };
    ctx.search(0.5 * h.min(t_fit), false, build, |t, _| *t *= 0.5)
}

fn enlarged_eigen_f(ctx: &Ctx, ex: &Ex, eig: &EigenPair) -> Result<Candidate, CertificateError> {
    let one = rat(1);
    if !(ex.q == one && (ex.r + ex.p).min(ex.l) > one) {
        return ctx.hypothesis("q = 1 and min(r+p, l) > 1");
    }
    let pr = &ctx.prob;
    let (r, p, l) = (pr.r, pr.p, pr.l);
    let kappa = r + p - 1.0;
    let a_sup = pr.a_sup(0.0);
    let b_low = pr.b_inf(0.0);
    let (a_time, b_time, k_time) = (pr.a_law.temporal, pr.b_law.temporal, pr.k_law.temporal);
    if b_low < 0.0 {
        return ctx.hypothesis("b ≥ 0");
    }
    let slope = integral_slope(b_low, b_time);
    let mut lo = f64::NEG_INFINITY;
    if a_sup > 0.0 {
        lo = lo.max(rate_at_infinity(a_time) / kappa - slope);
    }
    if !pr.kernel_is_zero() {
        lo = lo.max(rate_at_infinity(k_time) / (l - 1.0) - slope);
    }
    let enl = window_pair(ctx, eig, lo)?;
    let lambda_t = enl.pair.lambda1;
    let base_phi = enl.pair.phi.into_inner();
    let d = 1.01 * enl.d;
    // K with ∫k ≤ K exp[(l−1)(λ̃t + ∫b̲)] for all t ≥ 0
    let tail = (10.0 * ctx.opts.horizon).max(50.0 / lambda_t);
    let k_bound = linspace(0.0, tail, 4001)
        .into_iter()
        .map(|t| pr.k_row_integral(t) / ((l - 1.0) * (lambda_t * t + b_low * b_time.integral(t))).exp())
        .fold(0.0, f64::max)
        * (1.0 + 1e-9);
    let weight = |tau: f64| a_sup * a_time.eval(tau) * (-kappa * (lambda_t * tau + b_low * b_time.integral(tau))).exp();
    let source_total = if a_sup > 0.0 {
        match improper_integral(weight, ctx.opts.horizon.max(1.0)) {
            Some(v) => v,
            None => return ctx.hypothesis("a convergent ∫₀^∞ ā e^{−κ(λ̃t + ∫b̲)} dt"),
        }
    } else {
        0.0
    };
    let build = |&(n_mult, k_mult): &(f64, f64)| {
        let k = k_bound * k_mult;
        let eps = if k > 0.0 { (k * d.powf(l)).powf(-1.0 / (l - 1.0)) } else { 1.0 };
        let phi: Vec<f64> = base_phi.iter().map(|v| d * eps * v).collect();
        let sup_r = phi.iter().map(|v| pow_nonneg(*v, r - 1.0)).fold(0.0, f64::max);
        let n_const = n_mult * sup_r * ctx.quad(|v| pow_nonneg(v, p), &phi);
        let b_const = 1.0 + kappa * n_const * source_total;
        Ok(Candidate {
            kind: CandidateKind::Supersolution,
            region_end: ctx.opts.horizon,
            params: Params::EnlargedEigenF { lambda_t, eps, d, n_const, b_const, kappa, a_sup, a_time, b_low, b_time, phi },
        })
    };
    let tol = ctx.opts.tolerance;
    ctx.search((1.0, 1.0), false, build, |s, rep| {
        if !rep.interior_ok(tol) {
            s.0 *= 2.0;
        }
        if !rep.boundary_ok(tol) {
            s.1 *= 2.0;
        }
    })
}

fn enlarged_eigen_exp(ctx: &Ctx, ex: &Ex, eig: &EigenPair) -> Result<Candidate, CertificateError> {
    let one = rat(1);
    if !(ex.l > one && one < ex.q && ex.q < ex.r + ex.p) {
        return ctx.hypothesis("l > 1 and 1 < q < r+p");
    }
    let pr = &ctx.prob;
    let (r, p, q, l) = (pr.r, pr.p, pr.q, pr.l);
    let lambda = eig.lambda1;
    let has_source = !pr.a_law.is_zero();
    let has_kernel = !pr.kernel_is_zero();
    let mut lo = f64::NEG_INFINITY;
    // ∫k ≤ A e^{σt}
    let a_k = pr.k_row_integral(0.0);
    let sigma = sup_log_rate(pr.k_law.temporal);
    if has_kernel {
        if !(sigma < lambda * (l - 1.0)) {
            return ctx.hypothesis("∫k ≤ A e^{σt} with σ < λ₁(l − 1)");
        }
        lo = lo.max(sigma / (l - 1.0));
    }
    // b ≥ B a e^{−ωt}
    let mut b_coef = f64::INFINITY;
    if has_source {
        let desc = ctx.grid.descriptor;
        b_coef = ctx
            .grid
            .refined(4)
            .nodes
            .iter()
            .filter_map(|&x| {
                let a = pr.a_law.spatial_at(&desc, x);
                (a > 0.0).then(|| pr.b_law.spatial_at(&desc, x) / a)
            })
            .fold(f64::INFINITY, f64::min);
        let (ta, tb) = (pr.a_law.temporal, pr.b_law.temporal);
        let omega = (ta.log_rate(0.0) - tb.log_rate(0.0)).max(rate_at_infinity(ta) - rate_at_infinity(tb));
        if !(b_coef > 0.0) || !(omega < lambda * (r + p - q)) {
            return ctx.hypothesis("b ≥ B a e^{−ωt} with B > 0 and ω < λ₁(r + p − q)");
        }
        lo = lo.max(omega / (r + p - q));
    }
    let enl = window_pair(ctx, eig, lo)?;
    let lambda_t = enl.pair.lambda1;
    let phi = enl.pair.phi.into_inner();
    let d = 0.999 * enl.inf_on_omega;
    let mut beta = f64::INFINITY;
    if has_source {
        let sup_rq = phi.iter().map(|v| pow_nonneg(*v, r - q)).fold(0.0, f64::max);
        let s = sup_rq * ctx.quad(|v| pow_nonneg(v, p), &phi);
        beta = beta.min((b_coef / s).powf(1.0 / (r + p - q)));
    }
    if has_kernel && a_k > 0.0 {
        beta = beta.min((d / a_k).powf(1.0 / (l - 1.0)));
    }
    if !beta.is_finite() {
        beta = 1.0;
    }
    let build = |&beta: &f64| {
        Ok(Candidate {
            kind: CandidateKind::Supersolution,
            region_end: ctx.opts.horizon,
            params: Params::EnlargedEigenExp { beta, lambda_t, d, phi: phi.clone() },
        })
    };
    ctx.search(beta, false, build, |b, _| *b *= 0.5)
}

fn flat_exp(ctx: &Ctx, ex: &Ex) -> Result<Candidate, CertificateError> {
    let one = rat(1);
    let pr = &ctx.prob;
    if !(ex.q > one && ex.l > one) || !pr.a_law.is_zero() {
        return ctx.hypothesis("a ≡ 0 and min(q, l) > 1");
    }
    if !pr.b_law.is_spatially_constant() || !pr.k_law.is_spatially_constant() {
        return ctx.hypothesis("b and k constant in space");
    }
    let (q, l) = (pr.q, pr.l);
    let lambda = ctx.spec.lambda1();
    let b0 = pr.b_inf(0.0);
    if !(b0 > 0.0) {
        return ctx.hypothesis("b > 0");
    }
    let k_mass = pr.k_sup(0.0) * pr.measure;
    let cap = (b0 / lambda).powf((l - 1.0) / (q - 1.0));
    if k_mass > cap * (1.0 + 1e-12) {
        return ctx.hypothesis(&format!("k|Ω| ≤ (b/λ₁)^{{(l−1)/(q−1)}} = {cap}, got {k_mass}"));
    }
    Ok(Candidate {
        kind: CandidateKind::Supersolution,
        region_end: ctx.opts.horizon,
        params: Params::FlatExp { c: (lambda / b0).powf(1.0 / (q - 1.0)), lambda },
    })
}

fn eigen_exp(ctx: &Ctx, ex: &Ex, eig: &EigenPair) -> Result<Candidate, CertificateError> {
    let one = rat(1);
    let pr = &ctx.prob;
    if !(ex.p >= one && ex.r >= ex.q && ex.q > one) {
        return ctx.hypothesis("p ≥ 1 and r ≥ q > 1");
    }
    if !pr.a_law.is_spatially_constant() || !pr.b_law.is_spatially_constant() || !pr.kernel_is_zero() {
        return ctx.hypothesis("a, b constant in space and k ≡ 0");
    }
    let (r, p, q) = (pr.r, pr.p, pr.q);
    let lambda = eig.lambda1;
    let phi = eig.renormalized(ctx.grid, Normalization::IntegralOne).phi.into_inner();
    let s = phi.iter().map(|v| pow_nonneg(*v, r - q)).fold(0.0, f64::max) * ctx.quad(|v| pow_nonneg(v, p), &phi);
    let k = r + p - q;
    let beta_max = linspace(0.0, ctx.opts.horizon, ctx.opts.time_samples.max(2))
        .into_iter()
        .filter(|&t| pr.a_sup(t) > 0.0)
        .map(|t| (pr.b_inf(t) * (lambda * k * t).exp() / (pr.a_sup(t) * s)).powf(1.0 / k))
        .fold(f64::INFINITY, f64::min);
    let beta0 = if beta_max.is_finite() { 0.5 * beta_max } else { 1.0 };
    let build = |&beta: &f64| {
        Ok(Candidate {
            kind: CandidateKind::Supersolution,
            region_end: ctx.opts.horizon,
            params: Params::EigenExp { beta, lambda, phi: phi.clone() },
        })
    };
    ctx.search(beta0, false, build, |b, _| *b *= 0.5)
}

fn eigen_ode(ctx: &Ctx, ex: &Ex, eig: &EigenPair) -> Result<Candidate, CertificateError> {
    let pr = &ctx.prob;
    if !pr.a_law.is_spatially_constant() || !pr.kernel_is_zero() {
        return ctx.hypothesis("a constant in space and k ≡ 0");
    }
    // φ^r ≤ φ when sup φ = 1
    if ex.r < rat(1) {
        return ctx.hypothesis("r ≥ 1");
    }
    let lambda = eig.lambda1;
    let phi = eig.renormalized(ctx.grid, Normalization::SupOne).phi.into_inner();
    let (rp, measure, a_low, a_time) = (pr.r + pr.p, pr.measure, pr.a_inf(0.0), pr.a_law.temporal);
    let h = ctx.opts.horizon;
    let rhs = |s: f64, f: f64| -lambda * f + measure * a_low * a_time.eval(s) * pow_nonneg(f, rp);
    let mut f0 = 1.0;
    for _ in 0..ctx.opts.max_steps {
        let tr = integrate_scalar_ode(rhs, 0.0, f0, h, 1e-12, 1e12);
        if tr.escaped_at.is_none() && tr.values.iter().all(|v| *v <= 1e6) {
            break;
        }
        f0 *= 0.5;
    }
    let build = |&f0: &f64| {
        Ok(Candidate {
            kind: CandidateKind::Supersolution,
            region_end: h,
            params: Params::EigenOde { f0, lambda, rp, measure, a_low, a_time, phi: phi.clone() },
        })
    };
    ctx.search(f0, false, build, |f, _| *f *= 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::build_grid;
    use crate::model::tests::{remark310_spec, unit};
    use crate::model::{CoefficientDescriptor, Exponents, FixtureTag, InitialDatum, KernelDescriptor};
    use crate::spectral::first_eigenpair;

    fn spec(e: (f64, f64, f64, f64), a: f64, b: f64, k: KernelDescriptor) -> ProblemSpec {
        ProblemSpec {
            exponents: Exponents::from_f64(e.0, e.1, e.2, e.3).unwrap(),
            a: CoefficientDescriptor::Constant { c: a },
            b: CoefficientDescriptor::Constant { c: b },
            k,
            u0: InitialDatum::Constant { c: 0.0 },
            domain: unit(),
        }
    }

    fn setup(s: &ProblemSpec, n: usize) -> (Grid, EigenPair) {
        let g = build_grid(s.domain, n).unwrap();
        let eig = first_eigenpair(&g, Normalization::SupOne).unwrap();
        (g, eig)
    }

    fn check(family: Family, s: &ProblemSpec, n: usize) -> (Candidate, ResidualReport) {
        let (g, eig) = setup(s, n);
        let opts = RecipeOptions::default();
        let c = make_recipe(family, s, &g, &eig, &opts).unwrap();
        let rep = verify_candidate(&c, s, &g, &default_time_grid(&c, 41)).unwrap();
        assert!(rep.inequalities_hold(1e-8), "{family:?}: {rep:?}");
        (c, rep)
    }

    #[test]
    fn eigen_quotient_recipe_constants() {
        let mut s = spec((0.4, 0.4, 1.0, 1.0), 1.0, 0.0, KernelDescriptor::UniformConstant { k0: 1.0 });
        s.u0 = InitialDatum::SineMode { c: 3.0 };
        let (g, _) = setup(&s, 101);
        let (c, rep) = check(Family::EigenQuotient, &s, 101);
        assert!(rep.initial_ordering);
        let Params::EigenQuotient { eta, eps, phi, .. } = &c.params else { panic!() };
        let psi: Vec<f64> = phi.iter().map(|v| v + eps).collect();
        let load: f64 = g.quad_weights.iter().zip(&psi).map(|(w, s)| w / s).sum();
        assert!(load <= 1.0, "M∫(φ+ε)^{{−l}} = {load}");
        let sup_psi = psi.iter().copied().fold(0.0, f64::max);
        assert!(*eta >= (3.0 * sup_psi).max(1.0) * (1.0 - 1e-12));
    }

    #[test]
    fn eigen_quotient_sink_branch() {
        let s = spec((0.75, 0.75, 2.0, 0.5), 1.0, 1.0, KernelDescriptor::UniformConstant { k0: 0.5 });
        check(Family::EigenQuotient, &s, 81);
    }

    #[test]
    fn layer_power_recipe() {
        let s = spec((0.5, 0.5, 4.0, 1.2), 1.0, 1.0, KernelDescriptor::UniformConstant { k0: 1.0 });
        let (c, _) = check(Family::LayerPower, &s, 201);
        let Params::LayerPower { eps, omega, beta, gamma, delta, .. } = c.params else { panic!() };
        assert!(0.0 < eps && eps < omega && omega < delta.min(1.0));
        assert!(2.0 / 3.0 < beta && beta < 2.0 && 0.0 < gamma && gamma < beta / 2.0);
    }

    #[test]
    fn temporal_power_recipe() {
        let s = spec((0.75, 0.75, 0.5, 2.0), 1.0, 1.0, KernelDescriptor::UniformConstant { k0: 1.0 });
        check(Family::TemporalPower, &s, 81);
    }

    #[test]
    fn layer_linear_power_recipe() {
        let s = spec((1.0, 1.0, 0.5, 0.9), 1.0, 1.0, KernelDescriptor::UniformConstant { k0: 1.0 });
        let (c, _) = check(Family::LayerLinearPower, &s, 201);
        let Params::LayerLinearPower { gamma, .. } = c.params else { panic!() };
        assert!(4.0 < gamma && gamma < 10.0);
    }

    #[test]
    fn self_similar_recipe_constants() {
        let s = spec((1.5, 1.5, 1.0, 1.0), 1.0, 0.0, KernelDescriptor::Zero);
        let (c, _) = check(Family::SelfSimilar, &s, 201);
        let Params::SelfSimilar { gamma, amp, theta2, .. } = c.params else { panic!() };
        assert_eq!(amp, 3.0);
        assert!((gamma - 1.1 * 0.75).abs() < 1e-15);
        assert!((theta2 - (gamma + 0.5) / (gamma + 1.0)).abs() < 1e-15);
        assert_eq!(c.kind, CandidateKind::Subsolution);
    }

    #[test]
    fn enlarged_eigen_exp_recipe() {
        let s = spec((1.0, 1.0, 1.5, 2.0), 1.0, 1.0, KernelDescriptor::UniformConstant { k0: 1.0 });
        check(Family::EnlargedEigenExp, &s, 101);
    }

    #[test]
    fn enlarged_eigen_f_recipe() {
        let s = spec((1.0, 1.0, 1.0, 2.0), 1.0, 1.0, KernelDescriptor::UniformConstant { k0: 1.0 });
        check(Family::EnlargedEigenF, &s, 101);
    }

    #[test]
    fn flat_exp_and_exact() {
        let mut s = spec((1.0, 1.0, 2.0, 2.0), 0.0, 0.0, KernelDescriptor::Zero);
        let tag = FixtureTag::Remark36 { b: 1.0, k: 0.05, lambda1: None };
        s.a = CoefficientDescriptor::Fixture { tag };
        s.b = CoefficientDescriptor::Fixture { tag };
        s.k = KernelDescriptor::Fixture { tag };
        let (_, rep) = check(Family::FlatExp, &s, 81);
        assert!(rep.interior_min_residual >= -1e-10 && rep.boundary_min_residual >= -1e-10, "{rep:?}");
        let exact = remark310_spec();
        let (_, rep) = check(Family::ExactRemark310, &exact, 81);
        assert!(rep.initial_ordering);
        assert!(rep.interior_min_residual.abs() <= 1e-8 && rep.boundary_min_residual.abs() <= 1e-8, "{rep:?}");
    }

    #[test]
    fn eigen_exp_and_ode() {
        let s = spec((2.0, 1.0, 1.5, 1.0), 1.0, 1.0, KernelDescriptor::Zero);
        check(Family::EigenExp, &s, 81);
        check(Family::EigenOde, &s, 81);
    }

    #[test]
    fn hypotheses_are_enforced() {
        let s = spec((1.0, 1.0, 1.0, 1.0), 1.0, 1.0, KernelDescriptor::Zero);
        let (g, eig) = setup(&s, 41);
        let o = RecipeOptions::default();
        for f in [Family::EigenQuotient, Family::LayerPower, Family::TemporalPower, Family::FlatExp, Family::ExactRemark310] {
            assert!(matches!(make_recipe(f, &s, &g, &eig, &o), Err(CertificateError::Hypothesis { .. })), "{f:?}");
        }
    }
}
