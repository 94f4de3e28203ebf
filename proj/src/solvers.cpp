#include "lassokit/solvers.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "lassokit/rng.hpp"

namespace lassokit {

namespace {

/// Accelerated proximal gradient with restart on objective increase.
/// `step_op(v)` applies the prox/projection at step size 1/L.
/// Convergence is declared on the prox-gradient fixed-point residual
/// ||x - step_op(x - grad(x)/L)|| <= tol*(1 + ||x||).
template <typename StepOp, typename Objective>
struct FistaOut {
    Eigen::VectorXd x;
    long iterations = 0;
    bool converged = false;
};

template <typename StepOp, typename Objective>
FistaOut<StepOp, Objective> fista(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, double lip,
                                  StepOp&& step_op, Objective&& objective,
                                  const Eigen::VectorXd& x_init, double tol, long max_iter) {
    FistaOut<StepOp, Objective> out;
    Eigen::VectorXd x = x_init;
    Eigen::VectorXd z = x;
    double t = 1.0;
    double fx = objective(x);
    double L = lip;

    const auto grad_step = [&](const Eigen::VectorXd& at) -> Eigen::VectorXd {
        return step_op(at - a.transpose() * (a * at - y) / L);
    };

    for (long it = 0; it < max_iter; ++it) {
        ++out.iterations;
        Eigen::VectorXd xn = grad_step(z);
        double fn = objective(xn);

        if (fn > fx) {
            // Momentum overshot: restart from the last iterate.
            z = x;
            t = 1.0;
            xn = grad_step(x);
            fn = objective(xn);
            int halvings = 0;
            while (fn > fx && halvings < 30) {
                // Power iteration underestimated L; shrink the step.
                L *= 2.0;
                xn = grad_step(x);
                fn = objective(xn);
                ++halvings;
            }
            if ((xn - x).norm() <= tol * (1.0 + x.norm())) {
                out.x = xn;
                out.converged = true;
                return out;
            }
        }

        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        z = xn + ((t - 1.0) / tn) * (xn - x);

        if ((xn - x).norm() <= tol * (1.0 + xn.norm())) {
            const Eigen::VectorXd fp = grad_step(xn);
            if ((fp - xn).norm() <= tol * (1.0 + xn.norm())) {
                out.x = xn;
                out.converged = true;
                return out;
            }
        }

        x = std::move(xn);
        fx = fn;
        t = tn;
    }
    out.x = x;
    out.converged = false;
    return out;
}

SolveResult solve_ell22_from(const LassoInstance& inst, double tau, const Eigen::VectorXd& x_init,
                             double lip, const SolveOptions& opts) {
    const double theta = inst.sigma * tau;
    const auto step_op = [&](const Eigen::VectorXd& v) { return prox(inst.model, v, theta / lip); };
    const auto objective = [&](const Eigen::VectorXd& x) {
        return 0.5 * (inst.y - inst.a * x).squaredNorm() + theta * f_value(inst.model, x);
    };

    auto run = fista(inst.a, inst.y, lip, step_op, objective, x_init, opts.tol, opts.max_iter);

    SolveResult res;
    res.x_hat = std::move(run.x);
    res.iterations = run.iterations;
    res.converged = run.converged;
    res.program = ProgramTag::Ell22;
    res.penalty = tau;
    res.residual_norm = (inst.y - inst.a * res.x_hat).norm();
    res.f_hat = f_value(inst.model, res.x_hat);
    res.objective = 0.5 * res.residual_norm * res.residual_norm + theta * res.f_hat;
    res.nse = nse_of(res.x_hat, inst.model.x0, inst.sigma);
    return res;
}

} // namespace

double operator_norm_sq(const Eigen::MatrixXd& a) {
    Rng rng(0x506f776572ULL); // fixed probe seed:估deterministic estimate
    Eigen::VectorXd v = rng.normal_vector(a.cols());
    v.normalize();
    double nu = 0.0;
    for (int it = 0; it < 200; ++it) {
        Eigen::VectorXd w = a.transpose() * (a * v);
        const double nu_new = w.norm();
        if (nu_new == 0.0) return 0.0;
        v = w / nu_new;
        if (std::abs(nu_new - nu) <= 1e-6 * nu_new) return nu_new;
        nu = nu_new;
    }
    return nu;
}

double nse_of(const Eigen::VectorXd& x_hat, const Eigen::VectorXd& x0, double sigma) {
    return (x_hat - x0).squaredNorm() / (sigma * sigma);
}

LassoInstance generate(const SignalModel& model, Eigen::Index m, double sigma, std::uint64_t seed,
                       EntryDist dist) {
    if (m < 1) throw DimensionError("generate: m must be >= 1");
    if (sigma <= 0) throw DimensionError("generate: sigma must be > 0");

    LassoInstance inst;
    inst.model = model;
    inst.m = m;
    inst.sigma = sigma;
    inst.seed = seed;

    Rng rng_a(derive_seed(seed, 0xA));
    if (dist == EntryDist::Gaussian) {
        inst.a = rng_a.normal_matrix(m, model.n);
    } else {
        inst.a.resize(m, model.n);
        for (Eigen::Index j = 0; j < model.n; ++j)
            for (Eigen::Index i = 0; i < m; ++i)
                inst.a(i, j) = rng_a.uniform() < 0.5 ? -1.0 : 1.0;
    }
    Rng rng_v(derive_seed(seed, 0xB));
    inst.v = rng_v.normal_vector(m);
    inst.y = inst.a * model.x0 + sigma * inst.v;
    return inst;
}

SolveResult solve_ell22(const LassoInstance& inst, double tau, SolveOptions opts) {
    if (tau < 0) throw PenaltyDomainError("solve_ell22: tau must be >= 0");
    const double lip = operator_norm_sq(inst.a);
    return solve_ell22_from(inst, tau, Eigen::VectorXd::Zero(inst.model.n), lip, opts);
}

SolveResult solve_ell2(const LassoInstance& inst, double lambda, SolveOptions opts) {
    if (lambda < 0) throw PenaltyDomainError("solve_ell2: lambda must be >= 0");
    const double lip = operator_norm_sq(inst.a);
    const double interp_threshold = 1e-6 * std::sqrt(static_cast<double>(inst.m)) * inst.sigma;

    double tau = lambda * inst.y.norm() / inst.sigma;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(inst.model.n);
    long total_iters = 0;
    bool outer_converged = false;
    bool interpolating = false;
    SolveResult res;

    constexpr long kMaxOuter = 200;
    for (long outer = 0; outer < kMaxOuter; ++outer) {
        res = solve_ell22_from(inst, tau, x, lip, opts);
        total_iters += res.iterations;
        x = res.x_hat;

        if (res.residual_norm < interp_threshold) {
            interpolating = true;
            break;
        }

        const double tau_next = 0.5 * tau + 0.5 * lambda * res.residual_norm / inst.sigma;
        if (std::abs(tau_next - tau) <= opts.tol * (1.0 + tau)) {
            tau = tau_next;
            outer_converged = true;
            break;
        }
        tau = tau_next;
    }

    if (interpolating) {
        // OFF regime: y = A x_hat holds at the optimum. Continue the path
        // tau -> 0 until the estimate stagnates.
        for (int halvings = 0; halvings < 60 && tau > 0; ++halvings) {
            tau *= 0.5;
            SolveResult next = solve_ell22_from(inst, tau, x, lip, opts);
            total_iters += next.iterations;
            const double move = (next.x_hat - x).norm();
            x = next.x_hat;
            res = std::move(next);
            if (move <= 1e-7 * (1.0 + x.norm())) break;
        }
        outer_converged = true;
    }

    res.program = ProgramTag::Ell2;
    res.penalty = lambda;
    res.interpolating = interpolating;
    res.iterations = total_iters;
    res.converged = outer_converged && res.converged;
    res.objective = res.residual_norm + lambda * res.f_hat;
    return res;
}

SolveResult solve_classo(const LassoInstance& inst, SolveOptions opts) {
    const double lip = operator_norm_sq(inst.a);
    const auto step_op = [&](const Eigen::VectorXd& v) { return ball_project(inst.model, v); };
    const auto objective = [&](const Eigen::VectorXd& x) {
        return 0.5 * (inst.y - inst.a * x).squaredNorm();
    };

    auto run = fista(inst.a, inst.y, lip, step_op, objective, Eigen::VectorXd::Zero(inst.model.n),
                     opts.tol, opts.max_iter);

    SolveResult res;
    res.x_hat = std::move(run.x);
    res.iterations = run.iterations;
    res.converged = run.converged;
    res.program = ProgramTag::Classo;
    res.penalty = 0.0;
    res.residual_norm = (inst.y - inst.a * res.x_hat).norm();
    res.f_hat = f_value(inst.model, res.x_hat);
    res.objective = res.residual_norm;
    res.nse = nse_of(res.x_hat, inst.model.x0, inst.sigma);
    return res;
}

} // namespace lassokit
