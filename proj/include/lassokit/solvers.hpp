#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "lassokit/model.hpp"

namespace lassokit {

enum class EntryDist { Gaussian, Rademacher };
enum class ProgramTag { Classo, Ell2, Ell22 };

/// One random estimation problem: y = A*x0 + sigma*v with A and v standard
/// normal (the noise level sigma is carried separately from the unit-variance
/// direction v). Immutable after generation.
struct LassoInstance {
    SignalModel model;
    Eigen::Index m = 0;
    double sigma = 0.0;
    Eigen::MatrixXd a;
    Eigen::VectorXd v;
    Eigen::VectorXd y;
    std::uint64_t seed = 0;
};

LassoInstance generate(const SignalModel& model, Eigen::Index m, double sigma, std::uint64_t seed,
                       EntryDist dist = EntryDist::Gaussian);

struct SolveOptions {
    double tol = 1e-9;
    long max_iter = 200000;
};

struct SolveResult {
    Eigen::VectorXd x_hat;
    double nse = 0.0;           // ||x_hat - x0||^2 / sigma^2
    double residual_norm = 0.0; // ||y - A x_hat||
    double f_hat = 0.0;         // f(x_hat)
    double objective = 0.0;     // optimal value of the solved program
    long iterations = 0;
    bool converged = false;
    ProgramTag program = ProgramTag::Ell22;
    double penalty = 0.0;        // tau or lambda used (0 for C-LASSO)
    bool interpolating = false;  // l2 solver found y = A x_hat (OFF regime)
};

/// Squared-residual program: min 0.5*||y - A x||^2 + sigma*tau*f(x), solved
/// by accelerated proximal gradient with fixed step 1/L and restart on
/// objective increase. Converged when the prox-gradient fixed-point residual
/// falls below tol*(1 + ||x||).
SolveResult solve_ell22(const LassoInstance& inst, double tau, SolveOptions opts = {});

/// Residual-norm program: min ||y - A x|| + lambda*f(x), solved through the
/// correspondence tau = lambda*||y - A x||/sigma as a damped fixed point over
/// the squared program. When the residual falls below 1e-6*sqrt(m)*sigma the
/// solve finishes by tau-continuation toward zero and reports
/// interpolating = true (the estimate fits y exactly).
SolveResult solve_ell2(const LassoInstance& inst, double lambda, SolveOptions opts = {});

/// Constrained program: min ||y - A x|| subject to f(x) <= f(x0), solved as
/// projected accelerated gradient on the squared residual (same minimizers).
SolveResult solve_classo(const LassoInstance& inst, SolveOptions opts = {});

/// ||x_hat - x0||^2 / sigma^2.
double nse_of(const Eigen::VectorXd& x_hat, const Eigen::VectorXd& x0, double sigma);

/// Largest squared singular value of a, by power iteration on a^T a
/// (200 iterations, relative tolerance 1e-6).
double operator_norm_sq(const Eigen::MatrixXd& a);

} // namespace lassokit
