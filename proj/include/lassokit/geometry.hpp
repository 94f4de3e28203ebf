#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Core>

#include "lassokit/model.hpp"

namespace lassokit {

enum class GeomMethod { ClosedForm, MonteCarlo };
enum class ExecPolicy { Serial, Parallel };

/// The Gaussian geometry of lambda*df(x0): mean squared distance D, mean
/// correlation C, mean squared projection P of a standard normal vector.
///
/// `lambda` is in normalized units: for low-rank models the physical penalty
/// is lambda*sqrt(d) (see SignalModel::penalty_scale); for sparse and
/// block-sparse the two coincide.
///
/// Invariant: D + P + 2C = n (to 1e-9 closed form, to ~4 combined stderr MC).
struct GeometrySummary {
    double lambda = 0.0;
    double D = 0.0;
    double C = 0.0;
    double P = 0.0;
    GeomMethod method = GeomMethod::ClosedForm;
    long mc_samples = 0;
    double d_stderr = 0.0;
    double c_stderr = 0.0;
    double p_stderr = 0.0;
    bool asymptotic = false; // low-rank closed form is a d -> infinity limit
};

/// Mean squared distance to cone(df(x0)) — the phase-transition threshold.
struct ConeSummary {
    double d_cone = 0.0;
    GeomMethod method = GeomMethod::MonteCarlo;
    long mc_samples = 0;
    double mc_stderr = 0.0;
};

/// Exact (sparse, block-sparse) or asymptotic (low-rank) closed forms for
/// D, C, P at the given normalized lambda.
GeometrySummary closed_form_summary(const SignalModel& model, double lambda);

/// Monte-Carlo estimate of the same quantities over `samples` standard
/// normal draws, with per-quantity standard errors. Deterministic for a
/// fixed seed regardless of worker count.
GeometrySummary mc_summary(const SignalModel& model, double lambda, long samples,
                           std::uint64_t seed, ExecPolicy exec = ExecPolicy::Parallel);

/// Monte-Carlo estimate of D_cone = E[dist^2(h, cone(df(x0)))]. Each sample
/// minimizes dist^2(h, lambda*df(x0)) over lambda >= 0 (convex) by bracket
/// expansion plus golden section.
ConeSummary mc_cone(const SignalModel& model, long samples, std::uint64_t seed,
                    ExecPolicy exec = ExecPolicy::Parallel);

/// One cone-distance sample: min_{lambda>=0} ||Pi(h, lambda*df(x0))||^2.
/// Physical lambda units. Exposed for the Gordon module and tests.
double cone_dist_sq_sample(const SignalModel& model, const Eigen::VectorXd& h);

/// Closed-form upper bounds (valid for any model dimensions):
///   sparse:       D_cone <= 2k(log(n/k)+1),  D(lambda) <= (lambda^2+3)k
///                 for lambda >= sqrt(2 log(n/k))
///   low-rank:     D_cone <= 6dr,             D(lambda) <= lambda^2 r + 2d(r+1)
///                 for lambda >= 2 sqrt(d)
///   block-sparse: D_cone <= 4k(log(t/k)+b),  D(lambda) <= (lambda^2+b+2)k
///                 for lambda >= sqrt(b) + sqrt(2 log(t/k))
/// The lambda rows take the physical penalty. Passing m adds the induced
/// error bounds D/(m－D). Throws BoundNotApplicable below the threshold.
struct BoundTable {
    double d_cone_bound = 0.0;
    std::optional<double> d_lambda_bound;
    std::optional<double> nse_cone_bound;
    std::optional<double> nse_lambda_bound;
};
BoundTable bound_table(const SignalModel& model, std::optional<double> lambda = std::nullopt,
                       std::optional<double> m = std::nullopt);

/// Tail moments used by the closed forms; exposed for tests.
/// Quarter circle: psi(x) = sqrt(4-x^2)/pi on [0,2]; returns
/// int_x^2 u^i psi(u) du.
double quarter_circle_tail_moment(int i, double x);
/// Chi-square with b degrees of freedom: returns int_x^inf u^p pdf(u) du
/// for p in {0, 1/2, 1}.
double chi2_tail_moment(double p, double x, Eigen::Index b);

} // namespace lassokit
