#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "lassokit/geometry.hpp"
#include "lassokit/model.hpp"

namespace lassokit {

enum class RegionTag { Off, On, Inf };
enum class GeomSource { ClosedForm, MonteCarloSmoothed };

std::string to_string(RegionTag tag);

/// D(lambda) and C(lambda) evaluator backing the regime computations.
/// Lambdas are in normalized units (see GeometrySummary).
class GeometryCurve {
  public:
    virtual ~GeometryCurve() = default;
    virtual double D(double lambda) const = 0;
    virtual double C(double lambda) const = 0;
};

class ClosedFormCurve final : public GeometryCurve {
  public:
    explicit ClosedFormCurve(const SignalModel& model) : model_(&model) {}
    double D(double lambda) const override { return closed_form_summary(*model_, lambda).D; }
    double C(double lambda) const override { return closed_form_summary(*model_, lambda).C; }

  private:
    const SignalModel* model_;
};

/// Monte-Carlo-backed curve: samples D and C on a lambda grid and fits a
/// penalized cubic B-spline to each, since raw MC noise breaks the
/// monotonicity the root finders rely on.
class SmoothedMcCurve final : public GeometryCurve {
  public:
    /// Samples `samples` draws per grid point on [0, lambda_hi] with
    /// `grid_points` equally spaced knots.
    static SmoothedMcCurve fit(const SignalModel& model, double lambda_hi, int grid_points,
                               long samples, std::uint64_t seed,
                               ExecPolicy exec = ExecPolicy::Parallel);

    double D(double lambda) const override;
    double C(double lambda) const override;
    double lambda_hi() const { return lambda_hi_; }

  private:
    SmoothedMcCurve() = default;
    double lambda_hi_ = 0.0;
    // Natural cubic spline coefficients per quantity on the smoothed values.
    std::vector<double> knots_;
    std::vector<double> d_vals_, d_m_; // values and second derivatives
    std::vector<double> c_vals_, c_m_;
    static double eval(const std::vector<double>& x, const std::vector<double>& y,
                       const std::vector<double>& m, double q);
};

/// Key penalty values for an estimation problem (model, m):
/// lambda_best minimizes D; D(lambda_max) = m; lambda_crit solves
/// m - D = C (0 when m > n). All in normalized lambda units.
struct RegimeReport {
    double m = 0.0;
    double lambda_best = 0.0;
    double lambda_crit = 0.0;
    double lambda_max = 0.0;
    double d_best = 0.0;
    GeomSource source = GeomSource::ClosedForm;
};

/// Computes the key values by golden section (lambda_best) and bisection
/// (lambda_max, lambda_crit) to 1e-8 absolute in lambda. For the closed-form
/// source, lambda_best is cross-checked against the root of C to 1e-4.
/// Throws InsufficientMeasurements when m <= D(lambda_best).
RegimeReport regime_report(const SignalModel& model, double m);
RegimeReport regime_report(const SignalModel& model, double m, const GeometryCurve& curve,
                           GeomSource source);

/// OFF iff lambda <= lambda_crit; ON iff lambda_crit < lambda < lambda_max;
/// INF iff lambda >= lambda_max.
RegionTag classify(const RegimeReport& report, double lambda);

/// The l2 -> l2^2 penalty bridge tau = lambda_phys*(m-D-C)/sqrt(m-D),
/// defined on [lambda_crit, lambda_max); strictly increasing with
/// map(lambda_crit) = 0. Returns the physical tau (low-rank lambdas are
/// rescaled by sqrt(d) internally).
double map_lambda(const RegimeReport& report, const SignalModel& model, double lambda);
double map_lambda(const RegimeReport& report, const SignalModel& model,
                  const GeometryCurve& curve, double lambda);

/// Inverse bridge: the unique lambda in [lambda_crit, lambda_max) with
/// map(lambda) = tau, by bisection to 1e-8 relative.
double map_inverse(const RegimeReport& report, const SignalModel& model, double tau);
double map_inverse(const RegimeReport& report, const SignalModel& model,
                   const GeometryCurve& curve, double tau);

/// map(lambda_best) = lambda_best_phys * sqrt(m - D(lambda_best)).
double tau_best(const RegimeReport& report, const SignalModel& model);

/// Program selectors for predict_nse.
struct ClassoProgram {
    double d_cone; // Monte-Carlo (or bound) estimate of D_cone
};
struct Ell2Program {
    double lambda;
};
struct Ell22Program {
    double tau; // physical penalty of the squared-residual program
};
using Program = std::variant<ClassoProgram, Ell2Program, Ell22Program>;

struct NsePrediction {
    double nse = 0.0;
    RegionTag region = RegionTag::On;
    bool conjectured = false; // OFF-region and l2^2 formulas are conjectures
};

/// Small-noise NSE predictors:
///   C-LASSO:  D_cone/(m-D_cone)            (requires m > D_cone)
///   l2-LASSO: D(lambda)/(m-D(lambda)) in ON; the lambda_crit value in OFF
///             (conjectured); UnstableRegion for lambda >= lambda_max
///   l2^2:     D(map^-1(tau))/(m-D(map^-1(tau))) (conjectured)
NsePrediction predict_nse(const RegimeReport& report, const SignalModel& model,
                          const Program& program);
NsePrediction predict_nse(const RegimeReport& report, const SignalModel& model,
                          const GeometryCurve& curve, const Program& program);

/// Least-squares baseline n/(m-n-1); requires m >= n+2.
double predict_nse_ls(Eigen::Index n, Eigen::Index m);

/// Rescaling from unit-variance measurement entries to variance 1/m:
/// sigma = sqrt(m)*sigma', lambda = sqrt(m)*lambda', tau = m*tau', and the
/// predicted NSE is multiplied by m.
struct VarianceTranslation {
    double sigma = 0.0;
    double lambda = 0.0;
    double tau = 0.0;
    double nse_scale = 0.0;
};
VarianceTranslation translate_variance(Eigen::Index m, double sigma_prime, double lambda_prime,
                                       double tau_prime);

} // namespace lassokit
