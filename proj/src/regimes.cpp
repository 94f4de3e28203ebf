#include "lassokit/regimes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace lassokit {

namespace {

constexpr double kLambdaTol = 1e-8; // absolute root tolerance in lambda
constexpr double kLambdaCap = 1e3;  // bracket expansion hard cap

template <typename F>
double golden_min(F&& f, double a, double b, double tol) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

/// Root of f on [a, b] with f(a) <= 0 <= f(b) (or the reverse).
template <typename F>
double bisect(F&& f, double a, double b, double tol) {
    double fa = f(a);
    const double fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    const bool rising = fa < 0.0;
    while (b - a > tol) {
        const double mid = 0.5 * (a + b);
        const double fm = f(mid);
        if ((fm <= 0.0) == rising)
            a = mid;
        else
            b = mid;
    }
    return 0.5 * (a + b);
}

double calib(const GeometryCurve& curve, double m, double lambda) {
    const double d = curve.D(lambda);
    const double c = curve.C(lambda);
    return (m - d - c) / std::sqrt(m - d);
}

} // namespace

std::string to_string(RegionTag tag) {
    switch (tag) {
        case RegionTag::Off: return "off";
        case RegionTag::On: return "on";
        case RegionTag::Inf: return "inf";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Smoothed Monte-Carlo curve
// ---------------------------------------------------------------------------

namespace {

/// Whittaker graduation: minimize sum w_i (z_i - y_i)^2 + mu * ||second
/// differences of z||^2. Small dense solve; grids here are <= ~100 knots.
std::vector<double> whittaker(const std::vector<double>& y, const std::vector<double>& w,
                              double mu) {
    const auto g = static_cast<Eigen::Index>(y.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g, g);
    Eigen::VectorXd rhs(g);
    for (Eigen::Index i = 0; i < g; ++i) {
        a(i, i) = w[static_cast<std::size_t>(i)];
        rhs[i] = w[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
    }
    for (Eigen::Index i = 1; i + 1 < g; ++i) {
        // row of D^T D from the stencil (1, -2, 1) at position i
        a(i - 1, i - 1) += mu;
        a(i - 1, i) += -2 * mu;
        a(i - 1, i + 1) += mu;
        a(i, i - 1) += -2 * mu;
        a(i, i) += 4 * mu;
        a(i, i + 1) += -2 * mu;
        a(i + 1, i - 1) += mu;
        a(i + 1, i) += -2 * mu;
        a(i + 1, i + 1) += mu;
    }
    Eigen::VectorXd z = a.ldlt().solve(rhs);
    return std::vector<double>(z.data(), z.data() + g);
}

/// Natural cubic spline second derivatives for knots x, values y.
std::vector<double> spline_second_derivs(const std::vector<double>& x,
                                         const std::vector<double>& y) {
    const auto g = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g, g);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(g);
    a(0, 0) = 1.0;
    a(g - 1, g - 1) = 1.0;
    for (Eigen::Index i = 1; i + 1 < g; ++i) {
        const double h0 = x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(i - 1)];
        const double h1 = x[static_cast<std::size_t>(i + 1)] - x[static_cast<std::size_t>(i)];
        a(i, i - 1) = h0 / 6.0;
        a(i, i) = (h0 + h1) / 3.0;
        a(i, i + 1) = h1 / 6.0;
        rhs[i] = (y[static_cast<std::size_t>(i + 1)] - y[static_cast<std::size_t>(i)]) / h1 -
                 (y[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(i - 1)]) / h0;
    }
    Eigen::VectorXd m = a.partialPivLu().solve(rhs);
    return std::vector<double>(m.data(), m.data() + g);
}

} // namespace

SmoothedMcCurve SmoothedMcCurve::fit(const SignalModel& model, double lambda_hi, int grid_points,
                                     long samples, std::uint64_t seed, ExecPolicy exec) {
    if (grid_points < 8) throw DimensionError("SmoothedMcCurve: need at least 8 grid points");

    SmoothedMcCurve curve;
    curve.lambda_hi_ = lambda_hi;
    curve.knots_.resize(static_cast<std::size_t>(grid_points));
    std::vector<double> d_raw(curve.knots_.size()), c_raw(curve.knots_.size());
    std::vector<double> d_w(curve.knots_.size()), c_w(curve.knots_.size());

    const double scale = static_cast<double>(model.n);
    for (std::size_t i = 0; i < curve.knots_.size(); ++i) {
        const double lam = lambda_hi * static_cast<double>(i) / (grid_points - 1.0);
        curve.knots_[i] = lam;
        const GeometrySummary s =
            mc_summary(model, lam, samples, derive_seed(seed, i), exec);
        d_raw[i] = s.D;
        c_raw[i] = s.C;
        const double floor_se = 1e-6 * scale;
        d_w[i] = 1.0 / std::pow(std::max(s.d_stderr, floor_se), 2);
        c_w[i] = 1.0 / std::pow(std::max(s.c_stderr, floor_se), 2);
    }

    // Penalty strength in the natural units of the weights.
    const double mu_d = 4.0 * *std::min_element(d_w.begin(), d_w.end()) * scale * scale * 1e-4;
    const double mu_c = 4.0 * *std::min_element(c_w.begin(), c_w.end()) * scale * scale * 1e-4;
    curve.d_vals_ = whittaker(d_raw, d_w, mu_d);
    curve.c_vals_ = whittaker(c_raw, c_w, mu_c);
    // Pin the exact anchors D(0) = n, C(0) = 0.
    curve.d_vals_[0] = scale;
    curve.c_vals_[0] = 0.0;
    curve.d_m_ = spline_second_derivs(curve.knots_, curve.d_vals_);
    curve.c_m_ = spline_second_derivs(curve.knots_, curve.c_vals_);
    return curve;
}

double SmoothedMcCurve::eval(const std::vector<double>& x, const std::vector<double>& y,
                             const std::vector<double>& m, double q) {
    const std::size_t g = x.size();
    std::size_t i = 1;
    while (i + 1 < g && x[i] < q) ++i;
    const double x0 = x[i - 1], x1 = x[i];
    const double h = x1 - x0;
    const double a = (x1 - q) / h, b = (q - x0) / h;
    return a * y[i - 1] + b * y[i] +
           ((a * a * a - a) * m[i - 1] + (b * b * b - b) * m[i]) * h * h / 6.0;
}

double SmoothedMcCurve::D(double lambda) const { return eval(knots_, d_vals_, d_m_, lambda); }
double SmoothedMcCurve::C(double lambda) const { return eval(knots_, c_vals_, c_m_, lambda); }

// ---------------------------------------------------------------------------
// Regime report
// ---------------------------------------------------------------------------

RegimeReport regime_report(const SignalModel& model, double m) {
    return regime_report(model, m, ClosedFormCurve(model), GeomSource::ClosedForm);
}

RegimeReport regime_report(const SignalModel& model, double m, const GeometryCurve& curve,
                           GeomSource source) {
    const auto d_of = [&](double lam) { return curve.D(lam); };
    const auto c_of = [&](double lam) { return curve.C(lam); };

    // lambda_best: expand until D turns upward, then golden section.
    double hi = 1.0;
    while (d_of(hi) <= d_of(0.5 * hi)) {
        hi *= 2.0;
        if (hi > kLambdaCap)
            throw RootBracketError("regime_report: D(lambda) still decreasing at lambda = 1e3");
    }
    const double lambda_best = golden_min(d_of, 0.0, hi, kLambdaTol);
    const double d_best = d_of(lambda_best);

    if (source == GeomSource::ClosedForm) {
        // D is minimized exactly where C crosses zero; compute the root
        // independently and require agreement.
        double c_hi = lambda_best;
        while (c_of(c_hi) > 0.0) {
            c_hi *= 2.0;
            if (c_hi > kLambdaCap)
                throw RootBracketError("regime_report: C(lambda) has no sign change");
        }
        const double c_root = bisect(c_of, 1e-10, c_hi, kLambdaTol);
        if (std::abs(c_root - lambda_best) > 1e-4)
            throw std::logic_error("regime_report: D-minimizer and C-root disagree beyond 1e-4");
    }

    if (m <= d_best)
        throw InsufficientMeasurements("regime_report: m <= D(lambda_best); no robust regime");

    RegimeReport rep;
    rep.m = m;
    rep.source = source;
    rep.lambda_best = lambda_best;
    rep.d_best = d_best;

    // lambda_max: unique root of D - m above lambda_best.
    double mhi = std::max(2.0 * lambda_best, 1.0);
    while (d_of(mhi) <= m) {
        mhi *= 2.0;
        if (mhi > kLambdaCap)
            throw RootBracketError("regime_report: D(lambda) stays below m up to lambda = 1e3");
    }
    rep.lambda_max = bisect([&](double l) { return d_of(l) - m; }, lambda_best, mhi, kLambdaTol);

    // lambda_crit: root of m - D - C on [0, lambda_best], or 0 when m > n.
    if (m > static_cast<double>(model.n)) {
        rep.lambda_crit = 0.0;
    } else {
        const auto gap = [&](double l) { return m - d_of(l) - c_of(l); };
        rep.lambda_crit = gap(0.0) >= 0.0 ? 0.0 : bisect(gap, 0.0, lambda_best, kLambdaTol);
    }
    return rep;
}

RegionTag classify(const RegimeReport& report, double lambda) {
    if (lambda <= report.lambda_crit) return RegionTag::Off;
    if (lambda < report.lambda_max) return RegionTag::On;
    return RegionTag::Inf;
}

double map_lambda(const RegimeReport& report, const SignalModel& model, double lambda) {
    return map_lambda(report, model, ClosedFormCurve(model), lambda);
}

double map_lambda(const RegimeReport& report, const SignalModel& model,
                  const GeometryCurve& curve, double lambda) {
    if (lambda < report.lambda_crit || lambda >= report.lambda_max)
        throw PenaltyDomainError("map_lambda: lambda outside [lambda_crit, lambda_max)");
    const double tau = lambda * model.penalty_scale() * calib(curve, report.m, lambda);
    return std::max(tau, 0.0); // clamp the lambda_crit endpoint against roundoff
}

double map_inverse(const RegimeReport& report, const SignalModel& model, double tau) {
    return map_inverse(report, model, ClosedFormCurve(model), tau);
}

double map_inverse(const RegimeReport& report, const SignalModel& model,
                   const GeometryCurve& curve, double tau) {
    if (tau < 0) throw PenaltyDomainError("map_inverse: tau must be >= 0");
    if (tau == 0.0) return report.lambda_crit;

    const auto map_at = [&](double l) { return map_lambda(report, model, curve, l); };

    // Bracket: approach lambda_max geometrically until map exceeds tau.
    double lo = report.lambda_crit;
    double hi = 0.5 * (report.lambda_best + report.lambda_max);
    int guard = 0;
    while (map_at(hi) < tau) {
        hi = report.lambda_max - 0.5 * (report.lambda_max - hi);
        if (++guard > 200 || hi >= report.lambda_max)
            throw RootBracketError("map_inverse: tau unreachable below lambda_max");
    }

    while (hi - lo > 1e-8 * (1.0 + hi)) {
        const double mid = 0.5 * (lo + hi);
        if (map_at(mid) < tau)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double tau_best(const RegimeReport& report, const SignalModel& model) {
    return report.lambda_best * model.penalty_scale() * std::sqrt(report.m - report.d_best);
}

NsePrediction predict_nse(const RegimeReport& report, const SignalModel& model,
                          const Program& program) {
    return predict_nse(report, model, ClosedFormCurve(model), program);
}

NsePrediction predict_nse(const RegimeReport& report, const SignalModel& model,
                          const GeometryCurve& curve, const Program& program) {
    NsePrediction out;
    const double m = report.m;

    if (const auto* cl = std::get_if<ClassoProgram>(&program)) {
        if (m <= cl->d_cone)
            throw InsufficientMeasurements("predict_nse: C-LASSO requires m > D_cone");
        out.nse = cl->d_cone / (m - cl->d_cone);
        out.region = RegionTag::On;
        return out;
    }
    if (const auto* e2 = std::get_if<Ell2Program>(&program)) {
        out.region = classify(report, e2->lambda);
        if (out.region == RegionTag::Inf)
            throw UnstableRegion("predict_nse: lambda >= lambda_max has no stable prediction");
        const double lam = out.region == RegionTag::Off ? report.lambda_crit : e2->lambda;
        const double d = curve.D(lam);
        out.nse = d / (m - d);
        out.conjectured = out.region == RegionTag::Off;
        return out;
    }
    const auto& e22 = std::get<Ell22Program>(program);
    if (e22.tau <= 0) throw PenaltyDomainError("predict_nse: l2^2 program requires tau > 0");
    const double lam = map_inverse(report, model, curve, e22.tau);
    const double d = curve.D(lam);
    out.nse = d / (m - d);
    out.region = classify(report, lam);
    out.conjectured = true;
    return out;
}

double predict_nse_ls(Eigen::Index n, Eigen::Index m) {
    if (m < n + 2)
        throw InsufficientMeasurements("predict_nse_ls: requires m >= n + 2");
    return static_cast<double>(n) / static_cast<double>(m - n - 1);
}

VarianceTranslation translate_variance(Eigen::Index m, double sigma_prime, double lambda_prime,
                                       double tau_prime) {
    if (m < 1) throw DimensionError("translate_variance: m must be >= 1");
    const double md = static_cast<double>(m);
    VarianceTranslation out;
    out.sigma = std::sqrt(md) * sigma_prime;
    out.lambda = std::sqrt(md) * lambda_prime;
    out.tau = md * tau_prime;
    out.nse_scale = md;
    return out;
}

} // namespace lassokit
