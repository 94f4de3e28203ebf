#include "lassokit/geometry.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "lassokit/rng.hpp"

namespace lassokit {

namespace {

constexpr double kQuadAbsTol = 1e-10;

struct Triple {
    double d, c, p;
};

/// Per-sample distance/correlation/projection of one Gaussian draw.
Triple geometry_sample(const SignalModel& model, double lambda_phys, std::uint64_t seed) {
    Rng rng(seed);
    const Eigen::VectorXd h = rng.normal_vector(model.n);
    const Eigen::VectorXd pi = subdiff_residual(model, h, lambda_phys);
    const Eigen::VectorXd proj = h - pi;
    return Triple{pi.squaredNorm(), pi.dot(proj), proj.squaredNorm()};
}

struct MeanStderr {
    double mean, se;
};

MeanStderr reduce(const std::vector<double>& vals) {
    KahanSum sum;
    for (double v : vals) sum.add(v);
    const double mean = sum.value() / static_cast<double>(vals.size());
    KahanSum sq;
    for (double v : vals) sq.add((v - mean) * (v - mean));
    const double var = vals.size() > 1 ? sq.value() / static_cast<double>(vals.size() - 1) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(vals.size()))};
}

/// Sparse closed form, per-n quantities at sparsity fraction beta.
Triple sparse_closed(double lambda, double beta) {
    const double l = lambda;
    const double erf_l = std::erf(l / std::numbers::sqrt2);
    const double erfc_l = std::erfc(l / std::numbers::sqrt2);
    const double gauss = std::sqrt(2.0 / std::numbers::pi) * l * std::exp(-0.5 * l * l);
    Triple out;
    out.d = (1.0 + l * l) * (1.0 - (1.0 - beta) * erf_l) - (1.0 - beta) * gauss;
    out.p = beta * l * l + (1.0 - beta) * (erf_l + l * l * erfc_l - gauss);
    out.c = -l * l * beta + (1.0 - beta) * (gauss - l * l * erfc_l);
    return out;
}

/// Low-rank closed form (d -> infinity limit), per-n at the normalized
/// penalty lambda (physical penalty lambda*sqrt(d)). The quarter-circle
/// tails are cut at the normalized threshold t = lambda/sqrt(1-beta).
Triple low_rank_closed(double lambda, double beta) {
    const double l = lambda;
    const double om = 1.0 - beta;
    const double t = l / std::sqrt(om);
    const double p0 = quarter_circle_tail_moment(0, t);
    const double p1 = quarter_circle_tail_moment(1, t);
    const double p2 = quarter_circle_tail_moment(2, t);
    Triple out;
    out.d = (2.0 * beta - beta * beta + beta * l * l) +
            (om * l * l * p0 + om * om * p2 - 2.0 * std::pow(om, 1.5) * l * p1);
    out.p = beta * l * l + om * l * l * p0 + om * om * (1.0 - p2);
    out.c = -l * l * beta - om * l * l * p0 + std::pow(om, 1.5) * l * p1;
    return out;
}

/// Block-sparse closed form, absolute (not per-n) quantities.
Triple block_closed(double lambda, Eigen::Index t, Eigen::Index b, Eigen::Index k) {
    const double l = lambda;
    const double l2 = l * l;
    const double p0 = chi2_tail_moment(0.0, l2, b);
    const double ph = chi2_tail_moment(0.5, l2, b);
    const double p1 = chi2_tail_moment(1.0, l2, b);
    const double off = static_cast<double>(t - k);
    const double kk = static_cast<double>(k);
    const double bb = static_cast<double>(b);
    Triple out;
    out.d = kk * (bb + l2) + off * (p1 + l2 * p0 - 2.0 * l * ph);
    out.p = l2 * kk + off * ((bb - p1) + l2 * p0);
    out.c = -l2 * kk + off * (l * ph - l2 * p0);
    return out;
}

} // namespace

double quarter_circle_tail_moment(int i, double x) {
    if (x >= 2.0) return 0.0;
    const double lo = std::max(x, 0.0);
    using boost::math::quadrature::gauss_kronrod;
    return gauss_kronrod<double, 15>::integrate(
        [i](double u) {
            return std::pow(u, i) * std::sqrt(std::max(4.0 - u * u, 0.0)) / std::numbers::pi;
        },
        lo, 2.0, 12, kQuadAbsTol);
}

double chi2_tail_moment(double p, double x, Eigen::Index b) {
    const double half_b = 0.5 * static_cast<double>(b);
    const double log_norm = -half_b * std::numbers::ln2 - std::lgamma(half_b);
    // Beyond x_max the integrand's remaining mass is < 1e-12 (chi-square
    // tails decay like exp(-u/2)).
    const double bb = static_cast<double>(b);
    const double x_max = std::max(x + 1.0, bb + 80.0 + 14.0 * std::sqrt(2.0 * bb));
    if (x >= x_max) return 0.0;
    using boost::math::quadrature::gauss_kronrod;
    return gauss_kronrod<double, 15>::integrate(
        [p, half_b, log_norm](double u) {
            if (u <= 0.0) return 0.0;
            return std::exp(p * std::log(u) + (half_b - 1.0) * std::log(u) - 0.5 * u + log_norm);
        },
        std::max(x, 0.0), x_max, 14, kQuadAbsTol);
}

GeometrySummary closed_form_summary(const SignalModel& model, double lambda) {
    if (lambda < 0) throw PenaltyDomainError("closed_form_summary: lambda must be >= 0");

    GeometrySummary out;
    out.lambda = lambda;
    out.method = GeomMethod::ClosedForm;

    Triple t{};
    double scale = 1.0;
    switch (model.kind) {
        case SignalKind::Sparse:
            t = sparse_closed(lambda, model.beta());
            scale = static_cast<double>(model.n);
            break;
        case SignalKind::LowRank:
            t = low_rank_closed(lambda, model.beta());
            scale = static_cast<double>(model.n);
            out.asymptotic = true;
            break;
        case SignalKind::BlockSparse:
            t = block_closed(lambda, model.t, model.b, model.k);
            scale = 1.0;
            break;
    }
    out.D = scale * t.d;
    out.C = scale * t.c;
    out.P = scale * t.p;
    return out;
}

GeometrySummary mc_summary(const SignalModel& model, double lambda, long samples,
                           std::uint64_t seed, ExecPolicy exec) {
    if (lambda < 0) throw PenaltyDomainError("mc_summary: lambda must be >= 0");
    if (samples < 1) throw DimensionError("mc_summary: samples must be >= 1");

    const double lambda_phys = lambda * model.penalty_scale();
    std::vector<double> ds(static_cast<std::size_t>(samples));
    std::vector<double> cs(static_cast<std::size_t>(samples));
    std::vector<double> ps(static_cast<std::size_t>(samples));

    if (exec == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(static)
        for (long i = 0; i < samples; ++i) {
            const Triple t = geometry_sample(model, lambda_phys,
                                             derive_seed(seed, static_cast<std::uint64_t>(i)));
            ds[static_cast<std::size_t>(i)] = t.d;
            cs[static_cast<std::size_t>(i)] = t.c;
            ps[static_cast<std::size_t>(i)] = t.p;
        }
    } else {
        for (long i = 0; i < samples; ++i) {
            const Triple t = geometry_sample(model, lambda_phys,
                                             derive_seed(seed, static_cast<std::uint64_t>(i)));
            ds[static_cast<std::size_t>(i)] = t.d;
            cs[static_cast<std::size_t>(i)] = t.c;
            ps[static_cast<std::size_t>(i)] = t.p;
        }
    }

    const MeanStderr d = reduce(ds), c = reduce(cs), p = reduce(ps);
    GeometrySummary out;
    out.lambda = lambda;
    out.method = GeomMethod::MonteCarlo;
    out.mc_samples = samples;
    out.D = d.mean;
    out.C = c.mean;
    out.P = p.mean;
    out.d_stderr = d.se;
    out.c_stderr = c.se;
    out.p_stderr = p.se;
    return out;
}

double cone_dist_sq_sample(const SignalModel& model, const Eigen::VectorXd& h) {
    const auto objective = [&](double lam) {
        return subdiff_residual(model, h, lam).squaredNorm();
    };

    // Expand [0, hi] until the forward difference turns positive; the
    // per-sample objective is convex with unbounded growth.
    double hi = 1.0;
    const double step = 1e-4;
    while (objective(hi + step) <= objective(hi)) {
        hi *= 2.0;
        if (hi > 1e6) break;
    }

    // Golden-section to relative tolerance 1e-8.
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0, b = hi;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = objective(x1), f2 = objective(x2);
    while (b - a > 1e-8 * (1.0 + b)) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = objective(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = objective(x2);
        }
    }
    return objective(0.5 * (a + b));
}

ConeSummary mc_cone(const SignalModel& model, long samples, std::uint64_t seed, ExecPolicy exec) {
    if (samples < 1) throw DimensionError("mc_cone: samples must be >= 1");

    std::vector<double> vals(static_cast<std::size_t>(samples));
    const auto one = [&](long i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        const Eigen::VectorXd h = rng.normal_vector(model.n);
        return cone_dist_sq_sample(model, h);
    };

    if (exec == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(static)
        for (long i = 0; i < samples; ++i) vals[static_cast<std::size_t>(i)] = one(i);
    } else {
        for (long i = 0; i < samples; ++i) vals[static_cast<std::size_t>(i)] = one(i);
    }

    const MeanStderr m = reduce(vals);
    ConeSummary out;
    out.d_cone = m.mean;
    out.method = GeomMethod::MonteCarlo;
    out.mc_samples = samples;
    out.mc_stderr = m.se;
    return out;
}

BoundTable bound_table(const SignalModel& model, std::optional<double> lambda,
                       std::optional<double> m) {
    BoundTable out;
    double threshold = 0.0;
    const double kk = static_cast<double>(model.k);

    switch (model.kind) {
        case SignalKind::Sparse: {
            const double ratio = static_cast<double>(model.n) / kk;
            out.d_cone_bound = 2.0 * kk * (std::log(ratio) + 1.0);
            threshold = std::sqrt(2.0 * std::log(ratio));
            if (lambda) out.d_lambda_bound = (*lambda * *lambda + 3.0) * kk;
            break;
        }
        case SignalKind::LowRank: {
            const double dd = static_cast<double>(model.d);
            const double rr = static_cast<double>(model.r);
            out.d_cone_bound = 6.0 * dd * rr;
            threshold = 2.0 * std::sqrt(dd);
            if (lambda) out.d_lambda_bound = *lambda * *lambda * rr + 2.0 * dd * (rr + 1.0);
            break;
        }
        case SignalKind::BlockSparse: {
            const double ratio = static_cast<double>(model.t) / kk;
            const double bb = static_cast<double>(model.b);
            out.d_cone_bound = 4.0 * kk * (std::log(ratio) + bb);
            threshold = std::sqrt(bb) + std::sqrt(2.0 * std::log(ratio));
            if (lambda) out.d_lambda_bound = (*lambda * *lambda + bb + 2.0) * kk;
            break;
        }
    }

    if (lambda && *lambda < threshold)
        throw BoundNotApplicable("bound_table: lambda below validity threshold " +
                                 std::to_string(threshold));

    if (m) {
        if (*m > out.d_cone_bound)
            out.nse_cone_bound = out.d_cone_bound / (*m - out.d_cone_bound);
        if (out.d_lambda_bound && *m > *out.d_lambda_bound)
            out.nse_lambda_bound = *out.d_lambda_bound / (*m - *out.d_lambda_bound);
    }
    return out;
}

} // namespace lassokit
