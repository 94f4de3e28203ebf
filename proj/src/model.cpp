#include "lassokit/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <json.hpp>

#include "lassokit/rng.hpp"

namespace lassokit {

namespace {

double soft_threshold(double x, double lambda) {
    if (x > lambda) return x - lambda;
    if (x < -lambda) return x + lambda;
    return 0.0;
}

Eigen::Map<const Eigen::MatrixXd> as_matrix(const SignalModel& model, const Eigen::VectorXd& x) {
    return Eigen::Map<const Eigen::MatrixXd>(x.data(), model.d, model.d);
}

/// Split H into its support-subspace component (w.r.t. the factors of x0)
/// and the complementary component (I-UU^T) H (I-VV^T).
struct LowRankSplit {
    Eigen::MatrixXd on;  // Proj(H, S_x0)
    Eigen::MatrixXd off; // Proj(H, complement)
};

LowRankSplit split_low_rank(const SignalModel& model, const Eigen::MatrixXd& h) {
    const auto& u = model.factor_u;
    const auto& v = model.factor_v;
    Eigen::MatrixXd hv = h * v;                        // d x r
    Eigen::MatrixXd uth = u.transpose() * h;           // r x d
    Eigen::MatrixXd uthv = u.transpose() * hv;         // r x r
    LowRankSplit s;
    s.off = h - hv * v.transpose() - u * uth + u * uthv * v.transpose();
    s.on = h - s.off;
    return s;
}

void check_length(const SignalModel& model, const Eigen::VectorXd& x, const char* what) {
    if (x.size() != model.n)
        throw DimensionError(std::string(what) + ": expected length " + std::to_string(model.n) +
                             ", got " + std::to_string(x.size()));
}

std::vector<Eigen::Index> sample_support(Eigen::Index universe, Eigen::Index count, Rng& rng) {
    // Partial Fisher-Yates over an index vector.
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(universe));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    for (Eigen::Index i = 0; i < count; ++i) {
        const auto j = i + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(universe - i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(count));
    std::sort(idx.begin(), idx.end());
    return idx;
}

} // namespace

std::string to_string(SignalKind kind) {
    switch (kind) {
        case SignalKind::Sparse: return "sparse";
        case SignalKind::LowRank: return "low_rank";
        case SignalKind::BlockSparse: return "block_sparse";
    }
    return "?";
}

SignalKind signal_kind_from_string(const std::string& s) {
    if (s == "sparse") return SignalKind::Sparse;
    if (s == "low_rank" || s == "lowrank") return SignalKind::LowRank;
    if (s == "block_sparse" || s == "blocksparse") return SignalKind::BlockSparse;
    throw DimensionError("unknown signal kind: " + s);
}

double SignalModel::beta() const {
    switch (kind) {
        case SignalKind::Sparse: return static_cast<double>(k) / static_cast<double>(n);
        case SignalKind::LowRank: return static_cast<double>(r) / static_cast<double>(d);
        case SignalKind::BlockSparse: return static_cast<double>(k) / static_cast<double>(t);
    }
    return 0.0;
}

double SignalModel::penalty_scale() const {
    return kind == SignalKind::LowRank ? std::sqrt(static_cast<double>(d)) : 1.0;
}

SignalModel make_sparse(Eigen::Index n, Eigen::Index k, std::uint64_t seed) {
    if (n < 1 || k < 1 || k > n)
        throw DimensionError("sparse model requires 1 <= k <= n");
    SignalModel m;
    m.kind = SignalKind::Sparse;
    m.n = n;
    m.k = k;
    m.seed = seed;

    Rng rng(derive_seed(seed, 0x5370));
    m.support = sample_support(n, k, rng);
    m.x0 = Eigen::VectorXd::Zero(n);
    for (auto i : m.support) {
        double g = rng.normal();
        while (g == 0.0) g = rng.normal();
        m.x0[i] = g;
    }
    m.x0 /= m.x0.norm();
    m.support_signs.resize(k);
    for (Eigen::Index j = 0; j < k; ++j)
        m.support_signs[j] = m.x0[m.support[static_cast<std::size_t>(j)]] > 0 ? 1.0 : -1.0;
    m.f_x0 = m.x0.lpNorm<1>();
    return m;
}

SignalModel make_low_rank(Eigen::Index d, Eigen::Index r, std::uint64_t seed) {
    if (d < 1 || r < 1 || r > d)
        throw DimensionError("low-rank model requires 1 <= r <= d");
    SignalModel m;
    m.kind = SignalKind::LowRank;
    m.n = d * d;
    m.d = d;
    m.r = r;
    m.seed = seed;

    Rng rng(derive_seed(seed, 0x4c52));
    Eigen::MatrixXd u0 = rng.normal_matrix(d, r);
    Eigen::MatrixXd v0 = rng.normal_matrix(d, r);
    Eigen::MatrixXd x = u0 * v0.transpose();
    x /= x.norm();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    m.factor_u = svd.matrixU().leftCols(r);
    m.factor_v = svd.matrixV().leftCols(r);

    m.x0 = Eigen::Map<const Eigen::VectorXd>(x.data(), m.n);
    m.f_x0 = svd.singularValues().head(r).sum();
    return m;
}

SignalModel make_block_sparse(Eigen::Index t, Eigen::Index b, Eigen::Index k, std::uint64_t seed) {
    if (t < 1 || b < 1 || k < 1 || k > t)
        throw DimensionError("block-sparse model requires 1 <= k <= t and b >= 1");
    SignalModel m;
    m.kind = SignalKind::BlockSparse;
    m.n = t * b;
    m.t = t;
    m.b = b;
    m.k = k;
    m.seed = seed;

    Rng rng(derive_seed(seed, 0x4253));
    m.support = sample_support(t, k, rng);
    m.x0 = Eigen::VectorXd::Zero(m.n);
    for (auto blk : m.support) {
        Eigen::VectorXd g = rng.normal_vector(b);
        while (g.norm() == 0.0) g = rng.normal_vector(b); // support directions must exist
        m.x0.segment(blk * b, b) = g;
    }
    m.x0 /= m.x0.norm();
    m.block_dirs.resize(b, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const auto blk = m.support[static_cast<std::size_t>(j)];
        m.block_dirs.col(j) = m.x0.segment(blk * b, b).normalized();
    }
    m.f_x0 = f_value(m, m.x0);
    return m;
}

double f_value(const SignalModel& model, const Eigen::VectorXd& x) {
    check_length(model, x, "f_value");
    switch (model.kind) {
        case SignalKind::Sparse:
            return x.lpNorm<1>();
        case SignalKind::LowRank: {
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(as_matrix(model, x));
            return svd.singularValues().sum();
        }
        case SignalKind::BlockSparse: {
            double s = 0.0;
            for (Eigen::Index blk = 0; blk < model.t; ++blk)
                s += x.segment(blk * model.b, model.b).norm();
            return s;
        }
    }
    return 0.0;
}

Eigen::VectorXd subdiff_residual(const SignalModel& model, const Eigen::VectorXd& h, double lambda) {
    check_length(model, h, "subdiff_residual");
    if (lambda < 0) throw PenaltyDomainError("subdiff_residual: lambda must be >= 0");
    if (lambda == 0.0) return h;

    switch (model.kind) {
        case SignalKind::Sparse: {
            Eigen::VectorXd out = h;
            std::size_t next = 0;
            for (Eigen::Index i = 0; i < model.n; ++i) {
                if (next < model.support.size() && model.support[next] == i) {
                    out[i] = h[i] - lambda * model.support_signs[static_cast<Eigen::Index>(next)];
                    ++next;
                } else {
                    out[i] = soft_threshold(h[i], lambda);
                }
            }
            return out;
        }
        case SignalKind::LowRank: {
            const auto hm = as_matrix(model, h);
            LowRankSplit s = split_low_rank(model, hm);
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(s.off, Eigen::ComputeThinU | Eigen::ComputeThinV);
            Eigen::VectorXd sv = svd.singularValues();
            for (Eigen::Index i = 0; i < sv.size(); ++i) sv[i] = std::max(sv[i] - lambda, 0.0);
            Eigen::MatrixXd out = s.on - lambda * model.factor_u * model.factor_v.transpose() +
                                  svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
            return Eigen::Map<const Eigen::VectorXd>(out.data(), model.n);
        }
        case SignalKind::BlockSparse: {
            Eigen::VectorXd out(model.n);
            std::size_t next = 0;
            for (Eigen::Index blk = 0; blk < model.t; ++blk) {
                auto seg = h.segment(blk * model.b, model.b);
                if (next < model.support.size() && model.support[next] == blk) {
                    out.segment(blk * model.b, model.b) =
                        seg - lambda * model.block_dirs.col(static_cast<Eigen::Index>(next));
                    ++next;
                } else {
                    const double nr = seg.norm();
                    if (nr > lambda)
                        out.segment(blk * model.b, model.b) = seg * (1.0 - lambda / nr);
                    else
                        out.segment(blk * model.b, model.b).setZero();
                }
            }
            return out;
        }
    }
    return h;
}

Eigen::VectorXd prox(const SignalModel& model, const Eigen::VectorXd& v, double theta) {
    check_length(model, v, "prox");
    if (theta < 0) throw PenaltyDomainError("prox: theta must be >= 0");
    if (theta == 0.0) return v;

    switch (model.kind) {
        case SignalKind::Sparse: {
            Eigen::VectorXd out(model.n);
            for (Eigen::Index i = 0; i < model.n; ++i) out[i] = soft_threshold(v[i], theta);
            return out;
        }
        case SignalKind::LowRank: {
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(as_matrix(model, v),
                                                  Eigen::ComputeThinU | Eigen::ComputeThinV);
            Eigen::VectorXd sv = svd.singularValues();
            for (Eigen::Index i = 0; i < sv.size(); ++i) sv[i] = std::max(sv[i] - theta, 0.0);
            Eigen::MatrixXd out = svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
            return Eigen::Map<const Eigen::VectorXd>(out.data(), model.n);
        }
        case SignalKind::BlockSparse: {
            Eigen::VectorXd out(model.n);
            for (Eigen::Index blk = 0; blk < model.t; ++blk) {
                auto seg = v.segment(blk * model.b, model.b);
                const double nr = seg.norm();
                if (nr > theta)
                    out.segment(blk * model.b, model.b) = seg * (1.0 - theta / nr);
                else
                    out.segment(blk * model.b, model.b).setZero();
            }
            return out;
        }
    }
    return v;
}

Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& v, double radius) {
    if (radius <= 0.0) return Eigen::VectorXd::Zero(v.size());
    if (v.lpNorm<1>() <= radius) return v;

    Eigen::VectorXd mag = v.cwiseAbs();
    std::vector<double> sorted(mag.data(), mag.data() + mag.size());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());

    double cumsum = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < sorted.size(); ++j) {
        cumsum += sorted[j];
        const double cand = (cumsum - radius) / static_cast<double>(j + 1);
        if (j + 1 == sorted.size() || sorted[j + 1] <= cand) {
            theta = cand;
            break;
        }
    }

    Eigen::VectorXd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double s = std::max(mag[i] - theta, 0.0);
        out[i] = v[i] >= 0 ? s : -s;
    }
    return out;
}

Eigen::VectorXd ball_project(const SignalModel& model, const Eigen::VectorXd& v) {
    check_length(model, v, "ball_project");
    const double radius = model.f_x0;

    switch (model.kind) {
        case SignalKind::Sparse:
            return project_l1_ball(v, radius);
        case SignalKind::LowRank: {
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(as_matrix(model, v),
                                                  Eigen::ComputeThinU | Eigen::ComputeThinV);
            Eigen::VectorXd sv = project_l1_ball(svd.singularValues(), radius);
            Eigen::MatrixXd out = svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
            return Eigen::Map<const Eigen::VectorXd>(out.data(), model.n);
        }
        case SignalKind::BlockSparse: {
            Eigen::VectorXd norms(model.t);
            for (Eigen::Index blk = 0; blk < model.t; ++blk)
                norms[blk] = v.segment(blk * model.b, model.b).norm();
            Eigen::VectorXd proj = project_l1_ball(norms, radius);
            Eigen::VectorXd out(model.n);
            for (Eigen::Index blk = 0; blk < model.t; ++blk) {
                if (norms[blk] > 0)
                    out.segment(blk * model.b, model.b) =
                        v.segment(blk * model.b, model.b) * (proj[blk] / norms[blk]);
                else
                    out.segment(blk * model.b, model.b).setZero();
            }
            return out;
        }
    }
    return v;
}

std::string model_to_json(const SignalModel& model) {
    nlohmann::json j;
    j["kind"] = to_string(model.kind);
    j["n"] = model.n;
    nlohmann::json dims;
    switch (model.kind) {
        case SignalKind::Sparse:
            dims["k"] = model.k;
            break;
        case SignalKind::LowRank:
            dims["d"] = model.d;
            dims["r"] = model.r;
            break;
        case SignalKind::BlockSparse:
            dims["t"] = model.t;
            dims["b"] = model.b;
            dims["k"] = model.k;
            break;
    }
    j["dims"] = dims;
    j["seed"] = model.seed;
    j["x0"] = std::vector<double>(model.x0.data(), model.x0.data() + model.x0.size());
    return j.dump();
}

SignalModel model_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    const SignalKind kind = signal_kind_from_string(j.at("kind").get<std::string>());
    const auto seed = j.at("seed").get<std::uint64_t>();
    const auto& dims = j.at("dims");

    SignalModel m;
    switch (kind) {
        case SignalKind::Sparse:
            m = make_sparse(j.at("n").get<Eigen::Index>(), dims.at("k").get<Eigen::Index>(), seed);
            break;
        case SignalKind::LowRank:
            m = make_low_rank(dims.at("d").get<Eigen::Index>(), dims.at("r").get<Eigen::Index>(), seed);
            break;
        case SignalKind::BlockSparse:
            m = make_block_sparse(dims.at("t").get<Eigen::Index>(), dims.at("b").get<Eigen::Index>(),
                                  dims.at("k").get<Eigen::Index>(), seed);
            break;
    }

    if (j.contains("x0")) {
        // Trust the serialized signal verbatim so replays are bit-for-bit,
        // then rebuild the support metadata from it.
        const auto vals = j.at("x0").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(vals.size()) != m.n)
            throw DimensionError("model_from_json: x0 length does not match n");
        Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(vals.data(), m.n);

        switch (kind) {
            case SignalKind::Sparse: {
                m.support.clear();
                for (Eigen::Index i = 0; i < m.n; ++i)
                    if (x0[i] != 0.0) m.support.push_back(i);
                if (static_cast<Eigen::Index>(m.support.size()) != m.k)
                    throw DimensionError("model_from_json: x0 support size does not match k");
                m.support_signs.resize(m.k);
                for (Eigen::Index i = 0; i < m.k; ++i)
                    m.support_signs[i] = x0[m.support[static_cast<std::size_t>(i)]] > 0 ? 1.0 : -1.0;
                m.x0 = x0;
                m.f_x0 = x0.lpNorm<1>();
                break;
            }
            case SignalKind::LowRank: {
                Eigen::Map<const Eigen::MatrixXd> xm(x0.data(), m.d, m.d);
                Eigen::JacobiSVD<Eigen::MatrixXd> svd(xm, Eigen::ComputeThinU | Eigen::ComputeThinV);
                m.factor_u = svd.matrixU().leftCols(m.r);
                m.factor_v = svd.matrixV().leftCols(m.r);
                m.x0 = x0;
                m.f_x0 = svd.singularValues().head(m.r).sum();
                break;
            }
            case SignalKind::BlockSparse: {
                m.support.clear();
                for (Eigen::Index blk = 0; blk < m.t; ++blk)
                    if (x0.segment(blk * m.b, m.b).norm() > 0) m.support.push_back(blk);
                if (static_cast<Eigen::Index>(m.support.size()) != m.k)
                    throw DimensionError("model_from_json: x0 active blocks do not match k");
                m.block_dirs.resize(m.b, m.k);
                for (Eigen::Index i = 0; i < m.k; ++i)
                    m.block_dirs.col(i) =
                        x0.segment(m.support[static_cast<std::size_t>(i)] * m.b, m.b).normalized();
                m.x0 = x0;
                m.f_x0 = f_value(m, x0);
                break;
            }
        }
    }
    return m;
}

} // namespace lassokit
