#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace lassokit {

/// splitmix64 step. Small, fast, and good enough to decorrelate derived
/// streams; used only for seed derivation, never as the sampling generator.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic child seed for (master, a, b). Parallel workers draw from
/// independent streams keyed by their index, so results never depend on
/// scheduling order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = master;
    std::uint64_t z = splitmix64(s);
    s ^= z + 0x632be59bd9b4e019ULL * (a + 1);
    z = splitmix64(s);
    s ^= z + 0x9e3779b97f4a7c15ULL * (b + 1);
    return splitmix64(s);
}

/// Seeded Gaussian/uniform sampler. One instance per sample/trial index.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double normal() { return normal_(gen_); }
    double uniform() { return uniform_(gen_); }

    /// Uniform integer in [0, hi).
    std::uint64_t below(std::uint64_t hi) {
        return std::uniform_int_distribution<std::uint64_t>(0, hi - 1)(gen_);
    }

    Eigen::VectorXd normal_vector(Eigen::Index n) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
        return v;
    }

    Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols) {
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal();
        return m;
    }

    std::mt19937_64& engine() { return gen_; }

  private:
    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Order-independent compensated accumulator. Parallel reductions store
/// per-index values and fold them through this in index order, so the sum
/// is identical for any worker count.
class KahanSum {
  public:
    void add(double x) {
        const double y = x - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

  private:
    double s_ = 0.0;
    double c_ = 0.0;
};

} // namespace lassokit
