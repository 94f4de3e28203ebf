#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lassokit/errors.hpp"

namespace lassokit {

enum class SignalKind { Sparse, LowRank, BlockSparse };

std::string to_string(SignalKind kind);
SignalKind signal_kind_from_string(const std::string& s);

/// A structured ground-truth signal together with the metadata the
/// structure-specific operators need.
///
/// Immutable after construction and safe to share across workers.
///
/// Conventions:
///  - Sparse: n ambient, exactly k nonzeros, f = l1 norm.
///  - LowRank: x0 = vec of a d x d matrix (column-major), rank exactly r,
///    f = nuclear norm.
///  - BlockSparse: n = t*b, t blocks of size b, exactly k active blocks,
///    f = l1,2 norm (sum of block l2 norms).
///  - ||x0|| = 1 after construction.
struct SignalModel {
    SignalKind kind = SignalKind::Sparse;
    Eigen::Index n = 0;

    // Dimension parameters; only the ones for `kind` are meaningful.
    Eigen::Index k = 0; // sparse support size / active block count
    Eigen::Index d = 0; // low-rank side length
    Eigen::Index r = 0; // low-rank rank
    Eigen::Index t = 0; // block count
    Eigen::Index b = 0; // block size

    std::uint64_t seed = 0;
    Eigen::VectorXd x0;

    // Support metadata.
    std::vector<Eigen::Index> support; // sparse entry / active block indices (sorted)
    Eigen::VectorXd support_signs;     // sparse: sign of x0 on support
    Eigen::MatrixXd factor_u;          // low-rank: d x r, orthonormal columns
    Eigen::MatrixXd factor_v;          // low-rank: d x r, orthonormal columns
    Eigen::MatrixXd block_dirs;        // block-sparse: b x k unit directions

    /// Sparsity fraction the closed forms are parameterized by:
    /// k/n (sparse), r/d (low-rank), k/t (block-sparse).
    double beta() const;

    /// Factor between the normalized penalty scale used by the geometry and
    /// regimes APIs and the physical penalty multiplying f in a solver:
    /// sqrt(d) for low-rank, 1 otherwise.
    double penalty_scale() const;

    /// f(x0); cached at construction.
    double f_x0 = 0.0;
};

SignalModel make_sparse(Eigen::Index n, Eigen::Index k, std::uint64_t seed);
SignalModel make_low_rank(Eigen::Index d, Eigen::Index r, std::uint64_t seed);
SignalModel make_block_sparse(Eigen::Index t, Eigen::Index b, Eigen::Index k, std::uint64_t seed);

/// Value of the structure-inducing norm: l1 / nuclear / l1,2.
double f_value(const SignalModel& model, const Eigen::VectorXd& x);

/// Residual of h after projecting onto the lambda-scaled subdifferential
/// at x0:  Pi(h, lambda*df(x0)) = h - Proj(h, lambda*df(x0)).
///
/// Sparse: on-support h_i - lambda*sgn(x0_i), off-support soft threshold.
/// BlockSparse: active blocks h_i - lambda*x0_i/||x0_i||, inactive blocks
/// vector shrinkage. LowRank: support component Proj(H,S) - lambda*U*V^T,
/// off-support singular values soft-thresholded.
Eigen::VectorXd subdiff_residual(const SignalModel& model, const Eigen::VectorXd& h, double lambda);

/// Proximal map of theta*f: argmin_x 0.5*||x-v||^2 + theta*f(x).
Eigen::VectorXd prox(const SignalModel& model, const Eigen::VectorXd& v, double theta);

/// Euclidean projection onto the structure ball {x : f(x) <= f(x0)}.
Eigen::VectorXd ball_project(const SignalModel& model, const Eigen::VectorXd& v);

/// The four structure-specific maps bound to one model.
struct StructureOps {
    const SignalModel* model;

    double f_value(const Eigen::VectorXd& x) const { return lassokit::f_value(*model, x); }
    Eigen::VectorXd subdiff_residual(const Eigen::VectorXd& h, double lambda) const {
        return lassokit::subdiff_residual(*model, h, lambda);
    }
    Eigen::VectorXd prox(const Eigen::VectorXd& v, double theta) const {
        return lassokit::prox(*model, v, theta);
    }
    Eigen::VectorXd ball_project(const Eigen::VectorXd& v) const {
        return lassokit::ball_project(*model, v);
    }
};

inline StructureOps ops(const SignalModel& model) { return StructureOps{&model}; }

/// Projection of v onto the l1 ball of the given radius (sort-and-threshold,
/// ties resolved by the cumulative-sum rule). Exposed for the nuclear and
/// block-norm ball projections, which reduce to it.
Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& v, double radius);

/// JSON round-trip: {kind, n, dims, seed, x0:[...]}. Doubles serialize with
/// shortest round-trip precision, so replay is bit-for-bit.
std::string model_to_json(const SignalModel& model);
SignalModel model_from_json(const std::string& text);

} // namespace lassokit
