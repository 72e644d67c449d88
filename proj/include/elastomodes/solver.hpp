#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "elastomodes/errors.hpp"
#include "elastomodes/sparse.hpp"

namespace elastomodes {

struct SolveOptions {
    double cg_tolerance = 1e-10;   ///< relative residual ||K u - F|| / ||F||
    int max_iterations = 20000;    ///< CG iteration cap
    double shift = 0.0;            ///< shift sigma of the shift-invert map (rad^2/s^2)
    double eigen_tolerance = 1e-8; ///< ||K u - lambda M u|| / ||K u|| per mode
    int max_restarts = 64;         ///< Lanczos passes without progress before giving up
    int dense_cap = 600;           ///< largest dimension accepted by dense paths
    std::uint64_t seed = 0x5eed5eedULL;

    void validate() const;
};

/// Ascending eigenvalues and M-orthonormal eigenvectors (columns) of
/// K u = lambda M u over the free dofs. Immutable.
class ModeSet {
public:
    ModeSet() = default;
    ModeSet(Eigen::VectorXd lambdas, Eigen::MatrixXd modes, std::string mesh_fingerprint = {},
            double eigen_tolerance = 0.0, double shift = 0.0);

    const Eigen::VectorXd& lambdas() const noexcept { return lambdas_; }
    const Eigen::MatrixXd& modes() const noexcept { return modes_; }
    double lambda(Eigen::Index n) const { return lambdas_(n); }
    auto mode(Eigen::Index n) const { return modes_.col(n); }

    Eigen::Index num_modes() const noexcept { return lambdas_.size(); }
    Eigen::Index num_dofs() const noexcept { return modes_.rows(); }

    const std::string& mesh_fingerprint() const noexcept { return fingerprint_; }
    double eigen_tolerance() const noexcept { return eigen_tolerance_; }
    double shift() const noexcept { return shift_; }

    ModeSet with_fingerprint(std::string fingerprint) const;
    /// First `count` modes.
    ModeSet truncated(Eigen::Index count) const;

private:
    Eigen::VectorXd lambdas_;
    Eigen::MatrixXd modes_;
    std::string fingerprint_;
    double eigen_tolerance_ = 0.0;
    double shift_ = 0.0;
};

struct CgStats {
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients on the SPD system K u = F.
Eigen::VectorXd solve_static(const SymSparse& k, const Eigen::VectorXd& f, const SolveOptions& opts = {},
                             CgStats* stats = nullptr);

/// Dense Cholesky path for small systems (dimension <= opts.dense_cap).
Eigen::VectorXd solve_static_dense(const SymSparse& k, const Eigen::VectorXd& f, const SolveOptions& opts = {});

/// Direct sparse LU solve of (K - omega^2 M) u = F; the matrix may be indefinite.
Eigen::VectorXcd solve_harmonic_direct(const SymSparse& k, const SymSparse& m, double omega,
                                       const Eigen::VectorXcd& f);

/// The k eigenpairs of K u = lambda M u nearest the shift (the k smallest
/// when the shift lies below the spectrum), by shift-invert Lanczos in the
/// M-inner product with full reorthogonalization and locking.
ModeSet eigs_smallest(const SymSparse& k, const SymSparse& m, int count, const SolveOptions& opts = {});

struct DenseEigen {
    Eigen::VectorXd lambdas; ///< ascending
    Eigen::MatrixXd vectors; ///< M-orthonormal columns
};

/// Full generalized spectrum by Cholesky reduction and a dense symmetric
/// eigensolver. Verification use only.
DenseEigen dense_eig_oracle(const SymSparse& k, const SymSparse& m, int dimension_cap = 600);

/// ||K u_n - lambda_n M u_n|| / ||K u_n|| for every mode.
Eigen::VectorXd residual_report(const SymSparse& k, const SymSparse& m, const ModeSet& modes);

/// max |U^T M U - I|.
double orthonormality_deviation(const SymSparse& m, const Eigen::MatrixXd& modes);

/// Flips each column so that its largest-magnitude entry is positive.
void normalize_signs(Eigen::MatrixXd& modes);

} // namespace elastomodes
