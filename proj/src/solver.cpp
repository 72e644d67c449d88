#include "elastomodes/solver.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

namespace elastomodes {

void SolveOptions::validate() const
{
    if (!(cg_tolerance > 0.0 && cg_tolerance < 1.0)) throw SolverError("cg tolerance must lie in (0,1)");
    if (!(eigen_tolerance > 0.0 && eigen_tolerance < 1.0)) throw SolverError("eigen tolerance must lie in (0,1)");
    if (max_iterations < 1) throw SolverError("max iterations must be >= 1");
    if (max_restarts < 1) throw SolverError("max restarts must be >= 1");
    if (!std::isfinite(shift)) throw SolverError("shift must be finite");
}

ModeSet::ModeSet(Eigen::VectorXd lambdas, Eigen::MatrixXd modes, std::string mesh_fingerprint, double eigen_tolerance,
                 double shift)
    : lambdas_(std::move(lambdas)), modes_(std::move(modes)), fingerprint_(std::move(mesh_fingerprint)),
      eigen_tolerance_(eigen_tolerance), shift_(shift)
{
    if (lambdas_.size() != modes_.cols()) throw SolverError("ModeSet: eigenvalue count differs from mode count");
    for (Eigen::Index n = 1; n < lambdas_.size(); ++n)
        if (lambdas_(n) < lambdas_(n - 1)) throw SolverError("ModeSet: eigenvalues must be non-decreasing");
}

ModeSet ModeSet::with_fingerprint(std::string fingerprint) const
{
    ModeSet copy = *this;
    copy.fingerprint_ = std::move(fingerprint);
    return copy;
}

ModeSet ModeSet::truncated(Eigen::Index count) const
{
    count = std::min(count, num_modes());
    return ModeSet(lambdas_.head(count), modes_.leftCols(count), fingerprint_, eigen_tolerance_, shift_);
}

Eigen::VectorXd solve_static(const SymSparse& k, const Eigen::VectorXd& f, const SolveOptions& opts, CgStats* stats)
{
    opts.validate();
    if (f.size() != k.dim()) throw SolverError("load vector size does not match the stiffness dimension");
    const double fnorm = f.norm();
    Eigen::VectorXd u = Eigen::VectorXd::Zero(k.dim());
    if (stats) *stats = {};
    if (fnorm == 0.0) return u;

    const Eigen::VectorXd inv_diag = k.diagonal().cwiseInverse();
    if (!inv_diag.allFinite()) throw SolverError("stiffness has a zero diagonal entry");

    const auto& a = k.matrix();
    Eigen::VectorXd r = f;
    Eigen::VectorXd z = inv_diag.cwiseProduct(r);
    Eigen::VectorXd p = z;
    Eigen::VectorXd ap(k.dim());
    double rz = r.dot(z);
    double rel = 1.0;
    int it = 0;
    while (it < opts.max_iterations) {
        ap.noalias() = a * p;
        const double pap = p.dot(ap);
        if (!(pap > 0.0)) throw SolverError("CG breakdown: stiffness is not positive definite (p^T K p <= 0)");
        const double step = rz / pap;
        u += step * p;
        r -= step * ap;
        ++it;
        rel = r.norm() / fnorm;
        if (rel <= opts.cg_tolerance) break;
        z = inv_diag.cwiseProduct(r);
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
    }
    // Recompute the true residual to avoid drift in the recursive one.
    rel = (f - a * u).norm() / fnorm;
    if (stats) *stats = {it, rel};
    if (rel > opts.cg_tolerance)
        throw SolverError("CG did not converge in " + std::to_string(it) + " iterations (relative residual " +
                          std::to_string(rel) + ")");
    return u;
}

Eigen::VectorXd solve_static_dense(const SymSparse& k, const Eigen::VectorXd& f, const SolveOptions& opts)
{
    if (k.dim() > opts.dense_cap)
        throw SolverError("dense solve limited to " + std::to_string(opts.dense_cap) + " dofs");
    Eigen::LLT<Eigen::MatrixXd> llt(k.to_dense());
    if (llt.info() != Eigen::Success) throw SolverError("dense Cholesky failed: stiffness not positive definite");
    return llt.solve(f);
}

Eigen::VectorXcd solve_harmonic_direct(const SymSparse& k, const SymSparse& m, double omega, const Eigen::VectorXcd& f)
{
    if (k.dim() != m.dim() || f.size() != k.dim()) throw SolverError("harmonic solve: dimension mismatch");
    Eigen::SparseMatrix<double> a = k.matrix() - (omega * omega) * m.matrix();
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw SolverError("harmonic solve: factorization of K - omega^2 M failed");
    const Eigen::VectorXd re = lu.solve(Eigen::VectorXd(f.real()));
    const Eigen::VectorXd im = lu.solve(Eigen::VectorXd(f.imag()));
    Eigen::VectorXcd u(k.dim());
    u.real() = re;
    u.imag() = im;
    return u;
}

DenseEigen dense_eig_oracle(const SymSparse& k, const SymSparse& m, int dimension_cap)
{
    if (k.dim() != m.dim()) throw SolverError("oracle: K and M dimensions differ");
    if (k.dim() > dimension_cap)
        throw SolverError("dense eigen oracle limited to " + std::to_string(dimension_cap) + " dofs");
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(k.to_dense(), m.to_dense(),
                                                                  Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (es.info() != Eigen::Success) throw SolverError("dense generalized eigensolver failed");
    DenseEigen out{es.eigenvalues(), es.eigenvectors()};
    normalize_signs(out.vectors);
    return out;
}

Eigen::VectorXd residual_report(const SymSparse& k, const SymSparse& m, const ModeSet& modes)
{
    if (modes.num_dofs() != k.dim() || k.dim() != m.dim()) throw SolverError("residual report: dimension mismatch");
    Eigen::VectorXd out(modes.num_modes());
    for (Eigen::Index n = 0; n < modes.num_modes(); ++n) {
        const Eigen::VectorXd ku = k.matrix() * modes.mode(n);
        const Eigen::VectorXd mu = m.matrix() * modes.mode(n);
        out(n) = (ku - modes.lambda(n) * mu).norm() / ku.norm();
    }
    return out;
}

double orthonormality_deviation(const SymSparse& m, const Eigen::MatrixXd& modes)
{
    const Eigen::MatrixXd g = modes.transpose() * (m.matrix() * modes);
    return (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

void normalize_signs(Eigen::MatrixXd& modes)
{
    for (Eigen::Index c = 0; c < modes.cols(); ++c) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index r = 0; r < modes.rows(); ++r) {
            // strict comparison keeps the first index among ties
            if (std::abs(modes(r, c)) > best) {
                best = std::abs(modes(r, c));
                arg = r;
            }
        }
        if (modes.rows() > 0 && modes(arg, c) < 0.0) modes.col(c) *= -1.0;
    }
}

} // namespace elastomodes
