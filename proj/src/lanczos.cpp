// Shift-invert Lanczos for K u = lambda M u.
//
// The iteration runs on Op = (K - sigma M)^{-1} M, which is self-adjoint in
// the M-inner product. Eigenvalues theta of Op map back through
// lambda = sigma + 1 / theta. Every Lanczos vector is reorthogonalized
// against the whole basis and against the locked (converged) modes, so the
// Krylov space always lives in the M-orthogonal complement of what has
// already been found. A repeated eigenvalue therefore shows up in a later
// pass started from a fresh random vector.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "elastomodes/solver.hpp"

namespace elastomodes {

namespace {

class ShiftInvertOperator {
public:
    ShiftInvertOperator(const SymSparse& k, const SymSparse& m, double shift) : m_(m)
    {
        Eigen::SparseMatrix<double> a = k.matrix() - shift * m.matrix();
        a.makeCompressed();
        ldlt_.compute(a);
        use_lu_ = ldlt_.info() != Eigen::Success;
        if (use_lu_) {
            lu_.compute(a);
            if (lu_.info() != Eigen::Success)
                throw SolverError("shift-invert: K - sigma M is singular (shift " + std::to_string(shift) + ")");
        }
    }

    /// Op x given M x.
    Eigen::VectorXd apply_to_mx(const Eigen::VectorXd& mx) const
    {
        Eigen::VectorXd y = use_lu_ ? Eigen::VectorXd(lu_.solve(mx)) : Eigen::VectorXd(ldlt_.solve(mx));
        if (!y.allFinite()) throw SolverError("shift-invert: inner solve produced non-finite values");
        return y;
    }

    const SymSparse& mass() const { return m_; }

private:
    const SymSparse& m_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
    bool use_lu_ = false;
};

struct Locked {
    Eigen::MatrixXd x;  // M-orthonormal converged modes
    Eigen::MatrixXd mx; // M * x
    std::vector<double> lambdas;

    Eigen::Index size() const { return x.cols(); }

    void add(const Eigen::VectorXd& v, const Eigen::VectorXd& mv, double lambda)
    {
        x.conservativeResize(v.size(), x.cols() + 1);
        mx.conservativeResize(v.size(), mx.cols() + 1);
        x.col(x.cols() - 1) = v;
        mx.col(mx.cols() - 1) = mv;
        lambdas.push_back(lambda);
    }
};

struct RitzPair {
    double theta;
    double lambda;
    Eigen::VectorXd vector;
    Eigen::VectorXd m_vector;
    double residual;
};

class LanczosPass {
public:
    LanczosPass(const ShiftInvertOperator& op, const SymSparse& k, const Locked& locked, double shift)
        : op_(op), k_(k), locked_(locked), shift_(shift)
    {
    }

    // Runs up to max_steps steps from `start`; stops early once `want`
    // leading Ritz pairs reach `tol`. Returns Ritz pairs sorted by |theta|
    // descending, residuals filled in for the leading `want` (or all, if the
    // Krylov space became invariant).
    std::vector<RitzPair> run(Eigen::VectorXd start, int want, int max_steps, double tol)
    {
        const Eigen::Index n = start.size();
        const auto& m = op_.mass().matrix();
        q_.resize(n, max_steps);
        mq_.resize(n, max_steps);
        alpha_.clear();
        beta_.clear();
        invariant_ = false;

        Eigen::VectorXd v = std::move(start);
        Eigen::VectorXd mv = m * v;
        orthogonalize(v, mv, 0);
        double nrm = std::sqrt(std::max(v.dot(mv), 0.0));
        if (!(nrm > 0.0)) {
            invariant_ = true;
            return {};
        }
        v /= nrm;
        mv /= nrm;

        double scale = 0.0;
        int steps = 0;
        std::vector<RitzPair> ritz;
        for (int j = 0; j < max_steps; ++j) {
            q_.col(j) = v;
            mq_.col(j) = mv;
            Eigen::VectorXd w = op_.apply_to_mx(mv);
            const double a = mv.dot(w);
            w -= a * v;
            if (j > 0) w -= beta_.back() * q_.col(j - 1);
            Eigen::VectorXd mw = m * w;
            orthogonalize(w, mw, j + 1);
            const double b = std::sqrt(std::max(w.dot(mw), 0.0));
            alpha_.push_back(a);
            beta_.push_back(b);
            steps = j + 1;
            scale = std::max(scale, std::abs(a) + b);

            if (b <= 1e-12 * scale) {
                invariant_ = true;
                break;
            }
            const bool last = steps == max_steps;
            if (steps >= want && (last || steps % 4 == 0)) {
                ritz = ritz_pairs(steps, want);
                const bool done = std::all_of(ritz.begin(), ritz.begin() + std::min<Eigen::Index>(want, ritz.size()),
                                              [&](const RitzPair& p) { return p.residual <= tol; });
                if (done) return ritz;
            }
            v = w / b;
            mv = mw / b;
        }
        return ritz_pairs(steps, invariant_ ? steps : want);
    }

    bool invariant() const { return invariant_; }

private:
    // Two rounds of classical Gram-Schmidt against the locked modes and the
    // first `count` Lanczos vectors.
    void orthogonalize(Eigen::VectorXd& w, Eigen::VectorXd& mw, int count) const
    {
        const auto& m = op_.mass().matrix();
        for (int round = 0; round < 2; ++round) {
            if (locked_.size() > 0) w -= locked_.x * (locked_.mx.transpose() * w);
            if (count > 0) w -= q_.leftCols(count) * (mq_.leftCols(count).transpose() * w);
        }
        mw = m * w;
    }

    std::vector<RitzPair> ritz_pairs(int steps, int evaluate) const
    {
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(steps, steps);
        for (int i = 0; i < steps; ++i) {
            t(i, i) = alpha_[i];
            if (i + 1 < steps) t(i, i + 1) = t(i + 1, i) = beta_[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        std::vector<int> order(steps);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return std::abs(es.eigenvalues()(a)) > std::abs(es.eigenvalues()(b));
        });

        std::vector<RitzPair> out;
        const int count = std::min(evaluate, steps);
        for (int i = 0; i < count; ++i) {
            const int idx = order[i];
            const double theta = es.eigenvalues()(idx);
            RitzPair p;
            p.theta = theta;
            p.lambda = theta != 0.0 ? shift_ + 1.0 / theta : std::numeric_limits<double>::infinity();
            p.vector = q_.leftCols(steps) * es.eigenvectors().col(idx);
            p.m_vector = mq_.leftCols(steps) * es.eigenvectors().col(idx);
            const Eigen::VectorXd ku = k_.matrix() * p.vector;
            const double kn = ku.norm();
            p.residual = kn > 0.0 ? (ku - p.lambda * p.m_vector).norm() / kn : std::numeric_limits<double>::infinity();
            if (!std::isfinite(p.lambda)) p.residual = std::numeric_limits<double>::infinity();
            out.push_back(std::move(p));
        }
        return out;
    }

    const ShiftInvertOperator& op_;
    const SymSparse& k_;
    const Locked& locked_;
    double shift_;
    Eigen::MatrixXd q_, mq_;
    std::vector<double> alpha_, beta_;
    bool invariant_ = false;
};

Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = dist(rng);
    return v;
}

// Distance of lambda from the shift in the ordering used to pick "wanted" modes.
double shift_distance(double lambda, double shift) { return std::abs(lambda - shift); }

} // namespace

ModeSet eigs_smallest(const SymSparse& k, const SymSparse& m, int count, const SolveOptions& opts)
{
    opts.validate();
    const int n = k.dim();
    if (m.dim() != n) throw SolverError("eigs: K and M dimensions differ");
    if (count < 1) throw SolverError("eigs: requested mode count must be >= 1");
    if (count > n)
        throw SolverError("eigs: requested " + std::to_string(count) + " modes but only " + std::to_string(n) +
                          " free dofs");

    const ShiftInvertOperator op(k, m, opts.shift);
    std::mt19937_64 rng(opts.seed);
    Locked locked;
    locked.x.resize(n, 0);
    locked.mx.resize(n, 0);

    // Lock at a tighter level than the contract so the final Rayleigh-Ritz
    // rotation cannot push a mode over the tolerance.
    const double lock_tol = 0.1 * opts.eigen_tolerance;
    int stalled = 0;
    int extra_steps = 0;

    // k-th nearest locked eigenvalue to the shift, or +inf.
    const auto wanted_boundary = [&]() {
        if (locked.size() < count) return std::numeric_limits<double>::infinity();
        std::vector<double> d;
        for (double l : locked.lambdas) d.push_back(shift_distance(l, opts.shift));
        std::nth_element(d.begin(), d.begin() + (count - 1), d.end());
        return d[count - 1];
    };

    while (true) {
        const Eigen::Index remaining_space = n - locked.size();
        if (remaining_space == 0) break;
        const bool verifying = locked.size() >= count;
        const int want = verifying ? 1 : static_cast<int>(count - locked.size());
        const int max_steps = static_cast<int>(std::min<Eigen::Index>(
            remaining_space, std::max(2 * want + 20, 40) + extra_steps));

        LanczosPass pass(op, k, locked, opts.shift);
        auto ritz = pass.run(random_vector(n, rng), want, max_steps, lock_tol);

        int added = 0;
        bool found_closer = false;
        const double boundary = wanted_boundary();
        for (auto& p : ritz) {
            if (!(p.residual <= lock_tol)) continue;
            // Re-orthogonalize against what was locked during this pass.
            Eigen::VectorXd v = p.vector;
            for (int round = 0; round < 2; ++round) v -= locked.x * (locked.mx.transpose() * v);
            Eigen::VectorXd mv = m.matrix() * v;
            const double nrm = std::sqrt(std::max(v.dot(mv), 0.0));
            if (!(nrm > 0.5)) continue;
            locked.add(v / nrm, mv / nrm, p.lambda);
            ++added;
            if (shift_distance(p.lambda, opts.shift) < boundary * (1.0 - 1e-12)) found_closer = true;
        }

        if (verifying) {
            // A converged pair outside the locked set that is no closer to
            // the shift than the current k-th locked one ends the search.
            if (!found_closer && added > 0) break;
            if (!found_closer && pass.invariant() && ritz.empty()) break;
        }
        if (added == 0) {
            if (++stalled > opts.max_restarts)
                throw SolverError("eigs: Lanczos made no progress after " + std::to_string(opts.max_restarts) +
                                  " restarts (" + std::to_string(locked.size()) + " of " + std::to_string(count) +
                                  " modes converged)");
            extra_steps = 2 * extra_steps + 20;
        } else {
            stalled = 0;
        }
    }

    if (locked.size() < count)
        throw SolverError("eigs: only " + std::to_string(locked.size()) + " of " + std::to_string(count) +
                          " modes converged");

    // Rayleigh-Ritz on the locked subspace: restores exact M-orthonormality
    // and resolves bases inside clusters.
    Eigen::MatrixXd x = locked.x;
    {
        const Eigen::MatrixXd g = x.transpose() * (m.matrix() * x);
        Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (g + g.transpose()));
        if (llt.info() != Eigen::Success) throw SolverError("eigs: locked basis lost M-orthogonality");
        x = llt.matrixU().solve<Eigen::OnTheRight>(x);
        Eigen::MatrixXd kp = x.transpose() * (k.matrix() * x);
        kp = 0.5 * (kp + kp.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kp);
        x = x * es.eigenvectors();
        locked.lambdas.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    }

    std::vector<int> order(locked.lambdas.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return shift_distance(locked.lambdas[a], opts.shift) < shift_distance(locked.lambdas[b], opts.shift);
    });
    order.resize(count);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return locked.lambdas[a] < locked.lambdas[b]; });

    Eigen::VectorXd lambdas(count);
    Eigen::MatrixXd modes(n, count);
    for (int i = 0; i < count; ++i) {
        lambdas(i) = locked.lambdas[order[i]];
        modes.col(i) = x.col(order[i]);
    }
    normalize_signs(modes);

    ModeSet result(std::move(lambdas), std::move(modes), {}, opts.eigen_tolerance, opts.shift);
    const Eigen::VectorXd res = residual_report(k, m, result);
    for (Eigen::Index i = 0; i < res.size(); ++i)
        if (!(res(i) <= opts.eigen_tolerance))
            throw SolverError("eigs: mode " + std::to_string(i) + " residual " + std::to_string(res(i)) +
                              " exceeds tolerance " + std::to_string(opts.eigen_tolerance));
    return result;
}

} // namespace elastomodes
