#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace elastomodes {

using CsrMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

/// Symmetric sparse matrix in compressed-row form with both triangles
/// stored. Immutable once built.
class SymSparse {
public:
    SymSparse() = default;
    explicit SymSparse(CsrMatrix m);

    /// Duplicate entries are summed in input order.
    static SymSparse from_triplets(int dim, const std::vector<Eigen::Triplet<double, int>>& triplets);

    int dim() const noexcept { return static_cast<int>(m_.rows()); }
    long nonzeros() const noexcept { return m_.nonZeros(); }

    std::span<const int> row_offsets() const { return {m_.outerIndexPtr(), static_cast<std::size_t>(m_.rows() + 1)}; }
    std::span<const int> col_indices() const { return {m_.innerIndexPtr(), static_cast<std::size_t>(m_.nonZeros())}; }
    std::span<const double> values() const { return {m_.valuePtr(), static_cast<std::size_t>(m_.nonZeros())}; }

    const CsrMatrix& matrix() const noexcept { return m_; }

    template <typename Derived>
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> operator*(const Eigen::MatrixBase<Derived>& x) const
    {
        return m_.template cast<typename Derived::Scalar>() * x;
    }

    Eigen::VectorXd diagonal() const { return m_.diagonal(); }
    Eigen::MatrixXd to_dense() const { return Eigen::MatrixXd(m_); }

    /// max |A - A^T| / max |A|.
    double asymmetry() const;

    SymSparse scaled(double s) const { return SymSparse(CsrMatrix(s * m_)); }

private:
    CsrMatrix m_;
};

} // namespace elastomodes
