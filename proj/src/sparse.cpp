#include "elastomodes/sparse.hpp"

#include "elastomodes/errors.hpp"

namespace elastomodes {

SymSparse::SymSparse(CsrMatrix m) : m_(std::move(m))
{
    if (m_.rows() != m_.cols()) throw Error("SymSparse must be square");
    m_.makeCompressed();
}

SymSparse SymSparse::from_triplets(int dim, const std::vector<Eigen::Triplet<double, int>>& triplets)
{
    CsrMatrix m(dim, dim);
    m.setFromTriplets(triplets.begin(), triplets.end());
    return SymSparse(std::move(m));
}

double SymSparse::asymmetry() const
{
    if (m_.nonZeros() == 0) return 0.0;
    const CsrMatrix t = m_.transpose();
    const CsrMatrix d = m_ - t;
    double scale = 0.0, diff = 0.0;
    for (int k = 0; k < m_.nonZeros(); ++k) scale = std::max(scale, std::abs(m_.valuePtr()[k]));
    for (int k = 0; k < d.nonZeros(); ++k) diff = std::max(diff, std::abs(d.valuePtr()[k]));
    return scale > 0.0 ? diff / scale : diff;
}

} // namespace elastomodes
