#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "elastomodes/errors.hpp"

namespace elastomodes {

// Voigt pair ordering used throughout: (11, 22, 33, 23, 13, 12).
constexpr int voigt_index(int i, int j) noexcept
{
    if (i == j) return i;
    const int s = i + j;
    return s == 3 ? 3 : (s == 2 ? 4 : 5);
}

/// Symmetric 3x3 tensor stored as its six independent components in Voigt
/// order. Shear slots hold the tensor components (e.g. eps_23), not the
/// engineering shears; conversion happens only through engineering() and
/// from_engineering().
template <typename Scalar>
class SymTensor {
public:
    using Vector6 = Eigen::Matrix<Scalar, 6, 1>;
    using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

    SymTensor() : c_(Vector6::Zero()) {}
    explicit SymTensor(const Vector6& tensor_components) : c_(tensor_components) {}

    static SymTensor identity()
    {
        Vector6 v;
        v << 1, 1, 1, 0, 0, 0;
        return SymTensor(v);
    }

    /// Symmetric part of an arbitrary 3x3 matrix.
    static SymTensor from_matrix(const Matrix3& a)
    {
        Vector6 v;
        v << a(0, 0), a(1, 1), a(2, 2), Scalar(0.5) * (a(1, 2) + a(2, 1)), Scalar(0.5) * (a(0, 2) + a(2, 0)),
            Scalar(0.5) * (a(0, 1) + a(1, 0));
        return SymTensor(v);
    }

    static SymTensor from_engineering(const Vector6& e)
    {
        Vector6 v = e;
        v.template tail<3>() *= Scalar(0.5);
        return SymTensor(v);
    }

    const Vector6& components() const noexcept { return c_; }

    Vector6 engineering() const
    {
        Vector6 e = c_;
        e.template tail<3>() *= Scalar(2);
        return e;
    }

    Matrix3 matrix() const
    {
        Matrix3 m;
        m << c_(0), c_(5), c_(4), c_(5), c_(1), c_(3), c_(4), c_(3), c_(2);
        return m;
    }

    Scalar operator()(int i, int j) const { return c_(voigt_index(i, j)); }

    Scalar frobenius_norm() const { return std::sqrt(double_dot(*this, *this)); }

    bool all_finite() const { return c_.allFinite(); }

    friend SymTensor operator+(const SymTensor& a, const SymTensor& b) { return SymTensor(a.c_ + b.c_); }
    friend SymTensor operator-(const SymTensor& a, const SymTensor& b) { return SymTensor(a.c_ - b.c_); }
    friend SymTensor operator*(Scalar s, const SymTensor& a) { return SymTensor(s * a.c_); }

    /// S:T = sum_ij S_ij T_ij.
    friend Scalar double_dot(const SymTensor& a, const SymTensor& b)
    {
        return a.c_.template head<3>().dot(b.c_.template head<3>()) +
               Scalar(2) * a.c_.template tail<3>().dot(b.c_.template tail<3>());
    }

private:
    Vector6 c_;
};

using SymStrain = SymTensor<double>;
using SymStress = SymTensor<double>;

/// Dense 3x3x3x3 array, row-major in (i, j, k, l).
template <typename Scalar>
struct FullTensor {
    std::array<Scalar, 81> data{};

    Scalar& operator()(int i, int j, int k, int l) { return data[((i * 3 + j) * 3 + k) * 3 + l]; }
    Scalar operator()(int i, int j, int k, int l) const { return data[((i * 3 + j) * 3 + k) * 3 + l]; }
};

/// Fourth-order elastic tensor with minor and major symmetries, held as the
/// 6x6 symmetric Voigt matrix (21 independent moduli).
template <typename Scalar>
class ElasticTensor {
public:
    using Matrix6 = Eigen::Matrix<Scalar, 6, 6>;

    ElasticTensor() : voigt_(Matrix6::Zero()) {}

    /// Checks symmetry relative to the largest modulus and finiteness.
    static ElasticTensor from_voigt(const Matrix6& voigt, Scalar rel_tol = Scalar(1e-12))
    {
        if (!voigt.allFinite()) throw MaterialError("elastic tensor has non-finite moduli");
        const Scalar scale = voigt.cwiseAbs().maxCoeff();
        const Scalar asym = (voigt - voigt.transpose()).cwiseAbs().maxCoeff();
        if (asym > rel_tol * scale)
            throw MaterialError("Voigt matrix is not symmetric (max asymmetry " + std::to_string(double(asym)) + ")");
        ElasticTensor c;
        c.voigt_ = Scalar(0.5) * (voigt + voigt.transpose());
        return c;
    }

    /// C_ijkl = lambda d_ij d_kl + mu (d_ik d_jl + d_il d_jk).
    static ElasticTensor isotropic(Scalar lambda, Scalar mu)
    {
        if (!std::isfinite(double(lambda)) || !std::isfinite(double(mu)))
            throw MaterialError("isotropic moduli must be finite");
        if (!(mu > Scalar(0)) || !(Scalar(3) * lambda + Scalar(2) * mu > Scalar(0)))
            throw MaterialError("isotropic moduli violate positive definiteness (need mu > 0 and 3 lambda + 2 mu > 0)");
        Matrix6 v = Matrix6::Zero();
        v.template topLeftCorner<3, 3>().setConstant(lambda);
        for (int i = 0; i < 3; ++i) {
            v(i, i) = lambda + Scalar(2) * mu;
            v(i + 3, i + 3) = mu;
        }
        ElasticTensor c;
        c.voigt_ = v;
        return c;
    }

    /// Collapses an 81-entry tensor after checking minor and major symmetry.
    static ElasticTensor from_full_tensor(const FullTensor<Scalar>& t, Scalar rel_tol = Scalar(1e-12))
    {
        Scalar scale(0);
        for (Scalar x : t.data) {
            if (!std::isfinite(double(x))) throw MaterialError("full tensor has non-finite entries");
            scale = std::max(scale, std::abs(x));
        }
        Scalar worst(0);
        std::array<int, 4> where{0, 0, 0, 0};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k)
                    for (int l = 0; l < 3; ++l) {
                        const Scalar c = t(i, j, k, l);
                        const Scalar d = std::max({std::abs(c - t(j, i, k, l)), std::abs(c - t(i, j, l, k)),
                                                   std::abs(c - t(k, l, i, j))});
                        if (d > worst) {
                            worst = d;
                            where = {i, j, k, l};
                        }
                    }
        if (worst > rel_tol * scale) {
            throw MaterialError("tensor symmetry violated at C_" + std::to_string(where[0] + 1) +
                                std::to_string(where[1] + 1) + std::to_string(where[2] + 1) +
                                std::to_string(where[3] + 1) + " (deviation " + std::to_string(double(worst)) + ")");
        }
        static constexpr int pairs[6][2] = {{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}};
        Matrix6 v;
        for (int a = 0; a < 6; ++a)
            for (int b = 0; b < 6; ++b) v(a, b) = t(pairs[a][0], pairs[a][1], pairs[b][0], pairs[b][1]);
        return from_voigt(v, rel_tol);
    }

    const Matrix6& voigt() const noexcept { return voigt_; }

    Scalar operator()(int i, int j, int k, int l) const { return voigt_(voigt_index(i, j), voigt_index(k, l)); }

    FullTensor<Scalar> full() const
    {
        FullTensor<Scalar> t;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k)
                    for (int l = 0; l < 3; ++l) t(i, j, k, l) = (*this)(i, j, k, l);
        return t;
    }

    /// Shear rows and columns scaled by sqrt(2); the spectrum of this matrix
    /// is the spectrum of the quadratic form S:C:S on unit-norm S.
    Matrix6 mandel() const
    {
        Eigen::Matrix<Scalar, 6, 1> d;
        const Scalar r2 = std::sqrt(Scalar(2));
        d << 1, 1, 1, r2, r2, r2;
        return d.asDiagonal() * voigt_ * d.asDiagonal();
    }

private:
    Matrix6 voigt_;
};

using ElasticTensord = ElasticTensor<double>;

/// (C:S)_ij = sum_kl C_ijkl S_kl.
template <typename Scalar>
SymTensor<Scalar> apply(const ElasticTensor<Scalar>& c, const SymTensor<Scalar>& s)
{
    return SymTensor<Scalar>(c.voigt() * s.engineering());
}

/// Tight lower bound alpha of S:C:S over unit Frobenius-norm symmetric S.
/// Non-positive values are returned as-is.
template <typename Scalar>
Scalar coercivity_constant(const ElasticTensor<Scalar>& c)
{
    Eigen::SelfAdjointEigenSolver<typename ElasticTensor<Scalar>::Matrix6> es(c.mandel(), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

/// Piecewise-constant elastic tensor and density, one entry per element.
struct MaterialField {
    std::vector<ElasticTensord> tensors;
    std::vector<double> densities;
    double alpha_floor = 0.0; ///< declared coercivity floor (Pa)
    double beta_floor = 0.0;  ///< declared density floor (kg/m^3)

    std::size_t size() const noexcept { return tensors.size(); }

    static MaterialField uniform(std::size_t n_elements, const ElasticTensord& c, double density);
};

struct ValidationFailure {
    std::size_t element;
    std::string reason;
};

struct ValidationReport {
    std::vector<double> element_alpha;
    double alpha = std::numeric_limits<double>::infinity();
    double beta = std::numeric_limits<double>::infinity();
    bool passed = true;
    std::vector<ValidationFailure> failures;
};

/// Checks positive definiteness and density bounds element by element. A
/// floor of zero still demands strict positivity.
ValidationReport validate_field(const MaterialField& field);

/// Per-region material description parsed from JSON.
struct RegionMaterial {
    ElasticTensord tensor;
    double density = 0.0;
};

struct MaterialSpec {
    std::map<int, RegionMaterial> regions;
    std::optional<RegionMaterial> fallback; ///< applies to regions not listed
    double alpha_floor = 0.0;
    double beta_floor = 0.0;

    MaterialField build(std::span<const int> element_regions) const;
};

/// Reads the material JSON document (see docs/formats.md).
MaterialSpec load_material_json(const std::filesystem::path& path);
MaterialSpec parse_material_json(const std::string& text);

} // namespace elastomodes
