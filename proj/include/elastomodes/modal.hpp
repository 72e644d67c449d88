#pragma once

#include <complex>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "elastomodes/assembly.hpp"
#include "elastomodes/errors.hpp"
#include "elastomodes/mesh.hpp"
#include "elastomodes/solver.hpp"
#include "elastomodes/sparse.hpp"

namespace elastomodes {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using cplx = std::complex<double>;

inline constexpr double kDefaultResonanceGuard = 1e-6;

/// Modal projections of the sources.
template <typename Scalar>
struct Projections {
    VectorX<Scalar> f; ///< f_n = u_n . F_body
    VectorX<Scalar> g; ///< g_n = u_n . F_traction
};

template <typename Scalar>
struct ModalCoefficients {
    VectorX<Scalar> alpha;
    VectorX<Scalar> f;
    VectorX<Scalar> g;
    std::optional<double> omega; ///< rad/s; empty for the static problem

    Eigen::Index size() const noexcept { return alpha.size(); }
};

/// Pairs the load vectors with every mode of the set. The discrete pairing
/// u_n . F equals the source integrals for P1 fields and piecewise-constant
/// sources.
template <typename Scalar>
Projections<Scalar> project_sources(const ModeSet& modes, const VectorX<Scalar>& body, const VectorX<Scalar>& traction)
{
    if (body.size() != modes.num_dofs() || traction.size() != modes.num_dofs())
        throw Error("project_sources: load vectors have " + std::to_string(body.size()) + "/" +
                    std::to_string(traction.size()) + " entries, modes have " + std::to_string(modes.num_dofs()));
    const auto u = modes.modes().template cast<Scalar>();
    return {u.transpose() * body, u.transpose() * traction};
}

/// alpha_n = (f_n + g_n) / lambda_n.
template <typename Scalar>
ModalCoefficients<Scalar> static_coefficients(const ModeSet& modes, const VectorX<Scalar>& f, const VectorX<Scalar>& g)
{
    if (f.size() != g.size() || f.size() > modes.num_modes())
        throw Error("static_coefficients: projection length mismatch");
    ModalCoefficients<Scalar> c{VectorX<Scalar>(f.size()), f, g, std::nullopt};
    for (Eigen::Index n = 0; n < f.size(); ++n) c.alpha(n) = (f(n) + g(n)) / modes.lambda(n);
    return c;
}

/// alpha_n(omega) = (f_n + g_n) / (lambda_n - omega^2). Throws
/// ResonanceError when |lambda_n - omega^2| <= guard * lambda_n for a
/// retained mode.
template <typename Scalar>
ModalCoefficients<Scalar> harmonic_coefficients(const ModeSet& modes, const VectorX<Scalar>& f,
                                                const VectorX<Scalar>& g, double omega,
                                                double guard = kDefaultResonanceGuard)
{
    if (f.size() != g.size() || f.size() > modes.num_modes())
        throw Error("harmonic_coefficients: projection length mismatch");
    const double w2 = omega * omega;
    for (Eigen::Index n = 0; n < f.size(); ++n) {
        const double gap = std::abs(modes.lambda(n) - w2);
        if (gap <= guard * std::abs(modes.lambda(n)))
            throw ResonanceError(static_cast<std::size_t>(n), modes.lambda(n), omega, gap);
    }
    ModalCoefficients<Scalar> c{VectorX<Scalar>(f.size()), f, g, omega};
    for (Eigen::Index n = 0; n < f.size(); ++n) c.alpha(n) = (f(n) + g(n)) / (modes.lambda(n) - w2);
    return c;
}

/// sum_n alpha_n u_n over the free dofs (expand with DofMap for nodal output).
template <typename Derived>
VectorX<typename Derived::Scalar> synthesize(const ModeSet& modes, const Eigen::MatrixBase<Derived>& alpha)
{
    using Scalar = typename Derived::Scalar;
    if (alpha.size() > modes.num_modes()) throw Error("synthesize: more coefficients than modes");
    return modes.modes().leftCols(alpha.size()).template cast<Scalar>() * alpha;
}

template <typename Scalar>
VectorX<Scalar> synthesize(const ModeSet& modes, const ModalCoefficients<Scalar>& c)
{
    return synthesize(modes, c.alpha);
}

/// sqrt(Re(u^H M u)).
template <typename Derived>
double m_norm(const SymSparse& m, const Eigen::MatrixBase<Derived>& u)
{
    return std::sqrt(std::max(0.0, std::real(u.dot(m * u))));
}

/// One angular frequency of a finite spectrum with complex amplitudes.
struct FrequencyComponent {
    double omega = 0.0;
    Eigen::Vector3cd body = Eigen::Vector3cd::Zero();
    std::vector<std::pair<std::string, Eigen::Vector3cd>> traction;
};

struct FrequencySpectrum {
    std::vector<FrequencyComponent> components;

    /// Rejects repeated or non-finite frequencies and non-finite amplitudes.
    void validate() const;
    /// Multiplies every amplitude by exp(i omega_j dt).
    FrequencySpectrum time_shifted(double dt) const;
};

/// Assembled complex loads at one frequency.
struct HarmonicLoad {
    double omega = 0.0;
    Eigen::VectorXcd body;
    Eigen::VectorXcd traction;
};

struct AssemblyContext {
    const Mesh& mesh;
    const DofMap& dofs;
};

HarmonicLoad assemble_harmonic_load(const AssemblyContext& ctx, const FrequencyComponent& component);

/// U(t) = Re( sum_j exp(i omega_j t) sum_n alpha_n(omega_j) u_n ).
/// Coefficients are computed once per frequency and reused over `times`.
std::vector<Eigen::VectorXd> dynamic_synthesize(const ModeSet& modes, std::span<const HarmonicLoad> loads,
                                                std::span<const double> times,
                                                double guard = kDefaultResonanceGuard);

std::vector<Eigen::VectorXd> dynamic_synthesize(const ModeSet& modes, const FrequencySpectrum& spectrum,
                                                std::span<const double> times, const AssemblyContext& ctx,
                                                double guard = kDefaultResonanceGuard);

struct TruncationReport {
    Eigen::Index retained = 0;
    std::vector<double> tail;                 ///< |alpha_n| for the discarded modes
    double energy_fraction = 1.0;             ///< sum_{n<retained} |alpha_n|^2 / sum_all; 1 if all zero
    std::optional<double> relative_error;     ///< ||u_direct - u_app||_M / ||u_direct||_M
};

template <typename Scalar>
TruncationReport truncation_report(const ModeSet& modes, const ModalCoefficients<Scalar>& c, Eigen::Index retained,
                                   const SymSparse* mass = nullptr, const VectorX<Scalar>* direct = nullptr)
{
    retained = std::clamp<Eigen::Index>(retained, 0, c.size());
    TruncationReport r;
    r.retained = retained;
    double head = 0.0, total = 0.0;
    for (Eigen::Index n = 0; n < c.size(); ++n) {
        const double a2 = std::norm(c.alpha(n));
        total += a2;
        if (n < retained)
            head += a2;
        else
            r.tail.push_back(std::sqrt(a2));
    }
    r.energy_fraction = total > 0.0 ? head / total : 1.0;
    if (mass && direct) {
        const VectorX<Scalar> approx = synthesize(modes, c.alpha.head(retained));
        const double ref = m_norm(*mass, *direct);
        const double err = m_norm(*mass, VectorX<Scalar>(*direct - approx));
        r.relative_error = ref > 0.0 ? err / ref : err;
    }
    return r;
}

FrequencySpectrum parse_spectrum_json(const std::string& text);
FrequencySpectrum load_spectrum_json(const std::filesystem::path& path);

/// Per-mode table {n, lambda, f_n, g_n, alpha}, complex values as [re, im].
template <typename Scalar>
nlohmann::json coefficients_to_json(const ModeSet& modes, const ModalCoefficients<Scalar>& c)
{
    const auto pair = [](const Scalar& v) {
        const cplx z(v);
        return nlohmann::json::array({z.real(), z.imag()});
    };
    nlohmann::json j;
    j["omega"] = c.omega ? nlohmann::json(*c.omega) : nlohmann::json(nullptr);
    auto& rows = j["modes"] = nlohmann::json::array();
    for (Eigen::Index n = 0; n < c.size(); ++n)
        rows.push_back({{"n", n},
                        {"lambda", modes.lambda(n)},
                        {"f_n", pair(c.f(n))},
                        {"g_n", pair(c.g(n))},
                        {"alpha", pair(c.alpha(n))}});
    return j;
}

nlohmann::json truncation_to_json(const TruncationReport& r);

} // namespace elastomodes
