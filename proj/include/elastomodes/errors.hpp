#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace elastomodes {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MaterialError : public Error {
public:
    using Error::Error;
};

class MeshError : public Error {
public:
    enum class Kind { Schema, Orientation, Degenerate, Partition, EmptyDirichlet, Unsupported, Io };

    MeshError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

class AssemblyError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

/// Raised when a requested angular frequency sits too close to an eigenvalue.
class ResonanceError : public Error {
public:
    ResonanceError(std::size_t mode, double lambda, double omega, double gap)
        : Error("omega^2 = " + num(omega * omega) + " is within the resonance guard of mode " + std::to_string(mode) +
                " (lambda_" + std::to_string(mode) + " = " + num(lambda) + ", gap " + num(gap) + ")"),
          mode_(mode), gap_(gap) {}

    std::size_t mode() const noexcept { return mode_; }
    double gap() const noexcept { return gap_; }

private:
    static std::string num(double v)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.9g", v);
        return buf;
    }

    std::size_t mode_;
    double gap_;
};

class FormatError : public Error {
public:
    using Error::Error;
};

} // namespace elastomodes
