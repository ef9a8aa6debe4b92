#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace lpsvm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr const char* kVersion = "1.0.0";

/// Runtime failure inside the library (numerical breakdown, I/O, malformed input).
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Caller supplied an invalid parameter or inconsistent configuration.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Separating hyperplane {x : x.w = gamma}; the decision rule is sign(x.w - gamma).
struct Hyperplane {
    Vector w;
    double gamma = 0.0;

    /// (w, gamma) as one vector of length m + 1.
    Vector stacked() const {
        Vector u(w.size() + 1);
        u.head(w.size()) = w;
        u(w.size()) = gamma;
        return u;
    }

    static Hyperplane from_stacked(const Vector& u) {
        if (u.size() < 1) throw Error("hyperplane vector must have at least the offset entry");
        return Hyperplane{u.head(u.size() - 1), u(u.size() - 1)};
    }

    Index channels() const { return w.size(); }

    bool finite() const { return w.allFinite() && std::isfinite(gamma); }
};

} // namespace lpsvm
