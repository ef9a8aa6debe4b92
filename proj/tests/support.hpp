#pragma once

#include "lpsvm/lpsvm.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

namespace testing_support {

using lpsvm::Index;
using lpsvm::Matrix;
using lpsvm::Vector;

/// Dense Gaussian elimination with partial pivoting on plain nested vectors.
/// Deliberately shares no code with the library's Cholesky path.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
        x[i] = s / a[i][i];
    }
    return x;
}

/// Oracle for (I + nu H^T H) u = nu H^T e, assembled entry by entry.
inline Vector psvm_oracle(const Matrix& h, double nu) {
    const auto n = static_cast<std::size_t>(h.rows());
    const auto k = static_cast<std::size_t>(h.cols());
    std::vector<std::vector<double>> a(k, std::vector<double>(k, 0.0));
    std::vector<double> b(k, 0.0);
    for (std::size_t r = 0; r < k; ++r) {
        a[r][r] = 1.0;
        for (std::size_t c = 0; c < k; ++c) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += h(Index(i), Index(r)) * h(Index(i), Index(c));
            a[r][c] += nu * s;
        }
        for (std::size_t i = 0; i < n; ++i) b[r] += nu * h(Index(i), Index(r));
    }
    const auto x = gauss_solve(a, b);
    return Eigen::Map<const Vector>(x.data(), Index(x.size()));
}

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols, double sd = 1.0) {
    std::normal_distribution<double> normal(0.0, sd);
    Matrix a(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) a(i, j) = normal(rng);
    return a;
}

inline Vector random_labels(std::mt19937_64& rng, Index n) {
    std::bernoulli_distribution coin(0.5);
    Vector d(n);
    for (Index i = 0; i < n; ++i) d(i) = coin(rng) ? 1.0 : -1.0;
    // keep both classes present
    d(0) = 1.0;
    if (n > 1) d(1) = -1.0;
    return d;
}

inline lpsvm::Dataset random_dataset(std::mt19937_64& rng, Index n, Index m) {
    return lpsvm::Dataset(random_matrix(rng, n, m), random_labels(rng, n));
}

inline Index uniform_index(std::mt19937_64& rng, Index lo, Index hi) {
    return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

/// A fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() / ("lpsvm_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string operator/(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

/// Runs a shell command and returns its exit status.
inline int run(const std::string& cmd) {
    const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

/// Runs a shell command and returns (exit status, stderr).
inline std::pair<int, std::string> run_capture_stderr(const std::string& cmd, const std::string& scratch) {
    const int status = std::system((cmd + " >/dev/null 2>" + scratch).c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(scratch)};
}

} // namespace testing_support
