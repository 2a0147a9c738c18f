#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cgo {

using cplx = std::complex<double>;
using Vec2c = std::array<cplx, 2>;
using Vec3c = std::array<cplx, 3>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;
using VecR = Eigen::VectorXd;

inline constexpr cplx I{0.0, 1.0};
inline constexpr double PI = 3.14159265358979323846;

// All library failures derive from Error; the kind() string tags the stage.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& msg)
      : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

struct ChartSingularity : Error {
  explicit ChartSingularity(const std::string& m) : Error("chart-singularity", m) {}
};
struct SingularPoint : Error {
  explicit SingularPoint(const std::string& m) : Error("singular-point", m) {}
};
struct SingularPair : Error {
  explicit SingularPair(const std::string& m) : Error("singular-pair", m) {}
};
struct MeshError : Error {
  explicit MeshError(const std::string& m) : Error("mesh", m) {}
};
struct UnsupportedPole : Error {
  explicit UnsupportedPole(const std::string& m) : Error("unsupported-pole", m) {}
};
struct IllConditioned : Error {
  explicit IllConditioned(const std::string& m) : Error("ill-conditioned", m) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error("config", m) {}
};
struct DataError : Error {
  explicit DataError(const std::string& m) : Error("inconsistent-data", m) {}
};

inline double norm2(const Vec3c& v) {
  return std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]);
}
inline double norm2(const Vec2c& v) { return std::norm(v[0]) + std::norm(v[1]); }

// sum conj(a_j) b_j
inline cplx hdot(const Vec3c& a, const Vec3c& b) {
  return std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1] + std::conj(a[2]) * b[2];
}
inline cplx hdot(const Vec2c& a, const Vec2c& b) {
  return std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1];
}

inline Vec3c conj(const Vec3c& v) { return {std::conj(v[0]), std::conj(v[1]), std::conj(v[2])}; }

}  // namespace cgo
