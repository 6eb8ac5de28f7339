#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace msdd {

using cplx = std::complex<double>;
using Vec2 = Eigen::Vector2d;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;
inline constexpr cplx kI{0.0, 1.0};

// Error hierarchy. Every failure the library reports is one of these, so
// callers can attribute a failure to a stage without parsing messages.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : Error { using Error::Error; };
struct ParameterError : Error { using Error::Error; };
struct GeometryError : Error { using Error::Error; };
struct TopologyError : Error { using Error::Error; };
struct ConformityError : Error { using Error::Error; };
struct PlacementError : Error { using Error::Error; };
struct PartitionError : Error { using Error::Error; };
struct BudgetError : Error { using Error::Error; };
struct UnsupportedError : Error { using Error::Error; };
struct ConsistencyError : Error { using Error::Error; };

struct ConditioningError : Error {
  ConditioningError(const std::string& what, double estimate)
      : Error(what + " (condition estimate " + std::to_string(estimate) + ")"),
        condition_estimate(estimate) {}
  double condition_estimate;
};

}  // namespace msdd
