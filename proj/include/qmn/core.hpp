#ifndef QMN_CORE_HPP
#define QMN_CORE_HPP

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <type_traits>

#include <Eigen/Dense>

namespace qmn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

enum class ErrorCode {
  CyclicQuiver,
  DanglingArrow,
  DuplicateArrowId,
  DuplicateVertex,
  InvalidRole,
  MultipleArrows,
  ShapeMismatch,
  QuiverMismatch,
  SingularGauge,
  PathExplosion,
  CodimensionMismatch,
  SingularPreActivation,
  UndefinedDerivative,
  DivergenceDetected,
  NoConvergence,
  Parse,
};

/// Broad grouping used by the CLI to pick an exit status.
enum class ErrorKind { Validation, Numeric };

constexpr ErrorKind kind_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::SingularGauge:
    case ErrorCode::PathExplosion:
    case ErrorCode::SingularPreActivation:
    case ErrorCode::UndefinedDerivative:
    case ErrorCode::DivergenceDetected:
    case ErrorCode::NoConvergence:
      return ErrorKind::Numeric;
    default:
      return ErrorKind::Validation;
  }
}

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorKind kind() const noexcept { return kind_of(code_); }

 private:
  ErrorCode code_;
};

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

template <typename Scalar>
using RealOf = typename Eigen::NumTraits<Scalar>::Real;

}  // namespace qmn

#endif  // QMN_CORE_HPP
