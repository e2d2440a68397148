#include "arnn/model.hpp"

#include <cmath>
#include <string>

#include "arnn/errors.hpp"

namespace arnn {

namespace {

void validate_layer(const Matrix& w, double total_rate, const char* name) {
  const auto n = w.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = w(i, j);
      if (i == j) {
        if (v != 0.0) {
          throw InvalidParameterError(std::string(name) + ": diagonal weight must be zero");
        }
        continue;
      }
      if (!std::isfinite(v) || v < 0.0 || v > total_rate) {
        throw InvalidParameterError(std::string(name) + ": weight (" + std::to_string(i) + "," +
                                    std::to_string(j) + ")=" + std::to_string(v) +
                                    " outside [0, W]");
      }
    }
  }
}

}  // namespace

ArnnModel::ArnnModel(double total_rate, Matrix wx_plus, Matrix wy_plus)
    : total_rate_(total_rate), wx_plus_(std::move(wx_plus)), wy_plus_(std::move(wy_plus)) {
  if (!(total_rate_ > 0.0) || !std::isfinite(total_rate_)) {
    throw InvalidParameterError("total rate W must be positive");
  }
  if (wx_plus_.rows() != wx_plus_.cols() || wy_plus_.rows() != wy_plus_.cols() ||
      wx_plus_.rows() != wy_plus_.rows()) {
    throw InvalidSizeError("weight matrices must be square and of equal size");
  }
  if (wx_plus_.rows() < 2) {
    throw InvalidSizeError("network needs at least two nodes");
  }
  validate_layer(wx_plus_, total_rate_, "W+");
  validate_layer(wy_plus_, total_rate_, "w+");
}

ArnnModel ArnnModel::neutral(std::size_t n, double total_rate) {
  if (n < 2) {
    throw InvalidSizeError("network needs at least two nodes, got " + std::to_string(n));
  }
  if (!(total_rate > 0.0)) {
    throw InvalidParameterError("total rate W must be positive");
  }
  const auto sn = static_cast<Eigen::Index>(n);
  Matrix w = Matrix::Constant(sn, sn, 0.5 * total_rate);
  w.diagonal().setZero();
  return ArnnModel(total_rate, w, w);
}

double ArnnModel::wx_minus(std::size_t i, std::size_t j) const {
  return i == j ? 0.0 : total_rate_ - wx_plus_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

double ArnnModel::wy_minus(std::size_t i, std::size_t j) const {
  return i == j ? 0.0 : total_rate_ - wy_plus_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

ArnnModel ArnnModel::with_weights(Matrix wx_plus, Matrix wy_plus) const {
  return ArnnModel(total_rate_, std::move(wx_plus), std::move(wy_plus));
}

bool operator==(const ArnnModel& a, const ArnnModel& b) {
  return a.total_rate_ == b.total_rate_ && a.wx_plus_ == b.wx_plus_ && a.wy_plus_ == b.wy_plus_;
}

ExternalInputs ExternalInputs::from_attack_ratio(const Vector& attack_ratio) {
  return ExternalInputs{attack_ratio, (1.0 - attack_ratio.array()).matrix()};
}

ExternalInputs ExternalInputs::neutral(std::size_t n, double total_rate) {
  const double level = 0.75 * total_rate * static_cast<double>(n - 1);
  const auto sn = static_cast<Eigen::Index>(n);
  return ExternalInputs{Vector::Constant(sn, level), Vector::Constant(sn, level)};
}

void ExternalInputs::validate(std::size_t n) const {
  if (static_cast<std::size_t>(compromised.size()) != n || static_cast<std::size_t>(safe.size()) != n) {
    throw InvalidSizeError("external inputs must have length " + std::to_string(n));
  }
  for (Eigen::Index i = 0; i < compromised.size(); ++i) {
    if (!(compromised(i) >= 0.0) || !(safe(i) >= 0.0) || !std::isfinite(compromised(i)) ||
        !std::isfinite(safe(i))) {
      throw InvalidParameterError("external inputs must be finite and non-negative");
    }
  }
}

}  // namespace arnn
