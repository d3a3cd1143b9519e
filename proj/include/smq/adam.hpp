#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "smq/tensor.hpp"

namespace smq {

struct AdamOptions {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction. Moments are kept per parameter in the order the
/// parameters were registered.
template <typename T>
class Adam {
 public:
  Adam(std::vector<Tensor<T>> params, AdamOptions options = {})
      : params_(std::move(params)), options_(options) {
    for (const auto& p : params_) {
      first_.emplace_back(p.numel(), T(0));
      second_.emplace_back(p.numel(), T(0));
    }
  }

  void step() {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (!params_[i].has_grad()) {
        throw InvalidArgument("adam: parameter " + std::to_string(i) + " has no gradient");
      }
    }
    ++step_;
    const double b1 = options_.beta1, b2 = options_.beta2;
    const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step_));
    const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto value = params_[i].mutable_data();
      const auto grad = params_[i].grad();
      auto& m = first_[i];
      auto& v = second_[i];
      for (std::size_t j = 0; j < value.size(); ++j) {
        const T g = grad[j];
        m[j] = static_cast<T>(b1 * m[j] + (1.0 - b1) * g);
        v[j] = static_cast<T>(b2 * v[j] + (1.0 - b2) * g * g);
        const double m_hat = m[j] / correction1;
        const double v_hat = v[j] / correction2;
        value[j] = static_cast<T>(value[j] - options_.lr * m_hat / (std::sqrt(v_hat) + options_.eps));
      }
    }
  }

  void zero_grad() {
    for (auto& p : params_) p.zero_grad();
  }

  std::uint64_t step_count() const { return step_; }
  const AdamOptions& options() const { return options_; }
  const std::vector<T>& first_moment(std::size_t i) const { return first_.at(i); }
  const std::vector<T>& second_moment(std::size_t i) const { return second_.at(i); }

 private:
  std::vector<Tensor<T>> params_;
  AdamOptions options_;
  std::vector<std::vector<T>> first_;
  std::vector<std::vector<T>> second_;
  std::uint64_t step_ = 0;
};

}  // namespace smq
