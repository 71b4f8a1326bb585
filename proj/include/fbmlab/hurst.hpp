#pragma once

#include <stdexcept>
#include <string>

namespace fbmlab {

/// Validated Hurst parameter, H in (0,1).
class HurstIndex {
 public:
  explicit HurstIndex(double h) : h_(h) {
    if (!(h > 0.0 && h < 1.0))
      throw std::invalid_argument("HurstIndex: H must lie in (0,1), got " + std::to_string(h));
  }

  double value() const { return h_; }
  double two_h() const { return 2.0 * h_; }
  bool rough() const { return h_ < 0.5; }

  /// Some operations are only defined for the rough regime H < 1/2.
  void require_rough(const char* op) const {
    if (!rough())
      throw std::invalid_argument(std::string(op) + ": requires H < 1/2, got H = " + std::to_string(h_));
  }

 private:
  double h_;
};

}  // namespace fbmlab
