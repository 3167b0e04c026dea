#pragma once

// Piecewise-constant control on a uniform time grid: u(t) = u_n on
// [t_n, t_{n+1}).

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace schloegl {

class ControlSignal {
 public:
  ControlSignal() = default;
  ControlSignal(std::size_t steps, std::size_t width,
                double bound = std::numeric_limits<double>::infinity())
      : steps_(steps), width_(width), bound_(bound), data_(steps * width, 0.0) {}

  std::size_t steps() const noexcept { return steps_; }
  std::size_t width() const noexcept { return width_; }
  double bound() const noexcept { return bound_; }
  void set_bound(double bound) noexcept { bound_ = bound; }

  std::span<double> at(std::size_t n) { return {data_.data() + n * width_, width_}; }
  std::span<const double> at(std::size_t n) const {
    return {data_.data() + n * width_, width_};
  }
  std::span<double> flat() noexcept { return data_; }
  std::span<const double> flat() const noexcept { return data_; }

  friend bool operator==(const ControlSignal&, const ControlSignal&) = default;

 private:
  std::size_t steps_ = 0;
  std::size_t width_ = 0;
  double bound_ = std::numeric_limits<double>::infinity();
  std::vector<double> data_;
};

}  // namespace schloegl
