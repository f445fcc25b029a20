#include <stdexcept>

#include "uavnoma/kernels.hpp"

namespace uavnoma::kernels {

namespace {

void check(std::size_t have, std::size_t want, const char* what) {
  if (have != want) throw std::invalid_argument(std::string("kernels: bad size for ") + what);
}

}  // namespace

namespace serial {

void dense_forward(std::span<const double> x, std::span<const double> w, std::span<const double> b,
                   std::span<double> y, Shape s, bool relu) {
  check(x.size(), s.batch * s.in, "x");
  check(w.size(), s.in * s.out, "w");
  check(b.size(), s.out, "b");
  check(y.size(), s.batch * s.out, "y");
  for (std::size_t r = 0; r < s.batch; ++r) {
    for (std::size_t j = 0; j < s.out; ++j) {
      double acc = b[j];
      for (std::size_t k = 0; k < s.in; ++k) acc += x[r * s.in + k] * w[k * s.out + j];
      y[r * s.out + j] = relu && acc < 0.0 ? 0.0 : acc;
    }
  }
}

void dense_grad_params(std::span<const double> x, std::span<const double> dy, std::span<double> dw,
                       std::span<double> db, Shape s) {
  check(x.size(), s.batch * s.in, "x");
  check(dy.size(), s.batch * s.out, "dy");
  check(dw.size(), s.in * s.out, "dw");
  check(db.size(), s.out, "db");
  for (std::size_t k = 0; k < s.in; ++k) {
    for (std::size_t j = 0; j < s.out; ++j) {
      double acc = 0.0;
      for (std::size_t r = 0; r < s.batch; ++r) acc += x[r * s.in + k] * dy[r * s.out + j];
      dw[k * s.out + j] = acc;
    }
  }
  for (std::size_t j = 0; j < s.out; ++j) {
    double acc = 0.0;
    for (std::size_t r = 0; r < s.batch; ++r) acc += dy[r * s.out + j];
    db[j] = acc;
  }
}

void dense_grad_input(std::span<const double> dy, std::span<const double> w, std::span<double> dx, Shape s) {
  check(dy.size(), s.batch * s.out, "dy");
  check(w.size(), s.in * s.out, "w");
  check(dx.size(), s.batch * s.in, "dx");
  for (std::size_t r = 0; r < s.batch; ++r) {
    for (std::size_t k = 0; k < s.in; ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < s.out; ++j) acc += dy[r * s.out + j] * w[k * s.out + j];
      dx[r * s.in + k] = acc;
    }
  }
}

}  // namespace serial

void relu_mask(std::span<const double> y, std::span<double> dy) {
  check(dy.size(), y.size(), "dy");
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0)) dy[i] = 0.0;
  }
}

}  // namespace uavnoma::kernels
