#pragma once

#include <cstddef>
#include <span>

// Dense-layer kernels. Matrices are row-major: activations are batch x width,
// weights are in x out. Two implementations share one signature:
//
//   serial::  plain loops, the reference the tests compare against;
//   omp::     OpenMP-parallel and register-blocked, used by the network.
//
// Every output element of the omp kernels is accumulated by one thread in a
// fixed order, so results do not depend on the thread count.
namespace uavnoma::kernels {

struct Shape {
  std::size_t batch = 0;
  std::size_t in = 0;
  std::size_t out = 0;
};

namespace serial {

/// y = x W + b, optionally followed by ReLU.
void dense_forward(std::span<const double> x, std::span<const double> w, std::span<const double> b,
                   std::span<double> y, Shape shape, bool relu);

/// dW = x^T dy, db = column sums of dy.
void dense_grad_params(std::span<const double> x, std::span<const double> dy, std::span<double> dw,
                       std::span<double> db, Shape shape);

/// dx = dy W^T.
void dense_grad_input(std::span<const double> dy, std::span<const double> w, std::span<double> dx, Shape shape);

}  // namespace serial

namespace omp {

void dense_forward(std::span<const double> x, std::span<const double> w, std::span<const double> b,
                   std::span<double> y, Shape shape, bool relu);
void dense_grad_params(std::span<const double> x, std::span<const double> dy, std::span<double> dw,
                       std::span<double> db, Shape shape);
void dense_grad_input(std::span<const double> dy, std::span<const double> w, std::span<double> dx, Shape shape);

}  // namespace omp

/// Zeroes dy wherever the forward activation y was clamped by ReLU.
void relu_mask(std::span<const double> y, std::span<double> dy);

}  // namespace uavnoma::kernels
