// rattle/fft.h

// Copyright 2026  Rattle Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace rattle {

constexpr bool is_power_of_two(std::size_t n) {
  return n != 0 && (n & (n - 1)) == 0;
}

std::size_t next_power_of_two(std::size_t n);

// In-place iterative radix-2 FFT; size must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& a);

// |FFT|^2 of the frame zero-padded to fft_size (a power of two);
// returns fft_size/2 + 1 bins.
std::vector<double> power_spectrum(std::span<const double> frame,
                                   std::size_t fft_size);

// Orthonormal DCT-II; the transform matrix is an isometry so inverse() is
// its transpose.
class Dct2 {
 public:
  explicit Dct2(int n);

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const { return mat_ * x; }
  Eigen::VectorXd inverse(const Eigen::VectorXd& y) const {
    return mat_.transpose() * y;
  }
  int size() const { return static_cast<int>(mat_.rows()); }

 private:
  Eigen::MatrixXd mat_;
};

}  // namespace rattle
