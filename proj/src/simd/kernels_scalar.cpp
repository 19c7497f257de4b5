#include "alebk/simd/kernels.hpp"

#include <algorithm>

namespace alebk::simd {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(std::size_t n, double alpha, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

// Valid tap range [lo, hi) for output coordinate `o` along an axis of length `n`.
inline void tap_range(std::size_t o, std::size_t n, std::size_t& lo, std::size_t& hi) {
  lo = o == 0 ? 1 : 0;
  hi = o + 1 >= n ? 2 : 3;
}

void conv3x3_same_scalar(const Conv3x3Geometry& g, const double* in, const double* kernel,
                         const double* bias, double* out) {
  const std::size_t H = g.height, W = g.width, Ci = g.in_channels, Co = g.out_channels;
  for (std::size_t y = 0; y < H; ++y) {
    std::size_t ky0, ky1;
    tap_range(y, H, ky0, ky1);
    for (std::size_t x = 0; x < W; ++x) {
      std::size_t kx0, kx1;
      tap_range(x, W, kx0, kx1);
      double* o = out + (y * W + x) * Co;
      if (bias) {
        std::copy(bias, bias + Co, o);
      } else {
        std::fill(o, o + Co, 0.0);
      }
      for (std::size_t ky = ky0; ky < ky1; ++ky) {
        const std::size_t sy = y + ky - 1;
        for (std::size_t kx = kx0; kx < kx1; ++kx) {
          const std::size_t sx = x + kx - 1;
          const double* src = in + (sy * W + sx) * Ci;
          const double* k = kernel + (ky * 3 + kx) * Ci * Co;
          for (std::size_t ci = 0; ci < Ci; ++ci) {
            const double v = src[ci];
            const double* kc = k + ci * Co;
            for (std::size_t co = 0; co < Co; ++co) o[co] += v * kc[co];
          }
        }
      }
    }
  }
}

void conv3x3_weight_grad_scalar(const Conv3x3Geometry& g, const double* in, const double* grad_out,
                                double* grad_kernel, double* grad_bias) {
  const std::size_t H = g.height, W = g.width, Ci = g.in_channels, Co = g.out_channels;
  for (std::size_t y = 0; y < H; ++y) {
    std::size_t ky0, ky1;
    tap_range(y, H, ky0, ky1);
    for (std::size_t x = 0; x < W; ++x) {
      std::size_t kx0, kx1;
      tap_range(x, W, kx0, kx1);
      const double* go = grad_out + (y * W + x) * Co;
      if (grad_bias) {
        for (std::size_t co = 0; co < Co; ++co) grad_bias[co] += go[co];
      }
      for (std::size_t ky = ky0; ky < ky1; ++ky) {
        const std::size_t sy = y + ky - 1;
        for (std::size_t kx = kx0; kx < kx1; ++kx) {
          const std::size_t sx = x + kx - 1;
          const double* src = in + (sy * W + sx) * Ci;
          double* gk = grad_kernel + (ky * 3 + kx) * Ci * Co;
          for (std::size_t ci = 0; ci < Ci; ++ci) {
            const double v = src[ci];
            double* gkc = gk + ci * Co;
            for (std::size_t co = 0; co < Co; ++co) gkc[co] += v * go[co];
          }
        }
      }
    }
  }
}

}  // namespace

const KernelTable& scalar_kernels() noexcept {
  static const KernelTable table{Backend::Scalar, dot_scalar, axpy_scalar, conv3x3_same_scalar,
                                 conv3x3_weight_grad_scalar};
  return table;
}

}  // namespace alebk::simd
