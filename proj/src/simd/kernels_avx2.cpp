// Compiled with -mavx2 -mfma. Nothing here may run before dispatch has
// confirmed CPU support.

#include <immintrin.h>

#include <algorithm>

#include "alebk/simd/kernels.hpp"

namespace alebk::simd {

namespace {

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), s1);
  }
  for (; i + 4 <= n; i += 4) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
  }
  s0 = _mm256_add_pd(s0, s1);
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, s0);
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

inline void tap_range(std::size_t o, std::size_t n, std::size_t& lo, std::size_t& hi) {
  lo = o == 0 ? 1 : 0;
  hi = o + 1 >= n ? 2 : 3;
}

// One output pixel, output channels [co, co + 4*NV), accumulated in registers.
template <int NV>
inline void conv_pixel_block(const Conv3x3Geometry& g, const double* in, const double* kernel,
                             const double* bias, double* o, std::size_t y, std::size_t x,
                             std::size_t ky0, std::size_t ky1, std::size_t kx0, std::size_t kx1,
                             std::size_t co) {
  const std::size_t W = g.width, Ci = g.in_channels, Co = g.out_channels;
  __m256d acc[NV];
  for (int v = 0; v < NV; ++v) {
    acc[v] = bias ? _mm256_loadu_pd(bias + co + 4 * v) : _mm256_setzero_pd();
  }
  for (std::size_t ky = ky0; ky < ky1; ++ky) {
    const std::size_t sy = y + ky - 1;
    for (std::size_t kx = kx0; kx < kx1; ++kx) {
      const double* src = in + (sy * W + (x + kx - 1)) * Ci;
      const double* k = kernel + (ky * 3 + kx) * Ci * Co + co;
      for (std::size_t ci = 0; ci < Ci; ++ci) {
        const __m256d b = _mm256_broadcast_sd(src + ci);
        const double* kc = k + ci * Co;
        for (int v = 0; v < NV; ++v) acc[v] = _mm256_fmadd_pd(b, _mm256_loadu_pd(kc + 4 * v), acc[v]);
      }
    }
  }
  for (int v = 0; v < NV; ++v) _mm256_storeu_pd(o + co + 4 * v, acc[v]);
}

void conv3x3_same_avx2(const Conv3x3Geometry& g, const double* in, const double* kernel,
                       const double* bias, double* out) {
  const std::size_t H = g.height, W = g.width, Ci = g.in_channels, Co = g.out_channels;
  for (std::size_t y = 0; y < H; ++y) {
    std::size_t ky0, ky1;
    tap_range(y, H, ky0, ky1);
    for (std::size_t x = 0; x < W; ++x) {
      std::size_t kx0, kx1;
      tap_range(x, W, kx0, kx1);
      double* o = out + (y * W + x) * Co;
      std::size_t co = 0;
      for (; co + 32 <= Co; co += 32) conv_pixel_block<8>(g, in, kernel, bias, o, y, x, ky0, ky1, kx0, kx1, co);
      for (; co + 16 <= Co; co += 16) conv_pixel_block<4>(g, in, kernel, bias, o, y, x, ky0, ky1, kx0, kx1, co);
      for (; co + 4 <= Co; co += 4) conv_pixel_block<1>(g, in, kernel, bias, o, y, x, ky0, ky1, kx0, kx1, co);
      for (; co < Co; ++co) {
        double s = bias ? bias[co] : 0.0;
        for (std::size_t ky = ky0; ky < ky1; ++ky) {
          for (std::size_t kx = kx0; kx < kx1; ++kx) {
            const double* src = in + ((y + ky - 1) * W + (x + kx - 1)) * Ci;
            const double* k = kernel + (ky * 3 + kx) * Ci * Co + co;
            for (std::size_t ci = 0; ci < Ci; ++ci) s += src[ci] * k[ci * Co];
          }
        }
        o[co] = s;
      }
    }
  }
}

template <int NV>
inline void grad_pixel_block(const Conv3x3Geometry& g, const double* in, const double* go,
                             double* grad_kernel, std::size_t y, std::size_t x, std::size_t ky0,
                             std::size_t ky1, std::size_t kx0, std::size_t kx1, std::size_t co) {
  const std::size_t W = g.width, Ci = g.in_channels, Co = g.out_channels;
  __m256d gv[NV];
  for (int v = 0; v < NV; ++v) gv[v] = _mm256_loadu_pd(go + co + 4 * v);
  for (std::size_t ky = ky0; ky < ky1; ++ky) {
    const std::size_t sy = y + ky - 1;
    for (std::size_t kx = kx0; kx < kx1; ++kx) {
      const double* src = in + (sy * W + (x + kx - 1)) * Ci;
      double* gk = grad_kernel + (ky * 3 + kx) * Ci * Co + co;
      for (std::size_t ci = 0; ci < Ci; ++ci) {
        const __m256d b = _mm256_broadcast_sd(src + ci);
        double* gkc = gk + ci * Co;
        for (int v = 0; v < NV; ++v) {
          _mm256_storeu_pd(gkc + 4 * v, _mm256_fmadd_pd(b, gv[v], _mm256_loadu_pd(gkc + 4 * v)));
        }
      }
    }
  }
}

void conv3x3_weight_grad_avx2(const Conv3x3Geometry& g, const double* in, const double* grad_out,
                              double* grad_kernel, double* grad_bias) {
  const std::size_t H = g.height, W = g.width, Ci = g.in_channels, Co = g.out_channels;
  for (std::size_t y = 0; y < H; ++y) {
    std::size_t ky0, ky1;
    tap_range(y, H, ky0, ky1);
    for (std::size_t x = 0; x < W; ++x) {
      std::size_t kx0, kx1;
      tap_range(x, W, kx0, kx1);
      const double* go = grad_out + (y * W + x) * Co;
      if (grad_bias) axpy_avx2(Co, 1.0, go, grad_bias);
      std::size_t co = 0;
      for (; co + 32 <= Co; co += 32) grad_pixel_block<8>(g, in, go, grad_kernel, y, x, ky0, ky1, kx0, kx1, co);
      for (; co + 16 <= Co; co += 16) grad_pixel_block<4>(g, in, go, grad_kernel, y, x, ky0, ky1, kx0, kx1, co);
      for (; co + 4 <= Co; co += 4) grad_pixel_block<1>(g, in, go, grad_kernel, y, x, ky0, ky1, kx0, kx1, co);
      for (; co < Co; ++co) {
        for (std::size_t ky = ky0; ky < ky1; ++ky) {
          for (std::size_t kx = kx0; kx < kx1; ++kx) {
            const double* src = in + ((y + ky - 1) * W + (x + kx - 1)) * Ci;
            double* gk = grad_kernel + (ky * 3 + kx) * Ci * Co + co;
            for (std::size_t ci = 0; ci < Ci; ++ci) gk[ci * Co] += src[ci] * go[co];
          }
        }
      }
    }
  }
}

}  // namespace

const KernelTable& avx2_kernel_table() noexcept {
  static const KernelTable table{Backend::Avx2, dot_avx2, axpy_avx2, conv3x3_same_avx2,
                                 conv3x3_weight_grad_avx2};
  return table;
}

}  // namespace alebk::simd
