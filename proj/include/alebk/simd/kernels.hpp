#pragma once

// Hot inner loops of the network, in a scalar reference form and optional
// vectorised forms. Every variant computes the same function; variants may
// differ only in summation order and FMA rounding.

#include <cstddef>
#include <string_view>
#include <vector>

namespace alebk::simd {

enum class Backend { Scalar, Avx2 };

std::string_view backend_name(Backend b) noexcept;

/// Geometry of a 3x3 stride-1 zero-padded ("same") convolution over an
/// H x W x Cin image producing H x W x Cout. Kernels are laid out
/// [ky][kx][cin][cout].
struct Conv3x3Geometry {
  std::size_t height;
  std::size_t width;
  std::size_t in_channels;
  std::size_t out_channels;
};

struct KernelTable {
  Backend backend;

  double (*dot)(const double* a, const double* b, std::size_t n);

  // y[i] += alpha * x[i]
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);

  // out = conv(in, kernel) + bias; bias may be null.
  void (*conv3x3_same)(const Conv3x3Geometry& g, const double* in, const double* kernel,
                       const double* bias, double* out);

  // grad_kernel += d(out)/d(kernel)^T grad_out, grad_bias += sum over pixels of grad_out.
  void (*conv3x3_weight_grad)(const Conv3x3Geometry& g, const double* in, const double* grad_out,
                              double* grad_kernel, double* grad_bias);
};

const KernelTable& scalar_kernels() noexcept;

/// Null when the variant was not compiled in or the CPU lacks the ISA.
const KernelTable* avx2_kernels() noexcept;

std::vector<Backend> available_backends();

/// Kernels used by the library. Chosen on first use: the best available
/// variant, unless ALEBK_SIMD=scalar is set in the environment.
const KernelTable& active() noexcept;

/// Overrides the active backend; throws std::invalid_argument if it is not
/// available on this machine.
void set_backend(Backend b);

/// RAII override, used by the equivalence tests.
class ScopedBackend {
 public:
  explicit ScopedBackend(Backend b);
  ~ScopedBackend();
  ScopedBackend(const ScopedBackend&) = delete;
  ScopedBackend& operator=(const ScopedBackend&) = delete;

 private:
  Backend previous_;
};

}  // namespace alebk::simd
