#include <qmc/kernel/beam.hpp>
#include <qmc/kernel/errors.hpp>

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace qmc::kernel {

namespace {

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (!p)
    throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

// FFTW planning is not thread-safe; execution with the new-array interface
// is, as long as buffers come from fftw_malloc.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

class PlanCache {
public:
  ~PlanCache() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.inverse);
    }
  }

  PlanPair get(int n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end())
      return it->second;
    const std::size_t real_n = static_cast<std::size_t>(n) * n;
    const std::size_t complex_n = static_cast<std::size_t>(n) * (n / 2 + 1);
    auto real = fftw_buffer<double>(real_n);
    auto spec = fftw_buffer<fftw_complex>(complex_n);
    PlanPair p;
    p.forward = fftw_plan_dft_r2c_2d(n, n, real.get(), spec.get(), FFTW_ESTIMATE);
    p.inverse = fftw_plan_dft_c2r_2d(n, n, spec.get(), real.get(), FFTW_ESTIMATE);
    plans_.emplace(n, p);
    return p;
  }

private:
  std::mutex mutex_;
  std::map<int, PlanPair> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

} // namespace

double beam_sigma_pixels(double beam_fwhm, double pixel_size) {
  return beam_fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0))) / pixel_size;
}

Map gaussian_kernel(double sigma_pixels, std::size_t half_width) {
  const std::size_t n = 2 * half_width + 1;
  Map k(n, n);
  const double inv = 1.0 / (2.0 * sigma_pixels * sigma_pixels);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dy = static_cast<double>(i) - static_cast<double>(half_width);
    for (std::size_t j = 0; j < n; ++j) {
      const double dx = static_cast<double>(j) - static_cast<double>(half_width);
      k(i, j) = std::exp(-(dx * dx + dy * dy) * inv);
      total += k(i, j);
    }
  }
  for (double& v : k.values())
    v /= total;
  return k;
}

Map convolve_beam(const Map& map, double beam_fwhm, double pixel_size) {
  if (!(beam_fwhm > 0.0) || !(pixel_size > 0.0))
    throw KernelError("beam_fwhm and pixel_size must be positive");
  if (map.rows() != map.cols() || map.rows() == 0)
    throw ShapeMismatchError("beam convolution expects a non-empty square map");

  const std::size_t g = map.rows();
  const std::size_t half = g / 2;
  const std::size_t n = 2 * g;
  const std::size_t real_n = n * n;
  const std::size_t complex_n = n * (n / 2 + 1);
  const PlanPair plans = plan_cache().get(static_cast<int>(n));

  auto image = fftw_buffer<double>(real_n);
  auto kernel = fftw_buffer<double>(real_n);
  std::fill(image.get(), image.get() + real_n, 0.0);
  std::fill(kernel.get(), kernel.get() + real_n, 0.0);

  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t j = 0; j < g; ++j)
      image[i * n + j] = map(i, j);

  // Kernel centred on index 0 with negative offsets wrapped to the far end.
  const Map k = gaussian_kernel(beam_sigma_pixels(beam_fwhm, pixel_size), half);
  for (std::size_t a = 0; a < k.rows(); ++a) {
    const std::size_t row = (a + n - half) % n;
    for (std::size_t b = 0; b < k.cols(); ++b) {
      const std::size_t col = (b + n - half) % n;
      kernel[row * n + col] = k(a, b);
    }
  }

  auto image_hat = fftw_buffer<fftw_complex>(complex_n);
  auto kernel_hat = fftw_buffer<fftw_complex>(complex_n);
  fftw_execute_dft_r2c(plans.forward, image.get(), image_hat.get());
  fftw_execute_dft_r2c(plans.forward, kernel.get(), kernel_hat.get());

  for (std::size_t i = 0; i < complex_n; ++i) {
    const double re = image_hat[i][0] * kernel_hat[i][0] - image_hat[i][1] * kernel_hat[i][1];
    const double im = image_hat[i][0] * kernel_hat[i][1] + image_hat[i][1] * kernel_hat[i][0];
    image_hat[i][0] = re;
    image_hat[i][1] = im;
  }
  fftw_execute_dft_c2r(plans.inverse, image_hat.get(), image.get());

  const double scale = 1.0 / static_cast<double>(real_n);
  Map out(g, g);
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t j = 0; j < g; ++j)
      out(i, j) = image[i * n + j] * scale;
  return out;
}

} // namespace qmc::kernel
