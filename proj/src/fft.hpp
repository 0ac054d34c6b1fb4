#pragma once

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <vector>

namespace lgem::detail {

// FFTW planning is not thread-safe; execution on new arrays is.
inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

class ForwardFft {
 public:
  explicit ForwardFft(int n) : n_(n), in_(n), out_(n) {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan_ = fftw_plan_dft_1d(n_, reinterpret_cast<fftw_complex*>(in_.data()),
                             reinterpret_cast<fftw_complex*>(out_.data()), FFTW_FORWARD,
                             FFTW_ESTIMATE);
  }
  ~ForwardFft() {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(plan_);
  }
  ForwardFft(const ForwardFft&) = delete;
  ForwardFft& operator=(const ForwardFft&) = delete;

  const std::vector<std::complex<double>>& operator()(const std::vector<std::complex<double>>& x) {
    std::copy(x.begin(), x.end(), in_.begin());
    fftw_execute(plan_);
    return out_;
  }

 private:
  int n_;
  std::vector<std::complex<double>> in_, out_;
  fftw_plan plan_;
};

}  // namespace lgem::detail
