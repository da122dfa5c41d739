#include "cpafdm/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

namespace cpafdm::fft {
namespace {

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = plans_.find({n, sign});
    if (it != plans_.end()) return it->second;
    // Planning with FFTW_ESTIMATE never touches the buffers, but they still
    // have to exist.
    CVec scratch(n);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(std::make_pair(n, sign), plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

void execute(std::span<cd> data, int sign) {
  if (data.empty()) return;
  fftw_plan plan = cache().get(data.size(), sign);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

void scale(std::span<cd> data) {
  const double s = 1.0 / std::sqrt(static_cast<double>(data.size()));
  for (cd& v : data) v *= s;
}

}  // namespace

void forward_unitary(std::span<cd> data) {
  execute(data, FFTW_FORWARD);
  scale(data);
}

void inverse_unitary(std::span<cd> data) {
  execute(data, FFTW_BACKWARD);
  scale(data);
}

void forward_raw(std::span<cd> data) { execute(data, FFTW_FORWARD); }

}  // namespace cpafdm::fft
