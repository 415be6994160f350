#include "link/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <numbers>

#include "common/error.hpp"

namespace ponlab::link {
namespace {

// FFTW's planner is not thread-safe; executing an existing plan on new arrays is.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<Complex> scratch(n);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    require(plan != nullptr, ErrorCode::kInternal, "FFTW could not create a plan of size " + std::to_string(n));
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

void execute(std::vector<Complex>& data, int sign) {
  if (data.empty()) return;
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan_cache().get(data.size(), sign), buf, buf);
}

}  // namespace

void fft_forward(std::vector<Complex>& data) { execute(data, FFTW_FORWARD); }

void fft_inverse(std::vector<Complex>& data) {
  execute(data, FFTW_BACKWARD);
  const double inv = 1.0 / static_cast<double>(data.size());
  for (Complex& c : data) c *= inv;
}

double bin_angular_frequency(std::size_t k, std::size_t n, double sample_rate) {
  const double index = k < (n + 1) / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
  return 2.0 * std::numbers::pi * index * sample_rate / static_cast<double>(n);
}

}  // namespace ponlab::link
