#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "fracheat/parallel.hpp"

namespace fracheat::detail {

namespace {

std::mutex g_plan_mutex;

// Plans are created once per (n, sign) and executed on caller arrays through
// the new-array interface, which is thread safe.
fftw_plan plan_for(int n, int sign) {
  static std::map<std::pair<int, int>, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto it = cache.find({n, sign});
  if (it != cache.end()) return it->second;
  std::vector<cplx> scratch(static_cast<std::size_t>(n));
  auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
  fftw_plan plan = fftw_plan_dft_1d(n, p, p, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache.emplace(std::make_pair(n, sign), plan);
  return plan;
}

}  // namespace

void dft_inplace(cplx* data, int n, int sign) {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan_for(n, sign), p, p);
}

void dft_rows(ModeMatrix& data, int sign) {
  const int n = static_cast<int>(data.cols());
  fftw_plan plan = plan_for(n, sign);
  parallel_for(static_cast<std::size_t>(data.rows()), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) {
      auto* p = reinterpret_cast<fftw_complex*>(data.row(static_cast<Eigen::Index>(k)).data());
      fftw_execute_dft(plan, p, p);
    }
  });
}

}  // namespace fracheat::detail
