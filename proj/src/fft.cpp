#include "semiclass/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace semiclass {

namespace {
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

void dft(std::vector<std::complex<double>>& data, const std::vector<int>& dims, int sign) {
    size_t n = 1;
    for (int d : dims) n *= static_cast<size_t>(d);
    if (n != data.size()) throw std::invalid_argument("dft: size mismatch");
    if (n == 1) return;
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), ptr, ptr,
                             sign > 0 ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(plan);
}

}  // namespace semiclass
