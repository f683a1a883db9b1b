#include "relids/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace relids {
namespace {

struct PlanKey {
    int d;
    int N;
    int sign;
    bool operator<(const PlanKey& o) const {
        if (d != o.d) return d < o.d;
        if (N != o.N) return N < o.N;
        return sign < o.sign;
    }
};

// Planning is not thread-safe in FFTW; new-array execution is.
fftw_plan get_plan(const BoxGrid& g, int sign) {
    static std::map<PlanKey, fftw_plan> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    const PlanKey key{g.d, g.N, sign};
    auto it = cache.find(key);
    if (it == cache.end()) {
        std::vector<int> dims(g.d, g.N);
        std::vector<Complex> scratch(g.size());
        auto* ptr = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan p = fftw_plan_dft(g.d, dims.data(), ptr, ptr, sign,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!p) throw std::runtime_error("fftw_plan_dft failed");
        it = cache.emplace(key, p).first;
    }
    return it->second;
}

void execute(const BoxGrid& g, std::vector<Complex>& data, int sign) {
    if (static_cast<std::int64_t>(data.size()) != g.size())
        throw std::invalid_argument("dft: data length does not match grid");
    fftw_plan p = get_plan(g, sign);
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(p, ptr, ptr);
}

// (-1)^{sum of DFT indices}: the phase factor between the lattice DFT and
// the continuum transform anchored at x = -L/2.
int alt_sign(const BoxGrid& g, std::int64_t m) {
    int s = 0;
    for (int a = 0; a < g.d; ++a) {
        s += static_cast<int>(m % g.N);
        m /= g.N;
    }
    return (s % 2 == 0) ? 1 : -1;
}

}  // namespace

void dft_forward(const BoxGrid& g, std::vector<Complex>& data) { execute(g, data, FFTW_FORWARD); }
void dft_backward(const BoxGrid& g, std::vector<Complex>& data) { execute(g, data, FFTW_BACKWARD); }

std::vector<Complex> fourier_coefficients(const GridFunction& u) {
    std::vector<Complex> data = u.values;
    dft_forward(u.grid, data);
    const double hd = u.grid.cell_volume();
    for (std::int64_t m = 0; m < u.grid.size(); ++m) data[m] *= hd * alt_sign(u.grid, m);
    return data;
}

GridFunction fourier_synthesis(const BoxGrid& g, const std::vector<Complex>& coeffs) {
    if (static_cast<std::int64_t>(coeffs.size()) != g.size())
        throw std::invalid_argument("fourier_synthesis: length mismatch");
    GridFunction u;
    u.grid = g;
    u.values = coeffs;
    for (std::int64_t m = 0; m < g.size(); ++m) u.values[m] *= alt_sign(g, m);
    dft_backward(g, u.values);
    const double scale = std::pow(g.L, -g.d);
    for (Complex& z : u.values) z *= scale;
    return u;
}

}  // namespace relids
