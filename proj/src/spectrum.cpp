#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "bangbang/analysis.hpp"
#include "bangbang/constants.hpp"
#include "bangbang/error.hpp"

namespace bangbang {

RabiSpectrum rabi_spectrum(const PopulationTrace& trace, const SpectrumOptions& options) {
    trace.validate();
    const std::size_t n = trace.size();
    if (n < 4) throw DomainError("rabi_spectrum: need at least 4 samples");
    if (options.padding < 1) throw DomainError("rabi_spectrum: padding must be >= 1");
    const auto& t = trace.probe_times;
    const double dt = (t.back() - t.front()) / static_cast<double>(n - 1);
    if (!(dt > 0.0)) throw DomainError("rabi_spectrum: probe times must increase");
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs((t[i] - t[i - 1]) - dt) > 1e-6 * dt) throw DomainError("rabi_spectrum: probe grid is not uniform");

    std::vector<double> x(trace.p_down);
    if (options.remove_mean) {
        double mean = 0.0;
        for (double v : x) mean += v;
        mean /= static_cast<double>(n);
        for (double& v : x) v -= mean;
    }
    const std::size_t m = n * static_cast<std::size_t>(options.padding);
    const std::size_t bins = m / 2 + 1;
    const double inv_n = 1.0 / static_cast<double>(n);

    RabiSpectrum out;
    out.omega.resize(bins);
    out.magnitude.resize(bins);
    out.sigma.resize(bins);
    std::vector<std::complex<double>> phasor(n);
    for (std::size_t k = 0; k < bins; ++k) {
        std::complex<double> sum = 0.0;
        std::complex<double> phasor_mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double theta = constants::two_pi * static_cast<double>((k * i) % m) / static_cast<double>(m);
            phasor[i] = std::polar(1.0, -theta);
            sum += x[i] * phasor[i];
            phasor_mean += phasor[i];
        }
        phasor_mean *= inv_n;
        const std::complex<double> value = sum * inv_n;
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::complex<double> c = (options.remove_mean ? phasor[i] - phasor_mean : phasor[i]) * inv_n;
            var += std::norm(c) * trace.sigma[i] * trace.sigma[i];
        }
        out.omega[k] = constants::two_pi * static_cast<double>(k) / (static_cast<double>(m) * dt);
        out.magnitude[k] = std::abs(value);
        out.sigma[k] = std::sqrt(var);
    }
    return out;
}

double lorentzian(double omega, double center, double width, double amplitude, double offset) {
    const double u = (omega - center) / width;
    return amplitude / (1.0 + u * u) + offset;
}

LorentzianFit fit_lorentzian(const RabiSpectrum& spectrum, const LorentzianOptions& options) {
    const std::size_t bins = spectrum.omega.size();
    if (bins < 5 || spectrum.magnitude.size() != bins || spectrum.sigma.size() != bins)
        throw DomainError("fit_lorentzian: need at least 5 consistent bins");
    if (options.window_bins < 2) throw DomainError("fit_lorentzian: window must be >= 2 bins");
    std::size_t peak = 1;
    for (std::size_t k = 2; k < bins; ++k)
        if (spectrum.magnitude[k] > spectrum.magnitude[peak]) peak = k;
    std::vector<double> rest(spectrum.magnitude.begin() + 1, spectrum.magnitude.end());
    std::nth_element(rest.begin(), rest.begin() + rest.size() / 2, rest.end());
    const double median = rest[rest.size() / 2];
    if (!(spectrum.magnitude[peak] > 3.0 * median)) throw DomainError("fit_lorentzian: no prominent peak");

    const std::size_t w = static_cast<std::size_t>(options.window_bins);
    const std::size_t lo = peak > w ? peak - w : 1;
    const std::size_t hi = std::min(bins - 1, peak + w);
    const std::size_t count = hi - lo + 1;
    double floor = spectrum.magnitude[lo];
    for (std::size_t k = lo; k <= hi; ++k) floor = std::min(floor, spectrum.magnitude[k]);
    const double amp0 = spectrum.magnitude[peak] - floor;
    double half = spectrum.bin_width();
    for (std::size_t k = peak; k <= hi; ++k)
        if (spectrum.magnitude[k] - floor < 0.5 * amp0) {
            half = std::max(half, spectrum.omega[k] - spectrum.omega[peak]);
            break;
        }
    const bool uniform = std::any_of(spectrum.sigma.begin() + lo, spectrum.sigma.begin() + hi + 1,
                                     [](double s) { return !(s > 0.0); });
    ResidualFunction fn = [&](std::span<const double> p, std::span<double> r) {
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t k = lo + i;
            const double s = uniform ? 1.0 : spectrum.sigma[k];
            r[i] = (spectrum.magnitude[k] - lorentzian(spectrum.omega[k], p[0], p[1], p[2], p[3])) / s;
        }
    };
    LorentzianFit out;
    out.fit = least_squares(fn, {"center", "width", "amplitude", "offset"},
                            {spectrum.omega[peak], half, amp0, floor}, count);
    out.center = out.fit.values[0];
    out.width = std::abs(out.fit.values[1]);
    out.amplitude = out.fit.values[2];
    out.offset = out.fit.values[3];
    out.sigma_center = out.fit.errors[0];
    return out;
}

}  // namespace bangbang
