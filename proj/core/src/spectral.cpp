#include "fits/spectral.hpp"

#include "fits/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <unordered_map>

namespace fits::spectral {

namespace {

constexpr double kPi = std::numbers::pi;

std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

constexpr std::size_t kMaxDirectRadix = 31;

// Radices in stage order: 4s first, then 2, then odd primes ascending.
std::vector<std::size_t> factorize(std::size_t n) {
    std::vector<std::size_t> out;
    while (n % 4 == 0) {
        out.push_back(4);
        n /= 4;
    }
    if (n % 2 == 0) {
        out.push_back(2);
        n /= 2;
    }
    for (std::size_t p = 3; p * p <= n; p += 2)
        while (n % p == 0) {
            out.push_back(p);
            n /= p;
        }
    if (n > 1) out.push_back(n);
    return out;
}

cplx unit_root(std::size_t num, std::size_t den) {
    return std::polar(1.0, -2.0 * kPi * static_cast<double>(num % den) / static_cast<double>(den));
}

// Self-sorting (Stockham) mixed-radix transform for lengths whose prime factors are all
// at most kMaxDirectRadix. Each stage combines `radix` sub-transforms of length `span`.
class MixedRadixPlan {
public:
    explicit MixedRadixPlan(std::size_t n) : n_(n) {
        std::size_t span = 1;
        for (std::size_t radix : factorize(n)) {
            Stage st{radix, span, std::vector<cplx>(span * (radix - 1)), std::vector<cplx>(radix)};
            for (std::size_t k = 0; k < span; ++k)
                for (std::size_t r = 1; r < radix; ++r) st.twiddle[k * (radix - 1) + (r - 1)] = unit_root(r * k, span * radix);
            for (std::size_t q = 0; q < radix; ++q) st.roots[q] = unit_root(q, radix);
            stages_.push_back(std::move(st));
            span *= radix;
        }
    }

    static bool supports(std::size_t n) {
        const auto f = factorize(n);
        return std::all_of(f.begin(), f.end(), [](std::size_t p) { return p <= kMaxDirectRadix; });
    }

    // Unnormalized; the inverse runs the forward transform on conjugated data.
    void execute(std::span<cplx> a, bool inverse) const {
        if (inverse)
            for (auto& v : a) v = std::conj(v);
        thread_local std::vector<cplx> scratch;
        scratch.resize(n_);
        cplx* src = a.data();
        cplx* dst = scratch.data();
        for (const auto& st : stages_) {
            switch (st.radix) {
            case 2: run_stage<2>(st, src, dst); break;
            case 3: run_stage<3>(st, src, dst); break;
            case 4: run_stage<4>(st, src, dst); break;
            case 5: run_stage<5>(st, src, dst); break;
            default: run_stage<0>(st, src, dst); break;
            }
            std::swap(src, dst);
        }
        if (src != a.data()) std::copy(src, src + n_, a.begin());
        if (inverse)
            for (auto& v : a) v = std::conj(v);
    }

private:
    struct Stage {
        std::size_t radix;
        std::size_t span;
        std::vector<cplx> twiddle; ///< span x (radix - 1)
        std::vector<cplx> roots;   ///< radix-th roots of unity
    };

    // R == 0 selects the generic O(radix^2) butterfly.
    template <std::size_t R>
    void run_stage(const Stage& st, const cplx* src, cplx* dst) const {
        const std::size_t radix = R == 0 ? st.radix : R;
        const std::size_t stride = n_ / radix;
        const std::size_t span = st.span;
        std::array<cplx, R == 0 ? kMaxDirectRadix : R> v;
        std::array<cplx, R == 0 ? kMaxDirectRadix : R> y;
        for (std::size_t base = 0, j = 0; j < stride; base += span * radix) {
            const cplx* tw = st.twiddle.data();
            for (std::size_t k = 0; k < span; ++k, ++j, tw += radix - 1) {
                v[0] = src[j];
                for (std::size_t r = 1; r < radix; ++r) v[r] = src[j + r * stride] * tw[r - 1];
                butterfly<R>(st, v.data(), y.data());
                cplx* out = dst + base + k;
                for (std::size_t r = 0; r < radix; ++r) out[r * span] = y[r];
            }
        }
    }

    template <std::size_t R>
    static void butterfly(const Stage& st, const cplx* v, cplx* y) {
        if constexpr (R == 2) {
            y[0] = v[0] + v[1];
            y[1] = v[0] - v[1];
        } else if constexpr (R == 3) {
            constexpr double kSin60 = 0.86602540378443864676;
            const cplx sum = v[1] + v[2];
            const cplx diff = v[1] - v[2];
            const cplx mid = v[0] - 0.5 * sum;
            const cplx rot(kSin60 * diff.imag(), -kSin60 * diff.real()); // -i sin60 * diff
            y[0] = v[0] + sum;
            y[1] = mid + rot;
            y[2] = mid - rot;
        } else if constexpr (R == 4) {
            const cplx t0 = v[0] + v[2];
            const cplx t1 = v[0] - v[2];
            const cplx t2 = v[1] + v[3];
            const cplx d = v[1] - v[3];
            const cplx t3(d.imag(), -d.real()); // -i * d
            y[0] = t0 + t2;
            y[1] = t1 + t3;
            y[2] = t0 - t2;
            y[3] = t1 - t3;
        } else {
            const std::size_t radix = R == 0 ? st.radix : R;
            for (std::size_t q = 0; q < radix; ++q) {
                cplx acc = v[0];
                for (std::size_t r = 1, idx = q; r < radix; ++r) {
                    acc += v[r] * st.roots[idx];
                    idx += q;
                    if (idx >= radix) idx -= radix;
                }
                y[q] = acc;
            }
        }
    }

    std::size_t n_;
    std::vector<Stage> stages_;
};

// Chirp-z (Bluestein) transform for lengths with a large prime factor.
class BluesteinPlan {
public:
    explicit BluesteinPlan(std::size_t n)
        : n_(n), m_(next_power_of_two(2 * n - 1)), inner_(m_), chirp_(n), filter_(m_) {
        // k^2 mod 2n keeps the chirp argument small for large k.
        const std::size_t two_n = 2 * n;
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t k2 = (k * k) % two_n;
            chirp_[k] = std::polar(1.0, -kPi * static_cast<double>(k2) / static_cast<double>(n));
        }
        filter_[0] = std::conj(chirp_[0]);
        for (std::size_t k = 1; k < n; ++k) {
            filter_[k] = std::conj(chirp_[k]);
            filter_[m_ - k] = std::conj(chirp_[k]);
        }
        inner_.execute(filter_, false);
    }

    void execute(std::span<cplx> a, bool inverse) const {
        std::vector<cplx> work(m_);
        for (std::size_t k = 0; k < n_; ++k) {
            const cplx x = inverse ? std::conj(a[k]) : a[k];
            work[k] = x * chirp_[k];
        }
        inner_.execute(work, false);
        for (std::size_t k = 0; k < m_; ++k) work[k] *= filter_[k];
        inner_.execute(work, true);
        const double scale = 1.0 / static_cast<double>(m_);
        for (std::size_t k = 0; k < n_; ++k) {
            const cplx y = work[k] * scale * chirp_[k];
            a[k] = inverse ? std::conj(y) : y;
        }
    }

private:
    std::size_t n_;
    std::size_t m_;
    MixedRadixPlan inner_;
    std::vector<cplx> chirp_;
    std::vector<cplx> filter_;
};

class ComplexPlan {
public:
    explicit ComplexPlan(std::size_t n) {
        if (MixedRadixPlan::supports(n))
            direct_ = std::make_unique<MixedRadixPlan>(n);
        else
            bluestein_ = std::make_unique<BluesteinPlan>(n);
    }
    void execute(std::span<cplx> a, bool inverse) const {
        if (direct_)
            direct_->execute(a, inverse);
        else
            bluestein_->execute(a, inverse);
    }

private:
    std::unique_ptr<MixedRadixPlan> direct_;
    std::unique_ptr<BluesteinPlan> bluestein_;
};

// Real transform of even length N computed through one complex transform of length N/2.
struct RealPlan {
    explicit RealPlan(std::size_t n) : twiddle(n / 2 + 1) {
        for (std::size_t k = 0; k <= n / 2; ++k)
            twiddle[k] = std::polar(1.0, -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n));
    }
    std::vector<cplx> twiddle;
};

// Plans are built once per length and never evicted, so returned references stay valid.
template <typename Plan>
const Plan& cached_plan(std::size_t n) {
    static std::mutex mutex;
    static std::unordered_map<std::size_t, std::unique_ptr<Plan>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<Plan>(n);
    return *slot;
}

void check_even_length(std::size_t n, const char* what) {
    if (n < 2 || n % 2 != 0)
        throw InvalidLength(std::string(what) + ": length must be even and >= 2, got " + std::to_string(n));
}

} // namespace

void fft(std::span<cplx> data, bool inverse) {
    if (data.size() <= 1) return;
    cached_plan<ComplexPlan>(data.size()).execute(data, inverse);
}

Spectrum rfft(std::span<const double> x) {
    const std::size_t n = x.size();
    check_even_length(n, "rfft");
    for (double v : x)
        if (!std::isfinite(v)) throw InvalidValue("rfft: non-finite input");

    const std::size_t half = n / 2;
    std::vector<cplx> z(half);
    for (std::size_t i = 0; i < half; ++i) z[i] = {x[2 * i], x[2 * i + 1]};
    fft(z, false);

    const auto& plan = cached_plan<RealPlan>(n);
    Spectrum out{std::vector<cplx>(half + 1), n};
    for (std::size_t k = 0; k <= half; ++k) {
        const cplx zk = z[k % half];
        const cplx zc = std::conj(z[(half - k) % half]);
        const cplx even = 0.5 * (zk + zc);
        const cplx odd = cplx(0.0, -0.5) * (zk - zc);
        out.bins[k] = even + plan.twiddle[k] * odd;
    }
    out.bins[0].imag(0.0);
    out.bins[half].imag(0.0);
    return out;
}

std::vector<double> irfft(const Spectrum& s) {
    const std::size_t n = s.source_len;
    check_even_length(n, "irfft");
    const std::size_t half = n / 2;
    if (s.bins.size() != half + 1)
        throw ShapeError("irfft: expected " + std::to_string(half + 1) + " bins for length " + std::to_string(n) +
                         ", got " + std::to_string(s.bins.size()));

    std::vector<cplx> bins = s.bins;
    bins[0].imag(0.0);
    bins[half].imag(0.0);

    const auto& plan = cached_plan<RealPlan>(n);
    std::vector<cplx> z(half);
    for (std::size_t k = 0; k < half; ++k) {
        const cplx xk = bins[k];
        const cplx xc = std::conj(bins[half - k]);
        const cplx even = 0.5 * (xk + xc);
        const cplx odd = 0.5 * (xk - xc) * std::conj(plan.twiddle[k]);
        z[k] = even + cplx(0.0, 1.0) * odd;
    }
    fft(z, true);

    std::vector<double> out(n);
    const double scale = 1.0 / static_cast<double>(half);
    for (std::size_t i = 0; i < half; ++i) {
        out[2 * i] = z[i].real() * scale;
        out[2 * i + 1] = z[i].imag() * scale;
    }
    return out;
}

std::size_t base_frequency(std::size_t window_len, std::size_t period) {
    if (period == 0) throw InvalidArgument("base_frequency: period must be >= 1");
    if (window_len == 0) throw InvalidArgument("base_frequency: window length must be >= 1");
    return window_len / period;
}

std::size_t cutoff_bins(std::size_t window_len, std::size_t period, std::size_t harmonic) {
    if (harmonic == 0) throw InvalidArgument("cutoff_bins: harmonic order must be >= 1");
    const std::size_t k = harmonic * (base_frequency(window_len, period) + 1) + 10;
    return std::min(k, window_len / 2);
}

TruncatedSpectrum truncate_spectrum(const Spectrum& s, std::size_t k_cut) {
    if (s.bins.empty() || k_cut > s.bins.size() - 1)
        throw ShapeError("truncate_spectrum: k_cut " + std::to_string(k_cut) + " exceeds the " +
                         std::to_string(s.bins.empty() ? 0 : s.bins.size() - 1) + " available non-DC bins");
    TruncatedSpectrum out;
    out.dc = s.bins[0];
    out.kept.assign(s.bins.begin() + 1, s.bins.begin() + 1 + static_cast<std::ptrdiff_t>(k_cut));
    return out;
}

Spectrum pad_and_restore_dc(std::span<const cplx> y, std::size_t out_len) {
    if (out_len == 0 || out_len % 2 != 0)
        throw InvalidLength("pad_and_restore_dc: output length must be even and >= 2, got " + std::to_string(out_len));
    if (y.size() > out_len / 2)
        throw ShapeError("pad_and_restore_dc: " + std::to_string(y.size()) + " bins do not fit output length " +
                         std::to_string(out_len));
    Spectrum out{std::vector<cplx>(out_len / 2 + 1), out_len};
    std::copy(y.begin(), y.end(), out.bins.begin() + 1);
    return out;
}

Spectrum time_shift_spectrum(const Spectrum& s, std::int64_t shift) {
    Spectrum out = s;
    const auto n = static_cast<std::int64_t>(s.source_len);
    if (n == 0) return out;
    const std::int64_t tau = ((shift % n) + n) % n;
    for (std::size_t k = 0; k < out.bins.size(); ++k) {
        // (k * tau) mod N keeps the angle exact for large shifts.
        const std::int64_t kt = (static_cast<std::int64_t>(k) * tau) % n;
        out.bins[k] *= std::polar(1.0, -2.0 * kPi * static_cast<double>(kt) / static_cast<double>(n));
    }
    return out;
}

PolarComponent polar(cplx z) {
    if (z == cplx(0.0, 0.0)) return {0.0, 0.0};
    double phase = std::atan2(z.imag(), z.real());
    if (phase <= -kPi) phase = kPi;
    return {std::abs(z), phase};
}

} // namespace fits::spectral
