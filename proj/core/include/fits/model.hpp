#pragma once

#include "fits/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace fits::model {

enum class Supervision : std::uint8_t {
    ForecastOnly,        ///< loss on the last H output steps
    BackcastAndForecast, ///< loss on all L_out output steps
};

enum class Task : std::uint8_t {
    Forecast,    ///< input is the look-back window, output is look-back + horizon
    Reconstruct, ///< input is a downsampled window, output is the full window
};

/// Shape of one FITS model. Build through the factories; they derive the bin counts.
struct FitsConfig {
    std::size_t input_len = 0;  ///< L_in
    std::size_t output_len = 0; ///< L_out
    std::size_t period = 0;     ///< base period P in timesteps (unused without a filter)
    std::size_t harmonic = 0;   ///< harmonic order of the cutoff; 0 = no filter
    std::size_t k_cut = 0;      ///< kept non-DC input bins (= n_in)
    std::size_t n_in = 0;
    std::size_t n_out = 0;
    Supervision supervision = Supervision::BackcastAndForecast;
    Task task = Task::Forecast;
    std::size_t channels = 1;

    /// Look-back `lookback`, horizon `horizon`: L_out = lookback + horizon.
    static FitsConfig forecasting(std::size_t lookback, std::size_t horizon, std::size_t period,
                                  std::size_t harmonic, Supervision supervision, std::size_t channels = 1);

    /// Reconstruct a `window`-step segment from every `factor`-th sample. No filter.
    static FitsConfig reconstruction(std::size_t window, std::size_t factor, std::size_t channels = 1);

    /// Generic constructor; validates and derives k_cut, n_in, n_out.
    static FitsConfig make(std::size_t input_len, std::size_t output_len, std::size_t period, std::size_t harmonic,
                           Supervision supervision, Task task, std::size_t channels);

    /// Forecast horizon H (0 for reconstruction).
    std::size_t horizon() const noexcept { return task == Task::Forecast ? output_len - input_len : 0; }

    /// Interpolation rate as the unreduced ratio (L_out, L_in).
    std::pair<std::size_t, std::size_t> eta() const noexcept { return {output_len, input_len}; }

    /// Rows a training target must have: L_out for backcast+forecast, H for forecast-only.
    std::size_t target_len() const noexcept {
        return supervision == Supervision::BackcastAndForecast ? output_len : horizon();
    }

    /// Throws InvalidArgument / InvalidLength if fields are inconsistent.
    void validate() const;

    bool operator==(const FitsConfig&) const = default;
};

/// Y = X W + b with W of shape n_in x n_out. Weights and bias live in one contiguous
/// buffer (W row-major, then b), so the layer can also be viewed as 2 * count() reals.
class ComplexLinear {
public:
    ComplexLinear() = default;
    ComplexLinear(std::size_t n_in, std::size_t n_out);

    std::size_t n_in() const noexcept { return n_in_; }
    std::size_t n_out() const noexcept { return n_out_; }

    cplx& weight(std::size_t i, std::size_t o) noexcept { return params_[i * n_out_ + o]; }
    const cplx& weight(std::size_t i, std::size_t o) const noexcept { return params_[i * n_out_ + o]; }
    cplx& bias(std::size_t o) noexcept { return params_[n_in_ * n_out_ + o]; }
    const cplx& bias(std::size_t o) const noexcept { return params_[n_in_ * n_out_ + o]; }

    std::span<cplx> weights() noexcept { return {params_.data(), n_in_ * n_out_}; }
    std::span<const cplx> weights() const noexcept { return {params_.data(), n_in_ * n_out_}; }
    std::span<cplx> biases() noexcept { return {params_.data() + n_in_ * n_out_, n_out_}; }
    std::span<const cplx> biases() const noexcept { return {params_.data() + n_in_ * n_out_, n_out_}; }

    /// Complex entry count n_in * n_out + n_out.
    std::size_t count() const noexcept { return params_.size(); }

    /// Interleaved (re, im) view of every parameter.
    std::span<double> reals() noexcept;
    std::span<const double> reals() const noexcept;

    bool operator==(const ComplexLinear&) const = default;

private:
    std::size_t n_in_ = 0;
    std::size_t n_out_ = 0;
    std::vector<cplx> params_;
};

struct RinState {
    std::vector<double> mean;
    std::vector<double> std;
    double eps = 1e-5;
};

inline constexpr double kRinEps = 1e-5;

/// Per-channel instance normalization over the window's rows (population std, floored at eps).
std::pair<RealMatrix, RinState> rin_normalize(const RealMatrix& x, double eps = kRinEps);

RealMatrix rin_denormalize(const RealMatrix& y, const RinState& state);

/// Batched complex affine map; X has one row per instance.
ComplexMatrix complex_linear_forward(const ComplexMatrix& x, const ComplexLinear& layer);

/// Full pipeline: RIN, rFFT, low-pass, complex linear, zero-pad, irFFT, iRIN.
/// x is L_in x C; the result is L_out x C. The layer is shared by all channels.
RealMatrix fits_forward(const RealMatrix& x, const FitsConfig& cfg, const ComplexLinear& layer);

struct Gradient {
    double loss = 0.0;   ///< MSE over the supervised region
    ComplexLinear grad;  ///< d loss / d Re + i * d loss / d Im, per parameter
};

/// Loss and exact parameter gradient for a batch of (input, target) pairs.
/// Targets have cfg.target_len() rows.
Gradient fits_backward(std::span<const RealMatrix> inputs, std::span<const RealMatrix> targets,
                       const FitsConfig& cfg, const ComplexLinear& layer);

/// Weights uniform in [-1/sqrt(n_in), 1/sqrt(n_in)] (real and imaginary independently), bias zero.
ComplexLinear init_params(const FitsConfig& cfg, std::uint64_t seed);

struct ParamCount {
    std::size_t complex_entries = 0;
    std::size_t real_scalars = 0;
};

ParamCount param_count(const FitsConfig& cfg);

} // namespace fits::model
