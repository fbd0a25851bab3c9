#include "fits/model.hpp"

#include "fits/error.hpp"
#include "fits/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace fits::model {

namespace {

struct ForwardTrace {
    RinState rin;
    ComplexMatrix spectra;  // channels x n_in
    RealMatrix normalized;  // L_out x channels, before iRIN
};

void check_input(const RealMatrix& x, const FitsConfig& cfg, const ComplexLinear& layer) {
    if (x.rows() != cfg.input_len)
        throw ShapeError("fits: input has " + std::to_string(x.rows()) + " rows, config expects " +
                         std::to_string(cfg.input_len));
    if (x.cols() == 0) throw ShapeError("fits: input has no channels");
    if (layer.n_in() != cfg.n_in || layer.n_out() != cfg.n_out)
        throw ShapeError("fits: layer is " + std::to_string(layer.n_in()) + "x" + std::to_string(layer.n_out()) +
                         ", config expects " + std::to_string(cfg.n_in) + "x" + std::to_string(cfg.n_out));
}

ForwardTrace forward_trace(const RealMatrix& x, const FitsConfig& cfg, const ComplexLinear& layer) {
    check_input(x, cfg, layer);
    const std::size_t channels = x.cols();
    auto [normalized_in, rin] = rin_normalize(x);

    ComplexMatrix spectra(channels, cfg.n_in);
    for (std::size_t c = 0; c < channels; ++c) {
        const auto column = normalized_in.column(c);
        const auto truncated = spectral::truncate_spectrum(spectral::rfft(column), cfg.k_cut);
        std::copy(truncated.kept.begin(), truncated.kept.end(), spectra.row(c).begin());
    }

    const ComplexMatrix interpolated = complex_linear_forward(spectra, layer);

    RealMatrix normalized(cfg.output_len, channels);
    for (std::size_t c = 0; c < channels; ++c) {
        const auto out = spectral::irfft(spectral::pad_and_restore_dc(interpolated.row(c), cfg.output_len));
        normalized.set_column(c, out);
    }
    return {std::move(rin), std::move(spectra), std::move(normalized)};
}

} // namespace

FitsConfig FitsConfig::make(std::size_t input_len, std::size_t output_len, std::size_t period, std::size_t harmonic,
                            Supervision supervision, Task task, std::size_t channels) {
    FitsConfig cfg;
    cfg.input_len = input_len;
    cfg.output_len = output_len;
    cfg.period = period;
    cfg.harmonic = harmonic;
    cfg.supervision = supervision;
    cfg.task = task;
    cfg.channels = channels;
    if (input_len < 2 || input_len % 2 != 0)
        throw InvalidLength("config: input length must be even and >= 2, got " + std::to_string(input_len));
    if (output_len < 2 || output_len % 2 != 0)
        throw InvalidLength("config: output length must be even and >= 2, got " + std::to_string(output_len));
    cfg.k_cut = harmonic == 0 ? input_len / 2 : spectral::cutoff_bins(input_len, period, harmonic);
    cfg.n_in = cfg.k_cut;
    cfg.n_out = std::min(cfg.k_cut * output_len / input_len, output_len / 2);
    cfg.validate();
    return cfg;
}

FitsConfig FitsConfig::forecasting(std::size_t lookback, std::size_t horizon, std::size_t period,
                                   std::size_t harmonic, Supervision supervision, std::size_t channels) {
    if (horizon == 0) throw InvalidArgument("config: forecast horizon must be >= 1");
    return make(lookback, lookback + horizon, period, harmonic, supervision, Task::Forecast, channels);
}

FitsConfig FitsConfig::reconstruction(std::size_t window, std::size_t factor, std::size_t channels) {
    if (factor == 0 || window % factor != 0)
        throw InvalidArgument("config: window " + std::to_string(window) + " is not divisible by factor " +
                              std::to_string(factor));
    return make(window / factor, window, 0, 0, Supervision::BackcastAndForecast, Task::Reconstruct, channels);
}

void FitsConfig::validate() const {
    if (input_len < 2 || input_len % 2 != 0 || output_len < 2 || output_len % 2 != 0)
        throw InvalidLength("config: input and output lengths must be even and >= 2");
    if (channels == 0) throw InvalidArgument("config: channels must be >= 1");
    if (harmonic != 0 && period == 0) throw InvalidArgument("config: a harmonic cutoff needs period >= 1");
    if (task == Task::Forecast && output_len <= input_len)
        throw InvalidArgument("config: forecasting needs output length > input length");
    if (task == Task::Reconstruct && supervision != Supervision::BackcastAndForecast)
        throw InvalidArgument("config: reconstruction is supervised on the whole window");
    if (n_in != k_cut || k_cut == 0 || k_cut > input_len / 2)
        throw InvalidArgument("config: inconsistent cutoff bin count");
    if (n_out == 0 || n_out > output_len / 2 || n_out != std::min(k_cut * output_len / input_len, output_len / 2))
        throw InvalidArgument("config: inconsistent output bin count");
}

ComplexLinear::ComplexLinear(std::size_t n_in, std::size_t n_out)
    : n_in_(n_in), n_out_(n_out), params_(n_in * n_out + n_out) {}

std::span<double> ComplexLinear::reals() noexcept {
    return {reinterpret_cast<double*>(params_.data()), 2 * params_.size()};
}

std::span<const double> ComplexLinear::reals() const noexcept {
    return {reinterpret_cast<const double*>(params_.data()), 2 * params_.size()};
}

std::pair<RealMatrix, RinState> rin_normalize(const RealMatrix& x, double eps) {
    if (x.rows() < 2) throw ShapeError("rin_normalize: need at least 2 rows");
    for (double v : x.data())
        if (!std::isfinite(v)) throw InvalidValue("rin_normalize: non-finite input");

    const std::size_t rows = x.rows();
    const std::size_t channels = x.cols();
    RinState state{std::vector<double>(channels, 0.0), std::vector<double>(channels, 0.0), eps};
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < channels; ++c) state.mean[c] += x(r, c);
    for (auto& m : state.mean) m /= static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < channels; ++c) {
            const double d = x(r, c) - state.mean[c];
            state.std[c] += d * d;
        }
    for (auto& s : state.std) s = std::max(std::sqrt(s / static_cast<double>(rows)), eps);

    RealMatrix out(rows, channels);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < channels; ++c) out(r, c) = (x(r, c) - state.mean[c]) / state.std[c];
    return {std::move(out), std::move(state)};
}

RealMatrix rin_denormalize(const RealMatrix& y, const RinState& state) {
    if (y.cols() != state.mean.size() || y.cols() != state.std.size())
        throw ShapeError("rin_denormalize: " + std::to_string(y.cols()) + " channels but state has " +
                         std::to_string(state.mean.size()));
    RealMatrix out(y.rows(), y.cols());
    for (std::size_t r = 0; r < y.rows(); ++r)
        for (std::size_t c = 0; c < y.cols(); ++c) out(r, c) = y(r, c) * state.std[c] + state.mean[c];
    return out;
}

ComplexMatrix complex_linear_forward(const ComplexMatrix& x, const ComplexLinear& layer) {
    if (x.cols() != layer.n_in())
        throw ShapeError("complex_linear_forward: input has " + std::to_string(x.cols()) + " columns, layer expects " +
                         std::to_string(layer.n_in()));
    const std::size_t n_out = layer.n_out();
    ComplexMatrix y(x.rows(), n_out);
    for (std::size_t b = 0; b < x.rows(); ++b) {
        auto out = y.row(b);
        std::copy(layer.biases().begin(), layer.biases().end(), out.begin());
        for (std::size_t i = 0; i < layer.n_in(); ++i) {
            const cplx xi = x(b, i);
            const cplx* w = &layer.weight(i, 0);
            for (std::size_t o = 0; o < n_out; ++o) out[o] += xi * w[o];
        }
    }
    return y;
}

RealMatrix fits_forward(const RealMatrix& x, const FitsConfig& cfg, const ComplexLinear& layer) {
    auto trace = forward_trace(x, cfg, layer);
    return rin_denormalize(trace.normalized, trace.rin);
}

Gradient fits_backward(std::span<const RealMatrix> inputs, std::span<const RealMatrix> targets,
                       const FitsConfig& cfg, const ComplexLinear& layer) {
    if (inputs.size() != targets.size())
        throw ShapeError("fits_backward: " + std::to_string(inputs.size()) + " inputs but " +
                         std::to_string(targets.size()) + " targets");
    if (inputs.empty()) throw ShapeError("fits_backward: empty batch");

    const std::size_t target_len = cfg.target_len();
    const std::size_t offset = cfg.output_len - target_len;
    const std::size_t half = cfg.output_len / 2;
    const std::size_t channels = inputs.front().cols();
    const double count = static_cast<double>(inputs.size() * target_len * channels);

    Gradient result{0.0, ComplexLinear(cfg.n_in, cfg.n_out)};
    std::vector<double> grad_time(cfg.output_len);
    ComplexMatrix bin_grad(channels, cfg.n_out);

    for (std::size_t b = 0; b < inputs.size(); ++b) {
        const auto& target = targets[b];
        if (inputs[b].cols() != channels || target.cols() != channels || target.rows() != target_len)
            throw ShapeError("fits_backward: target must be " + std::to_string(target_len) + "x" +
                             std::to_string(channels) + ", got " + std::to_string(target.rows()) + "x" +
                             std::to_string(target.cols()));
        const auto trace = forward_trace(inputs[b], cfg, layer);

        auto db = result.grad.biases();
        for (std::size_t c = 0; c < channels; ++c) {
            const double scale = trace.rin.std[c];
            const double mean = trace.rin.mean[c];
            std::fill(grad_time.begin(), grad_time.end(), 0.0);
            for (std::size_t t = 0; t < target_len; ++t) {
                const double pred = trace.normalized(offset + t, c) * scale + mean;
                const double residual = pred - target(t, c);
                result.loss += residual * residual;
                grad_time[offset + t] = 2.0 * residual * scale / count;
            }

            // Adjoint of irfft restricted to the output bins 1..n_out: conjugate-symmetric
            // bins count twice, the Nyquist bin once, all scaled by 1/N.
            const auto back = spectral::rfft(grad_time);
            auto g = bin_grad.row(c);
            for (std::size_t m = 0; m < cfg.n_out; ++m) {
                const std::size_t bin = m + 1;
                const double weight = (bin == half ? 1.0 : 2.0) / static_cast<double>(cfg.output_len);
                g[m] = weight * back.bins[bin];
                db[m] += g[m];
            }
        }

        // Weight rows outermost so each gradient row is touched once per window.
        for (std::size_t i = 0; i < cfg.n_in; ++i) {
            cplx* dw = &result.grad.weight(i, 0);
            for (std::size_t c = 0; c < channels; ++c) {
                const cplx xi = std::conj(trace.spectra(c, i));
                const cplx* g = bin_grad.row(c).data();
                for (std::size_t o = 0; o < cfg.n_out; ++o) dw[o] += xi * g[o];
            }
        }
    }
    result.loss /= count;
    return result;
}

ComplexLinear init_params(const FitsConfig& cfg, std::uint64_t seed) {
    if (cfg.n_in == 0 || cfg.n_out == 0) throw InvalidArgument("init_params: empty layer");
    ComplexLinear layer(cfg.n_in, cfg.n_out);
    std::mt19937_64 rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.n_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& w : layer.weights()) {
        const double re = dist(rng);
        const double im = dist(rng);
        w = {re, im};
    }
    return layer;
}

ParamCount param_count(const FitsConfig& cfg) {
    const std::size_t entries = cfg.n_in * cfg.n_out + cfg.n_out;
    return {entries, 2 * entries};
}

} // namespace fits::model
