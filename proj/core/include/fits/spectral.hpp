#pragma once

#include "fits/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

/// Real-input DFTs and the fixed spectral maps around the trainable layer.
///
/// Convention: the forward transform is unnormalized,
///     X[k] = sum_t x[t] exp(-2 pi i k t / N),
/// and the inverse carries the 1/N factor. Only even lengths are accepted.
namespace fits::spectral {

/// Non-redundant half spectrum of a real signal of length `source_len`.
/// A full spectrum has source_len/2 + 1 bins (DC through Nyquist).
struct Spectrum {
    std::vector<cplx> bins;
    std::size_t source_len = 0;
};

struct PolarComponent {
    double amplitude = 0.0;
    double phase = 0.0; ///< radians in (-pi, pi]
};

struct TruncatedSpectrum {
    cplx dc;
    std::vector<cplx> kept; ///< bins 1..k_cut
};

/// In-place complex DFT of any length (radix-2 for powers of two, Bluestein otherwise).
/// Unnormalized in both directions; `inverse` flips the exponent sign.
void fft(std::span<cplx> data, bool inverse = false);

Spectrum rfft(std::span<const double> x);

/// Exact inverse of rfft. Imaginary parts of the DC and Nyquist bins are ignored.
std::vector<double> irfft(const Spectrum& s);

/// Bin index of the dominant period P inside a window of length L: floor(L / P).
std::size_t base_frequency(std::size_t window_len, std::size_t period);

/// Number of non-DC bins kept by the low-pass filter placed at the n-th harmonic:
/// n * (floor(L/P) + 1) + 10, clamped to floor(L/2).
std::size_t cutoff_bins(std::size_t window_len, std::size_t period, std::size_t harmonic);

/// Splits off the DC bin and keeps bins 1..k_cut.
TruncatedSpectrum truncate_spectrum(const Spectrum& s, std::size_t k_cut);

/// Builds the length-out_len half spectrum [0, y..., 0, ..., 0].
Spectrum pad_and_restore_dc(std::span<const cplx> y, std::size_t out_len);

/// Spectrum of the signal circularly delayed by `shift` samples.
Spectrum time_shift_spectrum(const Spectrum& s, std::int64_t shift);

/// Amplitude/phase decomposition. Zero maps to (0, 0).
PolarComponent polar(cplx z);

} // namespace fits::spectral
