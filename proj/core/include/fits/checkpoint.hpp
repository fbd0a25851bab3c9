#pragma once

#include "fits/model.hpp"

#include <array>
#include <filesystem>

namespace fits::model {

/// On-disk layout (all little-endian):
///   8 bytes   magic "FITSCK01"
///   10 x u64  input_len, output_len, period, harmonic, k_cut, n_in, n_out,
///             supervision (0 = forecast-only, 1 = backcast+forecast),
///             task (0 = forecast, 1 = reconstruct), channels
///   n_in*n_out x (f64 re, f64 im)   weights, row-major
///   n_out x (f64 re, f64 im)        bias
inline constexpr std::array<char, 8> kCheckpointMagic = {'F', 'I', 'T', 'S', 'C', 'K', '0', '1'};

struct Checkpoint {
    FitsConfig config;
    ComplexLinear layer;
};

void save_checkpoint(const std::filesystem::path& path, const FitsConfig& cfg, const ComplexLinear& layer);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace fits::model
