#include "fits/checkpoint.hpp"

#include "fits/error.hpp"

#include <bit>
#include <cstdint>
#include <fstream>

namespace fits::model {

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(bytes, 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw ParseError("checkpoint: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return v;
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

} // namespace

void save_checkpoint(const std::filesystem::path& path, const FitsConfig& cfg, const ComplexLinear& layer) {
    if (layer.n_in() != cfg.n_in || layer.n_out() != cfg.n_out)
        throw ShapeError("save_checkpoint: layer does not match config");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("save_checkpoint: cannot open " + path.string());
    out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
    for (std::uint64_t v : {std::uint64_t{cfg.input_len}, std::uint64_t{cfg.output_len}, std::uint64_t{cfg.period},
                            std::uint64_t{cfg.harmonic}, std::uint64_t{cfg.k_cut}, std::uint64_t{cfg.n_in},
                            std::uint64_t{cfg.n_out},
                            std::uint64_t{cfg.supervision == Supervision::BackcastAndForecast ? 1u : 0u},
                            std::uint64_t{cfg.task == Task::Reconstruct ? 1u : 0u}, std::uint64_t{cfg.channels}})
        put_u64(out, v);
    for (double v : layer.reals()) put_f64(out, v);
    if (!out) throw Error("save_checkpoint: write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("load_checkpoint: cannot open " + path.string());
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kCheckpointMagic)
        throw ParseError("load_checkpoint: bad magic header in " + path.string());

    std::uint64_t fields[10];
    for (auto& f : fields) f = get_u64(in);
    if (fields[7] > 1 || fields[8] > 1) throw ParseError("load_checkpoint: bad enum field");

    const auto supervision = fields[7] == 1 ? Supervision::BackcastAndForecast : Supervision::ForecastOnly;
    const auto task = fields[8] == 1 ? Task::Reconstruct : Task::Forecast;
    FitsConfig cfg = FitsConfig::make(fields[0], fields[1], fields[2], fields[3], supervision, task, fields[9]);
    if (cfg.k_cut != fields[4] || cfg.n_in != fields[5] || cfg.n_out != fields[6])
        throw ParseError("load_checkpoint: stored bin counts disagree with the recomputed config");

    Checkpoint ck{cfg, ComplexLinear(cfg.n_in, cfg.n_out)};
    for (double& v : ck.layer.reals()) v = get_f64(in);
    char extra;
    if (in.read(&extra, 1)) throw ParseError("load_checkpoint: trailing bytes after parameters");
    return ck;
}

} // namespace fits::model
