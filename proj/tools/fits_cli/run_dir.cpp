#include "fits_cli/run_dir.hpp"

#include "fits/error.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <system_error>

namespace fits::cli {

namespace fs = std::filesystem;

namespace {

std::string utc_stamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::array<char, 32> buf{};
    std::strftime(buf.data(), buf.size(), "%Y%m%d-%H%M%S", &tm);
    return buf.data();
}

} // namespace

RunDirectory::RunDirectory(const fs::path& out_root, std::string_view command)
    : root_(out_root), base_name_(std::string(command) + "-" + utc_stamp()) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec) throw Error("cannot create output directory " + root_.string() + ": " + ec.message());
    for (std::size_t k = 0;; ++k) {
        work_ = root_ / ("." + base_name_ + (k ? "-" + std::to_string(k) : "") + ".partial");
        if (fs::create_directory(work_, ec)) break;
        if (ec) throw Error("cannot create " + work_.string() + ": " + ec.message());
    }
}

fs::path RunDirectory::commit() {
    if (committed_) return work_;
    for (std::size_t k = 0;; ++k) {
        const fs::path target = root_ / (base_name_ + (k ? "-" + std::to_string(k) : ""));
        // rename() onto an existing non-empty directory fails, but an empty one would be replaced.
        if (fs::exists(target)) continue;
        std::error_code ec;
        fs::rename(work_, target, ec);
        if (!ec) {
            work_ = target;
            committed_ = true;
            return work_;
        }
        if (!fs::exists(target)) throw Error("cannot finalize run directory " + target.string() + ": " + ec.message());
    }
}

void write_text(const fs::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.close();
    if (!out) throw Error("failed to write " + path.string());
}

std::string format_double(double v) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw Error("cannot format number");
    return std::string(buf.data(), ptr);
}

} // namespace fits::cli
