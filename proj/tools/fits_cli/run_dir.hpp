#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace fits::cli {

/// Output directory of one command invocation. Files are written into a hidden partial
/// directory that is renamed to `<command>-YYYYmmdd-HHMMSS[-k]` (UTC) by commit(). An
/// uncommitted directory is left in place for inspection.
class RunDirectory {
public:
    RunDirectory(const std::filesystem::path& out_root, std::string_view command);

    const std::filesystem::path& path() const noexcept { return work_; }
    std::filesystem::path file(std::string_view name) const { return work_ / name; }

    /// Moves the run to its final name and returns it. Existing runs are never replaced.
    std::filesystem::path commit();

private:
    std::filesystem::path root_;
    std::string base_name_;
    std::filesystem::path work_;
    bool committed_ = false;
};

/// Writes a file completely or throws.
void write_text(const std::filesystem::path& path, std::string_view text);

/// Shortest text that reads back to the same double.
std::string format_double(double v);

} // namespace fits::cli
