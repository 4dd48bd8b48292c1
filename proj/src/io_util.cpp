#include "harvestkit/io_util.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <system_error>

#include "harvestkit/error.hpp"

namespace hk {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoError, "cannot open for reading: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) raise(ErrorCode::IoError, "read failed: " + path);
    return buf.str();
}

void atomic_write_file(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
    // Temp name stays in the target directory so the rename cannot cross
    // filesystems.
    fs::path tmp = dir / (target.filename().string() + ".tmp." + std::to_string(
                              static_cast<unsigned long long>(
                                  reinterpret_cast<std::uintptr_t>(&contents)) ^
                              static_cast<unsigned long long>(
                                  std::hash<std::string>{}(path))));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) raise(ErrorCode::IoError, "cannot open for writing: " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            raise(ErrorCode::IoError, "write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        raise(ErrorCode::IoError, "rename into place failed: " + path);
    }
}

}  // namespace hk
