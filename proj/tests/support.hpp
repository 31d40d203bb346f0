#pragma once

#include <filesystem>
#include <string>

#include "ludobench/bank.hpp"

namespace lbtest {

inline std::filesystem::path source_dir() { return LUDOBENCH_SOURCE_DIR; }
inline std::filesystem::path default_bank_path() { return source_dir() / "data" / "default_bank.json"; }

inline const ludobench::Bank& default_bank() {
    static const ludobench::Bank bank = ludobench::load_bank(default_bank_path());
    return bank;
}

/// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("ludobench-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace lbtest
