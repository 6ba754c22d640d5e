#pragma once

// Environment files: {"k": K, "horizon": T, "segments": [{"len": n, "matrix": [K*K floats, row-major]}]}.
// Doubles are written in shortest round-trip form, so files reload bit-exactly.

#include <filesystem>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "nsduel/preference.hpp"

namespace nsduel::io {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

nlohmann::json env_to_json(const PreferenceSequence& seq);
/// Throws FormatError with a path-qualified message ("segments[2].matrix: ...").
PreferenceSequence env_from_json(const nlohmann::json& j);

void write_env(const std::filesystem::path& path, const PreferenceSequence& seq);
PreferenceSequence read_env(const std::filesystem::path& path);

}  // namespace nsduel::io
