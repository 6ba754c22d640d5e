#include "nsduel/env_io.hpp"

#include <fstream>

namespace nsduel::io {

using nlohmann::json;

json env_to_json(const PreferenceSequence& seq) {
    json segs = json::array();
    for (const auto& s : seq.segments()) {
        segs.push_back({{"len", s.length}, {"matrix", s.matrix.data()}});
    }
    return {{"k", seq.k()}, {"horizon", seq.horizon()}, {"segments", std::move(segs)}};
}

namespace {

std::size_t get_count(const json& j, const char* key, const std::string& path) {
    if (!j.contains(key)) throw FormatError(path + key + ": missing field");
    const auto& v = j.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() > 0)) {
        throw FormatError(path + key + ": expected a positive integer");
    }
    return v.get<std::size_t>();
}

}  // namespace

PreferenceSequence env_from_json(const json& j) {
    if (!j.is_object()) throw FormatError("environment: expected a JSON object");
    const std::size_t k = get_count(j, "k", "");
    const std::size_t horizon = get_count(j, "horizon", "");
    if (!j.contains("segments") || !j.at("segments").is_array() || j.at("segments").empty()) {
        throw FormatError("segments: expected a non-empty array");
    }
    std::vector<std::pair<std::size_t, PreferenceMatrix>> segs;
    std::size_t total = 0;
    const auto& arr = j.at("segments");
    for (std::size_t s = 0; s < arr.size(); ++s) {
        const std::string path = "segments[" + std::to_string(s) + "].";
        const std::size_t len = get_count(arr[s], "len", path);
        if (!arr[s].contains("matrix") || !arr[s].at("matrix").is_array()) {
            throw FormatError(path + "matrix: expected an array of " + std::to_string(k * k) + " numbers");
        }
        std::vector<double> flat;
        for (const auto& v : arr[s].at("matrix")) {
            if (!v.is_number()) throw FormatError(path + "matrix: non-numeric entry");
            flat.push_back(v.get<double>());
        }
        if (flat.size() != k * k) {
            throw FormatError(path + "matrix: expected " + std::to_string(k * k) + " entries, got " +
                              std::to_string(flat.size()));
        }
        try {
            segs.emplace_back(len, PreferenceMatrix(k, std::move(flat)));
        } catch (const InvalidMatrix& e) {
            throw FormatError(path + "matrix: " + e.what());
        }
        total += len;
    }
    if (total != horizon) {
        throw FormatError("horizon: segment lengths sum to " + std::to_string(total) + ", not " +
                          std::to_string(horizon));
    }
    return PreferenceSequence::piecewise(std::move(segs));
}

void write_env(const std::filesystem::path& path, const PreferenceSequence& seq) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << env_to_json(seq).dump(1) << '\n';
}

PreferenceSequence read_env(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open environment file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return env_from_json(j);
}

}  // namespace nsduel::io
