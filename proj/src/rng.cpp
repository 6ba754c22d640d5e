#include "nsduel/rng.hpp"

namespace nsduel::rng {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_key(std::string_view name) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(mix64(master) ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

Stream::Stream(std::uint64_t seed, std::string_view name)
    : seed_(seed), key_(stream_key(name)) {}

std::uint64_t Stream::bits(std::uint64_t c0, std::uint64_t c1, std::uint64_t c2,
                           std::uint64_t c3) const {
    std::uint64_t h = mix64(seed_ ^ mix64(key_));
    h = mix64(h ^ c0);
    h = mix64(h ^ c1);
    h = mix64(h ^ c2);
    h = mix64(h ^ c3);
    return h;
}

double Stream::uniform(std::uint64_t c0, std::uint64_t c1, std::uint64_t c2,
                       std::uint64_t c3) const {
    return static_cast<double>(bits(c0, c1, c2, c3) >> 11) * 0x1.0p-53;
}

Streams Streams::from_seed(std::uint64_t seed) {
    return Streams{Stream(seed, "environment"), Stream(seed, "action"),
                   Stream(seed, "replay")};
}

}  // namespace nsduel::rng
