#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace vineport {

/// Deterministic random stream. All sampling in the library goes through this
/// type with an explicit seed; there is no global generator.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform draw on the open interval (0, 1), 53-bit resolution.
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal();
    /// Gamma(shape, 1) via Marsaglia-Tsang.
    double gamma(double shape);
    /// Uniform index in [0, n).
    std::size_t index(std::size_t n);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Derive an independent stream seed from a parent seed and a stage label.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label, std::uint64_t index);

} // namespace vineport
