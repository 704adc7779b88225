#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

#include "nac2ts/errors.hpp"

namespace nac2ts {

/// Deterministic random stream. mt19937_64 output is pinned by the standard,
/// and we derive doubles from the raw bits ourselves, so identical keys give
/// bit-identical draw sequences on every platform.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : engine_(mix(mix(seed))) {}

    /// Keyed stream: one experiment fans out into per-run streams that never collide.
    RandomStream(std::uint64_t experiment_seed, std::uint64_t run_seed)
        : engine_(mix(mix(experiment_seed) ^ mix(~run_seed))) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1), 53 mantissa bits.
    double next_uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (two uniforms per pair, cached second value).
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_uniform();
        double u2 = next_uniform();
        // Guard against log(0); u1 is in [0,1) so flip to (0,1].
        double r = std::sqrt(-2.0 * std::log1p(-u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Inverse-CDF draw from non-negative weights using a single uniform.
    /// Weights need not be normalized. Throws DomainError on a negative weight
    /// or an all-zero vector.
    int sample_categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) {
            if (w < 0.0 || !std::isfinite(w))
                throw DomainError("sample_categorical: weights must be finite and non-negative");
            total += w;
        }
        if (total <= 0.0) throw DomainError("sample_categorical: all weights are zero");
        double u = next_uniform() * total;
        double cum = 0.0;
        int last_positive = 0;
        for (int i = 0; i < static_cast<int>(weights.size()); ++i) {
            if (weights[i] > 0.0) last_positive = i;
            cum += weights[i];
            if (u < cum) return i;
        }
        // Rounding pushed u past the accumulated total; return the last
        // index that carries mass.
        return last_positive;
    }

  private:
    // splitmix64 finalizer; decorrelates nearby keys.
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace nac2ts
