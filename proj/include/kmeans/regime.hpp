#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace kmeans {

enum class Regime : std::uint8_t { Single, Multi, GpuMulti };

std::string_view to_string(Regime r);
std::optional<Regime> parse_regime(std::string_view text);

// Sample-count thresholds for the regime bands.
inline constexpr std::size_t kMultiMinSamples = 10000;
inline constexpr std::size_t kGpuMinSamples = 100001;

class RegimeSet {
public:
    constexpr RegimeSet() = default;
    constexpr RegimeSet(std::initializer_list<Regime> regimes) {
        for (Regime r : regimes) insert(r);
    }

    constexpr void insert(Regime r) { bits_ |= bit(r); }
    constexpr bool contains(Regime r) const { return (bits_ & bit(r)) != 0; }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr bool is_subset_of(RegimeSet other) const { return (bits_ & ~other.bits_) == 0; }

    std::string to_string() const;

    friend constexpr bool operator==(RegimeSet, RegimeSet) = default;

private:
    static constexpr std::uint8_t bit(Regime r) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(r)); }
    std::uint8_t bits_ = 0;
};

struct RegimePlan {
    Regime regime = Regime::Single;
    std::size_t n_workers = 1;
    RegimeSet allowed;
};

// `Multi` caps automatic selection below the accelerator regime.
enum class AutoPreference { MostParallel, Multi };

/// n < 10 000 -> {Single}; 10 000..100 000 -> {Single, Multi}; above -> all three.
RegimeSet allowed_regimes(std::size_t n);

/// Honors an explicit request when allowed (RegimeNotAllowed otherwise, and
/// DeviceUnavailable for GpuMulti without a device); without a request picks
/// the most parallel allowed regime that is available.
RegimePlan select_regime(std::size_t n, std::optional<Regime> requested, std::size_t hw_workers,
                         bool device_present, AutoPreference preference = AutoPreference::MostParallel);

}  // namespace kmeans
