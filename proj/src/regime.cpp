#include "kmeans/regime.hpp"

#include "kmeans/error.hpp"

namespace kmeans {

std::string_view to_string(Regime r) {
    switch (r) {
        case Regime::Single: return "single";
        case Regime::Multi: return "multi";
        case Regime::GpuMulti: return "gpu";
    }
    return "unknown";
}

std::optional<Regime> parse_regime(std::string_view text) {
    if (text == "single") return Regime::Single;
    if (text == "multi") return Regime::Multi;
    if (text == "gpu") return Regime::GpuMulti;
    return std::nullopt;
}

std::string RegimeSet::to_string() const {
    std::string out = "{";
    for (Regime r : {Regime::Single, Regime::Multi, Regime::GpuMulti}) {
        if (!contains(r)) continue;
        if (out.size() > 1) out += ",";
        out += kmeans::to_string(r);
    }
    return out + "}";
}

RegimeSet allowed_regimes(std::size_t n) {
    if (n == 0) throw Error(Errc::ContractViolation, "allowed_regimes needs n >= 1");
    if (n < kMultiMinSamples) return {Regime::Single};
    if (n < kGpuMinSamples) return {Regime::Single, Regime::Multi};
    return {Regime::Single, Regime::Multi, Regime::GpuMulti};
}

RegimePlan select_regime(std::size_t n, std::optional<Regime> requested, std::size_t hw_workers,
                         bool device_present, AutoPreference preference) {
    if (hw_workers < 1) throw Error(Errc::ContractViolation, "hw_workers must be >= 1");
    RegimePlan plan;
    plan.allowed = allowed_regimes(n);

    if (requested) {
        if (!plan.allowed.contains(*requested)) {
            throw Error(Errc::RegimeNotAllowed, std::string(to_string(*requested)) + " is not permitted for n=" +
                                                    std::to_string(n) + "; allowed " +
                                                    plan.allowed.to_string());
        }
        if (*requested == Regime::GpuMulti && !device_present) {
            throw Error(Errc::DeviceUnavailable, "gpu regime requested but no device is present");
        }
        plan.regime = *requested;
    } else if (plan.allowed.contains(Regime::GpuMulti) && device_present &&
               preference == AutoPreference::MostParallel) {
        plan.regime = Regime::GpuMulti;
    } else if (plan.allowed.contains(Regime::Multi)) {
        plan.regime = Regime::Multi;
    } else {
        plan.regime = Regime::Single;
    }
    plan.n_workers = plan.regime == Regime::Single ? 1 : hw_workers;
    return plan;
}

}  // namespace kmeans
