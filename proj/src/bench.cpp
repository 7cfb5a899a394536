#include <algorithm>

#include "kmeans/device.hpp"
#include "kmeans/harness.hpp"
#include "kmeans/parallel.hpp"

namespace kmeans::harness {

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

const BenchEntry* BenchReport::find(Regime regime, std::size_t workers) const {
    for (const BenchEntry& e : entries) {
        if (e.regime == regime && e.workers == workers) return &e;
    }
    return nullptr;
}

nlohmann::json BenchReport::to_json() const {
    nlohmann::json j;
    j["n"] = n;
    j["m"] = m;
    j["k"] = k;
    j["repeats"] = repeats;
    j["workload"] = workload;
    j["all_labels_match"] = all_labels_match;
    auto& rows = j["entries"] = nlohmann::json::array();
    for (const BenchEntry& e : entries) {
        rows.push_back({
            {"regime", std::string(to_string(e.regime))},
            {"workers", e.workers},
            {"iterations", e.iterations},
            {"median_total_ms", e.median_total_ms},
            {"median_lloyd_ms", e.median_lloyd_ms},
            {"median_diameter_ms", e.median_diameter_ms},
            {"speedup", e.speedup},
            {"speedup_lloyd", e.speedup_lloyd},
            {"labels_match", e.labels_match},
            {"mismatched_labels", e.mismatched_labels},
        });
    }
    return j;
}

BenchReport run_bench(const Dataset& ds, const KmeansConfig& config, const BenchOptions& options,
                      const std::string& workload) {
    if (options.repeats < 1) throw Error(Errc::ContractViolation, "repeats must be >= 1");
    if (options.workers.empty() ||
        std::any_of(options.workers.begin(), options.workers.end(), [](std::size_t w) { return w == 0; })) {
        throw Error(Errc::ContractViolation, "worker list must be non-empty and positive");
    }
    const RegimeSet allowed = allowed_regimes(ds.n());
    if (options.regime && !allowed.contains(*options.regime)) {
        throw Error(Errc::RegimeNotAllowed, std::string(to_string(*options.regime)) +
                                                " is not permitted for n=" + std::to_string(ds.n()));
    }
    std::unique_ptr<Device> device;
    const bool want_gpu = allowed.contains(Regime::GpuMulti) &&
                          (!options.regime || *options.regime == Regime::GpuMulti);
    if (want_gpu) {
        if (device_available(options.device)) {
            device = make_device(options.device);
        } else if (options.regime) {
            make_device(options.device);  // throws DeviceUnavailable
        }
    }

    // Single is always the baseline; the rest follow the sweep.
    std::vector<std::pair<Regime, std::size_t>> sweep{{Regime::Single, 1}};
    for (Regime r : {Regime::Multi, Regime::GpuMulti}) {
        if (!allowed.contains(r) || (options.regime && *options.regime != r)) continue;
        if (r == Regime::GpuMulti && !device) continue;
        for (std::size_t w : options.workers) sweep.emplace_back(r, w);
    }

    BenchReport report;
    report.n = ds.n();
    report.m = ds.m();
    report.k = config.k;
    report.repeats = options.repeats;
    report.workload = workload;

    std::vector<Label> reference;
    for (std::size_t s = 0; s < sweep.size(); ++s) {
        const auto [regime, workers] = sweep[s];
        BenchEntry entry;
        entry.regime = regime;
        entry.workers = workers;
        for (std::size_t rep = 0; rep < options.repeats; ++rep) {
            KmeansResult result;
            switch (regime) {
                case Regime::Single: result = run_single(ds, config); break;
                case Regime::Multi: result = run_multi(ds, config, workers); break;
                case Regime::GpuMulti: result = run_gpu(ds, config, workers, *device); break;
            }
            entry.total_ms.push_back(result.timings.total_ms);
            entry.lloyd_ms.push_back(result.timings.assign_total_ms() + result.timings.update_total_ms());
            entry.diameter_ms.push_back(result.timings.diameter_ms);
            entry.iterations = result.iterations;

            std::vector<Label> labels(result.assignment.labels().begin(), result.assignment.labels().end());
            const bool last_run = s + 1 == sweep.size() && rep + 1 == options.repeats;
            if (options.inject_mismatch && last_run && !labels.empty()) labels[0] += 1;
            if (reference.empty()) {
                reference = std::move(labels);
                continue;
            }
            std::size_t diff = 0;
            for (std::size_t i = 0; i < labels.size(); ++i) {
                if (labels[i] != reference[i]) {
                    if (diff == 0 && entry.labels_match) entry.first_mismatch = i;
                    ++diff;
                }
            }
            if (diff) {
                entry.labels_match = false;
                entry.mismatched_labels = std::max(entry.mismatched_labels, diff);
            }
        }
        entry.median_total_ms = median(entry.total_ms);
        entry.median_lloyd_ms = median(entry.lloyd_ms);
        entry.median_diameter_ms = median(entry.diameter_ms);
        report.all_labels_match = report.all_labels_match && entry.labels_match;
        report.entries.push_back(std::move(entry));
    }

    const BenchEntry& base = report.entries.front();
    for (BenchEntry& e : report.entries) {
        e.speedup = e.median_total_ms > 0.0 ? base.median_total_ms / e.median_total_ms : 1.0;
        e.speedup_lloyd = e.median_lloyd_ms > 0.0 ? base.median_lloyd_ms / e.median_lloyd_ms : 1.0;
    }
    report.entries.front().speedup = 1.0;
    report.entries.front().speedup_lloyd = 1.0;
    return report;
}

}  // namespace kmeans::harness
