#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kmeans/core.hpp"
#include "kmeans/engine.hpp"
#include "kmeans/regime.hpp"

namespace kmeans::harness {

struct CsvOptions {
    bool header = false;     // skip the first non-blank line
    bool id_column = false;  // drop the first column of every row
};

/// Comma-separated numeric text. Blank lines are ignored. Errors carry the
/// 1-based line and column: ParseError, NonFiniteValue, RaggedRows.
Dataset parse_dataset(std::istream& in, const CsvOptions& options, const std::string& source = "<stream>");
Dataset load_dataset(const std::filesystem::path& path, const CsvOptions& options);

/// k_true isotropic Gaussian blobs (std dev `spread`) around centers drawn
/// uniformly from [-10, 10]^m; sample i belongs to blob i mod k_true.
/// Deterministic for fixed arguments.
Dataset generate_synthetic(std::size_t n, std::size_t m, std::size_t k_true, std::uint64_t seed,
                           double spread);

struct RunReport {
    Regime regime = Regime::Single;
    std::size_t n_workers = 1;
    std::string device;  // empty unless the accelerator regime ran
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t k = 0;
    std::size_t iterations = 0;
    bool converged = false;
    DiameterResult diameter;
    PhaseTimings timings;
    double wcss = 0.0;
    std::vector<std::string> fallback_events;
    double peak_rss_mib = 0.0;

    nlohmann::json to_json() const;
};

RunReport make_report(const Dataset& ds, const KmeansResult& result, const RegimePlan& plan,
                      const std::string& device);

void write_labels(const std::filesystem::path& path, const Assignment& assignment);
void write_centers(const std::filesystem::path& path, const ClusterModel& model);
std::vector<Label> read_labels(const std::filesystem::path& path);
/// Reads k rows of m values; counts are left at zero.
ClusterModel read_centers(const std::filesystem::path& path);

double peak_rss_mib();

struct BenchOptions {
    std::vector<std::size_t> workers{1, 2, 4};
    std::size_t repeats = 3;
    std::optional<Regime> regime;  // nullopt sweeps every allowed regime
    std::string device = "reference";
    bool inject_mismatch = false;  // fault test: corrupt one label of the last run
};

struct BenchEntry {
    Regime regime = Regime::Single;
    std::size_t workers = 1;
    std::vector<double> total_ms;
    std::vector<double> lloyd_ms;     // assign + update phases
    std::vector<double> diameter_ms;
    double median_total_ms = 0.0;
    double median_lloyd_ms = 0.0;
    double median_diameter_ms = 0.0;
    double speedup = 1.0;        // median_total(Single) / median_total(this)
    double speedup_lloyd = 1.0;  // same, over assign + update phases
    std::size_t iterations = 0;
    bool labels_match = true;
    std::size_t mismatched_labels = 0;
    std::size_t first_mismatch = 0;
};

struct BenchReport {
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t k = 0;
    std::size_t repeats = 0;
    std::string workload;
    std::vector<BenchEntry> entries;
    bool all_labels_match = true;

    const BenchEntry* find(Regime regime, std::size_t workers) const;
    nlohmann::json to_json() const;
};

double median(std::vector<double> values);

/// Runs the same dataset and config under each regime and worker count,
/// `repeats` times each, and compares every run's labels with the first
/// single-worker run.
BenchReport run_bench(const Dataset& ds, const KmeansConfig& config, const BenchOptions& options,
                      const std::string& workload = "");

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kUsage = 2;
inline constexpr int kDataError = 3;
inline constexpr int kRegimeNotAllowed = 4;
inline constexpr int kDeviceUnavailable = 5;
inline constexpr int kOutputMismatch = 6;
}  // namespace exit_code

/// Entry point of the `cluster` tool; returns the process exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kmeans::harness
