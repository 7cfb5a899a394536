#include "kmeans/harness.hpp"

#include <sys/resource.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace kmeans::harness {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string location(const std::string& source, std::size_t line, std::size_t column) {
    return source + ":" + std::to_string(line) + ", column " + std::to_string(column);
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

}  // namespace

Dataset parse_dataset(std::istream& in, const CsvOptions& options, const std::string& source) {
    std::vector<double> coords;
    std::size_t m = 0;
    std::size_t n = 0;
    bool header_pending = options.header;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        std::size_t column = 0;
        std::size_t fields = 0;
        std::string_view rest = line;
        for (;;) {
            const auto comma = rest.find(',');
            const std::string_view raw = rest.substr(0, comma);
            ++column;
            if (!(options.id_column && column == 1)) {
                const std::string_view field = trim(raw);
                double value = 0.0;
                const char* begin = field.data();
                const char* end = field.data() + field.size();
                auto [ptr, ec] = std::from_chars(begin, end, value);
                if (field.empty() || ec == std::errc::invalid_argument || ptr != end) {
                    throw Error(Errc::ParseError, location(source, line_no, column) + ": '" +
                                                      std::string(field) + "' is not a number");
                }
                if (ec == std::errc::result_out_of_range || !std::isfinite(value)) {
                    throw Error(Errc::NonFiniteValue, location(source, line_no, column) + ": '" +
                                                          std::string(field) + "' (row " +
                                                          std::to_string(n + 1) + ")");
                }
                coords.push_back(value);
                ++fields;
            }
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (n == 0) {
            m = fields;
            if (m == 0) throw Error(Errc::ParseError, location(source, line_no, 1) + ": no feature columns");
        } else if (fields != m) {
            throw Error(Errc::RaggedRows, source + ":" + std::to_string(line_no) + ": expected " +
                                              std::to_string(m) + " values, found " + std::to_string(fields));
        }
        ++n;
    }
    if (n == 0) throw Error(Errc::ParseError, source + ": no data rows");
    return Dataset(n, m, std::move(coords));
}

Dataset load_dataset(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::ParseError, "cannot open " + path.string());
    return parse_dataset(in, options, path.string());
}

Dataset generate_synthetic(std::size_t n, std::size_t m, std::size_t k_true, std::uint64_t seed,
                           double spread) {
    if (n == 0 || m == 0 || k_true == 0 || !(spread >= 0.0) || !std::isfinite(spread)) {
        throw Error(Errc::ContractViolation, "synthetic parameters must be positive (spread >= 0)");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> center_dist(-10.0, 10.0);
    std::vector<double> centers(k_true * m);
    for (double& c : centers) c = center_dist(rng);

    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> coords(n * m);
    for (std::size_t i = 0; i < n; ++i) {
        const double* c = centers.data() + (i % k_true) * m;
        for (std::size_t d = 0; d < m; ++d) {
            coords[i * m + d] = spread > 0.0 ? c[d] + spread * noise(rng) : c[d];
        }
    }
    return Dataset(n, m, std::move(coords));
}

nlohmann::json RunReport::to_json() const {
    nlohmann::json j;
    j["regime"] = std::string(to_string(regime));
    j["n_workers"] = n_workers;
    if (!device.empty()) j["device"] = device;
    j["n"] = n;
    j["m"] = m;
    j["k"] = k;
    j["iterations"] = iterations;
    j["converged"] = converged;
    j["diameter"] = {{"d", diameter.d}, {"i", diameter.i}, {"j", diameter.j}};
    j["timings_ms"] = {
        {"diameter", timings.diameter_ms},
        {"centroid", timings.centroid_ms},
        {"init", timings.init_ms},
        {"assign", timings.assign_ms},
        {"update", timings.update_ms},
        {"assign_total", timings.assign_total_ms()},
        {"update_total", timings.update_total_ms()},
        {"total", timings.total_ms},
    };
    j["wcss"] = wcss;
    j["fallback_events"] = fallback_events;
    j["peak_rss_mib"] = peak_rss_mib;
    return j;
}

RunReport make_report(const Dataset& ds, const KmeansResult& result, const RegimePlan& plan,
                      const std::string& device) {
    RunReport r;
    r.regime = plan.regime;
    r.n_workers = plan.n_workers;
    if (plan.regime == Regime::GpuMulti) r.device = device;
    r.n = ds.n();
    r.m = ds.m();
    r.k = result.model.k();
    r.iterations = result.iterations;
    r.converged = result.converged;
    r.diameter = result.diameter;
    r.timings = result.timings;
    r.wcss = wcss(ds, result.model, result.assignment);
    r.fallback_events = result.fallback_events;
    r.peak_rss_mib = peak_rss_mib();
    return r;
}

void write_labels(const std::filesystem::path& path, const Assignment& assignment) {
    std::ofstream out(path);
    if (!out) throw Error(Errc::ParseError, "cannot write " + path.string());
    for (Label l : assignment.labels()) out << l << '\n';
}

void write_centers(const std::filesystem::path& path, const ClusterModel& model) {
    std::ofstream out(path);
    if (!out) throw Error(Errc::ParseError, "cannot write " + path.string());
    for (std::size_t c = 0; c < model.k(); ++c) {
        const auto row = model.center(c);
        for (std::size_t d = 0; d < row.size(); ++d) {
            if (d) out << ',';
            out << format_double(row[d]);
        }
        out << '\n';
    }
}

std::vector<Label> read_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::ParseError, "cannot open " + path.string());
    std::vector<Label> labels;
    std::string line;
    while (std::getline(in, line)) {
        const auto field = trim(line);
        if (field.empty()) continue;
        Label l = 0;
        auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), l);
        if (ec != std::errc{} || ptr != field.data() + field.size()) {
            throw Error(Errc::ParseError, path.string() + ": bad label '" + std::string(field) + "'");
        }
        labels.push_back(l);
    }
    return labels;
}

ClusterModel read_centers(const std::filesystem::path& path) {
    const Dataset rows = load_dataset(path, {});
    return ClusterModel(rows.n(), rows.m(), {rows.coords().begin(), rows.coords().end()});
}

double peak_rss_mib() {
    rusage usage{};
    if (getrusage(RUSAGE_SELF, &usage) != 0) return 0.0;
    return static_cast<double>(usage.ru_maxrss) / 1024.0;  // ru_maxrss is KiB on Linux
}

}  // namespace kmeans::harness
