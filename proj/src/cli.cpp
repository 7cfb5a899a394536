#include <algorithm>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "kmeans/device.hpp"
#include "kmeans/harness.hpp"
#include "kmeans/parallel.hpp"

namespace kmeans::harness {

namespace {

struct CliArgs {
    std::string input;
    std::string synthetic;
    bool header = false;
    bool id_column = false;
    std::size_t k = 0;
    std::string regime = "auto";
    std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
    double tol = 0.0;
    std::size_t max_iters = 1000;
    std::uint64_t seed = 0;
    std::string init = "maximin";
    std::string device = "reference";
    std::string auto_prefer = "most-parallel";
    std::size_t diameter_pair_cap = 0;
    bool balanced_diameter = false;
    std::size_t device_job_rows = 65536;
    std::string labels_out;
    std::string centers_out;
    std::string report_out;
    // bench
    std::vector<std::size_t> workers{1, 2, 4};
    std::size_t repeats = 3;
    bool inject_mismatch = false;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void add_common_options(CLI::App& app, CliArgs& a) {
    auto* in = app.add_option("--input", a.input, "CSV file of numeric samples");
    auto* syn = app.add_option("--synthetic", a.synthetic, "Generate blobs: n,m,k_true,spread");
    in->excludes(syn);
    app.add_flag("--header", a.header, "Skip the first line of the input");
    app.add_flag("--id-column", a.id_column, "Drop the first column of the input");
    app.add_option("--k", a.k, "Cluster count")->required()->check(CLI::PositiveNumber);
    app.add_option("--regime", a.regime, "auto|single|multi|gpu")
        ->check(CLI::IsMember({"auto", "single", "multi", "gpu"}));
    app.add_option("--threads", a.threads, "Worker count (default: hardware threads)")
        ->check(CLI::PositiveNumber);
    app.add_option("--tol", a.tol, "Center movement tolerance for convergence")->check(CLI::NonNegativeNumber);
    app.add_option("--max-iters", a.max_iters, "Iteration cap")->check(CLI::PositiveNumber);
    app.add_option("--seed", a.seed, "Seed for random-far init and synthetic data");
    app.add_option("--init", a.init, "maximin|random-far")->check(CLI::IsMember({"maximin", "random-far"}));
    app.add_option("--device", a.device, "reference|gpu")->check(CLI::IsMember({"reference", "gpu"}));
    app.add_option("--auto-prefer", a.auto_prefer, "most-parallel|multi")
        ->check(CLI::IsMember({"most-parallel", "multi"}));
    app.add_option("--diameter-pair-cap", a.diameter_pair_cap,
                   "Sample the diameter over at most this many pairs when n > 100000 (0 = exact)");
    app.add_flag("--balanced-diameter", a.balanced_diameter, "Pair row i with row n-1-i across workers");
    app.add_option("--device-job-rows", a.device_job_rows, "Rows per device job")->check(CLI::PositiveNumber);
    app.add_option("--labels-out", a.labels_out, "Write one label per line");
    app.add_option("--centers-out", a.centers_out, "Write k rows of m center coordinates");
    app.add_option("--report-out", a.report_out, "Write the JSON report here instead of stdout");
}

Dataset build_dataset(const CliArgs& a, std::string& workload) {
    if (a.input.empty() == a.synthetic.empty()) {
        throw UsageError("exactly one of --input or --synthetic is required");
    }
    if (!a.input.empty()) {
        workload = "file:" + a.input;
        return load_dataset(a.input, {a.header, a.id_column});
    }
    std::vector<std::string> parts;
    std::stringstream ss(a.synthetic);
    for (std::string part; std::getline(ss, part, ',');) parts.push_back(part);
    if (parts.size() != 4) throw UsageError("--synthetic expects n,m,k_true,spread");
    std::size_t n = 0, m = 0, k_true = 0;
    double spread = 0.0;
    try {
        std::size_t pos = 0;
        n = std::stoull(parts[0]);
        m = std::stoull(parts[1]);
        k_true = std::stoull(parts[2]);
        spread = std::stod(parts[3], &pos);
        if (pos != parts[3].size()) throw std::invalid_argument(parts[3]);
    } catch (const std::exception&) {
        throw UsageError("--synthetic expects n,m,k_true,spread");
    }
    const auto negative = [](const std::string& p) { return p.find('-') != std::string::npos; };
    if (std::any_of(parts.begin(), parts.begin() + 3, negative)) {
        throw UsageError("--synthetic values must be positive");
    }
    if (n == 0 || m == 0 || k_true == 0 || !(spread >= 0.0)) {
        throw UsageError("--synthetic values must be positive");
    }
    workload = "synthetic gaussian blobs n=" + parts[0] + " m=" + parts[1] + " k_true=" + parts[2] +
               " spread=" + parts[3] + " seed=" + std::to_string(a.seed);
    return generate_synthetic(n, m, k_true, a.seed, spread);
}

KmeansConfig build_config(const CliArgs& a) {
    KmeansConfig c;
    c.k = a.k;
    c.max_iters = a.max_iters;
    c.tol = a.tol;
    c.seed = a.seed;
    c.init = a.init == "random-far" ? InitStrategy::RandomFarApart : InitStrategy::MaximinDeterministic;
    c.diameter_pair_cap = a.diameter_pair_cap;
    c.balanced_diameter = a.balanced_diameter;
    c.device_job_rows = a.device_job_rows;
    return c;
}

void emit(const nlohmann::json& j, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << j.dump(2) << '\n';
        return;
    }
    std::ofstream f(path);
    if (!f) throw Error(Errc::ParseError, "cannot write " + path);
    f << j.dump(2) << '\n';
}

int exit_for(const Error& e) {
    switch (e.code()) {
        case Errc::RegimeNotAllowed: return exit_code::kRegimeNotAllowed;
        case Errc::DeviceUnavailable: return exit_code::kDeviceUnavailable;
        default: return exit_code::kDataError;
    }
}

int cluster_command(const CliArgs& a, std::ostream& out) {
    std::string workload;
    const Dataset ds = build_dataset(a, workload);
    const KmeansConfig config = build_config(a);
    const std::optional<Regime> requested = a.regime == "auto" ? std::nullopt : parse_regime(a.regime);
    const RegimePlan plan =
        select_regime(ds.n(), requested, a.threads, device_available(a.device),
                      a.auto_prefer == "multi" ? AutoPreference::Multi : AutoPreference::MostParallel);

    KmeansResult result;
    switch (plan.regime) {
        case Regime::Single: result = run_single(ds, config); break;
        case Regime::Multi: result = run_multi(ds, config, plan.n_workers); break;
        case Regime::GpuMulti: {
            auto device = make_device(a.device);
            result = run_gpu(ds, config, plan.n_workers, *device);
            break;
        }
    }
    if (!a.labels_out.empty()) write_labels(a.labels_out, result.assignment);
    if (!a.centers_out.empty()) write_centers(a.centers_out, result.model);
    emit(make_report(ds, result, plan, a.device).to_json(), a.report_out, out);
    return exit_code::kOk;
}

int bench_command(const CliArgs& a, std::ostream& out, std::ostream& err) {
    std::string workload;
    const Dataset ds = build_dataset(a, workload);
    const KmeansConfig config = build_config(a);
    BenchOptions options;
    options.workers = a.workers;
    options.repeats = a.repeats;
    options.regime = a.regime == "auto" ? std::nullopt : parse_regime(a.regime);
    options.device = a.device;
    options.inject_mismatch = a.inject_mismatch;
    const BenchReport report = run_bench(ds, config, options, workload);
    emit(report.to_json(), a.report_out, out);
    if (!report.all_labels_match) {
        for (const BenchEntry& e : report.entries) {
            if (e.labels_match) continue;
            err << "label mismatch: regime " << to_string(e.regime) << " workers " << e.workers << ": "
                << e.mismatched_labels << " labels differ from single-worker run, first at sample "
                << e.first_mismatch << '\n';
        }
        return exit_code::kOutputMismatch;
    }
    return exit_code::kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CliArgs args;
    CLI::App app{"K-means clustering in single, multi-worker and accelerator regimes", "cluster"};
    add_common_options(app, args);
    CLI::App* bench = app.add_subcommand("bench", "Time every allowed regime and worker count");
    bench->fallthrough();
    bench->add_option("--workers", args.workers, "Worker counts to sweep, comma separated")
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    bench->add_option("--repeats", args.repeats, "Runs per configuration (median reported)")
        ->check(CLI::PositiveNumber);
    bench->add_flag("--fault-inject-mismatch", args.inject_mismatch)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_code::kOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n' << "run with --help for options\n";
        return exit_code::kUsage;
    }

    try {
        return bench->parsed() ? bench_command(args, out, err) : cluster_command(args, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return exit_code::kUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_for(e);
    }
}

}  // namespace kmeans::harness
