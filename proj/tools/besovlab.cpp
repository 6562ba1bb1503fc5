#include <chrono>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "besovlab/suites.hpp"

namespace {

int run_command(const std::string& config_path, const std::string& out_dir, int jobs) {
    using namespace besovlab;
    ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
    if (jobs > 0) cfg.jobs = jobs;

    const auto t0 = std::chrono::steady_clock::now();
    RunOutput out = run_suite(cfg);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    emit(out, out_dir);

    const std::size_t fails = out.report.fail_count();
    for (const ReportRow& row : out.report.rows)
        if (!row.pass)
            std::cout << "FAIL " << row.suite << " " << row.params.dump() << " value="
                      << format_double(row.value) << "\n";
    std::cout << out.report.rows.size() << " rows, " << fails << " failing; report in "
              << out_dir << "\n";
    // wall-clock goes to the console only, keeping emitted files byte-stable
    std::fprintf(stderr, "wall-clock %.1f s\n", seconds);
    return fails == 0 ? 0 : 1;
}

int check_command(const std::string& suite, int n, double alpha, int dimension) {
    using namespace besovlab;
    nlohmann::json j;
    j["domain"] = dimension == 2
                      ? nlohmann::json{{"kind", "square"}, {"n", n}}
                      : nlohmann::json{{"kind", "interval"}, {"n", n}};
    j["suites"] = {suite};
    if (alpha > 0.0) j["alphas"] = {alpha};
    ExperimentConfig cfg = ExperimentConfig::from_json(j);
    RunOutput out = run_suite(cfg);
    for (const ReportRow& row : out.report.rows)
        std::cout << (row.pass ? "pass " : "FAIL ") << row.suite << " "
                  << row.params.dump() << " value=" << format_double(row.value)
                  << (row.target ? " target=" + format_double(*row.target) : "") << "\n";
    return out.report.all_pass() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"besovlab: spectral-calculus Besov-space verification battery"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run the suites of a JSON config");
    std::string config_path, out_dir = "besovlab_out";
    int jobs = 0;
    run->add_option("--config", config_path, "config file")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--jobs", jobs, "concurrent suite evaluations");

    auto* list = app.add_subcommand("list", "list the registered suites");

    auto* check = app.add_subcommand("check", "quick single-suite run with defaults");
    std::string suite;
    int n = 63, dimension = 1;
    double alpha = -1.0;
    check->add_option("--suite", suite, "suite name")->required();
    check->add_option("--n", n, "interior cells per side");
    check->add_option("--alpha", alpha, "fractional power");
    check->add_option("--dim", dimension, "domain dimension (1 or 2)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_command(config_path, out_dir, jobs);
        if (list->parsed()) {
            for (const auto& [name, description] : besovlab::suite_registry())
                std::cout << name << "  -  " << description << "\n";
            return 0;
        }
        if (check->parsed()) return check_command(suite, n, alpha, dimension);
    } catch (const besovlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
