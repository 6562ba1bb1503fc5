#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "besovlab/suites.hpp"

using namespace besovlab;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("config parsing: defaults, domains, and errors") {
    nlohmann::json j;
    j["domain"] = {{"kind", "interval"}, {"n", 63}};
    ExperimentConfig cfg = ExperimentConfig::from_json(j);
    CHECK(cfg.domain_spec.nx == 63);
    CHECK(cfg.alphas == std::vector<double>{1.0, 2.0});

    j["domain"] = {{"kind", "square"}, {"n", 5}};
    CHECK(ExperimentConfig::from_json(j).domain_spec.dimension == 2);

    CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::object()), ConfigError);
    j["domain"] = {{"kind", "hexagon"}};
    CHECK_THROWS_AS(ExperimentConfig::from_json(j), ConfigError);
    j["domain"] = {{"kind", "interval"}, {"n", 63}};
    j["suites"] = {"partition", "no_such_suite"};
    try {
        ExperimentConfig::from_json(j);
        CHECK(false);
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("no_such_suite") != std::string::npos);
    }
}

TEST_CASE("environment seed override wins over the config seed") {
    nlohmann::json j;
    j["domain"] = {{"kind", "interval"}, {"n", 15}};
    j["seed"] = 5;
    setenv("BESOVLAB_SEED", "99", 1);
    CHECK(ExperimentConfig::from_json(j).seed == 99);
    unsetenv("BESOVLAB_SEED");
    CHECK(ExperimentConfig::from_json(j).seed == 5);
}

TEST_CASE("mask-file domains run end to end") {
    const std::string path = "test_suite_mask.txt";
    {
        std::ofstream out(path);
        out << "1 0.015625 63\n";
        for (int i = 0; i < 63; ++i) out << '1';
        out << '\n';
    }
    nlohmann::json j;
    j["domain"] = {{"kind", "mask_file"}, {"path", path}};
    j["suites"] = {"partition"};
    RunOutput out = run_suite(ExperimentConfig::from_json(j));
    CHECK(out.report.rows.size() >= 1);
    CHECK(out.report.all_pass());
    std::remove(path.c_str());
}

TEST_CASE("minimal run: the partition suite passes on a small interval") {
    nlohmann::json j;
    j["domain"] = {{"kind", "interval"}, {"n", 63}};
    j["suites"] = {"partition"};
    RunOutput out = run_suite(ExperimentConfig::from_json(j));
    CHECK(out.report.rows.size() >= 1);
    CHECK(out.report.all_pass());
    CHECK(!out.report.config_hash.empty());
    CHECK(!out.report.phi0_hash.empty());
}

TEST_CASE("suite registry names are unique and documented") {
    auto reg = suite_registry();
    CHECK(reg.size() >= 15);
    for (std::size_t i = 0; i < reg.size(); ++i) {
        CHECK(!reg[i].second.empty());
        for (std::size_t k = i + 1; k < reg.size(); ++k) CHECK(reg[i].first != reg[k].first);
    }
}

TEST_CASE("a failing row never aborts the remaining rows") {
    nlohmann::json j;
    j["domain"] = {{"kind", "interval"}, {"n", 63}};
    j["suites"] = {"block_decay", "partition"};
    j["tolerances"] = {{"block_decay", -1.0}}; // force its checked rows to fail
    RunOutput out = run_suite(ExperimentConfig::from_json(j));
    bool decay_failed = false, partition_passed = false;
    for (const auto& row : out.report.rows) {
        if (row.suite == "block_prefactor" && !row.pass) decay_failed = true;
        if (row.suite == "partition" && row.pass) partition_passed = true;
    }
    CHECK(decay_failed);
    CHECK(partition_passed);
    CHECK(out.report.fail_count() > 0);
}

TEST_CASE("same config and seed emit byte-identical reports") {
    nlohmann::json j;
    j["domain"] = {{"kind", "interval"}, {"n", 63}};
    j["suites"] = {"partition", "spectral", "boundedness", "duality"};
    j["seed"] = 31337;
    ExperimentConfig cfg = ExperimentConfig::from_json(j);

    RunOutput a = run_suite(cfg);
    RunOutput b = run_suite(cfg);
    emit(a, "test_emit_a");
    emit(b, "test_emit_b");
    CHECK(slurp("test_emit_a/report.csv") == slurp("test_emit_b/report.csv"));
    CHECK(slurp("test_emit_a/report.json") == slurp("test_emit_b/report.json"));
    CHECK(slurp("test_emit_a/report.csv").size() > 100);
    for (const char* dir : {"test_emit_a", "test_emit_b"}) {
        std::filesystem::remove_all(dir);
    }
}

TEST_CASE("parallel evaluation reproduces the serial report") {
    nlohmann::json j;
    j["domain"] = {{"kind", "interval"}, {"n", 63}};
    j["suites"] = {"partition", "spectral", "lp", "duality", "lifting"};
    ExperimentConfig cfg = ExperimentConfig::from_json(j);
    RunOutput serial = run_suite(cfg);
    cfg.jobs = 2;
    RunOutput parallel = run_suite(cfg);
    REQUIRE(serial.report.rows.size() == parallel.report.rows.size());
    for (std::size_t i = 0; i < serial.report.rows.size(); ++i) {
        CHECK(serial.report.rows[i].suite == parallel.report.rows[i].suite);
        CHECK(serial.report.rows[i].value == parallel.report.rows[i].value);
    }
}

TEST_CASE("smoothing suite emits rate plots through emit()") {
    nlohmann::json j;
    j["domain"] = {{"kind", "interval"}, {"n", 255}};
    j["suites"] = {"smoothing"};
    RunOutput out = run_suite(ExperimentConfig::from_json(j));
    CHECK(out.plots.size() >= 2);
    emit(out, "test_emit_plots");
    bool found_svg = false;
    for (const auto& entry : std::filesystem::directory_iterator("test_emit_plots"))
        if (entry.path().extension() == ".svg") found_svg = true;
    CHECK(found_svg);
    std::filesystem::remove_all("test_emit_plots");
}

TEST_CASE("diagonal operator reproduces its spectrum exactly") {
    SpectralDecomposition dec = decompose(diagonal_operator({0.5, 2.0, 8.0}));
    CHECK(dec.eigenvalues()[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(dec.eigenvalues()[1] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(dec.eigenvalues()[2] == doctest::Approx(8.0).epsilon(1e-14));
}
