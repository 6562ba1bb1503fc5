#pragma once

#include <map>

#include "besovlab/amalgam.hpp"
#include "besovlab/interpolation.hpp"
#include "besovlab/semigroup.hpp"

namespace besovlab {

/// Data behind one emitted log-log plot.
struct RatePlot {
    std::string slug;
    std::string title;
    std::vector<std::pair<double, double>> curve;
    RateFit fit;
    std::optional<double> target;
};

struct ExperimentConfig {
    GridSpec domain_spec;
    std::vector<double> alphas = {1.0, 2.0};
    std::uint64_t seed = 20240404;
    Ensemble::Options ensemble;
    std::vector<std::string> suites; // empty means the full registry
    std::map<std::string, double> tolerance_overrides;
    int jobs = 1;

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_file(const std::string& path);
    nlohmann::json canonical() const;
    std::string hash() const;
};

struct RunOutput {
    Report report;
    std::vector<RatePlot> plots;
};

/// Registered suites as (name, one-line description) in registry order.
std::vector<std::pair<std::string, std::string>> suite_registry();

/// Builds the domain / decomposition / partition once, dispatches the
/// selected suites, and collects rows; suite failures become failed rows.
RunOutput run_suite(const ExperimentConfig& cfg);

/// Deterministic CSV + JSON (and per-rate-suite SVG) under out_dir.
void emit(const RunOutput& out, const std::string& out_dir);

/// Synthetic diagonal operator whose spectrum is exactly the given values;
/// the substrate for closed-form single-mode oracle rows.
SymOperator diagonal_operator(const std::vector<double>& eigenvalues);

} // namespace besovlab
