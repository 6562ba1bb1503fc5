#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace besovlab {

/// One measured result: suite id, parameter tuple, value, optional target
/// and tolerance, and the pass flag.
struct ReportRow {
    std::string suite;
    nlohmann::json params = nlohmann::json::object();
    double value = 0.0;
    std::optional<double> target;
    std::optional<double> tol;
    bool pass = true;

    static ReportRow measured(std::string suite, nlohmann::json params, double value) {
        ReportRow r;
        r.suite = std::move(suite);
        r.params = std::move(params);
        r.value = value;
        r.pass = std::isfinite(value);
        return r;
    }
    static ReportRow checked(std::string suite, nlohmann::json params, double value,
                             double target, double tol) {
        ReportRow r;
        r.suite = std::move(suite);
        r.params = std::move(params);
        r.value = value;
        r.target = target;
        r.tol = tol;
        r.pass = std::isfinite(value) && std::abs(value - target) <= tol;
        return r;
    }
    /// Upper-bound check: value <= bound. The bound lives in target with
    /// tol unset, which keeps tolerance overrides scoped to checked rows.
    static ReportRow bounded(std::string suite, nlohmann::json params, double value,
                             double bound) {
        ReportRow r;
        r.suite = std::move(suite);
        r.params = std::move(params);
        r.value = value;
        r.target = bound;
        r.pass = std::isfinite(value) && value <= bound;
        return r;
    }
};

struct Report {
    std::vector<ReportRow> rows;
    std::string config_hash;
    std::string phi0_hash;
    nlohmann::json meta = nlohmann::json::object();

    bool all_pass() const;
    std::size_t fail_count() const;
    void append(std::vector<ReportRow> more);
    /// Deterministic ordering key: (suite, serialized params).
    void sort_rows();
};

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0; // in log(value) units
    double r_squared = 1.0;
};

/// Least squares on (log t, log value).
/// Throws TooFewPoints (< 3 points) and NonPositiveValue.
RateFit fit_rate(const std::vector<std::pair<double, double>>& points);

/// Exponential-decay fit: least squares of log(value) against t, returning
/// the decay rate r of value ~ C e^{-r t}.
double fit_decay_rate(const std::vector<std::pair<double, double>>& points);

std::string format_double(double v);
std::uint64_t fnv1a_bytes(const void* data, std::size_t bytes,
                          std::uint64_t seed = 1469598103934665603ull);
std::string hash_hex(std::uint64_t h);

/// Deterministic CSV with columns suite,param_json,value,target,tol,pass.
void write_csv(const Report& report, const std::string& path);
void write_json(const Report& report, const std::string& path);

/// Self-contained log-log SVG: points, fitted line, target-slope guide,
/// fitted slope in the legend.
void write_rate_svg(const std::vector<std::pair<double, double>>& points, const RateFit& fit,
                    std::optional<double> target_slope, const std::string& title,
                    const std::string& path);

} // namespace besovlab
