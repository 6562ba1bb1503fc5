#include "besovlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "besovlab/errors.hpp"

namespace besovlab {

bool Report::all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.pass; });
}

std::size_t Report::fail_count() const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const ReportRow& r) { return !r.pass; }));
}

void Report::append(std::vector<ReportRow> more) {
    rows.insert(rows.end(), std::make_move_iterator(more.begin()),
                std::make_move_iterator(more.end()));
}

void Report::sort_rows() {
    std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
        if (a.suite != b.suite) return a.suite < b.suite;
        return a.params.dump() < b.params.dump();
    });
}

namespace {

struct LineFit {
    double slope, intercept, r2;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) { sx += x[i]; sy += y[i]; }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit f{};
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += e * e;
    }
    // zero-variance data is a perfect constant fit
    f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return f;
}

} // namespace

RateFit fit_rate(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw TooFewPoints("fit_rate needs >= 3 points");
    std::vector<double> x, y;
    x.reserve(points.size());
    y.reserve(points.size());
    for (auto [t, v] : points) {
        if (!(t > 0.0) || !(v > 0.0))
            throw NonPositiveValue("fit_rate needs positive (t, value) pairs");
        x.push_back(std::log(t));
        y.push_back(std::log(v));
    }
    const LineFit f = least_squares(x, y);
    return {f.slope, f.intercept, f.r2};
}

double fit_decay_rate(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw TooFewPoints("fit_decay_rate needs >= 3 points");
    std::vector<double> x, y;
    for (auto [t, v] : points) {
        if (!(v > 0.0)) throw NonPositiveValue("fit_decay_rate needs positive values");
        x.push_back(t);
        y.push_back(std::log(v));
    }
    return -least_squares(x, y).slope;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::uint64_t fnv1a_bytes(const void* data, std::size_t bytes, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

std::string csv_escape(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

} // namespace

void write_csv(const Report& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "suite,param_json,value,target,tol,pass\n";
    for (const ReportRow& r : report.rows) {
        out << r.suite << ',' << csv_escape(r.params.dump()) << ','
            << format_double(r.value) << ','
            << (r.target ? format_double(*r.target) : std::string()) << ','
            << (r.tol ? format_double(*r.tol) : std::string()) << ','
            << (r.pass ? '1' : '0') << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

void write_json(const Report& report, const std::string& path) {
    nlohmann::json j;
    j["config_hash"] = report.config_hash;
    j["phi0_hash"] = report.phi0_hash;
    j["meta"] = report.meta;
    auto rows = nlohmann::json::array();
    for (const ReportRow& r : report.rows) {
        nlohmann::json row;
        row["suite"] = r.suite;
        row["params"] = r.params;
        row["value"] = r.value;
        if (r.target) row["target"] = *r.target;
        if (r.tol) row["tol"] = *r.tol;
        row["pass"] = r.pass;
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

void write_rate_svg(const std::vector<std::pair<double, double>>& points, const RateFit& fit,
                    std::optional<double> target_slope, const std::string& title,
                    const std::string& path) {
    if (points.empty()) throw TooFewPoints("no points to plot");
    double lx0 = 1e300, lx1 = -1e300, ly0 = 1e300, ly1 = -1e300;
    for (auto [t, v] : points) {
        lx0 = std::min(lx0, std::log10(t));
        lx1 = std::max(lx1, std::log10(t));
        ly0 = std::min(ly0, std::log10(v));
        ly1 = std::max(ly1, std::log10(v));
    }
    if (ly1 - ly0 < 1e-12) { ly0 -= 0.5; ly1 += 0.5; }
    const double W = 640, H = 480, ml = 60, mr = 20, mt = 40, mb = 40;
    auto X = [&](double lt) { return ml + (lt - lx0) / (lx1 - lx0) * (W - ml - mr); };
    auto Y = [&](double lv) { return H - mb - (lv - ly0) / (ly1 - ly0) * (H - mt - mb); };

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
        << title << "</text>\n"
        << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
        << H - mb << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
        << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << W / 2 << "\" y=\"" << H - 10
        << "\" text-anchor=\"middle\" font-size=\"12\">log10 t</text>\n";
    // fitted line across the t-range (fit is in natural logs)
    const double ln10 = std::log(10.0);
    auto fit_ly = [&](double lt) { return (fit.intercept + fit.slope * lt * ln10) / ln10; };
    out << "<line x1=\"" << X(lx0) << "\" y1=\"" << Y(fit_ly(lx0)) << "\" x2=\"" << X(lx1)
        << "\" y2=\"" << Y(fit_ly(lx1)) << "\" stroke=\"#d62728\" stroke-width=\"1.5\"/>\n";
    if (target_slope) {
        // guide through the first point with the target slope
        const double lt0 = std::log10(points.front().first);
        const double lv0 = std::log10(points.front().second);
        auto guide = [&](double lt) { return lv0 + *target_slope * (lt - lt0); };
        out << "<line x1=\"" << X(lx0) << "\" y1=\"" << Y(guide(lx0)) << "\" x2=\"" << X(lx1)
            << "\" y2=\"" << Y(guide(lx1))
            << "\" stroke=\"#2ca02c\" stroke-dasharray=\"6,4\"/>\n";
    }
    for (auto [t, v] : points)
        out << "<circle cx=\"" << X(std::log10(t)) << "\" cy=\"" << Y(std::log10(v))
            << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
    out << "<text x=\"" << W - mr - 10 << "\" y=\"" << mt + 16
        << "\" text-anchor=\"end\" font-size=\"12\">fitted slope " << format_double(fit.slope);
    if (target_slope) out << "  (target " << format_double(*target_slope) << ")";
    out << "</text>\n</svg>\n";
    if (!out) throw IoError("write failed: " + path);
}

} // namespace besovlab
