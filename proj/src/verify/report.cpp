#include "bbmlab/verify/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bbmlab/io/files.hpp"

namespace bbm::verify {

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

std::string_view to_string(Comparison c) noexcept {
    switch (c) {
        case Comparison::Within: return "within";
        case Comparison::AtMost: return "at-most";
        case Comparison::AtLeast: return "at-least";
        case Comparison::Below: return "below";
        case Comparison::Informational: return "informational";
    }
    return "unknown";
}

std::string_view to_string(Layer l) noexcept {
    switch (l) {
        case Layer::Exact: return "exact";
        case Layer::Asymptotic: return "asymptotic";
        case Layer::Bound: return "bound";
        case Layer::Structural: return "structural";
        case Layer::Numerical: return "numerical";
    }
    return "unknown";
}

Verdict judge(const ComparisonReport& r) {
    if (r.comparison == Comparison::Informational) return Verdict::Inconclusive;
    if (r.samples && *r.samples < r.min_samples) return Verdict::Inconclusive;
    const double e = r.empirical;
    bool ok = false;
    switch (r.comparison) {
        case Comparison::Within: ok = std::abs(e - r.reference) <= r.tolerance; break;
        case Comparison::AtMost: ok = e <= r.reference + r.tolerance; break;
        case Comparison::AtLeast: ok = e >= r.reference - r.tolerance; break;
        case Comparison::Below: ok = e < r.reference; break;
        case Comparison::Informational: break;
    }
    return ok ? Verdict::Pass : Verdict::Fail;
}

ComparisonReport finalize(ComparisonReport r) {
    r.verdict = judge(r);
    return r;
}

bool all_pass(const std::vector<ComparisonReport>& reports) {
    return std::none_of(reports.begin(), reports.end(), [](const auto& r) { return r.verdict == Verdict::Fail; });
}

void order_by_name(std::vector<ComparisonReport>& reports) {
    std::stable_sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
}

namespace {

nlohmann::ordered_json number(double v) {
    if (std::isfinite(v)) return v;
    return io::format_double(v);
}

}  // namespace

std::string to_json(const std::vector<ComparisonReport>& reports, std::string_view suite, std::string_view tolerance_version,
                    bool include_runtime) {
    nlohmann::ordered_json doc;
    doc["suite"] = suite;
    doc["tolerances"] = tolerance_version;
    doc["pass"] = all_pass(reports);
    auto& list = doc["reports"] = nlohmann::ordered_json::array();
    for (const auto& r : reports) {
        nlohmann::ordered_json j;
        j["name"] = r.name;
        j["layer"] = to_string(r.layer);
        j["comparison"] = to_string(r.comparison);
        j["empirical"] = number(r.empirical);
        j["reference"] = number(r.reference);
        j["tolerance"] = number(r.tolerance);
        if (r.samples) j["samples"] = *r.samples;
        if (r.min_samples) j["min_samples"] = r.min_samples;
        j["verdict"] = to_string(r.verdict);
        if (!r.label.empty()) j["label"] = r.label;
        if (!r.note.empty()) j["note"] = r.note;
        nlohmann::ordered_json m;
        if (r.metadata.t) m["t"] = *r.metadata.t;
        if (r.metadata.alpha) m["alpha"] = *r.metadata.alpha;
        if (!r.metadata.grid.empty()) m["grid"] = r.metadata.grid;
        if (r.metadata.seed) m["seed"] = *r.metadata.seed;
        if (include_runtime) m["runtime_s"] = r.metadata.runtime_s;
        j["metadata"] = m;
        list.push_back(std::move(j));
    }
    return doc.dump(2) + "\n";
}

std::string to_text(const std::vector<ComparisonReport>& reports) {
    std::size_t width = 4;
    for (const auto& r : reports) width = std::max(width, r.name.size());
    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(width)) << "name" << "  " << std::setw(14) << "verdict" << std::setw(14)
        << "empirical" << std::setw(14) << "reference" << std::setw(12) << "tolerance" << "comparison\n";
    for (const auto& r : reports) {
        out << std::left << std::setw(static_cast<int>(width)) << r.name << "  " << std::setw(14) << to_string(r.verdict)
            << std::setw(14) << std::setprecision(6) << r.empirical << std::setw(14) << r.reference << std::setw(12)
            << r.tolerance << to_string(r.comparison);
        if (!r.label.empty()) out << "  [" << r.label << "]";
        if (!r.note.empty()) out << "  " << r.note;
        out << "\n";
    }
    return out.str();
}

}  // namespace bbm::verify
