#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bbm::verify {

enum class Verdict { Pass, Fail, Inconclusive };
std::string_view to_string(Verdict v) noexcept;

/// How empirical is compared with reference and tolerance.
///   Within:       |empirical - reference| <= tolerance
///   AtMost:       empirical <= reference + tolerance
///   AtLeast:      empirical >= reference - tolerance
///   Below:        empirical < reference (strict; tolerance unused)
///   Informational: never judged
enum class Comparison { Within, AtMost, AtLeast, Below, Informational };
std::string_view to_string(Comparison c) noexcept;

enum class Layer { Exact, Asymptotic, Bound, Structural, Numerical };
std::string_view to_string(Layer l) noexcept;

struct ReportMetadata {
    std::optional<double> t;
    std::optional<double> alpha;
    std::string grid;
    std::optional<std::uint64_t> seed;
    double runtime_s = 0.0;
};

struct ComparisonReport {
    std::string name;
    double empirical = 0.0;
    double reference = 0.0;
    double tolerance = 0.0;
    Comparison comparison = Comparison::Within;
    Layer layer = Layer::Numerical;
    /// Sample count behind the empirical value, when it is a statistic.
    std::optional<std::uint64_t> samples;
    /// Below this many samples the verdict is inconclusive.
    std::uint64_t min_samples = 0;
    Verdict verdict = Verdict::Inconclusive;
    /// "finite-t gap" for an asymptotic failure whose exact layer passed.
    std::string label;
    std::string note;
    ReportMetadata metadata;
};

/// The verdict implied by the report's own fields.
Verdict judge(const ComparisonReport& r);

/// Sets r.verdict = judge(r) and returns r.
ComparisonReport finalize(ComparisonReport r);

/// Suite status: false when any judged report failed.
bool all_pass(const std::vector<ComparisonReport>& reports);

/// Sorted by name, stable.
void order_by_name(std::vector<ComparisonReport>& reports);

/// `include_runtime = false` drops the wall-clock field so the document is reproducible byte for byte.
std::string to_json(const std::vector<ComparisonReport>& reports, std::string_view suite, std::string_view tolerance_version,
                    bool include_runtime = true);
std::string to_text(const std::vector<ComparisonReport>& reports);

}  // namespace bbm::verify
