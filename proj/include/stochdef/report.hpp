#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace stochdef {

/// One result row. Every rate is stored with the counts behind it.
struct EvalReport {
    std::string experiment;
    std::string defense_kind;
    std::string defense_param;
    int epoch = 0;
    int k = 0;
    int m = 0;
    double alpha = 0.0;
    long strength = 0;
    std::string mode;
    long benign_hits = 0;
    long benign_n = 0;
    long success_hits = 0;
    long success_n = 0;
    long invariance_hits = 0;
    long invariance_n = 0;
    std::uint64_t seed = 0;

    double benign_accuracy() const;
    double success_rate() const;
    double invariance_rate() const;
    /// Throws if a count is negative or exceeds its denominator.
    void validate() const;
};

const std::vector<std::string>& csv_header();

/// Shortest decimal text that parses back to exactly `v`.
std::string format_real(double v);

void write_csv(std::ostream& out, const std::vector<EvalReport>& rows);
void write_csv(const std::filesystem::path& path, const std::vector<EvalReport>& rows);
std::string to_csv(const std::vector<EvalReport>& rows);

} // namespace stochdef
