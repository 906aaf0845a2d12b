#include "stochdef/report.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace stochdef {

namespace {

double ratio(long hits, long n) {
    return n == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n);
}

} // namespace

double EvalReport::benign_accuracy() const { return ratio(benign_hits, benign_n); }
double EvalReport::success_rate() const { return ratio(success_hits, success_n); }
double EvalReport::invariance_rate() const { return ratio(invariance_hits, invariance_n); }

void EvalReport::validate() const {
    auto check = [](long hits, long n, const char* what) {
        if (n < 0 || hits < 0 || hits > n) {
            throw std::logic_error(std::string("EvalReport: inconsistent counts for ") + what);
        }
    };
    check(benign_hits, benign_n, "benign_acc");
    check(success_hits, success_n, "success_rate");
    check(invariance_hits, invariance_n, "invariance");
    if (strength != static_cast<long>(k) * m) {
        throw std::logic_error("EvalReport: strength must equal k * m");
    }
}

const std::vector<std::string>& csv_header() {
    static const std::vector<std::string> header = {
        "experiment", "defense_kind", "defense_param", "epoch",    "k",          "m",         "alpha",     "strength",
        "mode",       "benign_acc",   "benign_n",      "success_rate", "success_n", "invariance", "seed"};
    return header;
}

std::string format_real(double v) {
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

void write_csv(std::ostream& out, const std::vector<EvalReport>& rows) {
    const auto& header = csv_header();
    for (std::size_t i = 0; i < header.size(); ++i) {
        out << (i ? "," : "") << header[i];
    }
    out << '\n';
    for (const EvalReport& r : rows) {
        r.validate();
        out << r.experiment << ',' << r.defense_kind << ',' << r.defense_param << ',' << r.epoch << ',' << r.k << ','
            << r.m << ',' << format_real(r.alpha) << ',' << r.strength << ',' << r.mode << ','
            << format_real(r.benign_accuracy()) << ',' << r.benign_n << ',' << format_real(r.success_rate()) << ','
            << r.success_n << ',' << format_real(r.invariance_rate()) << ',' << r.seed << '\n';
    }
}

void write_csv(const std::filesystem::path& path, const std::vector<EvalReport>& rows) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    write_csv(out, rows);
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

std::string to_csv(const std::vector<EvalReport>& rows) {
    std::ostringstream out;
    write_csv(out, rows);
    return out.str();
}

} // namespace stochdef
