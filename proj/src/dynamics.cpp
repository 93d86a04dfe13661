#include "kcdyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kcdyn/tsv.hpp"

namespace kcdyn {

namespace {

void require_length(std::span<const double> series) {
    if (series.size() < 2) throw std::invalid_argument("indicator needs a series of at least two years");
}

}  // namespace

std::optional<double> stability(std::span<const double> series, double epsilon) {
    require_length(series);
    const double n = static_cast<double>(series.size());
    // Deviations are taken from the first value so a constant series has sigma exactly 0.
    const double origin = series.front();
    double shift = 0.0;
    for (double v : series) shift += v - origin;
    shift /= n;
    const double mean = origin + shift;
    if (std::abs(mean) <= epsilon) return std::nullopt;
    double ss = 0.0;
    for (double v : series) ss += (v - origin - shift) * (v - origin - shift);
    return 1.0 - std::sqrt(ss / n) / mean;
}

double volatility(std::span<const double> series) {
    require_length(series);
    double ss = 0.0;
    for (std::size_t t = 1; t < series.size(); ++t) {
        const double d = series[t] - series[t - 1];
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(series.size() - 1));
}

double percentile_threshold(std::span<const double> values, double tau) {
    if (values.empty()) throw std::invalid_argument("percentile of an empty series");
    if (tau < 0.0 || tau > 100.0) throw std::invalid_argument("percentile outside [0, 100]");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double rank = static_cast<double>(sorted.size() - 1) * tau / 100.0;
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = rank - static_cast<double>(lo);
    // Equal neighbours return the value itself, avoiding a rounding wobble.
    if (sorted[lo] == sorted[lo + 1]) return sorted[lo];
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::vector<bool> highlight_mask(std::span<const double> series, double tau) {
    std::vector<bool> mask(series.size(), false);
    if (series.empty()) return mask;
    const double threshold = percentile_threshold(series, tau);
    for (std::size_t i = 0; i < series.size(); ++i) mask[i] = series[i] > threshold;
    return mask;
}

std::string PersistenceParams::label() const {
    return "P" + std::to_string(tau) + "_C" + std::to_string(min_duration) + "_G" + std::to_string(gap_tolerance);
}

std::optional<PersistenceParams> PersistenceParams::parse(std::string_view label) {
    // P<int>_C<int>_G<int>
    auto take = [&](char tag, char terminator) -> std::optional<int> {
        if (label.empty() || label.front() != tag) return std::nullopt;
        label.remove_prefix(1);
        const auto end = terminator ? label.find(terminator) : label.size();
        if (end == std::string_view::npos) return std::nullopt;
        auto v = tsv::parse_int(label.substr(0, end));
        label.remove_prefix(terminator ? end + 1 : end);
        if (!v) return std::nullopt;
        return static_cast<int>(*v);
    };
    const auto tau = take('P', '_');
    const auto d = take('C', '_');
    const auto g = take('G', '\0');
    if (!tau || !d || !g || !label.empty()) return std::nullopt;
    if (*tau < 0 || *tau > 100 || *d < 1 || *g < 0) return std::nullopt;
    return PersistenceParams{*tau, *d, *g};
}

std::vector<PersistenceParams> default_persistence_grid() {
    static constexpr std::pair<int, int> kDurationGaps[] = {{2, 0}, {2, 1}, {3, 0}, {3, 1},
                                                             {3, 2}, {4, 0}, {4, 1}, {4, 2}};
    std::vector<PersistenceParams> grid;
    for (int tau : {70, 75, 80})
        for (auto [d, g] : kDurationGaps) grid.push_back({tau, d, g});
    return grid;
}

double persistence_from_mask(const std::vector<bool>& mask, int min_duration, int gap_tolerance, PeriodLength length) {
    if (mask.empty()) return 0.0;
    std::size_t total = 0;
    std::size_t count = 0;  // highlight years in the open period
    std::size_t first = 0, last = 0;
    auto close = [&] {
        if (count > 0 && count >= static_cast<std::size_t>(min_duration))
            total += length == PeriodLength::HighlightYears ? count : last - first + 1;
        count = 0;
    };
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i]) continue;
        if (count > 0 && i - last - 1 > static_cast<std::size_t>(gap_tolerance)) close();
        if (count == 0) first = i;
        last = i;
        ++count;
    }
    close();
    return static_cast<double>(total) / static_cast<double>(mask.size());
}

double persistence(std::span<const double> series, const PersistenceParams& params, PeriodLength length) {
    require_length(series);
    return persistence_from_mask(highlight_mask(series, params.tau), params.min_duration, params.gap_tolerance, length);
}

double IndicatorSet::kcp_for(std::string_view label) const {
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid[i].label() == label) return kcp[i];
    throw std::out_of_range("no KCP measure labelled " + std::string(label));
}

IndicatorSet indicator_set(std::span<const double> series, const std::vector<PersistenceParams>& grid,
                           PeriodLength length) {
    IndicatorSet out;
    out.kcs = stability(series);
    out.kcv = volatility(series);
    out.grid = grid;
    out.kcp.reserve(grid.size());
    for (const auto& p : grid) out.kcp.push_back(persistence(series, p, length));
    return out;
}

void write_indicators_tsv(const std::filesystem::path& path, std::span<const AuthorIndicators> rows,
                          const std::vector<PersistenceParams>& grid) {
    tsv::AtomicWriter w(path);
    auto& out = w.stream();
    out << "author_id\tkcs\tkcs_valid\tkcv";
    for (const auto& p : grid) out << '\t' << p.label();
    out << '\n';
    for (const auto& row : rows) {
        const auto& ind = row.indicators;
        out << row.author_id << '\t' << (ind.kcs ? tsv::format_double(*ind.kcs) : "") << '\t' << (ind.kcs ? 1 : 0)
            << '\t' << tsv::format_double(ind.kcv);
        for (const auto& p : grid) out << '\t' << tsv::format_double(ind.kcp_for(p.label()));
        out << '\n';
    }
    w.commit();
}

std::vector<AuthorIndicators> read_indicators_tsv(const std::filesystem::path& path) {
    tsv::Reader r(path);
    const auto c_author = r.require_column("author_id");
    const auto c_kcs = r.require_column("kcs");
    const auto c_valid = r.require_column("kcs_valid");
    const auto c_kcv = r.require_column("kcv");
    std::vector<std::pair<std::size_t, PersistenceParams>> kcp_columns;
    for (std::size_t i = 0; i < r.header().size(); ++i)
        if (auto p = PersistenceParams::parse(r.header()[i])) kcp_columns.emplace_back(i, *p);

    std::vector<AuthorIndicators> out;
    while (r.next()) {
        const auto& f = r.fields();
        auto bad = [&](const std::string& what) {
            return std::runtime_error(path.string() + ":" + std::to_string(r.line_number()) + ": " + what);
        };
        if (f.size() != r.header().size()) throw bad("wrong column count");
        AuthorIndicators row;
        row.author_id = std::string(f[c_author]);
        if (f[c_valid] == "1") {
            auto v = tsv::parse_double(f[c_kcs]);
            if (!v) throw bad("unparsable kcs");
            row.indicators.kcs = *v;
        }
        auto kcv = tsv::parse_double(f[c_kcv]);
        if (!kcv) throw bad("unparsable kcv");
        row.indicators.kcv = *kcv;
        for (const auto& [col, p] : kcp_columns) {
            auto v = tsv::parse_double(f[col]);
            if (!v) throw bad("unparsable " + p.label());
            row.indicators.grid.push_back(p);
            row.indicators.kcp.push_back(*v);
        }
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace kcdyn
