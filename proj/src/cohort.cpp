#include "kcdyn/cohort.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "kcdyn/tsv.hpp"

namespace kcdyn {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

struct Moments {
    double mean = 0.0;
    double var = 0.0;  // sample variance
};

Moments moments(std::span<const double> xs) {
    Moments m;
    for (double x : xs) m.mean += x;
    m.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        for (double x : xs) m.var += (x - m.mean) * (x - m.mean);
        m.var /= static_cast<double>(xs.size() - 1);
    }
    return m;
}

std::optional<double> mean_of(std::span<const double> xs) {
    if (xs.empty()) return std::nullopt;
    return moments(xs).mean;
}

std::string opt(const std::optional<double>& v) { return v ? tsv::format_double(*v) : std::string(); }

bool field_less(const std::string& a, const std::string& b) {
    if (a == b) return false;
    if (a == "unknown") return false;
    if (b == "unknown") return true;
    const auto na = tsv::parse_int(a), nb = tsv::parse_int(b);
    if (na && nb) return *na != *nb ? *na < *nb : a < b;
    if (na != nb) return na.has_value();  // numeric ids before textual ones
    return a < b;
}

struct Samples {
    std::vector<double> female, male;
};

Samples split_by_gender(std::span<const AuthorRecord* const> records, Indicator which, std::string_view kcp_label) {
    Samples s;
    for (const auto* r : records) {
        const auto v = indicator_value(*r, which, kcp_label);
        if (!v) continue;
        if (r->gender == Gender::Female) s.female.push_back(*v);
        if (r->gender == Gender::Male) s.male.push_back(*v);
    }
    return s;
}

IndicatorGap gap_for(std::span<const AuthorRecord* const> records, Indicator which, std::string_view kcp_label) {
    const auto s = split_by_gender(records, which, kcp_label);
    return compute_gap(s.female, s.male);
}

}  // namespace

std::string_view to_string(Gender g) {
    switch (g) {
        case Gender::Male: return "male";
        case Gender::Female: return "female";
        case Gender::Unknown: break;
    }
    return "unknown";
}

std::optional<Gender> parse_gender(std::string_view s) {
    const auto v = lower(trim(s));
    if (v == "male" || v == "m") return Gender::Male;
    if (v == "female" || v == "f") return Gender::Female;
    if (v == "unknown" || v == "u") return Gender::Unknown;
    return std::nullopt;
}

NameTable NameTable::load(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw std::runtime_error("name table not found: " + path.string());
    tsv::Reader r(path);
    const auto c_name = r.require_column("name");
    const auto c_label = r.require_column("label");
    const auto c_prob = r.require_column("probability");
    NameTable table;
    while (r.next()) {
        const auto& f = r.fields();
        auto bad = [&](const char* what) {
            return std::runtime_error(path.string() + ":" + std::to_string(r.line_number()) + ": " + what);
        };
        if (f.size() != r.header().size()) throw bad("wrong column count");
        const auto label = parse_gender(f[c_label]);
        const auto prob = tsv::parse_double(f[c_prob]);
        if (!label) throw bad("unknown gender label");
        if (!prob || *prob < 0.0 || *prob > 1.0) throw bad("probability outside [0, 1]");
        table.add(f[c_name], *label, *prob);
    }
    return table;
}

void NameTable::add(std::string_view name, Gender label, double probability) {
    entries_[lower(trim(name))] = GenderLabel{label, probability};
}

std::optional<GenderLabel> NameTable::find(std::string_view given) const {
    const auto it = entries_.find(lower(given));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::string given_name(std::string_view full_name) {
    std::string_view rest = full_name;
    if (const auto comma = rest.find(','); comma != std::string_view::npos) rest = rest.substr(comma + 1);
    const auto b = rest.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    rest = rest.substr(b);
    return lower(rest.substr(0, rest.find_first_of(" \t")));
}

GenderLabel infer_gender(std::string_view full_name, const NameTable& table, double threshold) {
    const auto hit = table.find(given_name(full_name));
    if (!hit || hit->value == Gender::Unknown || hit->confidence < threshold) {
        return GenderLabel{Gender::Unknown, hit ? hit->confidence : 0.0};
    }
    return *hit;
}

std::map<std::string, Gender, std::less<>> load_gender_overrides(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw std::runtime_error("gender file not found: " + path.string());
    tsv::Reader r(path);
    const auto c_author = r.require_column("author_id");
    const auto c_gender = r.require_column("gender");
    std::map<std::string, Gender, std::less<>> out;
    while (r.next()) {
        const auto& f = r.fields();
        const auto g = f.size() == r.header().size() ? parse_gender(f[c_gender]) : std::nullopt;
        if (!g) throw std::runtime_error(path.string() + ":" + std::to_string(r.line_number()) + ": bad gender row");
        out[std::string(f[c_author])] = *g;
    }
    return out;
}

std::map<std::string, GenderLabel, std::less<>> label_authors(const Corpus& corpus, const NameTable& table,
                                                              const std::map<std::string, Gender, std::less<>>& overrides,
                                                              double threshold) {
    std::map<std::string, GenderLabel, std::less<>> out;
    for (const auto& a : corpus.authors()) {
        if (const auto it = overrides.find(a.id); it != overrides.end())
            out[a.id] = GenderLabel{it->second, 1.0};
        else
            out[a.id] = infer_gender(a.name, table, threshold);
    }
    return out;
}

std::string assign_cohort(int first_year) {
    if (first_year < 1960) throw std::invalid_argument("no cohort before 1960: " + std::to_string(first_year));
    if (first_year >= 2010) return "2010+";
    const int lo = first_year - (first_year - 1960) % 5;
    return std::to_string(lo) + "-" + std::to_string(lo + 4);
}

std::vector<std::string> cohort_labels() {
    std::vector<std::string> out;
    for (int y = 1960; y <= 2010; y += 5) out.push_back(assign_cohort(y));
    return out;
}

TTestResult welch_ttest(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("t-test needs at least two values per sample");
    const auto ma = moments(a), mb = moments(b);
    if (!(ma.var > 0.0) || !(mb.var > 0.0)) throw std::invalid_argument("t-test sample has zero variance");
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double va = ma.var / na, vb = mb.var / nb;
    TTestResult r;
    r.mean_a = ma.mean;
    r.mean_b = mb.mean;
    r.n_a = a.size();
    r.n_b = b.size();
    r.t = (ma.mean - mb.mean) / std::sqrt(va + vb);
    r.df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    const boost::math::students_t_distribution<double> dist(r.df);
    r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
    // Extreme statistics underflow; report the smallest normal double rather than 0.
    r.p = std::clamp(r.p, std::numeric_limits<double>::min(), 1.0);
    return r;
}

std::string primary_field(const Corpus& corpus, const AuthorCareer& career) {
    std::map<std::string, std::size_t> counts;
    for (const auto& [year, works] : career.works_by_year)
        for (WorkIndex w : works)
            if (const auto& f = corpus.work(w).field) ++counts[*f];
    std::string best = "unknown";
    std::size_t best_count = 0;
    for (const auto& [field, n] : counts)
        if (n > best_count || (n == best_count && field_less(field, best))) {
            best = field;
            best_count = n;
        }
    return best;
}

std::optional<double> indicator_value(const AuthorRecord& r, Indicator which, std::string_view kcp_label) {
    switch (which) {
        case Indicator::Kcs: return r.indicators.kcs;
        case Indicator::Kcv: return r.indicators.kcv;
        case Indicator::Kcp: return r.indicators.kcp_for(kcp_label);
    }
    return std::nullopt;
}

IndicatorGap compute_gap(std::span<const double> female, std::span<const double> male) {
    IndicatorGap g;
    g.female = {female.size(), mean_of(female)};
    g.male = {male.size(), mean_of(male)};
    if (g.female.mean && g.male.mean) {
        g.gap_abs = *g.male.mean - *g.female.mean;
        if (std::abs(*g.female.mean) > kStabilityMeanEpsilon) g.gap_pct = 100.0 * *g.gap_abs / *g.female.mean;
    }
    return g;
}

std::vector<GapRow> gap_table(std::span<const AuthorRecord> records, std::string_view kcp_label) {
    std::map<std::string, std::vector<const AuthorRecord*>> by_cohort;
    for (const auto& r : records)
        if (r.gender != Gender::Unknown) by_cohort[r.cohort].push_back(&r);

    std::vector<GapRow> rows;
    auto emit = [&](const std::string& cohort, const std::vector<const AuthorRecord*>& group) {
        GapRow row;
        row.cohort = cohort;
        for (const auto* r : group) ++(r->gender == Gender::Female ? row.n_female : row.n_male);
        row.kcs = gap_for(group, Indicator::Kcs, kcp_label);
        row.kcv = gap_for(group, Indicator::Kcv, kcp_label);
        row.kcp = gap_for(group, Indicator::Kcp, kcp_label);
        rows.push_back(std::move(row));
    };
    for (const auto& label : cohort_labels())
        if (const auto it = by_cohort.find(label); it != by_cohort.end()) {
            emit(label, it->second);
            by_cohort.erase(it);
        }
    // Labels outside the standard buckets (callers that cohort differently) follow in name order.
    for (const auto& [label, group] : by_cohort) emit(label, group);
    return rows;
}

void write_gap_table_tsv(const std::filesystem::path& path, std::span<const GapRow> rows) {
    tsv::AtomicWriter w(path);
    auto& out = w.stream();
    out << "Cohort\tKCS Gap (Male-Female)\tKCS Gap (%)\tKCV Gap (Male-Female)\tKCV Gap (%)"
           "\tKCP Gap (Male-Female)\tKCP Gap (%)"
           "\tkcs_female_mean\tkcs_male_mean\tkcv_female_mean\tkcv_male_mean\tkcp_female_mean\tkcp_male_mean"
           "\tn_female\tn_male\tn_kcs_female\tn_kcs_male\n";
    for (const auto& r : rows) {
        out << r.cohort;
        for (const auto* g : {&r.kcs, &r.kcv, &r.kcp}) out << '\t' << opt(g->gap_abs) << '\t' << opt(g->gap_pct);
        for (const auto* g : {&r.kcs, &r.kcv, &r.kcp}) out << '\t' << opt(g->female.mean) << '\t' << opt(g->male.mean);
        out << '\t' << r.n_female << '\t' << r.n_male << '\t' << r.kcs.female.n << '\t' << r.kcs.male.n << '\n';
    }
    w.commit();
}

void write_trend_tsv(const std::filesystem::path& path, std::span<const GapRow> rows) {
    tsv::AtomicWriter w(path);
    w.stream() << "cohort\tkcs_gap_pct\tkcv_gap_pct\tkcp_gap_pct\n";
    for (const auto& r : rows)
        w.stream() << r.cohort << '\t' << opt(r.kcs.gap_pct) << '\t' << opt(r.kcv.gap_pct) << '\t'
                   << opt(r.kcp.gap_pct) << '\n';
    w.commit();
}

std::vector<FieldSummaryRow> field_summary(std::span<const AuthorRecord> records, std::string_view kcp_label) {
    std::map<std::string, std::vector<const AuthorRecord*>, decltype(&field_less)> by_field(&field_less);
    for (const auto& r : records)
        if (r.gender != Gender::Unknown) by_field[r.field].push_back(&r);

    std::vector<FieldSummaryRow> out;
    for (const auto& [field, group] : by_field)
        for (Gender g : {Gender::Female, Gender::Male}) {
            FieldSummaryRow row;
            row.field = field;
            row.gender = g;
            double kcs_sum = 0.0, kcv_sum = 0.0, kcp_sum = 0.0;
            for (const auto* r : group) {
                if (r->gender != g) continue;
                ++row.n;
                kcv_sum += r->indicators.kcv;
                kcp_sum += r->indicators.kcp_for(kcp_label);
                if (r->indicators.kcs) {
                    ++row.n_kcs;
                    kcs_sum += *r->indicators.kcs;
                }
            }
            if (row.n == 0) continue;
            row.kcv_mean = kcv_sum / static_cast<double>(row.n);
            row.kcp_mean = kcp_sum / static_cast<double>(row.n);
            if (row.n_kcs > 0) row.kcs_mean = kcs_sum / static_cast<double>(row.n_kcs);
            out.push_back(std::move(row));
        }
    return out;
}

void write_field_summary_tsv(const std::filesystem::path& path, std::span<const FieldSummaryRow> rows) {
    tsv::AtomicWriter w(path);
    w.stream() << "field\tgender\tn\tn_kcs\tkcs_mean\tkcv_mean\tkcp_mean\n";
    for (const auto& r : rows)
        w.stream() << r.field << '\t' << to_string(r.gender) << '\t' << r.n << '\t' << r.n_kcs << '\t'
                   << opt(r.kcs_mean) << '\t' << tsv::format_double(r.kcv_mean) << '\t'
                   << tsv::format_double(r.kcp_mean) << '\n';
    w.commit();
}

std::vector<Comparison> compare_genders(std::span<const AuthorRecord> records) {
    std::vector<const AuthorRecord*> all;
    for (const auto& r : records) all.push_back(&r);

    std::vector<std::pair<std::string, Indicator>> measures{{"KCS", Indicator::Kcs}, {"KCV", Indicator::Kcv}};
    if (!records.empty())
        for (const auto& p : records.front().indicators.grid) measures.emplace_back(p.label(), Indicator::Kcp);

    std::vector<Comparison> out;
    for (const auto& [name, which] : measures) {
        const auto s = split_by_gender(all, which, name);
        Comparison c;
        c.indicator = name;
        c.gap = compute_gap(s.female, s.male);
        try {
            c.test = welch_ttest(s.female, s.male);
        } catch (const std::invalid_argument&) {
            c.test.reset();
        }
        out.push_back(std::move(c));
    }
    return out;
}

void write_comparison_tsv(const std::filesystem::path& path, std::span<const Comparison> rows) {
    tsv::AtomicWriter w(path);
    w.stream() << "indicator\tfemale_mean\tmale_mean\tn_female\tn_male\tgap_abs\tgap_pct\tt\tdf\tp\n";
    for (const auto& c : rows) {
        w.stream() << c.indicator << '\t' << opt(c.gap.female.mean) << '\t' << opt(c.gap.male.mean) << '\t'
                   << c.gap.female.n << '\t' << c.gap.male.n << '\t' << opt(c.gap.gap_abs) << '\t'
                   << opt(c.gap.gap_pct);
        if (c.test)
            w.stream() << '\t' << tsv::format_double(c.test->t) << '\t' << tsv::format_double(c.test->df) << '\t'
                       << tsv::format_double(c.test->p);
        else
            w.stream() << "\t\t\t";
        w.stream() << '\n';
    }
    w.commit();
}

}  // namespace kcdyn
