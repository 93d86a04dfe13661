#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kcdyn::tsv {

/// Splits one line on tabs. A trailing '\r' is removed first.
std::vector<std::string_view> split(std::string_view line);

/// Line-oriented reader for header-first, tab-delimited files.
class Reader {
public:
    explicit Reader(const std::filesystem::path& path);

    const std::vector<std::string>& header() const { return header_; }

    /// Column index for `name`, or nullopt when the header lacks it.
    std::optional<std::size_t> column(std::string_view name) const;

    /// Same as column() but throws std::runtime_error naming the file.
    std::size_t require_column(std::string_view name) const;

    /// Advances to the next non-empty row. Returns false at end of file.
    bool next();

    const std::vector<std::string_view>& fields() const { return fields_; }
    std::size_t line_number() const { return line_no_; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ifstream in_;
    std::string line_;
    std::vector<std::string> header_;
    std::vector<std::string_view> fields_;
    std::size_t line_no_ = 0;
};

/// Shortest round-trip decimal rendering; identical bits give identical text.
std::string format_double(double v);

/// Parses a base-10 integer occupying the whole field.
std::optional<long> parse_int(std::string_view s);
std::optional<double> parse_double(std::string_view s);

/// Writes to `<path>.tmp` and renames over `path` on commit().
/// An uncommitted writer removes its temporary file.
class AtomicWriter {
public:
    explicit AtomicWriter(std::filesystem::path path);
    ~AtomicWriter();
    AtomicWriter(const AtomicWriter&) = delete;
    AtomicWriter& operator=(const AtomicWriter&) = delete;

    std::ostream& stream() { return out_; }
    void commit();

private:
    std::filesystem::path path_;
    std::filesystem::path tmp_;
    std::ofstream out_;
    bool committed_ = false;
};

}  // namespace kcdyn::tsv
