#pragma once

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace remitsim::csv {

/// Parsed RFC-4180 table with a mandatory header row. Rows are numbered from
/// 1 for the first data row (header is row 0) in diagnostics.
class Table {
  public:
    static Table read_file(const std::filesystem::path &path);
    static Table parse(std::string_view text, std::string source_name);

    /// Throws DataError if any of `columns` is missing from the header.
    void require_columns(const std::vector<std::string> &columns) const;

    std::size_t row_count() const { return rows_.size(); }
    const std::string &source() const { return source_; }
    const std::vector<std::string> &header() const { return header_; }

    /// Cell by column name. Throws DataError for unknown columns.
    const std::string &cell(std::size_t row, std::string_view column) const;

    double number(std::size_t row, std::string_view column) const;
    long long integer(std::size_t row, std::string_view column) const;

    /// Formats "file:row:column: message".
    std::string where(std::size_t row, std::string_view column) const;

  private:
    std::string source_;
    std::vector<std::string> header_;
    std::map<std::string, std::size_t, std::less<>> column_index_;
    std::vector<std::vector<std::string>> rows_;
};

/// Writes RFC-4180 records, quoting fields only when needed.
class Writer {
  public:
    explicit Writer(std::ostream &out) : out_(out) {}

    void row(const std::vector<std::string> &fields);

  private:
    std::ostream &out_;
};

/// Round-trippable shortest representation of a double.
std::string format_number(double value);

} // namespace remitsim::csv
