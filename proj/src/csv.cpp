#include "remitsim/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "remitsim/types.hpp"

namespace remitsim::csv {

namespace {

std::vector<std::vector<std::string>> parse_records(std::string_view text,
                                                    const std::string &source) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        // A blank line yields a single empty field; skip it.
        if (!(record.size() == 1 && record.front().empty())) {
            records.push_back(std::move(record));
        }
        record.clear();
    };

    if (text.starts_with("\xEF\xBB\xBF")) {
        text.remove_prefix(3);
    }

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') {
                    ++line;
                }
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            if (field_started || !field.empty()) {
                throw DataError(
                    fmt::format("{}: line {}: stray quote inside unquoted field", source, line));
            }
            in_quotes = true;
            field_started = true;
            break;
        case ',':
            end_field();
            break;
        case '\r':
            break;
        case '\n':
            end_record();
            ++line;
            break;
        default:
            field.push_back(c);
            field_started = true;
        }
    }
    if (in_quotes) {
        throw DataError(fmt::format("{}: unterminated quoted field", source));
    }
    if (field_started || !field.empty() || !record.empty()) {
        end_record();
    }
    return records;
}

bool needs_quoting(std::string_view field) {
    return field.find_first_of(",\"\r\n") != std::string_view::npos;
}

} // namespace

Table Table::read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError(fmt::format("{}: cannot open file", path.string()));
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), path.filename().string());
}

Table Table::parse(std::string_view text, std::string source_name) {
    Table table;
    table.source_ = std::move(source_name);
    auto records = parse_records(text, table.source_);
    if (records.empty()) {
        throw DataError(fmt::format("{}: missing header row", table.source_));
    }
    table.header_ = std::move(records.front());
    for (std::size_t i = 0; i < table.header_.size(); ++i) {
        if (!table.column_index_.emplace(table.header_[i], i).second) {
            throw DataError(
                fmt::format("{}: duplicate column '{}' in header", table.source_, table.header_[i]));
        }
    }
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != table.header_.size()) {
            throw DataError(fmt::format("{}: row {}: expected {} fields, found {}", table.source_,
                                        r, table.header_.size(), records[r].size()));
        }
        table.rows_.push_back(std::move(records[r]));
    }
    return table;
}

void Table::require_columns(const std::vector<std::string> &columns) const {
    for (const auto &column : columns) {
        if (!column_index_.contains(column)) {
            throw DataError(fmt::format("{}: row 0: column '{}': missing from header", source_,
                                        column));
        }
    }
}

const std::string &Table::cell(std::size_t row, std::string_view column) const {
    auto it = column_index_.find(column);
    if (it == column_index_.end()) {
        throw DataError(fmt::format("{}: column '{}' not present", source_, column));
    }
    return rows_.at(row)[it->second];
}

double Table::number(std::size_t row, std::string_view column) const {
    const auto &text = cell(row, column);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() ||
        !std::isfinite(value)) {
        throw DataError(fmt::format("{}: not a finite number: '{}'", where(row, column), text));
    }
    return value;
}

long long Table::integer(std::size_t row, std::string_view column) const {
    const auto &text = cell(row, column);
    long long value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        throw DataError(fmt::format("{}: not an integer: '{}'", where(row, column), text));
    }
    return value;
}

std::string Table::where(std::size_t row, std::string_view column) const {
    return fmt::format("{}: row {}: column '{}'", source_, row + 1, column);
}

void Writer::row(const std::vector<std::string> &fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) {
            out_ << ',';
        }
        if (needs_quoting(fields[i])) {
            out_ << '"';
            for (char c : fields[i]) {
                if (c == '"') {
                    out_ << '"';
                }
                out_ << c;
            }
            out_ << '"';
        } else {
            out_ << fields[i];
        }
    }
    out_ << '\n';
}

std::string format_number(double value) {
    char buffer[64];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc{}) {
        throw DomainError("number formatting failed");
    }
    return std::string(buffer, ptr);
}

} // namespace remitsim::csv
