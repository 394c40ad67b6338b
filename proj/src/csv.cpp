#include "eigenmood/csv.hpp"

#include <cstdio>
#include <stdexcept>

#include "eigenmood/concepts.hpp"

namespace eigenmood {

std::string format_sig(double value, int significant) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", significant, value);
    return buf;
}

std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

std::string csv_escape(const std::string& field) {
    const bool needs_quotes = field.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

CsvWriter::CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw DataError("cannot write file: " + path);
}

CsvWriter& CsvWriter::raw(const std::string& cell) {
    if (!first_in_row_) out_ << ',';
    out_ << cell;
    first_in_row_ = false;
    return *this;
}

CsvWriter& CsvWriter::text(const std::string& value) { return raw(csv_escape(value)); }

CsvWriter& CsvWriter::num(double value) {
    return raw(display_ ? format_fixed(value) : format_sig(value));
}

CsvWriter& CsvWriter::integer(long value) { return raw(std::to_string(value)); }

void CsvWriter::end_row() {
    out_ << '\n';
    first_in_row_ = true;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    std::size_t i = 0;
    auto flush_field = [&] {
        row.push_back(field);
        field.clear();
    };
    auto flush_row = [&] {
        flush_field();
        rows.push_back(row);
        row.clear();
    };
    while (i < content.size()) {
        const char c = content[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            flush_field();
        } else if (c == '\n') {
            flush_row();
        } else if (c != '\r') {
            field += c;
        }
        ++i;
    }
    if (!field.empty() || !row.empty()) flush_row();
    return rows;
}

}  // namespace eigenmood
