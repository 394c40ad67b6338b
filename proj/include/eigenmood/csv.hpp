#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace eigenmood {

// Numeric cell at 12 significant digits (regression-stable) or rounded to
// 4 decimals for the human-comparable "-display" table variants.
std::string format_sig(double value, int significant = 12);
std::string format_fixed(double value, int decimals = 4);

std::string csv_escape(const std::string& field);

// Row-at-a-time CSV emitter. Cells are written verbatim for numbers the
// caller already formatted; text() escapes per RFC 4180.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path);

    CsvWriter& text(const std::string& value);
    CsvWriter& num(double value);
    CsvWriter& integer(long value);
    CsvWriter& raw(const std::string& cell);
    void end_row();

    void set_display(bool display) { display_ = display; }
    bool good() const { return out_.good(); }

private:
    std::ofstream out_;
    bool first_in_row_ = true;
    bool display_ = false;  // 4-decimal rounding instead of 12 significant digits
};

// Minimal RFC 4180 reader (quoted fields, embedded separators/newlines).
std::vector<std::vector<std::string>> read_csv(const std::string& path);

}  // namespace eigenmood
