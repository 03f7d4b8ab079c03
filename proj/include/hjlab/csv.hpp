#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

// Deterministic CSV output: 17 significant digits, '.' decimal separator
// regardless of locale, LF line endings, written to a temporary file and
// renamed into place so readers never observe a partial table.

namespace hjlab {

using CsvCell = std::variant<std::string, double, std::int64_t>;

std::string format_sig17(double v);

class CsvWriter {
  public:
    CsvWriter(std::filesystem::path path, std::vector<std::string> header);
    ~CsvWriter();

    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void row(const std::vector<CsvCell>& cells);
    void finish();  // close and rename; safe to call once

  private:
    std::filesystem::path path_;
    std::filesystem::path tmp_;
    std::ofstream out_;
    std::size_t columns_ = 0;
    bool finished_ = false;
};

}  // namespace hjlab
