#include "hjlab/csv.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <system_error>

namespace hjlab {

std::string format_sig17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v,
                             std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {
std::string escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}
}  // namespace

CsvWriter::CsvWriter(std::filesystem::path path, std::vector<std::string> header)
    : path_(std::move(path)), tmp_(path_), columns_(header.size()) {
    tmp_ += ".tmp";
    if (path_.has_parent_path())
        std::filesystem::create_directories(path_.parent_path());
    out_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!out_)
        throw std::runtime_error("csv: cannot open " + tmp_.string());
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out_ << ',';
        out_ << escape(header[i]);
    }
    out_ << '\n';
}

CsvWriter::~CsvWriter() {
    try {
        finish();
    } catch (...) {
        // destructor must not throw; the temp file is left for inspection
    }
}

void CsvWriter::row(const std::vector<CsvCell>& cells) {
    if (finished_) throw std::logic_error("csv: writer already finished");
    if (cells.size() != columns_)
        throw std::invalid_argument("csv: row width does not match header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        if (const auto* s = std::get_if<std::string>(&cells[i]))
            out_ << escape(*s);
        else if (const auto* d = std::get_if<double>(&cells[i]))
            out_ << format_sig17(*d);
        else
            out_ << std::get<std::int64_t>(cells[i]);
    }
    out_ << '\n';
}

void CsvWriter::finish() {
    if (finished_) return;
    finished_ = true;
    out_.flush();
    if (!out_) throw std::runtime_error("csv: write failed for " + tmp_.string());
    out_.close();
    std::filesystem::rename(tmp_, path_);
}

}  // namespace hjlab
