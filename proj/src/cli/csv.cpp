#include "polyheat/cli/csv.hpp"

#include "polyheat/cli/config.hpp"
#include "polyheat/errors.hpp"

namespace polyheat::cli {

CsvWriter::CsvWriter(const std::string &path, const std::vector<std::string> &header)
    : path_(path), file_(path, std::ios::binary | std::ios::trunc), out_(&file_), columns_(header.size())
{
    if (!file_) {
        throw ArgumentError("cannot write '" + path + "'");
    }
    write_header(header);
}

CsvWriter::CsvWriter(std::ostream &out, const std::vector<std::string> &header) : out_(&out), columns_(header.size())
{
    write_header(header);
}

void CsvWriter::write_header(const std::vector<std::string> &header)
{
    for (const auto &h : header) {
        *this << h;
    }
    end_row();
}

void CsvWriter::separator()
{
    if (cell_++ > 0) {
        *out_ << ',';
    }
}

CsvWriter &CsvWriter::operator<<(double v)
{
    separator();
    *out_ << format_double(v);
    return *this;
}

CsvWriter &CsvWriter::operator<<(const std::string &v)
{
    separator();
    if (v.find_first_of(",\"\n") == std::string::npos) {
        *out_ << v;
        return *this;
    }
    *out_ << '"';
    for (const char c : v) {
        *out_ << c;
        if (c == '"') {
            *out_ << '"';
        }
    }
    *out_ << '"';
    return *this;
}

CsvWriter &CsvWriter::operator<<(std::size_t v)
{
    separator();
    *out_ << v;
    return *this;
}

CsvWriter &CsvWriter::cells(std::span<const double> v)
{
    for (const double x : v) {
        *this << x;
    }
    return *this;
}

void CsvWriter::end_row()
{
    if (cell_ != columns_) {
        throw ArgumentError("row of " + std::to_string(cell_) + " cells in a " + std::to_string(columns_) +
                            "-column table " + path_);
    }
    *out_ << '\n';
    cell_ = 0;
}

std::vector<std::string> coordinate_header(const std::string &prefix, std::size_t n)
{
    std::vector<std::string> h;
    for (std::size_t i = 1; i <= n; ++i) {
        h.push_back(prefix + "_" + std::to_string(i));
    }
    return h;
}

} // namespace polyheat::cli
