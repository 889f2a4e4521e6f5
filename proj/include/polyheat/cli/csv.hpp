#pragma once

#include <cstddef>
#include <fstream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace polyheat::cli {

/// Comma-separated table with a header row, '.' decimals and '\n' line endings.
class CsvWriter {
public:
    /// Opens path for writing (binary mode, so line endings are not translated).
    CsvWriter(const std::string &path, const std::vector<std::string> &header);
    /// Writes to a caller-owned stream; path() is empty.
    CsvWriter(std::ostream &out, const std::vector<std::string> &header);

    CsvWriter &operator<<(double v);
    CsvWriter &operator<<(const std::string &v);
    CsvWriter &operator<<(std::size_t v);
    /// Appends one cell per coordinate.
    CsvWriter &cells(std::span<const double> v);
    void end_row();

    const std::string &path() const noexcept { return path_; }

private:
    void separator();
    void write_header(const std::vector<std::string> &header);

    std::string path_;
    std::ofstream file_;
    std::ostream *out_;
    std::size_t columns_;
    std::size_t cell_ = 0;
};

/// Header names prefix_1 .. prefix_n.
std::vector<std::string> coordinate_header(const std::string &prefix, std::size_t n);

} // namespace polyheat::cli
