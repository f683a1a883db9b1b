#pragma once

#include <string>
#include <vector>

namespace relids {

/// CSV writer: header row, UTF-8, '\n' endings, 17 significant digits.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    /// One row; cells are already formatted strings.
    void row(const std::vector<std::string>& cells);

    static std::string num(double v);
    static std::string num(long long v);

private:
    struct Impl;
    Impl* impl_;
};

/// Creates the directory (and parents) if absent.
void ensure_directory(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace relids
