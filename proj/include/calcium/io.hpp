#pragma once

#include "calcium/params.hpp"

#include <fstream>
#include <string>
#include <vector>

namespace calcium::io {

// Writes "# schema: <name>", "# convention: ...", "# fingerprint: ..." and the header row.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::string& schema, const std::vector<std::string>& columns,
              Convention conv, const std::string& fingerprint);

    void row(const std::vector<double>& values);
    // Mixed rows: pre-formatted cells.
    void row_text(const std::vector<std::string>& cells);
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ofstream out_;
    std::size_t ncols_;
};

std::string format_double(double v);

struct CsvTable {
    std::string schema;
    std::vector<std::string> meta;  // every '#' line, without the leading "# "
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

}  // namespace calcium::io
