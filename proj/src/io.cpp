#include "calcium/io.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace calcium::io {

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::string& schema, const std::vector<std::string>& columns,
                     Convention conv, const std::string& fingerprint)
    : path_(path), out_(path), ncols_(columns.size())
{
    if (!out_) throw std::runtime_error("cannot write " + path);
    out_ << "# schema: " << schema << "\n";
    out_ << "# convention: " << to_string(conv) << "\n";
    out_ << "# fingerprint: " << fingerprint << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << "\n";
}

void CsvWriter::row(const std::vector<double>& values)
{
    if (values.size() != ncols_) throw std::logic_error("CSV row width mismatch in " + path_);
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
    out_ << "\n";
}

void CsvWriter::row_text(const std::vector<std::string>& cells)
{
    if (cells.size() != ncols_) throw std::logic_error("CSV row width mismatch in " + path_);
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
}

int CsvTable::column(const std::string& name) const
{
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    return -1;
}

CsvTable read_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    CsvTable t;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        return cells;
    };
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string m = line.substr(line.size() > 1 && line[1] == ' ' ? 2 : 1);
            if (m.rfind("schema: ", 0) == 0) t.schema = m.substr(8);
            t.meta.push_back(m);
            continue;
        }
        if (t.columns.empty()) t.columns = split(line);
        else t.rows.push_back(split(line));
    }
    return t;
}

}  // namespace calcium::io
