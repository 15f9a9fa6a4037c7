#include "vecci/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "vecci/error.hpp"

namespace vecci::csv {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::string trimmed(const std::string& field) {
    const auto first = field.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = field.find_last_not_of(" \t\r");
    return field.substr(first, last - first + 1);
}

double parse_number(const std::string& field, int line_number) {
    const std::string text = trimmed(field);
    if (text.empty()) {
        throw input_error("empty numeric field on line " + std::to_string(line_number));
    }
    errno = 0;
    char* end = nullptr;
    const double value = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || errno == ERANGE) {
        throw input_error("cannot parse '" + text + "' on line " + std::to_string(line_number));
    }
    return value;
}

}  // namespace

stats::DataMatrix read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw input_error("missing header row");

    std::vector<std::string> names;
    for (const std::string& field : split_line(line)) names.push_back(trimmed(field));
    const std::size_t width = names.size();

    std::vector<double> cells;
    int line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> fields = split_line(line);
        if (fields.size() != width) {
            throw input_error("line " + std::to_string(line_number) + " has " +
                              std::to_string(fields.size()) + " fields, expected " +
                              std::to_string(width));
        }
        for (const std::string& field : fields) cells.push_back(parse_number(field, line_number));
    }
    if (in.bad()) throw io_error("read failure while parsing CSV");

    const std::size_t rows = cells.size() / width;
    Eigen::MatrixXd values(rows, width);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                cells[r * width + c];
        }
    }
    return stats::DataMatrix(std::move(values), std::move(names));
}

stats::DataMatrix read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "' for reading");
    return read_csv(in);
}

void write_csv(std::ostream& out, const stats::DataMatrix& data) {
    for (int c = 0; c < data.cols(); ++c) {
        if (c > 0) out << ',';
        out << data.names()[static_cast<std::size_t>(c)];
    }
    out << '\n';
    char buffer[64];
    for (int r = 0; r < data.rows(); ++r) {
        for (int c = 0; c < data.cols(); ++c) {
            if (c > 0) out << ',';
            std::snprintf(buffer, sizeof(buffer), "%.17g", data.values()(r, c));
            out << buffer;
        }
        out << '\n';
    }
    if (!out) throw io_error("write failure while emitting CSV");
}

void write_csv_file(const std::string& path, const stats::DataMatrix& data) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    write_csv(out, data);
}

}  // namespace vecci::csv
