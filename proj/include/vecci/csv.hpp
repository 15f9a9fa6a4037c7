#pragma once

#include <iosfwd>
#include <string>

#include "vecci/stats.hpp"

namespace vecci::csv {

// Comma-separated numeric table with a mandatory header row, '.' decimal
// separator, no quoting.  Parse problems raise input_error; unreadable or
// unwritable paths raise io_error.
stats::DataMatrix read_csv(std::istream& in);
stats::DataMatrix read_csv_file(const std::string& path);

// %.17g formatting so a write/read round trip reproduces every double bit.
void write_csv(std::ostream& out, const stats::DataMatrix& data);
void write_csv_file(const std::string& path, const stats::DataMatrix& data);

}  // namespace vecci::csv
