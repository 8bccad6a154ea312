#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "bivrec/errors.hpp"

namespace bivrec {

// Minimal CSV support for the artifact's fixed schemas (no quoting, fields
// never contain commas). Lines starting with '#' are metadata headers.

std::vector<std::string> split_csv_line(const std::string& line);

// Reads all non-comment lines of a CSV file; first one is the column header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> comments;  // leading '#' lines, verbatim
};

CsvTable read_csv(const std::string& path);

// Column index by name; throws DataError naming the file when absent.
int column_index(const CsvTable& t, const std::string& name, const std::string& path);

double parse_double(const std::string& s, const std::string& context);
long parse_long(const std::string& s, const std::string& context);

// Fixed-width-free, locale-independent double formatting.
std::string fmt_full(double x);   // 17 significant digits; lossless round trip
std::string fmt_short(double x);  // 10 significant digits; report precision

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& meta_comment,
            const std::string& header);
  void write_row(const std::vector<std::string>& fields);
  void close();
  ~CsvWriter();

 private:
  std::ofstream out_;
  std::string path_;
};

}  // namespace bivrec
