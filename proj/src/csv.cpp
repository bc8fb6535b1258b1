#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "specnet/data_io.hpp"
#include "specnet/error.hpp"
#include "text_util.hpp"

namespace specnet {

namespace {

std::string at_line(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

}  // namespace

DataMatrix read_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string_view> header;
  std::string header_text;
  while (std::getline(in, line)) {
    ++line_no;
    if (!detail::trim(line).empty()) {
      header_text = line;
      break;
    }
  }
  if (header_text.empty()) throw Error(Errc::ParseError, "empty CSV file");
  header = detail::split(header_text, ',');
  bool has_label = detail::trim(header.back()) == "label";
  const std::size_t dim = header.size() - (has_label ? 1 : 0);
  for (std::size_t j = 0; j < dim; ++j)
    if (detail::trim(header[j]) != "f" + std::to_string(j))
      throw Error(Errc::ParseError,
                  at_line(line_no, "expected column 'f" + std::to_string(j) + "' in header"));
  if (dim == 0) throw Error(Errc::ParseError, at_line(line_no, "no feature columns"));

  std::vector<double> values;
  Labeling labels;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split(line, ',');
    if (fields.size() != header.size())
      throw Error(Errc::RaggedRows, at_line(line_no, "expected " + std::to_string(header.size()) +
                                                         " fields, found " +
                                                         std::to_string(fields.size())));
    for (std::size_t j = 0; j < dim; ++j) {
      const auto v = detail::parse_double(fields[j]);
      if (!v)
        throw Error(Errc::ParseError, at_line(line_no, "bad number '" +
                                                           std::string(detail::trim(fields[j])) +
                                                           "' in column " + std::to_string(j)));
      values.push_back(*v);
    }
    if (has_label) {
      const auto l = detail::parse_int(fields[dim]);
      if (!l)
        throw Error(Errc::ParseError, at_line(line_no, "bad label '" +
                                                           std::string(detail::trim(fields[dim])) +
                                                           "'"));
      labels.push_back(static_cast<int>(*l));
    }
    ++rows;
  }
  DataMatrix out;
  out.features = Matrix(rows, dim, std::move(values));
  if (has_label) out.labels = std::move(labels);
  return out;
}

DataMatrix load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path + "' for reading");
  return read_csv(in);
}

void write_csv(std::ostream& out, const DataMatrix& data) {
  const Matrix& x = data.features;
  if (data.labels && data.labels->size() != x.rows())
    throw Error(Errc::LengthMismatch, "label count does not match row count");
  for (std::size_t j = 0; j < x.cols(); ++j) out << (j ? "," : "") << 'f' << j;
  if (data.labels) out << ",label";
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", x(i, j));
      out << (j ? "," : "") << buf;
    }
    if (data.labels) out << ',' << (*data.labels)[i];
    out << '\n';
  }
}

void save_csv(const DataMatrix& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot open '" + path + "' for writing");
  write_csv(out, data);
  if (!out) throw Error(Errc::IoError, "write to '" + path + "' failed");
}

}  // namespace specnet
