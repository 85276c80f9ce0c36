#include "floquet/report.hpp"

#include <fstream>
#include <sstream>

namespace floquet {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string csvBody(const std::vector<std::string>& header,
                    const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  for (size_t i = 0; i < header.size(); ++i)
    os << (i ? "," : "") << header[i];
  os << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i)
      os << (i ? "," : "") << num(row[i]);
    os << "\n";
  }
  return os.str();
}

void writeFile(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NumericError("cannot write " + path);
  out << body;
}

std::string trajectoryCsv(const std::vector<double>& times,
                          const MatC& samples) {
  std::vector<std::string> header{"t"};
  const int n = static_cast<int>(samples.rows());
  for (int i = 0; i < n; ++i) header.push_back("re_u" + std::to_string(i + 1));
  for (int i = 0; i < n; ++i) header.push_back("im_u" + std::to_string(i + 1));
  std::vector<std::vector<double>> rows;
  for (size_t c = 0; c < times.size(); ++c) {
    std::vector<double> row{times[c]};
    for (int i = 0; i < n; ++i)
      row.push_back(samples(i, static_cast<long>(c)).real());
    for (int i = 0; i < n; ++i)
      row.push_back(samples(i, static_cast<long>(c)).imag());
    rows.push_back(std::move(row));
  }
  return csvBody(header, rows);
}

void parseTrajectoryCsv(const std::string& body, std::vector<double>* times,
                        MatC* samples) {
  std::istringstream in(body);
  std::string line;
  do {
    if (!std::getline(in, line)) throw ParseError("empty CSV");
  } while (!line.empty() && line[0] == '#');
  int cols = 1;
  for (char c : line)
    if (c == ',') ++cols;
  if (cols < 3 || (cols - 1) % 2 != 0)
    throw ParseError("trajectory CSV needs columns t, re_u*, im_u*");
  int n = (cols - 1) / 2;

  times->clear();
  std::vector<std::vector<double>> rows;
  int lineNo = 1;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> vals;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(lineNo) +
                         ": bad number '" + cell + "'");
      }
    }
    if (static_cast<int>(vals.size()) != cols)
      throw ParseError("line " + std::to_string(lineNo) +
                       ": wrong column count");
    rows.push_back(std::move(vals));
  }
  samples->resize(n, static_cast<long>(rows.size()));
  for (size_t r = 0; r < rows.size(); ++r) {
    times->push_back(rows[r][0]);
    for (int i = 0; i < n; ++i)
      (*samples)(i, static_cast<long>(r)) =
          Complex(rows[r][static_cast<size_t>(1 + i)],
                  rows[r][static_cast<size_t>(1 + n + i)]);
  }
}

std::string fnv1aHex(const std::string& bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace floquet
