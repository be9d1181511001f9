#include "mee/sample.hpp"

#include "mee/errors.hpp"
#include "mee/format.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace mee {

void Sample::validate() const {
  if (x.rows() != y.size()) {
    throw DimensionMismatch("sample has " + std::to_string(x.rows()) +
                            " inputs but " + std::to_string(y.size()) + " outputs");
  }
  if (x.cols() < 1) throw DimensionMismatch("sample inputs have no columns");
  if (!x.allFinite() || !y.allFinite()) {
    throw InvalidArgument("sample contains non-finite values");
  }
}

void write_sample_csv(const Sample& sample, const std::filesystem::path& path) {
  sample.validate();
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  for (Eigen::Index k = 0; k < sample.x.cols(); ++k) out << 'x' << (k + 1) << ',';
  out << "y\n";
  for (Eigen::Index i = 0; i < sample.x.rows(); ++i) {
    for (Eigen::Index k = 0; k < sample.x.cols(); ++k) {
      out << format_double(sample.x(i, k)) << ',';
    }
    out << format_double(sample.y(i)) << '\n';
  }
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

Sample read_sample_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open sample file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("sample file is empty");

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header.back() != "y") {
    throw InvalidArgument("sample header must be x1,...,xn,y");
  }
  for (std::size_t k = 0; k + 1 < header.size(); ++k) {
    if (header[k] != "x" + std::to_string(k + 1)) {
      throw InvalidArgument("unexpected sample column '" + header[k] + "'");
    }
  }
  const std::size_t n = header.size() - 1;

  std::vector<double> xs;
  std::vector<double> ys;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0) {
        throw InvalidArgument("row " + std::to_string(row) + ": bad number '" + cell + "'");
      }
      values.push_back(v);
    }
    if (values.size() != n + 1) {
      throw DimensionMismatch("row " + std::to_string(row) + " has " +
                              std::to_string(values.size()) + " columns, expected " +
                              std::to_string(n + 1));
    }
    xs.insert(xs.end(), values.begin(), values.end() - 1);
    ys.push_back(values.back());
  }

  Sample s;
  const auto m = static_cast<Eigen::Index>(ys.size());
  s.x = Eigen::Map<InputMatrix>(xs.data(), m, static_cast<Eigen::Index>(n));
  s.y = Eigen::Map<Eigen::VectorXd>(ys.data(), m);
  s.validate();
  return s;
}

} // namespace mee
