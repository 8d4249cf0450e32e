#include "pxem/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "pxem/errors.hpp"

namespace pxem {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(std::string_view field, std::size_t line_no) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end || field.empty()) {
    throw DataError("line " + std::to_string(line_no) + ": cannot parse '" +
                    std::string(field) + "' as a number");
  }
  return v;
}

}  // namespace

Eigen::RowVector3d vaso_design_row(double volume, double rate) {
  if (!(volume > 0.0) || !(rate > 0.0)) {
    throw DataError("volume and rate must be positive");
  }
  return {1.0, std::log(volume), std::log(rate)};
}

RobitData read_robit_csv(std::istream& in, Dof nu) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string_view> header;
  std::string header_line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    header_line = std::string(t);
    break;
  }
  if (header_line.empty()) throw DataError("dataset has no header row");
  header = split(header_line);

  const bool raw_vaso = header.size() == 3 && header[0] == "volume" && header[1] == "rate" &&
                        header[2] == "y";
  if (!raw_vaso) {
    if (header.size() < 2 || header[0] != "y") {
      throw DataError("header must be 'y,x1,...,xp' or 'volume,rate,y'");
    }
    for (std::size_t j = 1; j < header.size(); ++j) {
      if (header[j] != "x" + std::to_string(j)) {
        throw DataError("unexpected column name '" + std::string(header[j]) + "'");
      }
    }
  }
  const std::size_t fields = header.size();
  const std::size_t p = raw_vaso ? 3 : fields - 1;

  std::vector<double> ys;
  std::vector<double> xs;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto cells = split(t);
    if (cells.size() != fields) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(fields) + " fields, got " + std::to_string(cells.size()));
    }
    std::vector<double> values;
    values.reserve(fields);
    for (auto c : cells) values.push_back(parse_number(c, line_no));
    const double y = raw_vaso ? values[2] : values[0];
    if (y != 0.0 && y != 1.0) {
      throw DataError("line " + std::to_string(line_no) + ": response must be 0 or 1");
    }
    ys.push_back(y);
    if (raw_vaso) {
      const Eigen::RowVector3d row = vaso_design_row(values[0], values[1]);
      xs.insert(xs.end(), row.data(), row.data() + 3);
    } else {
      xs.insert(xs.end(), values.begin() + 1, values.end());
    }
  }
  if (ys.empty()) throw DataError("dataset has no data rows");

  const auto n = static_cast<Eigen::Index>(ys.size());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = xs[i * p + j];
  }
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(ys.data(), n);
  try {
    return RobitData(std::move(x), std::move(y), nu);
  } catch (const RankDeficientError&) {
    throw;
  } catch (const PreconditionError& e) {
    throw DataError(e.what());
  }
}

RobitData load_robit_csv(const std::filesystem::path& path, Dof nu) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");
  return read_robit_csv(in, nu);
}

}  // namespace pxem
