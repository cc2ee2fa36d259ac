#include <fstream>

#include "statopt/csv.hpp"
#include "statopt/errors.hpp"
#include "statopt/models.hpp"

namespace statopt {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  return os;
}

std::string x_header(std::size_t d) {
  std::string h;
  for (std::size_t j = 0; j < d; ++j) {
    if (j) h += ',';
    h += "x" + std::to_string(j + 1);
  }
  return h;
}

// Returns header columns and data rows; validates column counts.
CsvTable read_table(const std::string& path, std::size_t expected_cols) {
  CsvTable t = read_csv(path);
  if (expected_cols && t.header.size() != expected_cols) {
    throw ValidationError(path + ": expected " + std::to_string(expected_cols) + " columns");
  }
  return t;
}

Mat read_matrix(const CsvTable& t, std::size_t cols, const std::string& path) {
  Mat m(t.rows.size(), cols);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = parse_double(t.rows[i][j], path);
    }
  }
  return m;
}

}  // namespace

void save_dataset(const SampleSet& data, const std::string& path) {
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, NonResponseData>) {
          auto os = open_out(path);
          os << "r,y\n";
          for (std::size_t i = 0; i < d.size(); ++i) {
            os << static_cast<int>(d.r[i]) << ',';
            if (d.r[i] && d.y[i]) os << format_double(*d.y[i]);
            os << '\n';
          }
        } else if constexpr (std::is_same_v<T, MixtureData>) {
          auto os = open_out(path);
          os << x_header(d.dim()) << '\n';
          for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
            for (Eigen::Index j = 0; j < d.x.cols(); ++j) os << (j ? "," : "") << format_double(d.x(i, j));
            os << '\n';
          }
        } else if constexpr (std::is_same_v<T, RegressionData>) {
          auto os = open_out(path);
          os << x_header(d.dim()) << ",y\n";
          for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
            for (Eigen::Index j = 0; j < d.x.cols(); ++j) os << format_double(d.x(i, j)) << ',';
            os << format_double(d.y[i]) << '\n';
          }
        } else {
          throw ValidationError("save_dataset: deterministic specs have no sample file");
        }
      },
      data);
}

NonResponseData load_nonresponse(const std::string& path) {
  const auto t = read_table(path, 2);
  if (t.header[0] != "r" || t.header[1] != "y") throw ValidationError(path + ": expected header r,y");
  NonResponseData d;
  for (const auto& row : t.rows) {
    const double r = parse_double(row[0], path);
    if (r != 0.0 && r != 1.0) throw ValidationError(path + ": r must be 0 or 1");
    d.r.push_back(r == 1.0 ? 1 : 0);
    if (r == 1.0) {
      if (row[1].empty()) throw ValidationError(path + ": observed record has empty y");
      d.y.emplace_back(parse_double(row[1], path));
    } else {
      d.y.emplace_back(std::nullopt);
    }
  }
  return d;
}

MixtureData load_mixture(const std::string& path) {
  const auto t = read_table(path, 0);
  if (t.header.empty()) throw ValidationError(path + ": empty header");
  return MixtureData{read_matrix(t, t.header.size(), path)};
}

RegressionData load_regression(const std::string& path, int p) {
  const auto t = read_table(path, 0);
  if (t.header.size() < 2 || t.header.back() != "y") throw ValidationError(path + ": expected x1..xd,y header");
  const std::size_t d = t.header.size() - 1;
  Mat all = read_matrix(t, d + 1, path);
  return RegressionData{all.leftCols(static_cast<Eigen::Index>(d)), all.col(static_cast<Eigen::Index>(d)), p};
}

SampleSet load_dataset(ModelId model, const std::string& path, int p) {
  switch (model) {
    case ModelId::NonResponse: return load_nonresponse(path);
    case ModelId::Mixture: return load_mixture(path);
    case ModelId::Regression: return load_regression(path, p);
    default: throw ValidationError("load_dataset: model has no sample file");
  }
}

}  // namespace statopt
