#include "pipg/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>

#include "pipg/errors.hpp"

namespace pipg::csv {
namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Writes to `<file>.tmp` and renames on commit, so a crash or failure never
// leaves a truncated file under the final name.
class AtomicWriter {
 public:
  explicit AtomicWriter(const std::filesystem::path& file)
      : final_(file), tmp_(file.string() + ".tmp") {
    out_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!out_) {
      throw IoError("cannot open " + tmp_.string() + " for writing");
    }
  }

  ~AtomicWriter() {
    if (!committed_) {
      out_.close();
      std::error_code ec;
      std::filesystem::remove(tmp_, ec);
    }
  }

  std::ostream& stream() { return out_; }

  void commit() {
    out_.flush();
    if (!out_) {
      throw IoError("write to " + tmp_.string() + " failed");
    }
    out_.close();
    std::error_code ec;
    std::filesystem::rename(tmp_, final_, ec);
    if (ec) {
      throw IoError("cannot rename " + tmp_.string() + " to " + final_.string() + ": " +
                    ec.message());
    }
    committed_ = true;
  }

 private:
  std::filesystem::path final_;
  std::filesystem::path tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_double(const std::string& field, const std::filesystem::path& file,
                    std::size_t line_no) {
  const char* begin = field.c_str();
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(value)) {
    throw IoError(file.string() + ": line " + std::to_string(line_no) +
                  ": expected a finite number, got \"" + field + "\"");
  }
  return value;
}

// Strips one trailing '\r' so files written on other platforms still parse.
void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
}

}  // namespace

void write_dataset(const std::filesystem::path& file, const Dataset& data) {
  AtomicWriter writer(file);
  auto& out = writer.stream();
  out << "y";
  for (Eigen::Index j = 0; j < data.dimension(); ++j) {
    out << ",x_" << (j + 1);
  }
  out << "\n";
  for (Eigen::Index k = 0; k < data.count(); ++k) {
    out << format_double(data.outputs()[k]);
    for (Eigen::Index j = 0; j < data.dimension(); ++j) {
      out << "," << format_double(data.regressors()(k, j));
    }
    out << "\n";
  }
  writer.commit();
}

void write_ground_truth(const std::filesystem::path& file, const Eigen::VectorXd& truth) {
  AtomicWriter writer(file);
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    writer.stream() << format_double(truth[i]) << "\n";
  }
  writer.commit();
}

Dataset read_dataset(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + file.string());
  }

  std::string line;
  if (!std::getline(in, line)) {
    throw IoError(file.string() + ": line 1: missing header");
  }
  strip_cr(line);
  const std::vector<std::string> header = split_fields(line);
  if (header.size() < 2 || header[0] != "y") {
    throw IoError(file.string() + ": line 1: expected header y,x_1,...,x_d");
  }
  const Eigen::Index d = static_cast<Eigen::Index>(header.size()) - 1;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (header[static_cast<std::size_t>(j) + 1] != "x_" + std::to_string(j + 1)) {
      throw IoError(file.string() + ": line 1: expected column x_" + std::to_string(j + 1) +
                    ", got \"" + header[static_cast<std::size_t>(j) + 1] + "\"");
    }
  }

  std::vector<double> outputs;
  std::vector<double> regressors;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) {
      if (in.eof()) {
        break;  // tolerate one trailing newline
      }
      throw IoError(file.string() + ": line " + std::to_string(line_no) + ": empty line");
    }
    const std::vector<std::string> fields = split_fields(line);
    if (static_cast<Eigen::Index>(fields.size()) != d + 1) {
      throw IoError(file.string() + ": line " + std::to_string(line_no) + ": expected " +
                    std::to_string(d + 1) + " fields, got " + std::to_string(fields.size()));
    }
    outputs.push_back(parse_double(fields[0], file, line_no));
    for (Eigen::Index j = 0; j < d; ++j) {
      regressors.push_back(parse_double(fields[static_cast<std::size_t>(j) + 1], file, line_no));
    }
  }

  const Eigen::Index n = static_cast<Eigen::Index>(outputs.size());
  RowMatrixXd x(n, d);
  Eigen::VectorXd y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    y[k] = outputs[static_cast<std::size_t>(k)];
    for (Eigen::Index j = 0; j < d; ++j) {
      x(k, j) = regressors[static_cast<std::size_t>(k * d + j)];
    }
  }
  return Dataset(std::move(x), std::move(y));
}

Eigen::VectorXd read_ground_truth(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + file.string());
  }
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) {
      if (in.eof()) {
        break;
      }
      throw IoError(file.string() + ": line " + std::to_string(line_no) + ": empty line");
    }
    values.push_back(parse_double(line, file, line_no));
  }
  if (values.empty()) {
    throw IoError(file.string() + ": no values");
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
}

void write_trace(const std::filesystem::path& file, const solvers::Trace& trace) {
  AtomicWriter writer(file);
  auto& out = writer.stream();
  out << (trace.has_rmse ? "pass,iter,rmse" : "pass,iter") << "\n";
  for (const auto& record : trace.records) {
    out << record.pass << "," << record.iter;
    if (trace.has_rmse) {
      out << "," << format_double(record.rmse);
    }
    out << "\n";
  }
  writer.commit();
}

void write_posterior(const std::filesystem::path& file, const kalman::PosteriorState& state) {
  const bool has_cov = state.cov.rows() == state.mean.size() && state.cov.rows() > 0;
  AtomicWriter writer(file);
  auto& out = writer.stream();
  out << (has_cov ? "index,mean,two_sigma" : "index,mean") << "\n";
  for (Eigen::Index i = 0; i < state.mean.size(); ++i) {
    out << (i + 1) << "," << format_double(state.mean[i]);
    if (has_cov) {
      out << "," << format_double(2.0 * std::sqrt(state.cov(i, i)));
    }
    out << "\n";
  }
  writer.commit();
}

void write_cov_diagonals(const std::filesystem::path& file,
                         const std::vector<solvers::CovDiagSnapshot>& snapshots) {
  AtomicWriter writer(file);
  auto& out = writer.stream();
  out << "iter,index,value\n";
  for (const auto& snapshot : snapshots) {
    for (Eigen::Index i = 0; i < snapshot.diag.size(); ++i) {
      out << snapshot.iter << "," << (i + 1) << "," << format_double(snapshot.diag[i]) << "\n";
    }
  }
  writer.commit();
}

}  // namespace pipg::csv
