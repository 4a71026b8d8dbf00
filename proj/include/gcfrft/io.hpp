#pragma once

// File formats: CSV matrices, edge lists, point sets, operator dumps, JSON
// sidecars for signals, filter parameters and training configuration.

#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gcfrft/error.hpp"
#include "gcfrft/graph.hpp"
#include "gcfrft/metrics.hpp"
#include "gcfrft/transforms.hpp"
#include "gcfrft/types.hpp"
#include "gcfrft/wiener.hpp"

namespace gcfrft::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace detail {
inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  return out;
}

inline std::optional<double> parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

/// Numeric rows of a CSV file. A first line with a non-numeric cell is
/// treated as a header and skipped.
inline std::vector<std::vector<double>> read_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    std::vector<double> row;
    row.reserve(cells.size());
    bool numeric = true;
    for (const auto& c : cells) {
      const auto v = parse_double(c);
      if (!v) {
        numeric = false;
        break;
      }
      row.push_back(*v);
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw Error(ErrorCode::io, path.string() + ":" + std::to_string(line_no) +
                                     ": non-numeric cell");
    }
    first = false;
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  return out;
}

inline fs::path with_suffix(const fs::path& path, const std::string& suffix) {
  fs::path p = path;
  p.replace_filename(path.stem().string() + suffix + path.extension().string());
  return p;
}
}  // namespace detail

inline void write_matrix_csv(const fs::path& path, const Matrix& m) {
  auto out = detail::open_out(path);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_number(m(i, j));
    }
    out << '\n';
  }
}

inline Matrix read_matrix_csv(const fs::path& path) {
  const auto rows = detail::read_rows(path);
  if (rows.empty()) throw Error(ErrorCode::io, path.string() + ": empty matrix");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) {
      throw Error(ErrorCode::io, path.string() + ": ragged rows");
    }
    for (size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return m;
}

/// Real signals go to `path`; complex ones to `<stem>_re<ext>` and
/// `<stem>_im<ext>`.
inline void write_signal(const fs::path& path, const TimeVertexSignal& s) {
  if (s.real_flag) {
    write_matrix_csv(path, s.data.real());
    return;
  }
  write_matrix_csv(detail::with_suffix(path, "_re"), s.data.real());
  write_matrix_csv(detail::with_suffix(path, "_im"), s.data.imag());
}

inline TimeVertexSignal read_signal(const fs::path& path) {
  if (fs::exists(path)) return TimeVertexSignal::from_real(read_matrix_csv(path));
  const fs::path re = detail::with_suffix(path, "_re");
  const fs::path im = detail::with_suffix(path, "_im");
  if (!fs::exists(re) || !fs::exists(im)) {
    throw Error(ErrorCode::io, "no signal at " + path.string());
  }
  const Matrix r = read_matrix_csv(re);
  const Matrix i = read_matrix_csv(im);
  if (r.rows() != i.rows() || r.cols() != i.cols()) {
    throw Error(ErrorCode::io, "real and imaginary parts differ in shape");
  }
  CMatrix c(r.rows(), r.cols());
  c.real() = r;
  c.imag() = i;
  return TimeVertexSignal::from_complex(std::move(c));
}

struct SignalMeta {
  Index n1 = 0;
  Index n2 = 0;
  std::optional<std::string> family;
  std::vector<double> orders;
  std::optional<double> lambda;
};

inline json to_json(const SignalMeta& m) {
  json j{{"n1", m.n1}, {"n2", m.n2}, {"orders", m.orders}};
  j["family"] = m.family ? json(*m.family) : json(nullptr);
  j["lambda"] = m.lambda ? json(*m.lambda) : json(nullptr);
  return j;
}

inline SignalMeta signal_meta_from_json(const json& j) {
  SignalMeta m;
  m.n1 = j.at("n1").get<Index>();
  m.n2 = j.at("n2").get<Index>();
  if (j.contains("family") && !j["family"].is_null()) m.family = j["family"].get<std::string>();
  if (j.contains("orders")) m.orders = j["orders"].get<std::vector<double>>();
  if (j.contains("lambda") && !j["lambda"].is_null()) m.lambda = j["lambda"].get<double>();
  return m;
}

inline void write_json(const fs::path& path, const json& j) {
  auto out = detail::open_out(path);
  out << j.dump(2) << '\n';
}

inline json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::config, path.string() + ": " + e.what());
  }
}

/// Edge list with header `src,dst,weight`, 0-based. The node count is
/// `n` when given, otherwise one more than the largest index.
inline Graph read_edge_list(const fs::path& path, std::optional<Index> n = std::nullopt) {
  const auto rows = detail::read_rows(path);
  Index count = n.value_or(0);
  for (const auto& r : rows) {
    if (r.size() != 3) throw Error(ErrorCode::io, path.string() + ": expected src,dst,weight");
    if (!n) count = std::max<Index>(count, static_cast<Index>(std::max(r[0], r[1])) + 1);
  }
  if (count < 1) throw Error(ErrorCode::io, path.string() + ": no edges");
  Matrix a = Matrix::Zero(count, count);
  for (const auto& r : rows) {
    const auto i = static_cast<Index>(r[0]);
    const auto j = static_cast<Index>(r[1]);
    if (r[0] != static_cast<double>(i) || r[1] != static_cast<double>(j) || i < 0 || j < 0 ||
        i >= count || j >= count) {
      throw Error(ErrorCode::io, path.string() + ": bad vertex index");
    }
    a(i, j) = r[2];
    a(j, i) = r[2];
  }
  return Graph(std::move(a), path.filename().string());
}

inline void write_edge_list(const fs::path& path, const Graph& g) {
  auto out = detail::open_out(path);
  out << "src,dst,weight\n";
  const Matrix& a = g.adjacency();
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = i + 1; j < a.cols(); ++j) {
      if (a(i, j) != 0.0) out << i << ',' << j << ',' << format_number(a(i, j)) << '\n';
    }
  }
}

/// Point file `id,x1,...,xd`; rows are placed by id.
inline Matrix read_points(const fs::path& path) {
  const auto rows = detail::read_rows(path);
  if (rows.empty() || rows.front().size() < 2) {
    throw Error(ErrorCode::io, path.string() + ": expected id,x1,...,xd");
  }
  const auto d = static_cast<Index>(rows.front().size() - 1);
  Matrix p(static_cast<Index>(rows.size()), d);
  std::vector<bool> seen(rows.size(), false);
  for (const auto& r : rows) {
    const auto id = static_cast<Index>(r[0]);
    if (static_cast<Index>(r.size()) != d + 1 || id < 0 || id >= p.rows() ||
        seen[static_cast<size_t>(id)]) {
      throw Error(ErrorCode::io, path.string() + ": bad or duplicate point id");
    }
    seen[static_cast<size_t>(id)] = true;
    for (Index c = 0; c < d; ++c) p(id, c) = r[static_cast<size_t>(c + 1)];
  }
  return p;
}

inline void write_points(const fs::path& path, const Matrix& p) {
  auto out = detail::open_out(path);
  out << "id";
  for (Index c = 0; c < p.cols(); ++c) out << ",x" << (c + 1);
  out << '\n';
  for (Index i = 0; i < p.rows(); ++i) {
    out << i;
    for (Index c = 0; c < p.cols(); ++c) out << ',' << format_number(p(i, c));
    out << '\n';
  }
}

/// Row-major, each entry written as `re,im`.
inline void write_operator_csv(const fs::path& path, const CMatrix& m) {
  auto out = detail::open_out(path);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_number(m(i, j).real()) << ',' << format_number(m(i, j).imag());
    }
    out << '\n';
  }
}

inline CMatrix read_operator_csv(const fs::path& path) {
  const Matrix raw = read_matrix_csv(path);
  if (raw.cols() % 2 != 0) throw Error(ErrorCode::io, path.string() + ": odd column count");
  CMatrix m(raw.rows(), raw.cols() / 2);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = Complex(raw(i, 2 * j), raw(i, 2 * j + 1));
  }
  return m;
}

inline json to_json(const FilterParams& p) {
  std::vector<double> h;
  h.reserve(static_cast<size_t>(p.h.size()));
  for (Index i = 0; i < p.h.rows(); ++i) {
    for (Index j = 0; j < p.h.cols(); ++j) h.push_back(p.h(i, j));
  }
  return {{"alpha", p.alpha}, {"beta", p.beta}, {"lambda", p.lambda}, {"rows", p.h.rows()},
          {"cols", p.h.cols()}, {"h", h}};
}

inline FilterParams filter_params_from_json(const json& j) {
  FilterParams p;
  p.alpha = j.at("alpha").get<double>();
  p.beta = j.at("beta").get<double>();
  p.lambda = j.at("lambda").get<double>();
  const auto h = j.at("h").get<std::vector<double>>();
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  if (static_cast<Index>(h.size()) != rows * cols) {
    throw Error(ErrorCode::config, "filter h has " + std::to_string(h.size()) + " entries");
  }
  p.h.resize(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index c = 0; c < cols; ++c) p.h(i, c) = h[static_cast<size_t>(i * cols + c)];
  }
  return p;
}

inline void write_trace_csv(const fs::path& path, const std::vector<TraceRow>& trace) {
  auto out = detail::open_out(path);
  out << "epoch,loss,alpha,beta\n";
  for (const auto& r : trace) {
    out << r.epoch << ',' << format_number(r.loss) << ',' << format_number(r.alpha) << ','
        << format_number(r.beta) << '\n';
  }
}

inline json to_json(const TrainConfig& c) {
  return {{"lr_orders", c.lr_orders},
          {"lr_filter", c.lr_filter},
          {"epochs", c.epochs},
          {"optimizer", c.optimizer == Optimizer::gd ? "gd" : "adam"},
          {"fd_step", c.fd_step},
          {"grad_mode", c.grad_mode == GradMode::fd ? "fd" : "analytic"},
          {"seed", c.seed},
          {"init_order", c.init_order}};
}

/// Missing keys keep their defaults; `optimizer: adam` switches the defaults
/// for rates and epochs to the Adam ones before explicit keys are applied.
inline TrainConfig train_config_from_json(const json& j) {
  try {
    TrainConfig c;
    if (j.contains("optimizer")) {
      const auto name = j["optimizer"].get<std::string>();
      if (name == "adam") {
        c = TrainConfig::adam_defaults();
      } else if (name != "gd") {
        throw Error(ErrorCode::config, "optimizer must be gd or adam");
      }
    }
    if (j.contains("lr_orders")) c.lr_orders = j["lr_orders"].get<double>();
    if (j.contains("lr_filter")) c.lr_filter = j["lr_filter"].get<double>();
    if (j.contains("epochs")) c.epochs = j["epochs"].get<int>();
    if (j.contains("fd_step")) c.fd_step = j["fd_step"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("init_order")) c.init_order = j["init_order"].get<double>();
    if (j.contains("grad_mode")) {
      const auto mode = j["grad_mode"].get<std::string>();
      if (mode == "fd") {
        c.grad_mode = GradMode::fd;
      } else if (mode == "analytic") {
        c.grad_mode = GradMode::analytic;
      } else {
        throw Error(ErrorCode::config, "grad_mode must be fd or analytic");
      }
    }
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::config, std::string("train config: ") + e.what());
  }
}

}  // namespace gcfrft::io
