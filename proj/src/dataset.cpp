#include "maasim/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>

namespace maasim {

namespace {

constexpr std::string_view kGroupNames[] = {"housing", "environment", "services", "healthcare", "leisure", "none"};

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view cell, std::size_t row, std::size_t col) {
  cell = trim(cell);
  if (cell.empty()) throw ParseError(row, col, "empty cell");
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size())
    throw ParseError(row, col, "not a number: '" + std::string(cell) + "'");
  if (!std::isfinite(value)) throw ParseError(row, col, "non-finite value");
  return value;
}

int parse_class(std::string_view cell, std::size_t row, std::size_t col) {
  cell = trim(cell);
  if (cell.empty()) throw ParseError(row, col, "empty class cell");
  int value = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size())
    throw ParseError(row, col, "class is not an integer: '" + std::string(cell) + "'");
  if (value < kMinClass || value > kMaxClass)
    throw RangeError("class " + std::to_string(value) + " at row " + std::to_string(row) + " outside [1, 6]");
  return value;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void validate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.n_rows == 0) throw ConfigError("synthetic: n_rows must be positive");
  if (cfg.n_indicators == 0) throw ConfigError("synthetic: n_indicators must be positive");
  if (cfg.n_latent == 0 || cfg.n_latent > cfg.n_indicators)
    throw ConfigError("synthetic: need 1 <= n_latent <= n_indicators");
  if (cfg.n_noise >= cfg.n_indicators) throw ConfigError("synthetic: at least one signal indicator required");
  if (!(cfg.noise_sd >= 0.0)) throw ConfigError("synthetic: noise_sd must be non-negative");
  if (cfg.class_cuts.empty()) throw ConfigError("synthetic: class_cuts must not be empty");
  for (std::size_t i = 0; i < cfg.class_cuts.size(); ++i) {
    if (!std::isfinite(cfg.class_cuts[i])) throw ConfigError("synthetic: non-finite class cut");
    if (i > 0 && !(cfg.class_cuts[i] > cfg.class_cuts[i - 1]))
      throw ConfigError("synthetic: class_cuts must be strictly increasing");
  }
  if (cfg.cut_mode == CutMode::quantile && (cfg.class_cuts.front() <= 0.0 || cfg.class_cuts.back() >= 1.0))
    throw ConfigError("synthetic: quantile cuts must lie in (0, 1)");
  if (cfg.first_class < kMinClass ||
      cfg.first_class + static_cast<int>(cfg.class_cuts.size()) > kMaxClass)
    throw ConfigError("synthetic: classes would fall outside [1, 6]");
  if (cfg.loadings && (cfg.loadings->rows() != cfg.n_indicators || cfg.loadings->cols() != cfg.n_latent))
    throw ConfigError("synthetic: loadings must be n_indicators x n_latent");
  if (cfg.score_weights && cfg.score_weights->size() != cfg.n_indicators)
    throw ConfigError("synthetic: score_weights must match n_indicators");
  if (!cfg.names.empty() && cfg.names.size() != cfg.n_indicators)
    throw ConfigError("synthetic: names must match n_indicators");
}

}  // namespace

std::string_view to_string(Group g) noexcept { return kGroupNames[static_cast<std::size_t>(g)]; }

Group group_from_string(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kGroupNames); ++i)
    if (kGroupNames[i] == name) return static_cast<Group>(i);
  throw FormatError("unknown indicator group '" + std::string(name) + "'");
}

Group group_from_indicator_name(std::string_view name) noexcept {
  const auto us = name.find('_');
  if (us == std::string_view::npos) return Group::none;
  const auto prefix = name.substr(0, us);
  for (std::size_t i = 0; i + 1 < std::size(kGroupNames); ++i)
    if (kGroupNames[i] == prefix) return static_cast<Group>(i);
  return Group::none;
}

std::vector<std::string> Dataset::names() const {
  std::vector<std::string> out;
  out.reserve(meta.size());
  for (const auto& m : meta) out.push_back(m.name);
  return out;
}

std::optional<std::size_t> Dataset::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < meta.size(); ++i)
    if (meta[i].name == name) return i;
  return std::nullopt;
}

std::optional<std::size_t> Dataset::row_index(std::string_view id) const {
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (ids[i] == id) return i;
  return std::nullopt;
}

std::vector<double> Dataset::targets() const { return {classes.begin(), classes.end()}; }

void Dataset::validate() const {
  if (records.rows() != classes.size() || classes.size() != ids.size())
    throw ShapeError("dataset: records, classes and ids disagree on row count");
  if (records.rows() > 0 && records.cols() != meta.size())
    throw ShapeError("dataset: records and meta disagree on column count");
  for (std::size_t i = 0; i < meta.size(); ++i)
    if (meta[i].index != i) throw FormatError("dataset: indicator indices must be 0..n-1 in order");
  for (int c : classes)
    if (c < kMinClass || c > kMaxClass) throw RangeError("dataset: class outside [1, 6]");
  for (double v : records.values())
    if (!std::isfinite(v)) throw RangeError("dataset: non-finite indicator value");
}

Dataset parse_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("dataset: missing header");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF && static_cast<unsigned char>(line[1]) == 0xBB &&
      static_cast<unsigned char>(line[2]) == 0xBF)
    line.erase(0, 3);
  const auto header = split_csv_line(line);
  if (header.size() < 3 || trim(header.front()) != "id" || trim(header.back()) != "class")
    throw FormatError("dataset: header must be 'id,<indicators...>,class'");

  Dataset ds;
  const std::size_t n_ind = header.size() - 2;
  ds.meta.reserve(n_ind);
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < n_ind; ++i) {
    std::string name(trim(header[i + 1]));
    if (name.empty()) throw FormatError("dataset: empty indicator name in header");
    if (!seen.emplace(name, i).second) throw FormatError("dataset: duplicate indicator '" + name + "'");
    ds.meta.push_back({i, name, group_from_indicator_name(name), ""});
  }

  std::vector<double> row(n_ind);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw ParseError(line_no, cells.size(),
                       "expected " + std::to_string(header.size()) + " cells, found " + std::to_string(cells.size()));
    const auto id = trim(cells.front());
    if (id.empty()) throw ParseError(line_no, 1, "empty id");
    for (std::size_t i = 0; i < n_ind; ++i) row[i] = parse_number(cells[i + 1], line_no, i + 2);
    ds.classes.push_back(parse_class(cells.back(), line_no, cells.size()));
    ds.ids.emplace_back(id);
    ds.records.append_row(row);
  }
  if (ds.records.rows() == 0) ds.records = Matrix(0, n_ind);
  ds.validate();
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open dataset '" + path.string() + "'");
  return parse_dataset(in);
}

void write_dataset(const Dataset& ds, std::ostream& out) {
  out << "id";
  for (const auto& m : ds.meta) out << ',' << m.name;
  out << ",class\n";
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    out << ds.ids[r];
    for (double v : ds.records.row(r)) out << ',' << format_double(v);
    out << ',' << ds.classes[r] << '\n';
  }
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write dataset '" + path.string() + "'");
  write_dataset(ds, out);
}

std::map<int, std::size_t> class_histogram(const Dataset& ds) {
  std::map<int, std::size_t> h;
  for (int c = kMinClass; c <= kMaxClass; ++c) h[c] = 0;
  for (int c : ds.classes) ++h[c];
  return h;
}

Dataset select_rows(const Dataset& ds, std::span<const std::size_t> rows) {
  Dataset out;
  out.meta = ds.meta;
  out.records = select_rows(ds.records, rows);
  out.classes.reserve(rows.size());
  out.ids.reserve(rows.size());
  for (auto r : rows) {
    out.classes.push_back(ds.classes[r]);
    out.ids.push_back(ds.ids[r]);
  }
  return out;
}

Dataset select_columns(const Dataset& ds, std::span<const std::size_t> cols) {
  Dataset out;
  out.records = select_columns(ds.records, cols);
  out.classes = ds.classes;
  out.ids = ds.ids;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    auto m = ds.meta.at(cols[j]);
    m.index = j;
    out.meta.push_back(std::move(m));
  }
  return out;
}

Dataset project_columns(const Dataset& ds, std::span<const std::string> names) {
  std::vector<std::size_t> cols;
  cols.reserve(names.size());
  for (const auto& n : names) {
    auto idx = ds.column_index(n);
    if (!idx) throw ReferenceError("dataset has no indicator named '" + n + "'");
    cols.push_back(*idx);
  }
  return select_columns(ds, cols);
}

double SyntheticTruth::hidden_score(std::span<const double> x, double offset) const {
  double h = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) h += score_weights[k] * (x[k] - offset);
  return h / score_scale;
}

SyntheticData generate_synthetic_with_truth(const SyntheticConfig& cfg) {
  validate_synthetic(cfg);
  const std::size_t p = cfg.n_indicators;
  const std::size_t q = cfg.n_latent;
  const std::size_t n_signal = p - cfg.n_noise;

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SyntheticTruth truth;
  if (cfg.loadings) {
    truth.loadings = *cfg.loadings;
  } else {
    // Simple structure: each signal indicator loads mainly on one factor.
    truth.loadings = Matrix(p, q);
    for (std::size_t k = 0; k < n_signal; ++k)
      for (std::size_t j = 0; j < q; ++j)
        truth.loadings(k, j) = (j == k % q) ? 0.6 + 0.4 * unit(rng) : 0.3 * unit(rng);
  }
  truth.score_weights.assign(p, 0.0);
  if (cfg.score_weights)
    truth.score_weights = *cfg.score_weights;
  else
    for (std::size_t k = 0; k < n_signal; ++k) truth.score_weights[k] = 0.5 + unit(rng);

  double var = 0.0;
  for (std::size_t j = 0; j < q; ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < p; ++k) s += truth.score_weights[k] * truth.loadings(k, j);
    var += s * s;
  }
  for (std::size_t k = 0; k < p; ++k) var += cfg.noise_sd * cfg.noise_sd * truth.score_weights[k] * truth.score_weights[k];
  truth.score_scale = var > 0.0 ? std::sqrt(var) : 1.0;

  SyntheticData out;
  Dataset& ds = out.data;
  ds.records = Matrix(cfg.n_rows, p);
  std::vector<double> z(q);
  for (std::size_t r = 0; r < cfg.n_rows; ++r) {
    for (auto& v : z) v = gauss(rng);
    auto x = ds.records.row(r);
    for (std::size_t k = 0; k < p; ++k) {
      double v = 0.0;
      for (std::size_t j = 0; j < q; ++j) v += truth.loadings(k, j) * z[j];
      // Pure-noise indicators get unit variance so they never come out constant.
      const double sd = k < n_signal ? cfg.noise_sd : 1.0;
      const double e = gauss(rng);
      x[k] = cfg.offset + v + sd * e;
    }
  }

  truth.hidden.resize(cfg.n_rows);
  for (std::size_t r = 0; r < cfg.n_rows; ++r) truth.hidden[r] = truth.hidden_score(ds.records.row(r), cfg.offset);

  ds.classes.assign(cfg.n_rows, cfg.first_class);
  if (cfg.cut_mode == CutMode::absolute) {
    truth.thresholds = cfg.class_cuts;
    for (std::size_t r = 0; r < cfg.n_rows; ++r)
      for (double c : cfg.class_cuts)
        if (truth.hidden[r] >= c) ++ds.classes[r];
  } else {
    std::vector<std::size_t> order(cfg.n_rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return truth.hidden[a] < truth.hidden[b]; });
    std::vector<std::size_t> rank_cuts;
    for (double c : cfg.class_cuts) {
      const auto rc = static_cast<std::size_t>(std::llround(c * static_cast<double>(cfg.n_rows)));
      rank_cuts.push_back(rc);
      truth.thresholds.push_back(rc < cfg.n_rows ? truth.hidden[order[rc]] : INFINITY);
    }
    for (std::size_t rank = 0; rank < cfg.n_rows; ++rank)
      for (auto rc : rank_cuts)
        if (rank >= rc) ++ds.classes[order[rank]];
  }

  for (std::size_t k = 0; k < p; ++k) {
    std::string name;
    if (!cfg.names.empty()) {
      name = cfg.names[k];
    } else {
      char buf[32];
      std::snprintf(buf, sizeof buf, "_%02zu", k / 5 + 1);
      name = std::string(to_string(kDisplayGroups[k % 5])) + buf;
    }
    ds.meta.push_back({k, name, group_from_indicator_name(name), ""});
  }
  ds.ids.reserve(cfg.n_rows);
  for (std::size_t r = 0; r < cfg.n_rows; ++r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "nb-%04zu", r + 1);
    ds.ids.emplace_back(buf);
  }
  out.truth = std::move(truth);
  return out;
}

Dataset generate_synthetic(const SyntheticConfig& cfg) { return generate_synthetic_with_truth(cfg).data; }

}  // namespace maasim
