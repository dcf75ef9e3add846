#include "envlab/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "envlab/errors.hpp"

namespace envlab {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  return out;
}

double parse_number(const std::string& cell, const std::string& where) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw InvalidInputError(where + ": not a number: '" + cell + "'");
  return v;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

void require_columns(const CsvTable& t, const std::vector<std::string>& names, const std::string& path) {
  if (t.header != names) {
    std::string want;
    for (const auto& n : names) want += (want.empty() ? "" : ",") + n;
    throw InvalidInputError(path + ": expected columns " + want);
  }
  if (t.rows.empty()) throw InvalidInputError(path + ": no data rows");
}

std::vector<double> json_array(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) throw InvalidInputError(std::string("missing array '") + key + "'");
  return j[key].get<std::vector<double>>();
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw InvalidInputError("no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = cells;
      continue;
    }
    if (cells.size() != t.header.size())
      throw InvalidInputError(path + ":" + std::to_string(lineno) + ": wrong number of columns");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c, path + ":" + std::to_string(lineno)));
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw InvalidInputError(path + ": empty file");
  return t;
}

void write_csv(const std::string& path, const CsvTable& table) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << fmt(row[i]);
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

SampledWeight read_weight_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  require_columns(t, {"s", "u"}, path);
  if (t.rows.size() < 2) throw InvalidInputError(path + ": a weight needs at least 2 samples");
  std::vector<double> s, u;
  for (const auto& r : t.rows) {
    s.push_back(r[0]);
    u.push_back(r[1]);
  }
  const std::size_t n = s.size();
  const double left = (u[1] - u[0]) / (s[1] - s[0]);
  const double right = (u[n - 1] - u[n - 2]) / (s[n - 1] - s[n - 2]);
  if (!(left <= right)) throw InvalidInputError(path + ": end slopes are decreasing");
  return SampledWeight(std::move(s), std::move(u), left, right);
}

void write_weight_csv(const std::string& path, const SampledWeight& w) {
  CsvTable t{{"s", "u"}, {}};
  for (std::size_t i = 0; i < w.size(); ++i) t.rows.push_back({w.grid()[i], w.values()[i]});
  write_csv(path, t);
}

SampledWeight2D read_weight2d_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  require_columns(t, {"tau", "s", "phi"}, path);
  std::vector<double> tau, s, v;
  for (const auto& r : t.rows) {
    if (tau.empty() || r[0] != tau.back()) tau.push_back(r[0]);
    if (tau.size() == 1) s.push_back(r[1]);
    v.push_back(r[2]);
  }
  if (tau.size() * s.size() != v.size()) throw InvalidInputError(path + ": rows do not form a tensor grid");
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    if (t.rows[i][0] != tau[i / s.size()] || t.rows[i][1] != s[i % s.size()])
      throw InvalidInputError(path + ": rows do not form a tensor grid");
  if (tau.size() < 2 || s.size() < 2) throw InvalidInputError(path + ": 2D weight needs at least 2×2 samples");

  double p0 = std::numeric_limits<double>::infinity(), p1 = -p0, q0 = p0, q1 = -p0;
  const std::size_t ns = s.size();
  for (std::size_t i = 0; i < tau.size(); ++i)
    for (std::size_t j = 0; j < ns; ++j) {
      if (i + 1 < tau.size()) {
        const double p = (v[(i + 1) * ns + j] - v[i * ns + j]) / (tau[i + 1] - tau[i]);
        p0 = std::min(p0, p);
        p1 = std::max(p1, p);
      }
      if (j + 1 < ns) {
        const double q = (v[i * ns + j + 1] - v[i * ns + j]) / (s[j + 1] - s[j]);
        q0 = std::min(q0, q);
        q1 = std::max(q1, q);
      }
    }
  return SampledWeight2D(std::move(tau), std::move(s), std::move(v), ConvexPolygon::box(p0, p1, q0, q1));
}

void write_weight2d_csv(const std::string& path, const SampledWeight2D& w) {
  CsvTable t{{"tau", "s", "phi"}, {}};
  for (std::size_t i = 0; i < w.n_tau(); ++i)
    for (std::size_t j = 0; j < w.n_s(); ++j) t.rows.push_back({w.grid_tau()[i], w.grid_s()[j], w.at(i, j)});
  write_csv(path, t);
}

void write_family_csv(const std::string& path, const FamilyCurve& fc) {
  CsvTable t{{"t", "s", "psi"}, {}};
  for (std::size_t i = 0; i < fc.t_grid.size(); ++i)
    for (std::size_t j = 0; j < fc.psi[i].size(); ++j)
      t.rows.push_back({fc.t_grid[i], fc.psi[i].grid()[j], fc.psi[i].values()[j]});
  write_csv(path, t);
}

ModelBundlePair pair_from_json(const nlohmann::json& j) {
  try {
    const auto s = json_array(j, "s");
    const int d_A = j.at("d_A").get<int>();
    const int d_L = j.at("d_L").get<int>();
    ModelBundlePair p{SampledWeight(s, json_array(j, "phi_A"), 0.0, d_A), d_A,
                      SampledWeight(s, json_array(j, "phi_L"), 0.0, d_L), d_L};
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError(std::string("bad pair JSON: ") + e.what());
  }
}

nlohmann::json pair_to_json(const ModelBundlePair& pair) {
  return {{"s", pair.grid()},
          {"phi_A", pair.phi_A.values()},
          {"d_A", pair.d_A},
          {"phi_L", pair.phi_L.values()},
          {"d_L", pair.d_L}};
}

TotalSpaceSection section_from_json(const nlohmann::json& j) {
  try {
    TotalSpaceSection F;
    F.m = j.at("m").get<int>();
    for (const auto& c : j.at("coefficients"))
      F.terms.push_back({c.at("l").get<int>(), c.at("k").get<int>(),
                         {c.at("re").get<double>(), c.value("im", 0.0)}});
    return F;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError(std::string("bad section JSON: ") + e.what());
  }
}

nlohmann::json section_to_json(const TotalSpaceSection& F) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& t : F.terms) coeffs.push_back({{"l", t.l}, {"k", t.k}, {"re", t.c.real()}, {"im", t.c.imag()}});
  return {{"m", F.m}, {"coefficients", coeffs}};
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError(path + ": " + e.what());
  }
}

void write_json(const std::string& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

void write_report(const std::string& path, const VerificationReport& rep) { write_json(path, rep.to_json()); }

void write_plot_1d(const std::string& path, const SampledWeight& w, const SampledWeight& envelope) {
  if (w.grid() != envelope.grid()) throw InvalidInputError("weight and envelope use different grids");
  auto out = open_out(path);
  out << "# s u u_e psi\n";
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double u = w.values()[i], ue = envelope.values()[i];
    out << fmt(w.grid()[i]) << ' ' << fmt(u) << ' ' << fmt(ue) << ' ' << fmt(ue - u) << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

void write_plot_2d(const std::string& path, const SampledWeight2D& w) {
  auto out = open_out(path);
  out << "# tau s phi\n";
  for (std::size_t i = 0; i < w.n_tau(); ++i) {
    if (i) out << '\n';
    for (std::size_t j = 0; j < w.n_s(); ++j)
      out << fmt(w.grid_tau()[i]) << ' ' << fmt(w.grid_s()[j]) << ' ' << fmt(w.at(i, j)) << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace envlab
