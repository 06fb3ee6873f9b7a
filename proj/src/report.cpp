#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nlt/experiments.hpp"

namespace nlt {

using nlohmann::json;

double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(ErrorCode::shape, "fitted_slope: lengths differ");
  if (x.size() < 2) throw Error(ErrorCode::insufficient_data, "fitted_slope needs at least two points");
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0)) throw Error(ErrorCode::domain, "fitted_slope: abscissae must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(std::max(y[i], 1e-16));
    mx += lx[i] / n;
    my += ly[i] / n;
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::degenerate, "fitted_slope: abscissae coincide");
  return sxy / sxx;
}

namespace {

const char* kColumns = "epsilon,l1_to_reference,tv_final,tv_bound,maxp_margin,kdev_margin,entropy_pos_part,runtime_seconds";

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_of(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

std::string emit_report(const SweepReport& report, ReportFormat format) {
  if (format == ReportFormat::csv) {
    std::ostringstream os;
    os << kColumns << '\n';
    for (const auto& r : report.rows) {
      os << fmt(r.epsilon);
      if (r.error) {
        os << ",,,,,,,\n";
        continue;
      }
      os << ',' << fmt(r.l1_to_reference) << ',' << fmt(r.tv_final) << ',' << (r.tv_bound ? fmt(*r.tv_bound) : "")
         << ',' << fmt(r.maxp_margin) << ',' << fmt(r.kdev_margin) << ',' << fmt(r.entropy_pos_part) << ','
         << fmt(r.runtime_seconds) << '\n';
    }
    return os.str();
  }

  const auto& m = report.meta;
  json meta = {{"config_hash", m.config_hash},
               {"version", m.version},
               {"kind", m.kind},
               {"grid", {{"x_min", m.x_min}, {"x_max", m.x_max}, {"n_cells", m.n_cells}, {"boundary", m.boundary}}},
               {"t_final", m.t_final},
               {"boundary_clearance", opt(m.boundary_clearance)},
               {"exploratory", m.exploratory}};
  json rows = json::array();
  for (const auto& r : report.rows) {
    json row = {{"epsilon", r.epsilon}};
    if (r.error) {
      row["error"] = *r.error;
    } else {
      row.update({{"l1_to_reference", r.l1_to_reference},
                  {"tv_final", r.tv_final},
                  {"tv_bound", opt(r.tv_bound)},
                  {"maxp_margin", r.maxp_margin},
                  {"kdev_margin", r.kdev_margin},
                  {"entropy_pos_part", r.entropy_pos_part},
                  {"runtime_seconds", r.runtime_seconds},
                  {"entropy_residuals", r.entropy_residuals}});
    }
    rows.push_back(std::move(row));
  }
  json out = {{"metadata", meta},
              {"rows", rows},
              {"slopes", {{"l1_to_reference", opt(report.l1_slope)}, {"entropy_pos_part", opt(report.entropy_slope)}}}};
  return out.dump(2) + "\n";
}

std::string emit_report(const DiagnosticsReport& report, ReportFormat format) {
  if (format == ReportFormat::csv) {
    std::ostringstream os;
    os << "metric,value,provenance\n";
    for (const auto& [name, m] : report.metrics) os << name << ',' << fmt(m.value) << ',' << m.provenance << '\n';
    return os.str();
  }
  json metrics = json::object();
  for (const auto& [name, m] : report.metrics) {
    const json value = std::isfinite(m.value) ? json(m.value) : json(nullptr);
    metrics[name] = {{"value", value}, {"provenance", m.provenance}};
  }
  return json{{"version", kVersion}, {"metrics", metrics}}.dump(2) + "\n";
}

SweepReport parse_sweep_report(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::io, std::string("sweep report is not valid JSON: ") + e.what());
  }
  try {
    SweepReport r;
    const auto& m = j.at("metadata");
    r.meta.config_hash = m.at("config_hash").get<std::string>();
    r.meta.version = m.at("version").get<std::string>();
    r.meta.kind = m.at("kind").get<std::string>();
    const auto& g = m.at("grid");
    r.meta.x_min = g.at("x_min").get<double>();
    r.meta.x_max = g.at("x_max").get<double>();
    r.meta.n_cells = g.at("n_cells").get<int>();
    r.meta.boundary = g.at("boundary").get<std::string>();
    r.meta.t_final = m.at("t_final").get<double>();
    r.meta.boundary_clearance = opt_of(m, "boundary_clearance");
    r.meta.exploratory = m.value("exploratory", false);
    for (const auto& row : j.at("rows")) {
      SweepRow s;
      s.epsilon = row.at("epsilon").get<double>();
      if (row.contains("error")) {
        s.error = row.at("error").get<std::string>();
      } else {
        s.l1_to_reference = row.at("l1_to_reference").get<double>();
        s.tv_final = row.at("tv_final").get<double>();
        s.tv_bound = opt_of(row, "tv_bound");
        s.maxp_margin = row.at("maxp_margin").get<double>();
        s.kdev_margin = row.at("kdev_margin").get<double>();
        s.entropy_pos_part = row.at("entropy_pos_part").get<double>();
        s.runtime_seconds = row.at("runtime_seconds").get<double>();
        s.entropy_residuals = row.at("entropy_residuals").get<std::vector<double>>();
      }
      r.rows.push_back(std::move(s));
    }
    const auto& sl = j.at("slopes");
    r.l1_slope = opt_of(sl, "l1_to_reference");
    r.entropy_slope = opt_of(sl, "entropy_pos_part");
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::io, std::string("sweep report is missing fields: ") + e.what());
  }
}

void write_text(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  if (ec) throw Error(ErrorCode::io, "cannot create directory '" + p.parent_path().string() + "': " + ec.message());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw Error(ErrorCode::io, "failed writing '" + path + "'");
}

}  // namespace nlt
