#include "barronforge/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "barronforge/constructor.hpp"
#include "barronforge/rng.hpp"
#include "barronforge/spectral.hpp"

namespace barronforge {

namespace {

template <typename T>
void read_list(const nlohmann::json& doc, const char* key, std::vector<T>& out) {
  auto it = doc.find(key);
  if (it == doc.end()) return;
  if (!it->is_array()) throw std::invalid_argument(std::string(key) + " must be an array");
  out = it->get<std::vector<T>>();
}

template <typename T>
void read_value(const nlohmann::json& doc, const char* key, T& out) {
  auto it = doc.find(key);
  if (it != doc.end()) out = it->get<T>();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

void SweepConfig::validate() const {
  if (dims.empty() || ms.empty() || seeds.empty()) throw std::invalid_argument("sweep needs nonempty dims, ms and seeds");
  for (int d : dims) {
    if (d < 1) throw std::invalid_argument("sweep dimensions must be >= 1");
  }
  for (int m : ms) {
    if (m < 1) throw std::invalid_argument("sweep m values must be >= 1");
  }
  if (n_modes < 1) throw std::invalid_argument("n_modes must be >= 1");
  if (!(log_exponent > 1.0)) throw std::invalid_argument("log_exponent must exceed 1");
  if (quad_points < 16) throw std::invalid_argument("quad_points must be >= 16");
  if (max_retries < 1) throw std::invalid_argument("max_retries must be >= 1");
  if (!(error_slack >= 1.0)) throw std::invalid_argument("error_slack must be >= 1");
  if (workers < 0) throw std::invalid_argument("workers must be >= 0");
}

nlohmann::json sweep_config_to_json(const SweepConfig& c) {
  return {{"variant", variant_name(c.variant)},
          {"dims", c.dims},
          {"ms", c.ms},
          {"seeds", c.seeds},
          {"n_modes", c.n_modes},
          {"log_exponent", c.log_exponent},
          {"target_seed", c.target_seed},
          {"quad_points", c.quad_points},
          {"max_retries", c.max_retries},
          {"error_slack", c.error_slack},
          {"workers", c.workers}};
}

void merge_sweep_config(SweepConfig& c, const nlohmann::json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("sweep config must be a JSON object");
  static const char* known[] = {"variant",    "dims",        "ms",          "seeds",       "n_modes", "log_exponent",
                                "target_seed", "quad_points", "max_retries", "error_slack", "workers"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) == std::end(known)) {
      throw std::invalid_argument("unknown sweep config key '" + key + "'");
    }
  }
  try {
    if (auto it = doc.find("variant"); it != doc.end()) c.variant = parse_variant(it->get<std::string>());
    read_list(doc, "dims", c.dims);
    read_list(doc, "ms", c.ms);
    read_list(doc, "seeds", c.seeds);
    read_value(doc, "n_modes", c.n_modes);
    read_value(doc, "log_exponent", c.log_exponent);
    read_value(doc, "target_seed", c.target_seed);
    read_value(doc, "quad_points", c.quad_points);
    read_value(doc, "max_retries", c.max_retries);
    read_value(doc, "error_slack", c.error_slack);
    read_value(doc, "workers", c.workers);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad sweep config: ") + e.what());
  }
}

QuadratureSpec sweep_quadrature(int d, int n_points, std::uint64_t seed) {
  return d <= 3 ? QuadratureSpec::grid(n_points) : QuadratureSpec::monte_carlo(n_points, seed);
}

SpectralTarget sweep_target(const SweepConfig& config, int d) {
  const std::uint64_t ts = RandomStream(config.target_seed).split(static_cast<std::uint64_t>(d)).seed();
  return synth_target(d, config.n_modes, config.log_exponent, ts);
}

BuildConfig sweep_cell_config(const SweepConfig& config, int d, int m, std::uint64_t seed) {
  const RandomStream stream = RandomStream(seed).split({static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(m)});
  BuildConfig bc;
  bc.m = m;
  bc.variant = config.variant;
  bc.seed = stream.split(1).seed();
  bc.max_retries = config.max_retries;
  bc.error_slack = config.error_slack;
  bc.quad = sweep_quadrature(d, config.quad_points, stream.split(2).seed());
  return bc;
}

std::vector<SweepRow> run_sweep(const SweepConfig& config) {
  config.validate();

  std::vector<int> dims = config.dims;
  std::sort(dims.begin(), dims.end());
  dims.erase(std::unique(dims.begin(), dims.end()), dims.end());
  std::vector<int> ms = config.ms;
  std::sort(ms.begin(), ms.end());
  ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
  std::vector<std::uint64_t> seeds = config.seeds;
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

  std::map<int, SpectralTarget> targets;
  for (int d : dims) targets.emplace(d, sweep_target(config, d));

  struct Cell {
    int d;
    int m;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (int d : dims) {
    for (int m : ms) {
      for (auto s : seeds) cells.push_back({d, m, s});
    }
  }

  std::vector<SweepRow> rows(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& cell = cells[i];
      try {
        const BuildResult res = build(targets.at(cell.d), sweep_cell_config(config, cell.d, cell.m, cell.seed));
        const BuildReport& r = res.report;
        rows[i] = SweepRow{cell.d,        cell.m,        cell.seed,       config.variant,
                           r.error_estimate, r.error_std_err, r.error_bound, r.total_depth,
                           r.depth_bound, r.retries_used, r.accepted,    r.c_factor};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  int n_workers = config.workers > 0 ? config.workers : static_cast<int>(std::thread::hardware_concurrency());
  n_workers = std::clamp(n_workers, 1, static_cast<int>(cells.size()));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

std::vector<SweepSummary> summarize_sweep(const std::vector<SweepRow>& rows) {
  std::map<int, std::map<int, std::vector<double>>> grouped;
  for (const auto& r : rows) grouped[r.d][r.m].push_back(r.error);

  std::vector<SweepSummary> out;
  for (const auto& [d, by_m] : grouped) {
    SweepSummary s;
    s.d = d;
    std::vector<std::pair<double, double>> points;
    for (const auto& [m, errs] : by_m) {
      const double med = median(errs);
      s.medians.emplace_back(m, med);
      points.emplace_back(m, med);
    }
    if (points.size() >= 3) {
      s.fit = slope_fit(points);
    } else {
      s.fit = SlopeFit{std::nan(""), std::nan(""), std::nan("")};
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "d,m,seed,variant,error,std_err,error_bound,total_depth,depth_bound,retries,accepted,C_factor\n";
  for (const auto& r : rows) {
    os << r.d << ',' << r.m << ',' << r.seed << ',' << variant_name(r.variant) << ',' << csv_number(r.error) << ','
       << csv_number(r.std_err) << ',' << csv_number(r.error_bound) << ',' << r.total_depth << ','
       << csv_number(r.depth_bound) << ',' << r.retries << ',' << (r.accepted ? 1 : 0) << ','
       << csv_number(r.c_factor) << '\n';
  }
  return os.str();
}

std::string summary_csv(const std::vector<SweepSummary>& summaries) {
  std::ostringstream os;
  os << "d,slope,intercept,r2,n_m\n";
  for (const auto& s : summaries) {
    os << s.d << ',' << csv_number(s.fit.slope) << ',' << csv_number(s.fit.intercept) << ',' << csv_number(s.fit.r2)
       << ',' << s.medians.size() << '\n';
  }
  return os.str();
}

std::string sweep_svg(const std::vector<SweepSummary>& summaries) {
  constexpr double W = 640, H = 420, left = 70, right = 130, top = 20, bottom = 50;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : summaries) {
    for (const auto& [m, e] : s.medians) {
      if (!(e > 0.0)) continue;
      xmin = std::min(xmin, std::log10(m));
      xmax = std::max(xmax, std::log10(m));
      ymin = std::min(ymin, std::log10(e));
      ymax = std::max(ymax, std::log10(e));
    }
  }
  if (!(xmax >= xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  xmin = std::floor(xmin), xmax = std::max(std::ceil(xmax), xmin + 1);
  ymin = std::floor(ymin), ymax = std::max(std::ceil(ymax), ymin + 1);
  auto px = [&](double lx) { return left + (lx - xmin) / (xmax - xmin) * (W - left - right); };
  auto py = [&](double ly) { return H - bottom - (ly - ymin) / (ymax - ymin) * (H - top - bottom); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right << "\" y2=\"" << H - bottom
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << H - bottom
     << "\" stroke=\"black\"/>\n";
  for (double e = xmin; e <= xmax; e += 1.0) {
    os << "<line x1=\"" << px(e) << "\" y1=\"" << H - bottom << "\" x2=\"" << px(e) << "\" y2=\"" << H - bottom + 5
       << "\" stroke=\"black\"/><text x=\"" << px(e) << "\" y=\"" << H - bottom + 18
       << "\" text-anchor=\"middle\">1e" << e << "</text>\n";
  }
  for (double e = ymin; e <= ymax; e += 1.0) {
    os << "<line x1=\"" << left - 5 << "\" y1=\"" << py(e) << "\" x2=\"" << left << "\" y2=\"" << py(e)
       << "\" stroke=\"black\"/><text x=\"" << left - 8 << "\" y=\"" << py(e) + 4 << "\" text-anchor=\"end\">1e" << e
       << "</text>\n";
  }
  os << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">m</text>\n";
  os << "<text x=\"15\" y=\"" << (top + H - bottom) / 2 << "\" transform=\"rotate(-90 15 " << (top + H - bottom) / 2
     << ")\" text-anchor=\"middle\">median error</text>\n";
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const auto& s = summaries[i];
    const char* color = colors[i % std::size(colors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& [m, e] : s.medians) {
      if (e > 0.0) os << px(std::log10(m)) << ',' << py(std::log10(e)) << ' ';
    }
    os << "\"/>\n";
    os << "<text x=\"" << W - right + 10 << "\" y=\"" << top + 16 * (i + 1) << "\" fill=\"" << color << "\">d=" << s.d
       << " slope " << csv_number(std::round(s.fit.slope * 1000.0) / 1000.0) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace barronforge
