// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

#include "anisoeig/error.hpp"
#include "anisoeig/fem.hpp"

namespace anisoeig::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& what) {
  fail(ErrorCode::Config, "invalid value '" + value + "' for " + key + ": expected " + what);
}

double parse_double(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x)) bad_value(key, value, "a finite number");
  return x;
}

long long parse_integer(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size()) bad_value(key, value, "an integer");
  return x;
}

int parse_int(const std::string& key, const std::string& value) {
  const long long x = parse_integer(key, value);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) bad_value(key, value, "an int");
  return static_cast<int>(x);
}

bool parse_bool(const std::string& key, const std::string& value) {
  std::string v = trim(value);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  bad_value(key, value, "true or false");
}

GeometryMode parse_geometry_mode(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v == "exact-curve") return GeometryMode::ExactCurve;
  if (v == "frozen-polygon") return GeometryMode::FrozenPolygon;
  bad_value(key, value, "exact-curve or frozen-polygon");
}

const char* geometry_name(GeometryMode mode) {
  return mode == GeometryMode::ExactCurve ? "exact-curve" : "frozen-polygon";
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"problem.name", [](RunConfig& c, const std::string&, const std::string& v) { c.problem = trim(v); }},
      {"problem.image", [](RunConfig& c, const std::string&, const std::string& v) { c.image = trim(v); }},
      {"adapt.k", [](RunConfig& c, const std::string& k, const std::string& v) { c.adapt.k = parse_int(k, v); }},
      {"adapt.n_target",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.adapt.n_target = parse_double(k, v); }},
      {"adapt.max_outer_iterations",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.adapt.max_outer_iterations = parse_int(k, v);
       }},
      {"adapt.eigenvalue_stall_tol",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.adapt.eigenvalue_stall_tol = parse_double(k, v);
       }},
      {"adapt.alpha", [](RunConfig& c, const std::string& k, const std::string& v) { c.adapt.alpha = parse_double(k, v); }},
      {"adapt.metric_mode",
       [](RunConfig& c, const std::string&, const std::string& v) { c.adapt.metric_mode = parse_metric_mode(trim(v)); }},
      {"adapt.geometry_mode",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.adapt.geometry_mode = parse_geometry_mode(k, v);
       }},
      {"adapt.eig_tol",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.adapt.eig_tol = parse_double(k, v); }},
      {"adapt.seed",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const long long s = parse_integer(k, v);
         if (s < 0) bad_value(k, v, "a nonnegative integer");
         c.adapt.seed = static_cast<std::uint64_t>(s);
       }},
      {"adapt.boundary_points",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.adapt.boundary_points = parse_int(k, v); }},
      {"sweep.n_targets",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.sweep.clear();
         for (const auto& item : split_list(v)) c.sweep.push_back(parse_double(k, item));
       }},
      {"sweep.modes",
       [](RunConfig& c, const std::string&, const std::string& v) {
         c.modes.clear();
         for (const auto& item : split_list(v)) c.modes.push_back(parse_metric_mode(item));
       }},
      {"boundary.points",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.boundary_points.clear();
         for (const auto& item : split_list(v)) c.boundary_points.push_back(parse_int(k, item));
       }},
      {"boundary.plateau_points",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.plateau_boundary_points = parse_int(k, v); }},
      {"boundary.plateau_n_targets",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.plateau_sweep.clear();
         for (const auto& item : split_list(v)) c.plateau_sweep.push_back(parse_double(k, item));
       }},
      {"output.dir", [](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = trim(v); }},
      {"output.vtk", [](RunConfig& c, const std::string& k, const std::string& v) { c.write_vtk = parse_bool(k, v); }},
      {"output.csv", [](RunConfig& c, const std::string& k, const std::string& v) { c.write_csv = parse_bool(k, v); }},
      {"output.mesh", [](RunConfig& c, const std::string& k, const std::string& v) { c.write_mesh = parse_bool(k, v); }},
      {"output.metric",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.write_metric = parse_bool(k, v); }},
      {"run.jobs",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.jobs = parse_int(k, v);
         if (c.jobs < 1) bad_value(k, v, "a positive integer");
       }},
  };
  return table;
}

std::filesystem::path output_dir(const RunConfig& config) {
  std::filesystem::path dir(config.out_dir.empty() ? "." : config.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) fail(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  os << std::setprecision(17);
  return os;
}

EigenProblem problem_of(const RunConfig& config) { return make_problem(config.problem, config.image); }

/// Runs fn(0..count-1) on up to `jobs` threads; results are stored by index,
/// so the output never depends on scheduling. The first failure by index is
/// rethrown.
template <typename Result>
std::vector<Result> run_jobs(int count, int jobs, const std::function<Result(int)>& fn) {
  std::vector<Result> results(static_cast<std::size_t>(count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  auto work = [&](int worker, int stride) {
    for (int i = worker; i < count; i += stride) {
      try {
        results[static_cast<std::size_t>(i)] = fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min(jobs, count));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(work, w, threads);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

struct RunSummary {
  int elements = 0;
  std::vector<double> eigenvalues;
};

RunSummary summarize(const AdaptResult& r) {
  RunSummary s;
  s.elements = r.mesh.triangle_count();
  s.eigenvalues.assign(r.solution.values.data(), r.solution.values.data() + r.solution.values.size());
  return s;
}

std::string format_value(double x) {
  if (!std::isfinite(x)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

void check_boundary_points(const EigenProblem& problem, int nb) {
  const int corners = static_cast<int>(problem.geometry.corners().size());
  const int minimum = std::max(3, corners);
  if (nb < minimum)
    fail(ErrorCode::Config, "N_b = " + std::to_string(nb) + " is below the minimum " + std::to_string(minimum) +
                                " for problem '" + problem.name + "' (" + std::to_string(corners) + " corners)");
}

}  // namespace

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) {
    std::string known;
    for (const auto& [name, setter] : table) known += (known.empty() ? "" : ", ") + name;
    fail(ErrorCode::Config, "unknown configuration key '" + key + "'; known keys: " + known);
  }
  it->second(config, key, value);
}

RunConfig parse_config(std::istream& is, const std::string& source) {
  RunConfig config;
  std::string line, section;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    const std::string where = source + ":" + std::to_string(number) + ": ";
    std::string text = trim(line);
    if (text.empty() || text[0] == '#' || text[0] == ';') continue;
    if (text.front() == '[') {
      if (text.back() != ']') fail(ErrorCode::Config, where + "unterminated section header");
      section = trim(text.substr(1, text.size() - 2));
      if (section.empty()) fail(ErrorCode::Config, where + "empty section name");
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) fail(ErrorCode::Config, where + "expected 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    std::string value = text.substr(eq + 1);
    if (const auto hash = value.find(" #"); hash != std::string::npos) value = value.substr(0, hash);
    value = trim(value);
    if (key.empty()) fail(ErrorCode::Config, where + "missing key");
    if (section.empty()) fail(ErrorCode::Config, where + "key '" + key + "' outside of a section");
    try {
      apply_setting(config, section + "." + key, value);
    } catch (const Error& e) {
      fail(ErrorCode::Config, where + e.what());
    }
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::Config, "cannot open configuration file '" + path + "'");
  return parse_config(is, path);
}

std::vector<double> reference_spectrum(const EigenProblem& problem, int k) {
  std::vector<double> ref = problem.exact;
  if (ref.empty()) ref = fixture_spectrum(problem.name);
  if (static_cast<int>(ref.size()) < k)
    fail(ErrorCode::Config, "no reference spectrum with " + std::to_string(k) + " values for problem '" +
                                problem.name + "'");
  ref.resize(static_cast<std::size_t>(k));
  return ref;
}

double relative_error(double lambda_h, double lambda) { return (lambda_h - lambda) / lambda_h; }

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  ANISOEIG_REQUIRE(x.size() == y.size() && x.size() >= 2, ErrorCode::InvalidInput,
                   "loglog_slope: need at least two matching points");
  double mx = 0, my = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxx > 0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

Extrapolation richardson(const std::vector<double>& n, const std::vector<double>& lambda) {
  ANISOEIG_REQUIRE(n.size() == lambda.size() && n.size() >= 2, ErrorCode::InvalidInput,
                   "richardson: need at least two matching points");
  const std::size_t m = n.size();
  Extrapolation out;
  if (m >= 3) {
    const double n1 = n[m - 3], n2 = n[m - 2], n3 = n[m - 1];
    const double d12 = lambda[m - 3] - lambda[m - 2], d23 = lambda[m - 2] - lambda[m - 1];
    // ratio(p) = (n1^-p - n2^-p) / (n2^-p - n3^-p) must match d12 / d23
    auto ratio = [&](double p) {
      return (std::pow(n1, -p) - std::pow(n2, -p)) / (std::pow(n2, -p) - std::pow(n3, -p));
    };
    const double target = d23 != 0.0 ? d12 / d23 : 0.0;
    double lo = 0.05, hi = 6.0;
    if (d12 * d23 > 0.0 && (ratio(lo) - target) * (ratio(hi) - target) < 0.0) {
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((ratio(lo) - target) * (ratio(mid) - target) <= 0.0) hi = mid;
        else lo = mid;
      }
      const double p = 0.5 * (lo + hi);
      const double c = d23 / (std::pow(n2, -p) - std::pow(n3, -p));
      out.value = lambda[m - 1] - c * std::pow(n3, -p);
      out.order = p;
      out.fitted = true;
      return out;
    }
  }
  const double na = n[m - 2], nb = n[m - 1];
  out.value = (nb * lambda[m - 1] - na * lambda[m - 2]) / (nb - na);
  out.order = 1.0;
  return out;
}

int exit_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Config:
    case ErrorCode::Parse:
    case ErrorCode::Io:
    case ErrorCode::InvalidInput:
    case ErrorCode::InvalidGeometry:
    case ErrorCode::Domain:
    case ErrorCode::Range:
    case ErrorCode::NotFound:
    case ErrorCode::Coefficient:
      return 2;
    default:
      return 3;
  }
}

int cmd_solve(const RunConfig& config, std::ostream& out) {
  const EigenProblem problem = problem_of(config);
  const AdaptResult r = adapt_loop(problem, config.adapt);
  const auto dir = output_dir(config);
  if (config.write_csv) {
    auto os = open_output(dir / "trace.csv");
    write_trace_csv(os, r.trace);
  }
  if (config.write_mesh) {
    auto os = open_output(dir / "mesh.txt");
    write_native(os, r.mesh);
  }
  if (config.write_vtk) {
    const DofMap dofs = interior_dofs(r.mesh);
    std::vector<Eigen::VectorXd> nodal;
    std::vector<PointField> fields;
    for (int j = 0; j < r.solution.vectors.cols(); ++j)
      nodal.push_back(extend_by_zero(dofs, r.solution.vectors.col(j), r.mesh.vertex_count()));
    for (std::size_t j = 0; j < nodal.size(); ++j)
      fields.push_back({"eigfun_" + std::to_string(j + 1),
                        std::span<const double>(nodal[j].data(), static_cast<std::size_t>(nodal[j].size()))});
    auto os = open_output(dir / "mesh.vtk");
    write_vtk(os, r.mesh, fields);
  }
  if (config.write_metric && r.metric) {
    auto os = open_output(dir / "metric.txt");
    write_metric(os, *r.metric);
  }
  const TraceRecord& last = r.trace.records.back();
  out << std::setprecision(12) << "lambda=";
  for (int j = 0; j < r.solution.values.size(); ++j) out << (j ? "," : "") << r.solution.values[j];
  out << " N=" << r.mesh.triangle_count() << " C_eq=" << last.c_eq << " C_ali=" << last.c_ali << '\n';
  return 0;
}

int cmd_converge(const RunConfig& config, std::ostream& out) {
  if (config.sweep.empty()) fail(ErrorCode::Config, "converge: the sweep of N_target values is empty");
  const EigenProblem problem = problem_of(config);
  const std::vector<double> ref = reference_spectrum(problem, config.adapt.k);
  const std::vector<MetricMode> modes = config.modes.empty() ? std::vector{config.adapt.metric_mode} : config.modes;

  const int runs = static_cast<int>(modes.size() * config.sweep.size());
  const auto results = run_jobs<RunSummary>(runs, config.jobs, [&](int i) {
    AdaptConfig c = config.adapt;
    c.metric_mode = modes[static_cast<std::size_t>(i) / config.sweep.size()];
    c.n_target = config.sweep[static_cast<std::size_t>(i) % config.sweep.size()];
    return summarize(adapt_loop(problem, c));
  });

  const auto dir = output_dir(config);
  auto errors = open_output(dir / "errors.csv");
  auto slopes = open_output(dir / "slopes.csv");
  errors << "mode,N_target,N,j,lambda_h,lambda_ref,rel_error\n";
  slopes << "mode,j,slope\n";
  for (std::size_t mi = 0; mi < modes.size(); ++mi) {
    for (int j = 0; j < config.adapt.k; ++j) {
      std::vector<double> ns, errs;
      for (std::size_t si = 0; si < config.sweep.size(); ++si) {
        const RunSummary& s = results[mi * config.sweep.size() + si];
        const double lh = s.eigenvalues[static_cast<std::size_t>(j)];
        const double e = relative_error(lh, ref[static_cast<std::size_t>(j)]);
        errors << to_string(modes[mi]) << ',' << format_value(config.sweep[si]) << ',' << s.elements << ','
               << j + 1 << ',' << format_value(lh) << ',' << format_value(ref[static_cast<std::size_t>(j)]) << ','
               << format_value(e) << '\n';
        ns.push_back(s.elements);
        errs.push_back(e);
      }
      const double slope = config.sweep.size() >= 2 ? loglog_slope(ns, errs) : std::numeric_limits<double>::quiet_NaN();
      slopes << to_string(modes[mi]) << ',' << j + 1 << ',' << format_value(slope) << '\n';
      out << "mode=" << to_string(modes[mi]) << " j=" << j + 1 << " slope=" << std::setprecision(4) << slope << '\n';
    }
  }
  return 0;
}

int cmd_boundary_study(const RunConfig& config, std::ostream& out) {
  if (config.boundary_points.empty()) fail(ErrorCode::Config, "boundary-study: the list of N_b values is empty");
  const EigenProblem problem = problem_of(config);
  for (int nb : config.boundary_points) check_boundary_points(problem, nb);
  if (!config.plateau_sweep.empty()) check_boundary_points(problem, config.plateau_boundary_points);
  const std::vector<double> ref = reference_spectrum(problem, config.adapt.k);

  struct Job {
    GeometryMode geometry;
    int nb;
    double n_target;
  };
  std::vector<Job> jobs;
  for (int nb : config.boundary_points) jobs.push_back({GeometryMode::FrozenPolygon, nb, config.adapt.n_target});
  for (GeometryMode g : {GeometryMode::FrozenPolygon, GeometryMode::ExactCurve})
    for (double n : config.plateau_sweep)
      jobs.push_back({g, g == GeometryMode::FrozenPolygon ? config.plateau_boundary_points : 0, n});

  const auto results = run_jobs<RunSummary>(static_cast<int>(jobs.size()), config.jobs, [&](int i) {
    const Job& job = jobs[static_cast<std::size_t>(i)];
    AdaptConfig c = config.adapt;
    c.geometry_mode = job.geometry;
    c.boundary_points = job.nb;
    c.n_target = job.n_target;
    return summarize(adapt_loop(problem, c));
  });

  const auto dir = output_dir(config);
  {
    auto os = open_output(dir / "boundary_errors.csv");
    auto slopes = open_output(dir / "boundary_slopes.csv");
    os << "N_b,N,j,lambda_h,rel_error\n";
    slopes << "j,slope\n";
    for (int j = 0; j < config.adapt.k; ++j) {
      std::vector<double> nbs, errs;
      for (std::size_t i = 0; i < config.boundary_points.size(); ++i) {
        const RunSummary& s = results[i];
        const double lh = s.eigenvalues[static_cast<std::size_t>(j)];
        const double e = relative_error(lh, ref[static_cast<std::size_t>(j)]);
        os << config.boundary_points[i] << ',' << s.elements << ',' << j + 1 << ',' << format_value(lh) << ','
           << format_value(e) << '\n';
        nbs.push_back(config.boundary_points[i]);
        errs.push_back(e);
      }
      const double slope = nbs.size() >= 2 ? loglog_slope(nbs, errs) : std::numeric_limits<double>::quiet_NaN();
      slopes << j + 1 << ',' << format_value(slope) << '\n';
      out << "j=" << j + 1 << " slope_vs_N_b=" << std::setprecision(4) << slope << '\n';
    }
  }
  if (!config.plateau_sweep.empty()) {
    auto os = open_output(dir / "plateau.csv");
    os << "geometry,N_b,N_target,N,j,lambda_h,rel_error\n";
    for (std::size_t i = config.boundary_points.size(); i < jobs.size(); ++i) {
      const RunSummary& s = results[i];
      for (int j = 0; j < config.adapt.k; ++j) {
        const double lh = s.eigenvalues[static_cast<std::size_t>(j)];
        os << geometry_name(jobs[i].geometry) << ',' << jobs[i].nb << ',' << format_value(jobs[i].n_target) << ','
           << s.elements << ',' << j + 1 << ',' << format_value(lh) << ','
           << format_value(relative_error(lh, ref[static_cast<std::size_t>(j)])) << '\n';
      }
    }
  }
  return 0;
}

int cmd_export_mesh(const RunConfig& config, std::ostream& out) {
  const EigenProblem problem = problem_of(config);
  const Setup setup = initial_setup(problem, config.adapt);
  const auto dir = output_dir(config);
  {
    auto os = open_output(dir / "mesh.txt");
    write_native(os, setup.mesh);
  }
  if (config.write_vtk) {
    auto os = open_output(dir / "mesh.vtk");
    write_vtk(os, setup.mesh);
  }
  out << "vertices=" << setup.mesh.vertex_count() << " triangles=" << setup.mesh.triangle_count() << '\n';
  return 0;
}

int cmd_reference(const RunConfig& config, std::ostream& out) {
  if (config.sweep.size() < 2) fail(ErrorCode::Config, "reference: the sweep needs at least two N_target values");
  const EigenProblem problem = problem_of(config);
  const int runs = static_cast<int>(config.sweep.size());
  const auto results = run_jobs<RunSummary>(runs, config.jobs, [&](int i) {
    AdaptConfig c = config.adapt;
    c.n_target = config.sweep[static_cast<std::size_t>(i)];
    return summarize(adapt_loop(problem, c));
  });

  const auto dir = output_dir(config);
  auto os = open_output(dir / (problem.name + ".txt"));
  os << "# reference spectrum for problem '" << problem.name << "'\n";
  os << "# generated by: anisoeig reference\n";
  os << "# metric_mode = " << to_string(config.adapt.metric_mode) << ", k = " << config.adapt.k
     << ", alpha = " << config.adapt.alpha << ", eig_tol = " << config.adapt.eig_tol
     << ", max_outer_iterations = " << config.adapt.max_outer_iterations
     << ", eigenvalue_stall_tol = " << config.adapt.eigenvalue_stall_tol << ", seed = " << config.adapt.seed << '\n';
  os << "# extrapolation: lambda(N) = lambda_inf + C N^-p through the three finest runs\n";
  std::vector<double> ns;
  for (std::size_t i = 0; i < results.size(); ++i) {
    ns.push_back(results[i].elements);
    os << "# run N_target = " << config.sweep[i] << ", N = " << results[i].elements << ", lambda =";
    for (double l : results[i].eigenvalues) os << ' ' << l;
    os << '\n';
  }
  std::vector<Extrapolation> ext;
  for (int j = 0; j < config.adapt.k; ++j) {
    std::vector<double> lam;
    for (const auto& r : results) lam.push_back(r.eigenvalues[static_cast<std::size_t>(j)]);
    ext.push_back(richardson(ns, lam));
    os << "# j = " << j + 1 << ": order p = " << ext.back().order << (ext.back().fitted ? "" : " (two-point fallback)")
       << '\n';
  }
  for (int j = 0; j < config.adapt.k; ++j) {
    os << j + 1 << ' ' << ext[static_cast<std::size_t>(j)].value << '\n';
    out << "j=" << j + 1 << " lambda=" << std::setprecision(12) << ext[static_cast<std::size_t>(j)].value << '\n';
  }
  return 0;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive anisotropic finite element eigenvalue solver"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "configuration file");
  std::vector<std::pair<std::string, std::string>> flags;
  std::map<std::string, std::string> values;
  auto flag = [&](const std::string& name, const std::string& key, const std::string& help) {
    app.add_option(name, values[key], help);
    flags.emplace_back(name, key);
  };
  flag("--out", "output.dir", "output directory");
  flag("--seed", "adapt.seed", "random seed of the eigensolver start block");
  flag("--jobs", "run.jobs", "parallel sweep entries");
  flag("--problem", "problem.name", "problem name");
  flag("--image", "problem.image", "PGM image for the image problems");
  flag("--n-target", "adapt.n_target", "element-count target");
  flag("--mode", "adapt.metric_mode", "anisotropic | isotropic | identity");
  flag("--geometry", "adapt.geometry_mode", "exact-curve | frozen-polygon");
  flag("--k", "adapt.k", "number of eigenpairs");
  flag("--boundary-points", "adapt.boundary_points", "boundary points of the initial mesh");
  flag("--max-iter", "adapt.max_outer_iterations", "outer iteration cap");
  flag("--sweep", "sweep.n_targets", "comma-separated N_target values");
  flag("--modes", "sweep.modes", "comma-separated metric modes for converge");
  flag("--nb", "boundary.points", "comma-separated N_b values for boundary-study");
  std::vector<std::string> sets;
  app.add_option("--set", sets, "override any key as section.key=value");

  auto* solve = app.add_subcommand("solve", "adaptive solve, writes trace, mesh and metric");
  auto* converge = app.add_subcommand("converge", "error sweep over N_target");
  auto* boundary = app.add_subcommand("boundary-study", "frozen-polygon study over N_b");
  auto* export_mesh = app.add_subcommand("export-mesh", "write the initial mesh");
  auto* reference = app.add_subcommand("reference", "extrapolated reference spectrum from a sweep");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
    for (const auto& [name, key] : flags)
      if (app.get_option(name)->count() > 0) apply_setting(config, key, values[key]);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) fail(ErrorCode::Config, "--set expects section.key=value, got '" + s + "'");
      apply_setting(config, trim(s.substr(0, eq)), s.substr(eq + 1));
    }
    if (solve->parsed()) return cmd_solve(config, out);
    if (converge->parsed()) return cmd_converge(config, out);
    if (boundary->parsed()) return cmd_boundary_study(config, out);
    if (export_mesh->parsed()) return cmd_export_mesh(config, out);
    if (reference->parsed()) return cmd_reference(config, out);
    return 2;
  } catch (const Error& e) {
    err << "error: code=" << to_string(e.code()) << " message=" << e.what() << '\n';
    return exit_status(e.code());
  } catch (const std::exception& e) {
    err << "error: code=internal message=" << e.what() << '\n';
    return 3;
  }
}

}  // namespace anisoeig::cli
