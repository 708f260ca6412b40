#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string_view>
#include <system_error>
#include <variant>

#include <json.hpp>

#include "product_ensemble/contours.hpp"
#include "product_ensemble/errors.hpp"
#include "product_ensemble/kernel_engine.hpp"
#include "product_ensemble/moment_oracle.hpp"
#include "product_ensemble/monte_carlo.hpp"
#include "product_ensemble/parallel.hpp"
#include "product_ensemble/spectral_model.hpp"
#include "product_ensemble/version.hpp"

namespace pe::cli {

namespace {

using Json = nlohmann::ordered_json;
using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string csv_cell(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) return format_double(*d);
  if (const long long* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

Json json_cell(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) return *d;
  if (const long long* i = std::get_if<long long>(&c)) return *i;
  return std::get<std::string>(c);
}

Json config_json(const RunConfig& c) {
  Json j;
  j["subcommand"] = subcommand_name(c.subcommand);
  j["model"] = c.model;
  j["n"] = c.n;
  j["M"] = c.M;
  j["K"] = c.K;
  j["nu"] = c.nu;
  j["nutilde"] = c.nuTilde;
  j["kappa"] = c.kappa;
  j["x0"] = c.x0 ? Json(*c.x0) : Json(nullptr);
  j["phi"] = c.phi ? Json(*c.phi) : Json(nullptr);
  j["xi_grid"] = c.xiGrid;
  j["eta_grid"] = c.etaGrid.empty() ? c.xiGrid : c.etaGrid;
  j["x_grid"] = c.xGrid;
  j["y_grid"] = c.yGrid.empty() ? c.xGrid : c.yGrid;
  j["grid"] = c.grid;
  j["n_list"] = c.nList;
  j["panels"] = c.panels;
  j["order"] = c.order;
  j["tol"] = c.tol;
  j["contours"] = c.contours;
  j["kind"] = c.kind;
  j["samples"] = c.samples;
  j["trials"] = c.trials;
  j["seed"] = c.seed ? Json(*c.seed) : Json(nullptr);
  j["bins"] = c.bins;
  j["format"] = c.format == Format::Csv ? "csv" : "json";
  return j;
}

std::string render(const RunConfig& config, const Table& t) {
  const std::string comment =
      std::string("product_ensemble ") + kVersion + " " + config_json(config).dump();
  std::ostringstream os;
  if (config.format == Format::Csv) {
    os << "# " << comment << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_cell(row[i]);
      os << '\n';
    }
  } else {
    Json doc;
    doc["comment"] = comment;
    Json records = Json::array();
    for (const auto& row : t.rows) {
      Json r;
      for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = json_cell(row[i]);
      records.push_back(std::move(r));
    }
    doc["records"] = std::move(records);
    os << doc.dump(1) << '\n';
  }
  return os.str();
}

// Temp file next to the target, then rename, so readers never see a partial table.
void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ValidationError("cannot open output file " + tmp.string());
    f << text;
    if (!f) throw ValidationError("cannot write output file " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw ValidationError("cannot rename output into " + target.string() + ": " + ec.message());
  }
}

ModelSpec model_spec(const RunConfig& c) {
  ModelSpec s;
  if (c.model == "ginibre")
    s = ModelSpec::ginibre(c.n, c.M, c.nu);
  else if (c.model == "inverses")
    s = ModelSpec::with_inverses(c.n, c.M, c.K, c.nu, c.nuTilde);
  else if (c.model == "truncated")
    s = ModelSpec::truncated_unitary(c.n, c.M, c.kappa, c.nu);
  else
    throw ValidationError("unknown model '" + c.model + "' (ginibre, inverses, truncated)");
  s.validate();
  return s;
}

KernelOptions kernel_options(const RunConfig& c) {
  KernelOptions o;
  o.panelsPerUnitLength = c.panels;
  o.tol = c.tol;
  if (c.contours == "auto") o.contours = ContourChoice::Auto;
  else if (c.contours == "direct-left") o.contours = ContourChoice::DirectLeft;
  else if (c.contours == "direct-right") o.contours = ContourChoice::DirectRight;
  else if (c.contours == "direct-best") o.contours = ContourChoice::DirectBest;
  else if (c.contours == "bulk") o.contours = ContourChoice::Bulk;
  else if (c.contours == "edge") o.contours = ContourChoice::Edge;
  else throw ValidationError("unknown contour choice '" + c.contours + "'");
  if (c.panels < 0.0) throw ValidationError("--panels must be >= 0");
  if (!(c.tol > 0.0)) throw ValidationError("--tol must be positive");
  return o;
}

double bulk_phi(const RunConfig& c, const ModelSpec& spec) {
  if (c.x0.has_value() == c.phi.has_value())
    throw ValidationError("bulk needs exactly one of --x0 and --phi");
  if (c.phi) {
    if (!(*c.phi > 0.0 && *c.phi < phi_max(spec)))
      throw ValidationError("--phi must lie in (0, phi_max)");
    return *c.phi;
  }
  if (!(*c.x0 > 0.0 && *c.x0 < support_right_end(spec)))
    throw ValidationError("--x0 must lie inside the limiting support");
  return inverse_param(spec, *c.x0);
}

Table density_table(const RunConfig& c) {
  if (c.grid < 1) throw ValidationError("--grid must be >= 1");
  const ModelSpec spec = model_spec(c);
  const double top = phi_max(spec);
  Table t{{"x", "rho"}, {}};
  // phi runs downward so that x increases; interior points only.
  for (int k = c.grid; k >= 1; --k) {
    const double phi = top * k / (c.grid + 1.0);
    t.rows.push_back({param_x(spec, phi), density_rho(spec, phi)});
  }
  return t;
}

Table kernel_table(const RunConfig& c) {
  const ModelSpec spec = model_spec(c);
  const KernelOptions opts = kernel_options(c);
  const std::vector<double> xs = parse_grid(c.xGrid).points();
  const std::vector<double> ys = parse_grid(c.yGrid.empty() ? c.xGrid : c.yGrid).points();
  for (double v : xs)
    if (!(v > 0.0)) throw ValidationError("kernel grid points must be positive");
  for (double v : ys)
    if (!(v > 0.0)) throw ValidationError("kernel grid points must be positive");
  std::vector<KernelValue> vals(xs.size() * ys.size());
  parallel_for_index(vals.size(), [&](std::size_t i) {
    vals[i] = kernel_finite_n(spec, xs[i / ys.size()], ys[i % ys.size()], opts);
  });
  Table t{{"x", "y", "K", "imag_residual", "error_estimate"}, {}};
  for (std::size_t i = 0; i < vals.size(); ++i)
    t.rows.push_back({xs[i / ys.size()], ys[i % ys.size()], vals[i].value, vals[i].imagResidual,
                      vals[i].errorEstimate});
  return t;
}

Table convergence_table(const RunConfig& c, const ModelSpec& spec, ScalingMode mode,
                        double location, const std::vector<double>& xis,
                        const std::vector<double>& etas) {
  std::vector<std::pair<double, double>> pts;
  for (double xi : xis)
    for (double eta : etas) pts.emplace_back(xi, eta);
  const ConvergenceReport r =
      convergence_report(spec, mode, location, c.nList, pts, kernel_options(c));
  Table t{{"n", "sup_error", "strictly_decreasing"}, {}};
  for (const auto& row : r.rows)
    t.rows.push_back({static_cast<long long>(row.n), row.supError,
                      std::string(r.strictlyDecreasing ? "true" : "false")});
  return t;
}

Table scaled_table(const RunConfig& c, ScalingMode mode) {
  const ModelSpec spec = model_spec(c);
  const std::vector<double> xis = parse_grid(c.xiGrid).points();
  const std::vector<double> etas = parse_grid(c.etaGrid.empty() ? c.xiGrid : c.etaGrid).points();
  double location = 0.0;
  ScalingFrame frame;
  if (mode == ScalingMode::Bulk) {
    location = bulk_phi(c, spec);
    if (c.nList.empty()) frame = bulk_frame(spec, location);
  } else {
    if (!std::isfinite(support_right_end(spec)))
      throw NoSoftEdgeError("edge scaling needs a variant with a soft edge");
    if (c.nList.empty()) frame = edge_frame(spec);
  }
  if (!c.nList.empty()) return convergence_table(c, spec, mode, location, xis, etas);

  const std::vector<double> k = rescaled_kernel_grid(spec, frame, xis, etas, kernel_options(c));
  const bool bulk = mode == ScalingMode::Bulk;
  Table t{{"xi", "eta", "rescaled_K", bulk ? "sine_K" : "airy_K", "abs_err"}, {}};
  for (std::size_t i = 0; i < xis.size(); ++i)
    for (std::size_t j = 0; j < etas.size(); ++j) {
      const double v = k[i * etas.size() + j];
      const double lim = bulk ? sine_kernel(xis[i], etas[j]) : airy_kernel(xis[i], etas[j]);
      t.rows.push_back({xis[i], etas[j], v, lim, std::fabs(v - lim)});
    }
  return t;
}

Table sample_table(const RunConfig& c) {
  if (!c.seed) throw ValidationError("sample needs --seed");
  if (c.trials < 1) throw ValidationError("--trials must be >= 1");
  if (c.bins < 0) throw ValidationError("--bins must be >= 0");
  const ModelSpec spec = model_spec(c);
  const SampleBatch batch = sample_batch(spec, c.trials, *c.seed);
  if (c.bins == 0) {
    Table t{{"trial", "index", "value"}, {}};
    const std::size_t n = static_cast<std::size_t>(spec.n);
    for (std::size_t i = 0; i < batch.rescaledValues.size(); ++i)
      t.rows.push_back({static_cast<long long>(i / n), static_cast<long long>(i % n),
                        batch.rescaledValues[i]});
    return t;
  }
  const DensityComparison cmp = empirical_vs_density(batch, c.bins);
  const Histogram& h = cmp.hist;
  Table t{{"bin_left", "bin_right", "count", "density", "analytic_density"}, {}};
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    t.rows.push_back({h.edges[i], h.edges[i + 1], h.counts[i], h.normalizedDensity[i],
                      h.analyticDensity[i]});
  return t;
}

Table oracle_table(const RunConfig& c) {
  const ModelSpec spec = model_spec(c);
  if (spec.variant != Variant::GinibreProduct)
    throw ValidationError("oracle supports the ginibre model only");
  const KernelOptions opts = kernel_options(c);
  const double pts[3] = {0.5, 1.75, 3.0};
  std::vector<double> err(9);
  parallel_for_index(9, [&](std::size_t i) {
    const double x = pts[i / 3], y = pts[i % 3];
    const double direct = kernel_direct(spec, spec.n, x, y);
    const double contour = kernel_finite_n(spec, x, y, opts).value;
    err[i] = std::fabs(contour - direct) / std::max(1.0, std::fabs(direct));
  });
  double worst = 0.0;
  for (double e : err) worst = std::max(worst, e);
  const NormalizationCheck det = normalization_check(spec, spec.n);
  const MomentMatrix mm = moment_matrix(spec, spec.n);
  Table t{{"oracle_vs_contour_max_rel_err", "det_check", "log_det", "log_det_expected",
           "condition_estimate", "reproducing_defect"},
          {}};
  const Cell defect = spec.n <= 6 ? Cell(reproducing_check(spec, spec.n, c.order))
                                  : Cell(std::string("n/a"));
  t.rows.push_back({worst, std::string(det.pass ? "pass" : "fail"), det.lhs, det.rhs,
                    mm.conditionEstimate, defect});
  return t;
}

Table contours_table(const RunConfig& c) {
  if (c.samples < 2) throw ValidationError("--samples must be >= 2");
  const ModelSpec spec = model_spec(c);
  std::vector<const Contour*> list;
  DirectContours direct;
  BulkContours bulk;
  EdgeContours edge;
  if (c.kind == "direct") {
    direct = build_direct_contours(spec);
    list = {&direct.C, &direct.Sigma};
  } else if (c.kind == "bulk") {
    bulk = build_bulk_contours(spec, bulk_phi(c, spec));
    list = {&bulk.C, &bulk.SigmaCurved, &bulk.SigmaVertical};
  } else if (c.kind == "edge") {
    edge = build_edge_contours(spec);
    list = {&edge.C, &edge.Sigma};
  } else {
    throw ValidationError("unknown contour kind '" + c.kind + "' (direct, bulk, edge)");
  }
  Table t{{"contour", "segment", "label", "param", "re", "im"}, {}};
  for (const Contour* ct : list)
    for (std::size_t s = 0; s < ct->segments.size(); ++s) {
      const ContourSegment& seg = ct->segments[s];
      for (int k = 0; k < c.samples; ++k) {
        const double u = static_cast<double>(k) / (c.samples - 1);
        const Complex z = seg.point(u);
        t.rows.push_back({ct->name, static_cast<long long>(s), seg.label, seg.native_param(u),
                          z.real(), z.imag()});
      }
    }
  return t;
}

Table build_table(const RunConfig& c) {
  switch (c.subcommand) {
    case Subcommand::Density: return density_table(c);
    case Subcommand::Kernel: return kernel_table(c);
    case Subcommand::Bulk: return scaled_table(c, ScalingMode::Bulk);
    case Subcommand::Edge: return scaled_table(c, ScalingMode::Edge);
    case Subcommand::Sample: return sample_table(c);
    case Subcommand::Oracle: return oracle_table(c);
    case Subcommand::Contours: return contours_table(c);
  }
  throw ValidationError("unknown subcommand");
}

}  // namespace

std::vector<double> GridSpec::points() const {
  std::vector<double> p(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    p[static_cast<std::size_t>(i)] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  return p;
}

GridSpec parse_grid(const std::string& text) {
  const auto bad = [&] { return ValidationError("grid '" + text + "' is not lo:hi:count"); };
  const std::size_t a = text.find(':');
  const std::size_t b = a == std::string::npos ? a : text.find(':', a + 1);
  if (b == std::string::npos || text.find(':', b + 1) != std::string::npos) throw bad();
  const auto number = [&](std::string_view s, auto& v) {
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw bad();
  };
  const std::string_view sv(text);
  GridSpec g;
  number(sv.substr(0, a), g.lo);
  number(sv.substr(a + 1, b - a - 1), g.hi);
  number(sv.substr(b + 1), g.count);
  if (g.count < 1 || !(g.lo <= g.hi) || !std::isfinite(g.lo) || !std::isfinite(g.hi)) throw bad();
  return g;
}

const char* subcommand_name(Subcommand s) {
  switch (s) {
    case Subcommand::Density: return "density";
    case Subcommand::Kernel: return "kernel";
    case Subcommand::Bulk: return "bulk";
    case Subcommand::Edge: return "edge";
    case Subcommand::Sample: return "sample";
    case Subcommand::Oracle: return "oracle";
    case Subcommand::Contours: return "contours";
  }
  return "unknown";
}

int run(const RunConfig& config) {
  try {
    write_output(config.out, render(config, build_table(config)));
    return kExitOk;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const SingularFactorError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const RangeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace pe::cli
