#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "cli.hpp"
#include "product_ensemble/version.hpp"

namespace {

using pe::cli::RunConfig;
using pe::cli::Subcommand;

void add_model_flags(CLI::App* app, RunConfig& c) {
  app->add_option("--model", c.model, "ginibre, inverses or truncated")
      ->check(CLI::IsMember({"ginibre", "inverses", "truncated"}));
  app->add_option("--n", c.n, "matrix size");
  app->add_option("--M", c.M, "number of factors");
  app->add_option("--K", c.K, "number of inverse factors (inverses)");
  app->add_option("--nu", c.nu, "nu_1..nu_M")->delimiter(',');
  app->add_option("--nutilde", c.nuTilde, "nu~_1..nu~_K")->delimiter(',');
  app->add_option("--kappa", c.kappa, "l + 1 - 2n (truncated)");
}

void add_output_flags(CLI::App* app, RunConfig& c) {
  const std::map<std::string, pe::cli::Format> formats{{"csv", pe::cli::Format::Csv},
                                                       {"json", pe::cli::Format::Json}};
  app->add_option("--format", c.format, "csv or json")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
  app->add_option("--out", c.out, "output file (default: standard output)");
}

void add_kernel_flags(CLI::App* app, RunConfig& c) {
  app->add_option("--panels", c.panels, "panels per unit length (0: per-geometry default)");
  app->add_option("--tol", c.tol, "relative acceptance bound on the error estimate");
  app->add_option("--contours", c.contours,
                  "auto, direct-left, direct-right, direct-best, bulk or edge");
}

void add_location_flags(CLI::App* app, RunConfig& c) {
  app->add_option("--x0", c.x0, "bulk location in the limiting support");
  app->add_option("--phi", c.phi, "bulk location as the angle parameter");
}

void add_scaled_flags(CLI::App* app, RunConfig& c) {
  app->add_option("--xi-grid", c.xiGrid, "lo:hi:count");
  app->add_option("--eta-grid", c.etaGrid, "lo:hi:count (default: the xi grid)");
  app->add_option("--n-list", c.nList, "convergence report over these n")->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Correlation kernels, limiting densities and Monte Carlo for products of random matrices"};
  app.set_version_flag("--version", std::string(pe::kVersion));
  app.require_subcommand(1);
  RunConfig c;

  CLI::App* density = app.add_subcommand("density", "limiting density table (x, rho)");
  add_model_flags(density, c);
  density->add_option("--grid", c.grid, "number of rows");
  add_output_flags(density, c);

  CLI::App* kernel = app.add_subcommand("kernel", "finite-n kernel on an (x, y) grid");
  add_model_flags(kernel, c);
  kernel->add_option("--x-grid", c.xGrid, "lo:hi:count");
  kernel->add_option("--y-grid", c.yGrid, "lo:hi:count (default: the x grid)");
  add_kernel_flags(kernel, c);
  add_output_flags(kernel, c);

  CLI::App* bulk = app.add_subcommand("bulk", "rescaled bulk kernel against the sine kernel");
  add_model_flags(bulk, c);
  add_location_flags(bulk, c);
  add_scaled_flags(bulk, c);
  add_kernel_flags(bulk, c);
  add_output_flags(bulk, c);

  CLI::App* edge = app.add_subcommand("edge", "rescaled edge kernel against the Airy kernel");
  add_model_flags(edge, c);
  add_scaled_flags(edge, c);
  add_kernel_flags(edge, c);
  add_output_flags(edge, c);

  CLI::App* sample = app.add_subcommand("sample", "Monte Carlo squared singular values");
  add_model_flags(sample, c);
  sample->add_option("--trials", c.trials, "number of independent products");
  sample->add_option("--seed", c.seed, "base seed (required)");
  sample->add_option("--bins", c.bins, "histogram bins (0: raw values)");
  add_output_flags(sample, c);

  CLI::App* oracle = app.add_subcommand("oracle", "contour kernel against the moment oracle");
  add_model_flags(oracle, c);
  oracle->add_option("--order", c.order, "Gauss-Legendre order of the reproducing check");
  add_kernel_flags(oracle, c);
  add_output_flags(oracle, c);

  CLI::App* contours = app.add_subcommand("contours", "sampled integration contours");
  add_model_flags(contours, c);
  contours->add_option("--kind", c.kind, "direct, bulk or edge");
  add_location_flags(contours, c);
  contours->add_option("--samples", c.samples, "points per segment");
  add_output_flags(contours, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return pe::cli::kExitValidation;
  }

  const std::pair<CLI::App*, Subcommand> table[] = {
      {density, Subcommand::Density}, {kernel, Subcommand::Kernel},
      {bulk, Subcommand::Bulk},       {edge, Subcommand::Edge},
      {sample, Subcommand::Sample},   {oracle, Subcommand::Oracle},
      {contours, Subcommand::Contours}};
  for (const auto& [sub, which] : table)
    if (sub->parsed()) c.subcommand = which;
  return pe::cli::run(c);
}
