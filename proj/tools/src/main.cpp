#include "commands.hpp"

#include <CLI11.hpp>

#include <string>

int main(int argc, char** argv) {
  CLI::App app{"relugeo: geometry and well-posedness diagnostics for shallow ReLU/tanh/sigmoid "
               "network fitting"};
  app.require_subcommand(1);

  using namespace relugeo::cli;

  // ---- cone ----
  auto* cone = app.add_subcommand("cone", "ReLU cone of a sample: dimension, membership, faces");
  cone->require_subcommand(1);
  ConeArgs cone_args;
  for (const char* sub : {"dim", "member", "faces"}) {
    auto* c = cone->add_subcommand(sub);
    c->add_option("--sample", cone_args.sample_file, "sample CSV (n x p)")->required();
    if (std::string(sub) == "member")
      c->add_option("--response,--vector", cone_args.vector_file, "vector CSV (length n)");
    c->add_option("--tol", cone_args.tol, "support/solver tolerance");
    c->add_option("--out", cone_args.out, "write a JSON run record");
    c->callback([&cone_args, sub] { cone_args.subcommand = sub; });
  }

  // ---- image ----
  auto* image = app.add_subcommand(
      "image", "two-layer image of weights: membership, distance, dimension, bounds");
  image->require_subcommand(1);
  ImageArgs image_args;
  for (const char* sub : {"member", "distance", "dim", "bound"}) {
    auto* c = image->add_subcommand(sub);
    std::string s(sub);
    if (s != "bound") c->add_option("--sample", image_args.sample_file, "sample CSV")->required();
    else c->add_option("--sample", image_args.sample_file, "sample CSV (optional)");
    if (s == "member" || s == "distance")
      c->add_option("--response", image_args.response_file, "response CSV")->required();
    c->add_option("--width", image_args.width, "hidden layer width d")->required();
    c->add_option("--outputs", image_args.outputs, "output dimension q");
    if (s == "member") c->add_flag("--numeric", image_args.numeric, "force the numeric path");
    c->add_option("--restarts", image_args.restarts,
                  s == "dim" ? "random weight draws" : "numeric path restarts");
    c->add_option("--max-iters", image_args.max_iters, "numeric path iteration budget");
    if (s == "bound") {
      c->add_option("--inputs", image_args.inputs, "input dimension p (when no sample)");
      c->add_option("--samples", image_args.samples, "sample count n (when no sample)");
    }
    c->add_option("--seed", image_args.seed, "random seed");
    c->add_option("--tol", image_args.tol, "tolerance / rank threshold");
    c->add_option("--config", image_args.config_file, "JSON config file");
    c->add_option("--out", image_args.out, "write a JSON run record");
    c->callback([&image_args, sub] { image_args.subcommand = sub; });
  }

  // ---- fit ----
  FitArgs fit_args;
  auto* fitc = app.add_subcommand("fit", "empirical risk minimization with attainment diagnosis");
  fitc->add_option("--sample", fit_args.sample_file, "sample CSV")->required();
  fitc->add_option("--response", fit_args.response_file, "response CSV")->required();
  fitc->add_option("--widths", fit_args.widths, "layer widths d1,...,dk+1")
      ->required()
      ->delimiter(',');
  fitc->add_option("--activation", fit_args.activation, "relu | tanh | sigmoid");
  fitc->add_option("--restarts", fit_args.restarts, "restart count");
  fitc->add_option("--max-iters", fit_args.max_iters, "iteration budget per restart");
  auto* seed_opt = fitc->add_option("--seed", fit_args.seed, "random seed");
  fitc->add_option("--tol", fit_args.tol, "gradient tolerance for classification");
  fitc->add_option("--config", fit_args.config_file, "JSON config file (FitConfig fields)");
  fitc->add_option("--out", fit_args.out, "write a JSON run record");
  fitc->callback([&fit_args, seed_opt] { fit_args.seed_given = seed_opt->count() > 0; });

  // ---- replicate ----
  auto* rep = app.add_subcommand("replicate", "built-in constructions and their diagnostics");
  rep->require_subcommand(1);
  ReplicateArgs rep_args;
  {
    auto* c = rep->add_subcommand("nonclosed",
                                  "divergent weight sequence on the built-in 6x2 instance");
    c->add_option("--k", rep_args.ks, "sequence indices")->delimiter(',');
    c->add_flag("--dump", rep_args.dump, "write paper_s.csv / paper_t.csv");
    c->add_option("--restarts", rep_args.restarts, "fit diagnosis restarts");
    c->add_option("--max-iters", rep_args.max_iters, "fit diagnosis iteration budget");
    c->add_option("--seed", rep_args.seed, "random seed");
    c->add_option("--config", rep_args.config_file, "JSON config file");
    c->add_option("--out", rep_args.out, "write a JSON run record");
    c->callback([&rep_args] { rep_args.target = "nonclosed"; });
  }
  {
    auto* c = rep->add_subcommand("tanh", "smooth-activation failure set around (0,2,1)");
    c->add_option("--epsilon", rep_args.epsilon, "box half-width");
    c->add_option("--grid", rep_args.grid, "grid points per axis");
    c->add_option("--restarts", rep_args.restarts, "fit restarts per point");
    c->add_option("--max-iters", rep_args.max_iters, "fit iteration budget per point");
    c->add_option("--seed", rep_args.seed, "random seed");
    c->add_option("--config", rep_args.config_file, "JSON config file");
    c->add_option("--out", rep_args.out, "write a JSON run record");
    c->callback([&rep_args] { rep_args.target = "tanh"; });
  }

  CLI11_PARSE(app, argc, argv);

  if (cone->parsed()) return cmd_cone(cone_args);
  if (image->parsed()) return cmd_image(image_args);
  if (fitc->parsed()) return cmd_fit(fit_args);
  if (rep->parsed()) return cmd_replicate(rep_args);
  return 0;
}
