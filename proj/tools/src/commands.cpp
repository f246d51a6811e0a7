#include "commands.hpp"

#include "csv_io.hpp"
#include "run_record.hpp"

#include "relugeo/cone.hpp"
#include "relugeo/erm.hpp"
#include "relugeo/geometry.hpp"
#include "relugeo/smooth.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

namespace relugeo::cli {

namespace {

Vec read_vector(const std::string& path) {
  Mat m = read_matrix(path);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw CsvError(path + ": expected a vector (one row or one column)");
}

Json face_to_json(const ConeFace& f) {
  Json j;
  j["indices"] = f.indices;
  j["dimension"] = f.dimension;
  j["witness_a"] = vector_to_json(f.witness_a);
  j["witness_b"] = f.witness_b;
  return j;
}

Json pattern_to_json(const PatternAssignment& pa) {
  Json arr = Json::array();
  for (const auto& np : pa.neurons) {
    Json j;
    j["face"] = np.face;
    j["sign"] = np.sign;
    arr.push_back(std::move(j));
  }
  return arr;
}

Json weights_to_json(const Weights& w) {
  Json layers = Json::array();
  for (const auto& l : w.layers()) {
    Json j;
    j["A"] = matrix_to_json(l.A);
    j["b"] = vector_to_json(l.b);
    layers.push_back(std::move(j));
  }
  return layers;
}

Json fit_report_to_json(const FitReport& rep, std::size_t traj_cap_per_restart = 50) {
  Json j;
  j["best_sq_loss"] = rep.best_sq_loss;
  j["best_norm"] = rep.best_norm;
  j["best_restart"] = rep.best_restart;
  j["iterations_used"] = rep.iterations_used;
  j["final_grad_norm"] = rep.final_grad_norm;
  j["classification"] = to_string(rep.classification);
  j["classification_note"] = "heuristic";
  Json trajs = Json::array();
  for (std::size_t r = 0; r < rep.trajectories.size(); ++r) {
    const auto& tr = rep.trajectories[r];
    std::size_t cap = (static_cast<Index>(r) == rep.best_restart) ? 1000 : traj_cap_per_restart;
    std::size_t stride = std::max<std::size_t>(1, tr.size() / cap);
    Json pts = Json::array();
    for (std::size_t i = 0; i < tr.size(); i += stride)
      pts.push_back({tr[i].iter, tr[i].best_loss, tr[i].norm});
    if (!tr.empty() && (tr.size() - 1) % stride != 0)
      pts.push_back({tr.back().iter, tr.back().best_loss, tr.back().norm});
    trajs.push_back(std::move(pts));
  }
  j["trajectories"] = std::move(trajs);
  return j;
}

/// Optional JSON config file with FitConfig field names; explicit CLI flags
/// override whatever the file sets.
FitConfig load_fit_config(const std::string& path) {
  FitConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream f(path);
  if (!f) throw CsvError(path + ": cannot open config file");
  Json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    throw CsvError(path + ": bad JSON: " + e.what());
  }
  if (j.contains("restarts")) cfg.restarts = j["restarts"].get<Index>();
  if (j.contains("max_iters")) cfg.max_iters = j["max_iters"].get<Index>();
  if (j.contains("learning_rate")) cfg.learning_rate = j["learning_rate"].get<double>();
  if (j.contains("init_scale")) cfg.init_scale = j["init_scale"].get<double>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("norm_divergence_threshold"))
    cfg.norm_divergence_threshold = j["norm_divergence_threshold"].get<double>();
  if (j.contains("grad_tol")) cfg.grad_tol = j["grad_tol"].get<double>();
  if (j.contains("norm_cap")) cfg.norm_cap = j["norm_cap"].get<double>();
  return cfg;
}

int run_guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const CsvError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const EnumerationCapError& e) {
    std::cerr << "error: " << e.what() << " (pass --numeric for the search path)\n";
    return kExitCap;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitShape;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int cmd_cone(const ConeArgs& args) {
  return run_guarded([&] {
    RunRecord rec("cone " + args.subcommand);
    rec.add_config("sample", args.sample_file);
    SampleMatrix S{read_matrix(args.sample_file)};
    rec.add_input_digest("sample", args.sample_file);
    Json results;

    if (args.subcommand == "dim") {
      Index d = cone_dim(S);
      std::cout << "cone dimension rk[S,1] = " << d << "  (n = " << S.n() << ", p = " << S.p()
                << ")\n";
      results["rank"] = d;
      results["n"] = S.n();
      results["p"] = S.p();
    } else if (args.subcommand == "member") {
      if (args.vector_file.empty()) throw CsvError("cone member: --response <vector.csv> required");
      Vec x = read_vector(args.vector_file);
      rec.add_config("vector", args.vector_file);
      rec.add_input_digest("vector", args.vector_file);
      if (x.size() != S.n()) throw std::invalid_argument("vector length != sample count");
      auto r = cone_membership(S, x, args.tol);
      std::cout << (r.member ? "MEMBER" : "NON_MEMBER") << "\n";
      results["verdict"] = r.member ? "MEMBER" : "NON_MEMBER";
      if (r.member) {
        std::cout << "witness a = [" << r.witness_a->transpose() << "], b = " << *r.witness_b
                  << ", roundtrip residual = " << r.roundtrip_residual << "\n";
        results["witness_a"] = vector_to_json(*r.witness_a);
        results["witness_b"] = *r.witness_b;
        results["roundtrip_residual"] = r.roundtrip_residual;
      }
    } else if (args.subcommand == "faces") {
      FaceDecomposition fd = enumerate_faces(S);
      std::cout << fd.faces.size() << " realizable support patterns:\n";
      Json faces = Json::array();
      for (const auto& f : fd.faces) {
        std::cout << "  {";
        for (std::size_t i = 0; i < f.indices.size(); ++i)
          std::cout << (i ? "," : "") << f.indices[i] + 1;
        std::cout << "}  dim " << f.dimension << "\n";
        faces.push_back(face_to_json(f));
      }
      results["count"] = fd.faces.size();
      results["faces"] = std::move(faces);
    } else {
      throw CsvError("unknown cone subcommand: " + args.subcommand);
    }

    rec.set_results(std::move(results));
    if (!args.out.empty()) rec.finish_and_save(args.out);
    return kExitOk;
  });
}

int cmd_image(const ImageArgs& args) {
  return run_guarded([&] {
    RunRecord rec("image " + args.subcommand);
    Json results;
    rec.set_seed(args.seed);
    rec.add_config("width", args.width);

    if (args.subcommand == "bound") {
      Index d = args.width, q = std::max<std::int64_t>(args.outputs, 1);
      rec.add_config("outputs", q);
      if (!args.sample_file.empty()) {
        SampleMatrix S{read_matrix(args.sample_file)};
        rec.add_input_digest("sample", args.sample_file);
        Index ub = dim_upper_bound(S, d, q);
        auto gen = generic_dim_2layer(S.p(), d, q, S.n());
        std::cout << "dim upper bound (rank-based): " << ub << "\n";
        results["upper_bound"] = ub;
        if (gen.value) {
          std::cout << "generic dimension: " << *gen.value
                    << (gen.heuristic_threshold ? "  (sample-size threshold heuristic)" : "")
                    << "\n";
          results["generic_dimension"] = *gen.value;
          results["heuristic_threshold"] = gen.heuristic_threshold;
        }
      } else {
        if (args.inputs < 1 || args.samples < 1)
          throw std::invalid_argument("image bound: give --sample or both --inputs and --samples");
        auto gen = generic_dim_2layer(args.inputs, d, q, args.samples);
        if (gen.value) {
          std::cout << "generic dimension: " << *gen.value
                    << (gen.heuristic_threshold ? "  (sample-size threshold heuristic)" : "")
                    << "\n";
          results["generic_dimension"] = *gen.value;
          results["heuristic_threshold"] = gen.heuristic_threshold;
        } else {
          std::cout << "generic dimension: not determined for this sample size\n";
          results["generic_dimension"] = nullptr;
        }
      }
      rec.set_results(std::move(results));
      if (!args.out.empty()) rec.finish_and_save(args.out);
      return kExitOk;
    }

    SampleMatrix S{read_matrix(args.sample_file)};
    rec.add_input_digest("sample", args.sample_file);

    if (args.subcommand == "dim") {
      Index q = std::max<std::int64_t>(args.outputs, 1);
      Index trials = args.restarts > 0 ? args.restarts : 50;
      double rel_tol = args.tol > 0 ? args.tol : 1e-8;
      NetworkSpec spec({S.p(), args.width, q}, Activation::Relu);
      auto rep = numerical_image_dim(spec, S, trials, args.seed, rel_tol);
      std::cout << "max numerical rank over " << trials << " draws: " << rep.numerical_rank_max
                << "  (upper bound " << rep.theoretical_upper;
      if (rep.generic_formula) std::cout << ", generic formula " << *rep.generic_formula;
      std::cout << ")\n";
      results["numerical_rank_max"] = rep.numerical_rank_max;
      results["theoretical_upper"] = rep.theoretical_upper;
      if (rep.generic_formula) results["generic_formula"] = *rep.generic_formula;
      results["trials"] = rep.trials;
      results["skipped_kink_draws"] = rep.skipped_kink_draws;
      Json hist = Json::object();
      for (const auto& [rank, count] : rep.rank_histogram)
        hist[std::to_string(rank)] = count;
      results["rank_histogram"] = std::move(hist);
      rec.set_results(std::move(results));
      if (!args.out.empty()) rec.finish_and_save(args.out);
      return kExitOk;
    }

    ResponseMatrix T{read_matrix(args.response_file)};
    rec.add_input_digest("response", args.response_file);
    if (T.n() != S.n()) throw std::invalid_argument("response rows != sample rows");
    if (args.outputs > 0 && args.outputs != T.q())
      throw std::invalid_argument("--outputs disagrees with the response file");

    if (args.subcommand == "member") {
      bool exact_possible = T.q() == 1 && S.n() <= 16;
      if (!exact_possible && !args.numeric) {
        if (T.q() == 1) {
          std::cerr << "error: sample too large for exact enumeration; pass --numeric\n";
          return kExitCap;
        }
      }
      bool use_exact = exact_possible && !args.numeric;
      results["path"] = use_exact ? "exact" : "numeric";
      MembershipCertificate cert;
      if (use_exact) {
        double tol = args.tol > 0 ? args.tol : 1e-9;
        cert = membership_2layer_q1(S, T.entries().col(0), args.width, tol);
      } else {
        GeneralMembershipConfig cfg;
        cfg.seed = args.seed;
        if (args.restarts > 0) cfg.restarts = args.restarts;
        if (args.max_iters > 0) cfg.max_iters = args.max_iters;
        if (args.tol > 0) cfg.tol = args.tol;
        cert = membership_2layer_general(S, T, args.width, cfg);
      }
      std::cout << to_string(cert.verdict) << "  (" << results["path"].get<std::string>()
                << " path)\n";
      if (cert.verdict == MembershipVerdict::Member ||
          cert.verdict == MembershipVerdict::MemberNumeric)
        std::cout << "residual = " << cert.residual << ", lambda = " << cert.lambda << "\n";
      results["verdict"] = to_string(cert.verdict);
      results["residual"] = cert.residual;
      results["lambda"] = cert.lambda;
      results["pattern"] = pattern_to_json(cert.pattern);
      if (cert.witness) results["witness"] = weights_to_json(*cert.witness);
    } else if (args.subcommand == "distance") {
      if (T.q() != 1)
        throw std::invalid_argument("image distance: exact path needs a single output column");
      double tol = args.tol > 0 ? args.tol : 1e-9;
      auto r = fit_distance_2layer_q1(S, T.entries().col(0), args.width, tol);
      std::cout << "distance = " << r.distance << "  (squared " << r.distance * r.distance
                << ")\n";
      std::cout << "nearest = [" << r.nearest.transpose() << "]\n";
      results["distance"] = r.distance;
      results["sq_distance"] = r.distance * r.distance;
      results["nearest"] = vector_to_json(r.nearest);
      results["pattern"] = pattern_to_json(r.pattern);
      results["lambda"] = r.lambda;
      if (r.witness) results["witness"] = weights_to_json(*r.witness);
    } else {
      throw CsvError("unknown image subcommand: " + args.subcommand);
    }

    rec.set_results(std::move(results));
    if (!args.out.empty()) rec.finish_and_save(args.out);
    return kExitOk;
  });
}

int cmd_fit(const FitArgs& args) {
  return run_guarded([&] {
    RunRecord rec("fit");
    SampleMatrix S{read_matrix(args.sample_file)};
    ResponseMatrix T{read_matrix(args.response_file)};
    rec.add_input_digest("sample", args.sample_file);
    rec.add_input_digest("response", args.response_file);

    if (args.widths.size() < 2) throw std::invalid_argument("--widths needs d1,...,dk+1");
    std::vector<Index> widths(args.widths.begin(), args.widths.end());
    if (widths.front() != S.p())
      throw std::invalid_argument("first width must equal the sample's input dimension");
    if (widths.back() != T.q())
      throw std::invalid_argument("last width must equal the response's output dimension");
    if (T.n() != S.n()) throw std::invalid_argument("response rows != sample rows");

    NetworkSpec spec(widths, activation_from_string(args.activation));
    FitConfig cfg = load_fit_config(args.config_file);
    if (args.restarts > 0) cfg.restarts = args.restarts;
    if (args.max_iters > 0) cfg.max_iters = args.max_iters;
    if (args.seed_given) cfg.seed = args.seed;
    if (args.tol > 0) cfg.grad_tol = args.tol;

    rec.set_seed(cfg.seed);
    rec.add_config("widths", args.widths);
    rec.add_config("activation", args.activation);
    rec.add_config("restarts", cfg.restarts);
    rec.add_config("max_iters", cfg.max_iters);

    FitReport rep = fit(spec, S, T, cfg);
    std::cout << "best squared loss = " << rep.best_sq_loss << "\n";
    std::cout << "best |theta| = " << rep.best_norm << "\n";
    std::cout << "attainment classification (heuristic): " << to_string(rep.classification)
              << "\n";
    Json results = fit_report_to_json(rep);
    results["best_weights"] = weights_to_json(rep.best_weights);
    rec.set_results(std::move(results));
    if (!args.out.empty()) rec.finish_and_save(args.out);
    return kExitOk;
  });
}

int cmd_replicate(const ReplicateArgs& args) {
  return run_guarded([&] {
    RunRecord rec("replicate " + args.target);
    rec.set_seed(args.seed);
    Json results;

    if (args.target == "nonclosed") {
      if (args.dump) {
        write_matrix("paper_s.csv", datasets::paper_s().entries());
        write_matrix("paper_t.csv", datasets::paper_t().entries());
        std::cout << "wrote paper_s.csv and paper_t.csv\n";
        results["dumped"] = {"paper_s.csv", "paper_t.csv"};
      }
      std::vector<std::uint64_t> ks = args.ks;
      if (ks.empty()) ks = {1, 10, 100, 1000, 1000000};
      auto pts = replicate_nonclosed_sequence(ks);
      std::cout << "k          |T - psi_2(theta_k)|_F    |theta_k|\n";
      Json table = Json::array();
      for (const auto& pt : pts) {
        std::printf("%-10llu %-24.15e %.6e\n", static_cast<unsigned long long>(pt.k),
                    pt.distance, pt.norm);
        table.push_back({pt.k, pt.distance, pt.norm});
      }
      results["sequence"] = std::move(table);

      // quick fit diagnosis on the built-in instance
      FitConfig cfg = load_fit_config(args.config_file);
      cfg.restarts = args.restarts > 0 ? args.restarts : 6;
      cfg.max_iters = args.max_iters > 0 ? args.max_iters : 4000;
      cfg.seed = args.seed;
      NetworkSpec spec({2, 2, 2}, Activation::Relu);
      FitReport rep = fit(spec, datasets::paper_s(), datasets::paper_t(), cfg);
      std::cout << "fit diagnosis (heuristic): " << to_string(rep.classification)
                << "  best squared loss " << rep.best_sq_loss << ", |theta| " << rep.best_norm
                << "\n";
      results["fit"] = fit_report_to_json(rep);
    } else if (args.target == "tanh") {
      ChainAnalysisConfig cfg;
      cfg.fit = load_fit_config(args.config_file);
      if (cfg.fit.restarts == 20) cfg.fit.restarts = 6;      // lighter default here
      if (cfg.fit.max_iters == 50000) cfg.fit.max_iters = 8000;
      if (args.restarts > 0) cfg.fit.restarts = args.restarts;
      if (args.max_iters > 0) cfg.fit.max_iters = args.max_iters;
      cfg.fit.seed = args.seed;
      Index grid = args.grid > 0 ? args.grid : 1;
      auto rep = epsilon_grid_analysis(datasets::tanh_example_t(), args.epsilon, grid, cfg);
      const auto& center = rep.analyses[rep.analyses.size() / 2];
      std::cout << "grid points: " << rep.analyses.size()
                << ", suspected non-attained fraction: " << rep.suspected_fraction << "\n";
      std::cout << "center-ish point best squared loss " << center.best_sq_loss
                << " vs isotonic bound " << center.isotonic.sq_distance << "\n";
      Json pts = Json::array();
      for (const auto& a : rep.analyses) {
        Json j;
        j["target"] = vector_to_json(a.target);
        j["isotonic_sq"] = a.isotonic.sq_distance;
        j["best_sq_loss"] = a.best_sq_loss;
        j["final_norm"] = a.final_norm;
        j["classification"] = to_string(a.classification);
        pts.push_back(std::move(j));
      }
      results["grid"] = std::move(pts);
      results["suspected_fraction"] = rep.suspected_fraction;
      results["epsilon"] = args.epsilon;
    } else {
      throw CsvError("unknown replicate target: " + args.target);
    }

    rec.set_results(std::move(results));
    if (!args.out.empty()) rec.finish_and_save(args.out);
    return kExitOk;
  });
}

}  // namespace relugeo::cli
