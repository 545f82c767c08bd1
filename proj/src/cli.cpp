#include "gbst/cli.hpp"

#include "gbst/coding_eval.hpp"
#include "gbst/dataset.hpp"
#include "gbst/error.hpp"
#include "gbst/estimation.hpp"
#include "gbst/spectral.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <memory>

namespace gbst::cli {

namespace {

using nlohmann::json;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParameter:
    case ErrorCode::InvalidDimension:
    case ErrorCode::NotACorrespondence:
      return kUsageError;
    default:
      return kDataError;
  }
}

// Writes to `path`, or to `fallback` when path is empty or "-".
template <typename Fn>
void with_output(const std::string& path, std::ostream& fallback, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  fn(file);
  file.flush();
  if (!file) throw Error(ErrorCode::IoError, "failed writing " + path);
}

struct Flags {
  // verify
  int verify_n = 0;
  std::string verify_kind;
  // shared
  std::string family = "L1";
  double w = 1.0;
  double v = 0.0;
  int n = 8;
  std::string out;
  bool json = false;
  int threads = 1;
  std::uint64_t seed = 0;
  // basis
  std::string kind;
  std::string plot_data;
  // learn
  std::string data;
  std::string direction = "row";
  int max_iter = 10000;
  // sweep
  std::string alphas = "0:0.25:2";
  double model_w = 1.0;
  double model_v = 1.0;
  std::size_t count = 0;
  int compaction = 0;
  double step = 1.0;
  // gen-matrix
  double alpha = -1.0;
  // sample
  std::string format = "text";
  std::string col_family;
  double col_w = -1.0;
  double col_v = -1.0;
  double scale = 16.0;
};

int do_basis(const Flags& f, std::ostream& out) {
  if (!f.kind.empty()) {
    const TrigKind kind = parse_trig_kind(f.kind);
    const TransformMatrix t = trig_matrix(kind, f.n);
    with_output(f.out, out, [&](std::ostream& s) { write_trig_dump(s, kind, t); });
    if (!f.plot_data.empty()) with_output(f.plot_data, out, [&](std::ostream& s) { write_plot_data(s, t); });
    return kSuccess;
  }
  const GraphParams params{f.w, f.v, parse_family(f.family)};
  const TransformMatrix t = derive_gbt(LineGraphLaplacian::build(params, f.n));
  with_output(f.out, out, [&](std::ostream& s) { write_basis_dump(s, t, params); });
  if (!f.plot_data.empty()) with_output(f.plot_data, out, [&](std::ostream& s) { write_plot_data(s, t); });
  return kSuccess;
}

int do_learn(const Flags& f, std::ostream& out) {
  const GraphFamily family = parse_family(f.family);
  if (f.direction != "row" && f.direction != "col") {
    throw Error(ErrorCode::InvalidParameter, "direction must be row or col");
  }
  if (f.data.empty()) throw Error(ErrorCode::InvalidParameter, "--data is required");
  const ResidualDataset ds = load_gbsr(f.data);
  const ResidualCovariances cov = residual_covariances(ds, f.threads);
  SolverOptions opts;
  opts.max_iterations = f.max_iter;
  const MlSolution sol = solve_ml(f.direction == "row" ? cov.row : cov.col, family, opts);
  const RefinedParam refined = refine(sol);

  if (f.json) {
    json j = {{"direction", f.direction},
              {"family", std::string(to_string(family))},
              {"N", sol.size},
              {"blocks", ds.block_count()},
              {"w_star", sol.w_star},
              {"v_star", sol.v_star},
              {"ratio", sol.ratio()},
              {"alpha", refined.alpha},
              {"objective", sol.objective},
              {"iterations", sol.iterations},
              {"converged", sol.converged},
              {"at_boundary", sol.at_boundary},
              {"projected_gradient_norm", sol.projected_gradient_norm}};
    out << j.dump() << '\n';
  } else {
    out << "direction=" << f.direction << " family=" << to_string(family) << " N=" << sol.size
        << " blocks=" << ds.block_count() << '\n'
        << "w*=" << format_double(sol.w_star) << " v*=" << format_double(sol.v_star)
        << " ratio=" << format_double(sol.ratio()) << " alpha=" << format_double(refined.alpha)
        << '\n'
        << "objective=" << format_double(sol.objective) << " iterations=" << sol.iterations
        << " converged=" << (sol.converged ? "true" : "false")
        << " boundary=" << (sol.at_boundary ? "true" : "false")
        << " pg_norm=" << format_double(sol.projected_gradient_norm) << '\n';
  }
  return sol.converged ? kSuccess : kDataError;
}

int do_refine(const Flags& f, std::ostream& out) {
  GraphParams{f.w, f.v, GraphFamily::L1}.validate();
  MlSolution sol;
  sol.w_star = f.w;
  sol.v_star = f.v;
  sol.size = f.n;
  const RefinedParam r = refine(sol);
  if (f.json) {
    out << json{{"w", f.w}, {"v", f.v}, {"ratio", f.v / f.w}, {"alpha", r.alpha}, {"N", f.n}}.dump()
        << '\n';
  } else {
    out << "ratio=" << format_double(f.v / f.w) << " alpha=" << format_double(r.alpha) << '\n';
  }
  return kSuccess;
}

int do_sweep(const Flags& f, std::ostream& out) {
  const GraphFamily family = parse_family(f.family);
  const std::vector<double> alphas = parse_alpha_range(f.alphas);
  MetricOptions mo;
  mo.compaction_count = f.compaction;
  mo.quantizer_step = f.step;

  std::optional<SampleCovariance> cov;
  if (!f.data.empty()) {
    if (f.direction != "row" && f.direction != "col") {
      throw Error(ErrorCode::InvalidParameter, "direction must be row or col");
    }
    const ResidualCovariances both = residual_covariances(load_gbsr(f.data), f.threads);
    cov = f.direction == "row" ? both.row : both.col;
  } else {
    const auto precision = LineGraphLaplacian::build({f.model_w, f.model_v, family}, f.n);
    if (f.count == 0) {
      cov = SampleCovariance::from_matrix(TridiagonalFactor::compute(precision).inverse());
    } else {
      cov = gmrf_sample_covariance({precision, f.seed}, f.count, f.threads);
    }
  }
  const auto rows = alpha_sweep(*cov, family, alphas, mo);
  with_output(f.out, out, [&](std::ostream& s) { write_sweep_csv(s, rows); });
  return kSuccess;
}

int do_gen_matrix(const Flags& f, std::ostream& out) {
  TransformMatrix t;
  if (!f.kind.empty()) {
    t = trig_matrix(parse_trig_kind(f.kind), f.n);
  } else {
    if (f.alpha < 0.0) throw Error(ErrorCode::InvalidParameter, "give --kind or --alpha");
    t = derive_gbt(LineGraphLaplacian::build({1.0, f.alpha, parse_family(f.family)}, f.n));
  }
  const IntTransformMatrix m = integerize(t);
  with_output(f.out, out, [&](std::ostream& s) { write_int_matrix(s, m); });
  return kSuccess;
}

int do_sample(const Flags& f, std::ostream& out) {
  const GraphParams row_params{f.w, f.v, parse_family(f.family)};
  if (f.count < 1) throw Error(ErrorCode::InvalidParameter, "--count must be >= 1");
  const auto row_precision = LineGraphLaplacian::build(row_params, f.n);
  if (f.format == "text") {
    const auto draws = sample_gmrf({row_precision, f.seed}, f.count);
    with_output(f.out, out, [&](std::ostream& s) {
      for (const auto& x : draws) {
        for (Eigen::Index i = 0; i < x.size(); ++i) s << (i ? " " : "") << format_double(x[i]);
        s << '\n';
      }
    });
    return kSuccess;
  }
  if (f.format != "gbsr") throw Error(ErrorCode::InvalidParameter, "format must be text or gbsr");
  if (f.out.empty() || f.out == "-") {
    throw Error(ErrorCode::InvalidParameter, "gbsr output needs --out <file>");
  }
  const GraphParams col_params{f.col_w >= 0.0 ? f.col_w : f.w, f.col_v >= 0.0 ? f.col_v : f.v,
                               f.col_family.empty() ? row_params.family
                                                    : parse_family(f.col_family)};
  const auto col_precision = LineGraphLaplacian::build(col_params, f.n);
  const ResidualDataset ds = synthesize_dataset(row_precision, col_precision, f.seed, f.count, f.scale);
  save_gbsr(f.out, ds);
  return kSuccess;
}

}  // namespace

int cmd_verify(const VerifyOptions& options, const TrigGenerator& generator, std::ostream& out) {
  std::vector<TrigKind> kinds(kAllTrigKinds.begin(), kAllTrigKinds.end());
  if (options.kind) kinds = {*options.kind};
  std::vector<int> sizes = {4, 8, 16, 32};
  if (options.size) {
    check_graph_size(*options.size);
    sizes = {*options.size};
  }
  const auto results = run_correspondence_suite(kinds, sizes, generator);
  bool all = true;
  json records = json::array();
  for (const auto& r : results) {
    all = all && r.pass;
    if (options.json) {
      records.push_back({{"kind", std::string(to_string(r.kind))},
                         {"N", r.size},
                         {"family", std::string(to_string(r.params.family))},
                         {"w", r.params.edge_weight},
                         {"v", r.params.vertex_weight},
                         {"deviation", r.deviation},
                         {"pass", r.pass}});
    } else {
      out << (r.pass ? "PASS" : "FAIL") << ' ' << to_string(r.kind) << " N=" << r.size
          << " family=" << to_string(r.params.family) << " w=" << format_double(r.params.edge_weight)
          << " v=" << format_double(r.params.vertex_weight)
          << " deviation=" << format_double(r.deviation) << '\n';
    }
  }
  if (options.json) {
    out << json{{"pass", all}, {"tolerance", kCorrespondenceTolerance}, {"checks", records}}.dump()
        << '\n';
  }
  return all ? kSuccess : kVerificationFailure;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph-based separable transforms from two-parameter line graphs", "gbst"};
  app.require_subcommand(1);
  Flags f;

  auto* verify = app.add_subcommand("verify", "Check the five graph/trigonometric correspondences");
  verify->add_option("--n", f.verify_n, "Only this transform size");
  verify->add_option("--kind", f.verify_kind, "Only this kind (DCT2, DST7, DCT8, DST4, DCT4)");
  verify->add_flag("--json", f.json, "Single-line JSON record");

  auto* basis = app.add_subcommand("basis", "Dump a GBT or closed-form trigonometric basis");
  basis->add_option("--family", f.family, "L1 or L2");
  basis->add_option("--w", f.w, "Edge weight");
  basis->add_option("--v", f.v, "Vertex (self-loop) weight");
  basis->add_option("--n", f.n, "Transform size");
  basis->add_option("--kind", f.kind, "Closed-form kind instead of a graph");
  basis->add_option("--out", f.out, "Output file (default stdout)");
  basis->add_option("--plot-data", f.plot_data, "Also write (n, k, u_k(n)) triples here");

  auto* learn = app.add_subcommand("learn", "Fit (w, v) to a GBSR dataset and round to alpha");
  learn->add_option("--data", f.data, "GBSR dataset")->required();
  learn->add_option("--family", f.family, "L1 or L2");
  learn->add_option("--direction", f.direction, "row or col");
  learn->add_option("--max-iter", f.max_iter, "Solver iteration cap");
  learn->add_option("--threads", f.threads, "Worker threads for covariance accumulation");
  learn->add_flag("--json", f.json, "Single-line JSON record");

  auto* refine_cmd = app.add_subcommand("refine", "Normalize (w, v) and round v/w to the 0.25 grid");
  refine_cmd->add_option("--w", f.w, "Edge weight")->required();
  refine_cmd->add_option("--v", f.v, "Vertex weight")->required();
  refine_cmd->add_option("--n", f.n, "Transform size (reported only)");
  refine_cmd->add_flag("--json", f.json, "Single-line JSON record");

  auto* sweep = app.add_subcommand("sweep", "Coding metrics of normalized GBTs over an alpha grid");
  sweep->add_option("--n", f.n, "Transform size");
  sweep->add_option("--alphas", f.alphas, "start:step:end, step a multiple of 0.25");
  sweep->add_option("--family", f.family, "L1 or L2");
  sweep->add_option("--model-w", f.model_w, "Generating model edge weight");
  sweep->add_option("--model-v", f.model_v, "Generating model vertex weight");
  sweep->add_option("--count", f.count, "GMRF draws (0: exact model covariance)");
  sweep->add_option("--seed", f.seed, "Sampling seed");
  sweep->add_option("--data", f.data, "Use a GBSR dataset instead of a model");
  sweep->add_option("--direction", f.direction, "row or col (with --data)");
  sweep->add_option("--k", f.compaction, "Energy-compaction coefficient count (default N/4)");
  sweep->add_option("--step", f.step, "Quantizer step for the entropy proxy");
  sweep->add_option("--threads", f.threads, "Worker threads (results are identical)");
  sweep->add_option("--out", f.out, "CSV file (default stdout)");

  auto* gen = app.add_subcommand("gen-matrix", "8-bit integer transform table");
  gen->add_option("--kind", f.kind, "Closed-form kind");
  gen->add_option("--family", f.family, "L1 or L2 (with --alpha)");
  gen->add_option("--alpha", f.alpha, "Normalized vertex weight of the graph");
  gen->add_option("--n", f.n, "Transform size");
  gen->add_option("--out", f.out, "Output file (default stdout)");

  auto* sample = app.add_subcommand("sample", "Draw GMRF vectors or a synthetic GBSR dataset");
  sample->add_option("--family", f.family, "L1 or L2");
  sample->add_option("--w", f.w, "Edge weight");
  sample->add_option("--v", f.v, "Vertex weight");
  sample->add_option("--n", f.n, "Vector / block size");
  sample->add_option("--count", f.count, "Vectors (text) or blocks (gbsr)")->required();
  sample->add_option("--seed", f.seed, "Seed");
  sample->add_option("--format", f.format, "text or gbsr");
  sample->add_option("--col-family", f.col_family, "Column graph family (gbsr; default row's)");
  sample->add_option("--col-w", f.col_w, "Column graph edge weight (gbsr)");
  sample->add_option("--col-v", f.col_v, "Column graph vertex weight (gbsr)");
  sample->add_option("--scale", f.scale, "Multiplier before rounding to 16 bits (gbsr)");
  sample->add_option("--out", f.out, "Output file (default stdout for text)");

  std::vector<const char*> argv{"gbst"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    if (*verify) {
      VerifyOptions vo;
      if (verify->count("--n")) vo.size = f.verify_n;
      if (!f.verify_kind.empty()) vo.kind = parse_trig_kind(f.verify_kind);
      vo.json = f.json;
      return cmd_verify(vo, trig_matrix, out);
    }
    if (*basis) return do_basis(f, out);
    if (*learn) return do_learn(f, out);
    if (*refine_cmd) return do_refine(f, out);
    if (*sweep) return do_sweep(f, out);
    if (*gen) return do_gen_matrix(f, out);
    if (*sample) return do_sample(f, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  }
  return kUsageError;
}

}  // namespace gbst::cli
