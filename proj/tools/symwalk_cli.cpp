// symwalk: reflective symmetry detection by annealed Langevin dynamics in a
// Hough-style plane space, with a mean-shift baseline, metrics and demos.

#include <symwalk/pipeline.hpp>
#include <symwalk/shapes.hpp>
#include <symwalk/svg.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace symwalk;

namespace {

// Exit codes.
constexpr int kOk = 0, kUsage = 1, kIo = 2, kNumerical = 3;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// run.json next to the output, one entry per output file name, so that a
// gen -> detect -> eval chain in one directory keeps every manifest.
void write_manifest(const std::string& output, const std::string& command, const Json& config,
                    const std::vector<std::string>& inputs, const std::map<std::string, double>& seconds,
                    const std::vector<std::string>& extra_outputs = {}) {
  const fs::path dir = fs::path(output).parent_path();
  const std::string path = (dir / "run.json").string();
  Json all = Json::object();
  if (fs::exists(path)) {
    try {
      all = load_json(path);
    } catch (const Error&) {
      all = Json::object();
    }
    if (!all.is_object() || !all.contains("runs")) all = Json::object();
  }
  Json in = Json::array();
  for (const auto& i : inputs) in.push_back(Json{{"path", i}, {"fnv1a", hex64(fnv1a(read_file(i)))}});
  Json outs = Json::array({output});
  for (const auto& o : extra_outputs) outs.push_back(o);
  Json entry{{"command", command}, {"config", config}, {"inputs", in},
             {"outputs", outs},     {"seconds", seconds}};
  // the hash covers everything that determines the output
  entry["run_hash"] = hex64(fnv1a(Json{{"command", command}, {"config", config}, {"inputs", in}}.dump()));
  all["runs"][fs::path(output).filename().string()] = entry;
  save_json(path, all);
}

int dim_of(std::optional<int> flag, const std::string& path) {
  const int d = flag ? *flag : file_dim(path);
  require(d == 2 || d == 3, "dimension must be 2 or 3, got " + std::to_string(d));
  return d;
}

template <class F>
int dispatch(int dim, F&& f) {
  if (dim == 2) return f(std::integral_constant<int, 2>{});
  return f(std::integral_constant<int, 3>{});
}

void emit(const std::string& out, const Json& j) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(1) << "\n";
  } else {
    save_json(out, j);
  }
}

// ---------------------------------------------------------------- gen ------

struct GenOpts {
  std::string kind = "square";
  double noise = 0;
  std::string noise_mode;
  std::uint64_t seed = 0;
  std::size_t points = 0;
  int sides = 3;
  double shift = 0.4;
  std::string out;
};

int cmd_gen(const GenOpts& o) {
  const ShapeKind kind = parse_shape_kind(o.kind);
  ShapeParams sp;
  sp.points = o.points;
  sp.sides = o.sides;
  sp.shift = o.shift;
  const int dim = shape_dim(kind);
  NoiseMode mode = dim == 3 ? NoiseMode::along_normal : NoiseMode::isotropic;
  if (o.noise_mode == "isotropic") mode = NoiseMode::isotropic;
  else if (o.noise_mode == "along_normal") mode = NoiseMode::along_normal;
  else require(o.noise_mode.empty(), "noise mode must be isotropic or along_normal");

  return dispatch(dim, [&](auto dc) {
    constexpr int D = decltype(dc)::value;
    LabeledShape<D> s;
    if constexpr (D == 2) s = gen_shape_2d(kind, sp);
    else s = gen_shape_3d(kind, sp);
    const PointCloud<D> cloud = add_noise(s.cloud, o.noise, mode, o.seed);
    save_cloud(o.out, cloud, &s.planes);
    std::vector<std::string> extra;
    if (format_from_path(o.out) != FileFormat::json) {
      // other formats cannot hold the ground truth; it goes next to them
      const std::string gt = (fs::path(o.out).replace_extension(".gt.json")).string();
      save_json(gt, gt_to_json(GroundTruth<D>{s.planes, GtSource::analytic}));
      extra.push_back(gt);
    }
    write_manifest(o.out, "gen",
                   Json{{"kind", o.kind}, {"noise", o.noise},
                        {"noise_mode", mode == NoiseMode::isotropic ? "isotropic" : "along_normal"},
                        {"seed", o.seed}, {"points", cloud.size()}, {"sides", o.sides}, {"shift", o.shift}},
                   {}, {}, extra);
    return kOk;
  });
}

// ------------------------------------------------------------- detect ------

struct DetectOpts {
  std::string input, out, space_out, trace_out;
  std::optional<int> dim;
  std::string kind = "reflective";
  std::optional<std::size_t> pairs, walkers, steps, levels, trace_every, settle, score_batch, min_pts;
  std::optional<double> kernel, k, step_size, sigma_max, beta, support_eps, tau, dbscan_eps;
  double min_shift = 0.1;
  std::uint64_t seed = 0;
};

template <int D>
DetectConfig detect_config(const DetectOpts& o) {
  DetectConfig c = default_detect_config(D);
  if (o.pairs) c.num_pairs = *o.pairs;
  if (o.walkers) c.langevin.num_walkers = *o.walkers;
  if (o.levels) c.langevin.num_levels = *o.levels;
  if (o.kernel) c.langevin.kernel_size = *o.kernel;
  if (o.k) c.k = *o.k;
  if (o.step_size) c.langevin.step_size = *o.step_size;
  if (o.sigma_max) c.langevin.sigma_max = *o.sigma_max;
  else if (o.kind == "translational") c.langevin.sigma_max = kTranslationSigmaScale * c.langevin.kernel_size;
  if (o.beta) c.langevin.beta = *o.beta;
  if (o.score_batch) c.langevin.score_batch = *o.score_batch;
  if (o.trace_every) c.langevin.trace_every = *o.trace_every;
  require(c.langevin.num_levels >= 1, "levels must be >= 1");
  set_total_steps(c.langevin, o.steps ? *o.steps : c.langevin.total_steps());
  require(!o.steps || *o.steps >= c.langevin.num_levels, "steps must be >= levels");
  if (o.settle) c.langevin.settle_steps = *o.settle;
  c.langevin.seed = o.seed;
  c.seed = o.seed;
  // extraction defaults follow the (possibly overridden) kernel and walkers
  c.extract = default_extract_config(D, c.langevin);
  if (o.support_eps) c.extract.support_eps = *o.support_eps;
  if (o.tau) c.extract.tau = *o.tau;
  if (o.dbscan_eps) c.extract.dbscan.eps = *o.dbscan_eps;
  if (o.min_pts) c.extract.dbscan.min_pts = *o.min_pts;
  require(c.num_pairs >= 1, "pairs must be >= 1");
  require(c.k > 0 || o.kind == "translational", "k must be positive");
  c.langevin.validate();
  c.extract.validate();
  return c;
}

Json detect_config_json(const DetectConfig& c) {
  const auto& l = c.langevin;
  return Json{{"pairs", c.num_pairs},          {"k", c.k},
              {"walkers", l.num_walkers},      {"steps", l.total_steps()},
              {"levels", l.num_levels},        {"kernel", l.kernel_size},
              {"sigma_max", l.sigma_max},      {"step_size", l.step_size},
              {"beta", l.beta},                {"settle", l.settle_steps},
              {"score_batch", l.score_batch},  {"seed", l.seed},
              {"dbscan_eps", c.extract.dbscan.eps}, {"min_pts", c.extract.dbscan.min_pts},
              {"support_eps", c.extract.support_eps}, {"tau", c.extract.tau}};
}

int cmd_detect(const DetectOpts& o) {
  require(o.kind == "reflective" || o.kind == "translational", "kind must be reflective or translational");
  return dispatch(dim_of(o.dim, o.input), [&](auto dc) {
    constexpr int D = decltype(dc)::value;
    const DetectConfig cfg = detect_config<D>(o);
    const PointCloud<D> cloud = load_cloud<D>(o.input);
    require(cloud.size() >= 2, "cloud too small: need at least 2 points");
    const bool reflective = o.kind == "reflective";
    const Detection<D> det = reflective ? detect_reflective(cloud, cfg)
                                        : detect_translations(cloud, cfg, o.min_shift);
    emit(o.out, results_to_json("langevin",
                                reflective ? SymmetryKind::reflective : SymmetryKind::translational,
                                det.results));
    std::vector<std::string> extra;
    if (!o.space_out.empty()) {
      save_json(o.space_out, space_to_json(det.space));
      extra.push_back(o.space_out);
    }
    if (!o.trace_out.empty()) {
      write_file(o.trace_out, trace_to_jsonl(det.trace));
      extra.push_back(o.trace_out);
    }
    if (!o.out.empty() && o.out != "-") {
      Json c = detect_config_json(cfg);
      c["kind"] = o.kind;
      c["dim"] = D;
      write_manifest(o.out, "detect", c, {o.input}, det.seconds, extra);
    }
    std::cerr << det.results.size() << " symmetries";
    for (const auto& [stage, sec] : det.seconds) std::cerr << ", " << stage << " " << sec << "s";
    std::cerr << "\n";
    return kOk;
  });
}

// ----------------------------------------------------------- baseline ------

struct BaselineOpts {
  std::string input, out;
  std::optional<int> dim;
  std::string extraction = "basins";
  std::optional<std::size_t> pairs, min_pts, trajectories;
  std::optional<double> k, bandwidth, support_eps, tau, dbscan_eps, min_basin;
  std::string kernel = "gaussian";
  std::uint64_t seed = 0;
};

int cmd_baseline(const BaselineOpts& o) {
  return dispatch(dim_of(o.dim, o.input), [&](auto dc) {
    constexpr int D = decltype(dc)::value;
    BaselineConfig c = default_baseline_config(D);
    if (o.pairs) c.num_pairs = *o.pairs;
    if (o.k) c.k = *o.k;
    if (o.bandwidth) {
      c.meanshift.bandwidth = *o.bandwidth;
      c.dbscan.eps = *o.bandwidth;
    }
    if (o.trajectories) c.meanshift.max_trajectories = *o.trajectories;
    if (o.min_basin) c.min_basin = *o.min_basin;
    if (o.dbscan_eps) c.dbscan.eps = *o.dbscan_eps;
    if (o.min_pts) c.dbscan.min_pts = *o.min_pts;
    if (o.support_eps) c.extract.support_eps = *o.support_eps;
    if (o.tau) c.extract.tau = *o.tau;
    if (o.extraction == "basins") c.extraction = BaselineExtraction::basins;
    else if (o.extraction == "dbscan") c.extraction = BaselineExtraction::dbscan;
    else throw Error(ErrorKind::invalid_argument, "extraction must be basins or dbscan");
    if (o.kernel == "gaussian") c.meanshift.kernel = Kernel::gaussian;
    else if (o.kernel == "epanechnikov") c.meanshift.kernel = Kernel::epanechnikov;
    else throw Error(ErrorKind::invalid_argument, "kernel must be gaussian or epanechnikov");
    c.seed = c.meanshift.seed = o.seed;
    c.meanshift.validate();
    c.extract.validate();
    require(c.k > 0, "k must be positive");

    const PointCloud<D> cloud = load_cloud<D>(o.input);
    require(cloud.size() >= 2, "cloud too small: need at least 2 points");
    const Detection<D> det = baseline_reflective(cloud, c);
    emit(o.out, results_to_json("meanshift", SymmetryKind::reflective, det.results));
    if (!o.out.empty() && o.out != "-")
      write_manifest(o.out, "baseline",
                     Json{{"dim", D}, {"pairs", c.num_pairs}, {"k", c.k},
                          {"bandwidth", c.meanshift.bandwidth}, {"kernel", o.kernel},
                          {"extraction", o.extraction}, {"min_basin", c.min_basin},
                          {"dbscan_eps", c.dbscan.eps}, {"min_pts", c.dbscan.min_pts},
                          {"support_eps", c.extract.support_eps}, {"tau", c.extract.tau},
                          {"seed", o.seed}},
                     {o.input}, det.seconds);
    return kOk;
  });
}

// --------------------------------------------------------------- eval ------

struct EvalOpts {
  std::string pred, gt, cloud, out;
  double delta = 0.1;
  std::optional<double> k, support_eps;
};

int cmd_eval(const EvalOpts& o) {
  const Json pj = load_json(o.pred);
  const Json gj = load_json(o.gt);
  const int dim = static_cast<int>(detail::number(pj, "dim", o.pred));
  require(dim == 2 || dim == 3, "dimension must be 2 or 3");
  require(o.delta > 0, "delta must be positive");
  return dispatch(dim, [&](auto dc) {
    constexpr int D = decltype(dc)::value;
    const auto pred = results_from_json<D>(pj, o.pred);
    const GroundTruth<D> gt = gt_from_json<D>(gj, o.gt);
    // the shape comes from --cloud, or from the ground-truth file when it is a cloud
    std::string cloud_path = o.cloud;
    if (cloud_path.empty()) {
      if (!gj.contains("points"))
        throw Error(ErrorKind::invalid_argument, "eval needs the shape: pass --cloud");
      cloud_path = o.gt;
    }
    const PointCloud<D> cloud = load_cloud<D>(cloud_path);
    const DetectorDefaults d = default_detector(D);
    const double k = o.k ? *o.k : d.k;
    const double eps = o.support_eps ? *o.support_eps : (D == 2 ? 0.02 : 0.05);
    const EvalReport r = evaluate(pred, gt, cloud, o.delta, k, eps);
    Json j = report_to_json(r);
    j["k"] = k;
    j["support_eps"] = eps;
    j["gt_source"] = to_string(gt.source);
    emit(o.out, j);
    if (!o.out.empty() && o.out != "-")
      write_manifest(o.out, "eval", Json{{"delta", o.delta}, {"k", k}, {"support_eps", eps}},
                     {o.pred, o.gt}, {});
    return kOk;
  });
}

// ------------------------------------------------ symmetrize / compress ------

struct SymOpts {
  std::string input, results, out;
  std::optional<int> dim;
  std::size_t plane = 0;
  double blend = 1.0;
  std::size_t iterations = 3;
  std::optional<double> support_eps;
};

int cmd_symmetrize(const SymOpts& o) {
  return dispatch(dim_of(o.dim, o.input), [&](auto dc) {
    constexpr int D = decltype(dc)::value;
    const PointCloud<D> cloud = load_cloud<D>(o.input);
    const auto results = results_from_json<D>(load_json(o.results), o.results);
    const auto planes = planes_of(results);
    require(o.plane < planes.size(), "plane index " + std::to_string(o.plane) + " out of range (" +
                                         std::to_string(planes.size()) + " planes)");
    SymmetrizeConfig c;
    c.blend = o.blend;
    c.iterations = o.iterations;
    c.support_eps = o.support_eps ? *o.support_eps : (D == 2 ? 0.02 : 0.05);
    const PointCloud<D> out = symmetrize_input_frame(cloud, planes[o.plane], c);
    save_cloud(o.out, out);
    const Similarity<D> t = normalizing_transform(cloud);
    std::cerr << "asymmetry " << asymmetry_residual(apply(t, cloud), t.apply(planes[o.plane])) << " -> "
              << asymmetry_residual(apply(t, out), t.apply(planes[o.plane])) << " (normalized units)\n";
    write_manifest(o.out, "symmetrize",
                   Json{{"plane", o.plane}, {"blend", c.blend}, {"iterations", c.iterations},
                        {"support_eps", c.support_eps}},
                   {o.input, o.results}, {});
    return kOk;
  });
}

struct CompressOpts {
  std::string input, results, out, restored;
  std::optional<int> dim;
  std::optional<double> support_eps;
};

int cmd_compress(const CompressOpts& o) {
  return dispatch(dim_of(o.dim, o.input), [&](auto dc) {
    constexpr int D = decltype(dc)::value;
    const PointCloud<D> cloud = load_cloud<D>(o.input);
    const auto results = results_from_json<D>(load_json(o.results), o.results);
    const double eps = o.support_eps ? *o.support_eps : (D == 2 ? 0.02 : 0.05);
    const Compressed<D> c = compress_input_frame(cloud, planes_of(results), eps);
    save_json(o.out, compressed_to_json(c));
    std::vector<std::string> extra;
    if (!o.restored.empty()) {
      save_cloud(o.restored, decompress(c));
      extra.push_back(o.restored);
    }
    std::cerr << "ratio " << c.ratio << " with " << c.stages.size() << " planes, " << c.kept.size()
              << " of " << c.original_size << " points kept\n";
    write_manifest(o.out, "compress", Json{{"support_eps", eps}}, {o.input, o.results}, {}, extra);
    return kOk;
  });
}

int cmd_decompress(const std::string& input, const std::string& out) {
  const Json j = load_json(input);
  const int dim = static_cast<int>(detail::number(j, "dim", input));
  require(dim == 2 || dim == 3, "dimension must be 2 or 3");
  return dispatch(dim, [&](auto dc) {
    constexpr int D = decltype(dc)::value;
    save_cloud(out, decompress(compressed_from_json<D>(j, input)));
    return kOk;
  });
}

// -------------------------------------------------------- space / propose ---

struct SpaceOpts {
  std::string input, out, kind = "reflective";
  std::optional<int> dim;
  std::size_t pairs = 50000;
  std::optional<double> k;
  std::uint64_t seed = 0;
};

int cmd_space(const SpaceOpts& o) {
  const SpaceKind kind = parse_space_kind(o.kind);
  return dispatch(dim_of(o.dim, o.input), [&](auto dc) {
    constexpr int D = decltype(dc)::value;
    const PointCloud<D> cloud = normalize(load_cloud<D>(o.input));
    const double k = o.k ? *o.k : default_detector(D).k;
    TransformSpace<D> s;
    if (kind == SpaceKind::reflective) {
      s = build_reflective_space(cloud, o.pairs, k, o.seed);
    } else if (kind == SpaceKind::translational) {
      s = build_translation_space(cloud, o.pairs, o.seed);
    } else {
      throw Error(ErrorKind::invalid_argument, "space supports reflective and translational votes");
    }
    save_json(o.out, space_to_json(s));
    write_manifest(o.out, "space", Json{{"kind", o.kind}, {"pairs", o.pairs}, {"k", s.k}, {"seed", o.seed}},
                   {o.input}, {});
    return kOk;
  });
}

struct ProposeOpts {
  std::string input, out;
  std::optional<int> dim;
  ProposeConfig cfg;
  std::optional<double> support_eps, k;
};

int cmd_propose(ProposeOpts o) {
  return dispatch(dim_of(o.dim, o.input), [&](auto dc) {
    constexpr int D = decltype(dc)::value;
    o.cfg.support_eps = o.support_eps ? *o.support_eps : (D == 2 ? 0.02 : 0.05);
    o.cfg.k = o.k ? *o.k : default_detector(D).k;
    const PointCloud<D> input = load_cloud<D>(o.input);
    const Similarity<D> t = normalizing_transform(input);
    GroundTruth<D> gt = propose_ground_truth(apply(t, input), o.cfg);
    for (auto& p : gt.symmetries) p = unnormalize(p, t);
    save_json(o.out, gt_to_json(gt));
    std::cerr << gt.symmetries.size() << " proposals (flagged for review)\n";
    write_manifest(o.out, "propose",
                   Json{{"vote_threshold", o.cfg.vote_threshold}, {"cluster_eps", o.cfg.cluster_eps},
                        {"support_eps", o.cfg.support_eps}, {"k", o.cfg.k},
                        {"max_pairs", o.cfg.max_pairs}, {"seed", o.cfg.seed}},
                   {o.input}, {});
    return kOk;
  });
}

// ------------------------------------------------------------- render ------

struct RenderOpts {
  std::string input, results, space, trace, out;
  std::optional<int> dim;
};

int cmd_render(const RenderOpts& o) {
  return dispatch(dim_of(o.dim, o.input), [&](auto dc) {
    constexpr int D = decltype(dc)::value;
    RenderInput<D> in;
    in.cloud = load_cloud<D>(o.input);
    if (!o.results.empty()) {
      const Json j = load_json(o.results);
      if (j.contains("symmetries") && !j.at("symmetries").empty())
        in.results = results_from_json<D>(j, o.results);
    }
    if (!o.space.empty()) {
      in.space = space_from_json<D>(load_json(o.space), o.space);
      in.k = in.space->k;
    }
    if (!o.trace.empty()) in.trace = trace_from_jsonl<D>(read_file(o.trace), o.trace);
    write_file(o.out, render_svg(in));
    return kOk;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"symwalk: reflective symmetry detection with Langevin walkers in plane space"};
  app.require_subcommand(1);
  app.fallthrough();
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0: all logical cores)")->capture_default_str();

  const auto dim_opt = [](CLI::App* c, std::optional<int>& d) {
    c->add_option("--dim", d, "Point dimension, 2 or 3 (default: read from the input)");
  };

  GenOpts gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic shape with analytic ground truth");
  g->add_option("--kind", gen.kind, "square | regular_ngon | letter_like | composite | cube | cylinder")
      ->capture_default_str();
  g->add_option("--noise", gen.noise, "Gaussian noise level, fraction of the normalized shape")
      ->capture_default_str();
  g->add_option("--noise-mode", gen.noise_mode,
                "isotropic | along_normal (default: isotropic in 2D, along_normal in 3D)");
  g->add_option("--seed", gen.seed, "Noise seed")->capture_default_str();
  g->add_option("--points", gen.points, "Point count (0: per-shape default)")->capture_default_str();
  g->add_option("--sides", gen.sides, "Sides of regular_ngon")->capture_default_str();
  g->add_option("--shift", gen.shift, "Motif displacement of composite")->capture_default_str();
  g->add_option("-o,--out", gen.out, "Output cloud (.json keeps the ground truth)")->required();

  DetectOpts det;
  auto* d = app.add_subcommand("detect", "Detect symmetries with annealed Langevin walkers");
  d->add_option("-i,--input", det.input, "Input cloud (.xyz, .obj, .json)")->required();
  d->add_option("-o,--out", det.out, "Result JSON (default: stdout)");
  dim_opt(d, det.dim);
  d->add_option("--kind", det.kind, "reflective | translational")->capture_default_str();
  d->add_option("--pairs", det.pairs, "Sampled point pairs (votes) (default 50000)");
  d->add_option("--walkers", det.walkers, "Langevin walkers (default 200)");
  d->add_option("--steps", det.steps, "Total Langevin steps, split over the levels (default 50000)");
  d->add_option("--kernel", det.kernel, "Final kernel size (default 0.025 in 2D, 0.08 in 3D)");
  d->add_option("--k", det.k, "Invalid-ball radius (default 0.3 in 2D, 0.5 in 3D)");
  d->add_option("--step-size", det.step_size,
                "Dimensionless step; absolute step is step-size * sigma^2 (default 0.06 in 2D, 0.02 in 3D)");
  d->add_option("--sigma-max", det.sigma_max, "First noise level (default 0.5; translational: 2 x kernel)");
  d->add_option("--levels", det.levels, "Noise levels (default 10)");
  d->add_option("--beta", det.beta, "Noise multiplier; stationary law p^(1/beta^2) (default 0.35)");
  d->add_option("--settle", det.settle, "Noise-free mean-shift steps that end the last level (default 50)");
  d->add_option("--score-batch", det.score_batch, "Votes per score evaluation, 0 for all (default 512)");
  d->add_option("--support-eps", det.support_eps, "Point association radius (default 0.02 in 2D, 0.05 in 3D)");
  d->add_option("--tau", det.tau, "Significance threshold (default 0.1)");
  d->add_option("--dbscan-eps", det.dbscan_eps, "Walker clustering radius (default: 2 x kernel)");
  d->add_option("--min-pts", det.min_pts, "Walker clustering density (default: max(5, walkers/40))");
  d->add_option("--min-shift", det.min_shift, "translational: shortest shift kept")->capture_default_str();
  d->add_option("--trace-every", det.trace_every, "Record walkers every N steps (0: off)");
  d->add_option("--space-out", det.space_out, "Also write the vote space JSON");
  d->add_option("--trace-out", det.trace_out, "Also write walker trajectories (JSON lines)");
  d->add_option("--seed", det.seed, "Seed for votes and walkers")->capture_default_str();

  BaselineOpts base;
  auto* b = app.add_subcommand("baseline", "Mean-shift baseline over the same vote space");
  b->add_option("-i,--input", base.input, "Input cloud")->required();
  b->add_option("-o,--out", base.out, "Result JSON (default: stdout)");
  dim_opt(b, base.dim);
  b->add_option("--pairs", base.pairs, "Sampled point pairs (default 50000)");
  b->add_option("--k", base.k, "Embedding radius (default 0.3 in 2D, 0.5 in 3D)");
  b->add_option("--bandwidth", base.bandwidth, "Mean-shift bandwidth h (default 0.05)");
  b->add_option("--kernel", base.kernel, "gaussian | epanechnikov")->capture_default_str();
  b->add_option("--extraction", base.extraction, "basins | dbscan")->capture_default_str();
  b->add_option("--trajectories", base.trajectories, "Most mean-shift trajectories (default 2000)");
  b->add_option("--min-basin", base.min_basin, "basins: smallest kept basin share (default 0.01)");
  b->add_option("--dbscan-eps", base.dbscan_eps, "dbscan: radius (default h)");
  b->add_option("--min-pts", base.min_pts, "dbscan: density (default 2 x dim)");
  b->add_option("--support-eps", base.support_eps, "Point association radius");
  b->add_option("--tau", base.tau, "Significance threshold (default 0.1)");
  b->add_option("--seed", base.seed, "Seed")->capture_default_str();

  EvalOpts ev;
  auto* e = app.add_subcommand("eval", "Precision, recall, F1, association and compression");
  e->add_option("-p,--pred", ev.pred, "Result JSON")->required();
  e->add_option("-g,--gt", ev.gt, "Ground truth JSON (or a cloud JSON carrying gt_symmetries)")->required();
  e->add_option("-c,--cloud", ev.cloud, "Shape (default: the ground-truth file)");
  e->add_option("-o,--out", ev.out, "Report JSON (default: stdout)");
  e->add_option("--delta", ev.delta, "Match radius in plane space")->capture_default_str();
  e->add_option("--k", ev.k, "Embedding radius (default 0.3 in 2D, 0.5 in 3D)");
  e->add_option("--support-eps", ev.support_eps, "Association radius (default 0.02 in 2D, 0.05 in 3D)");

  SymOpts sym;
  auto* s = app.add_subcommand("symmetrize", "Pull a shape toward one detected mirror symmetry");
  s->add_option("-i,--input", sym.input, "Input cloud")->required();
  s->add_option("-r,--results", sym.results, "Result JSON")->required();
  s->add_option("-o,--out", sym.out, "Output cloud")->required();
  dim_opt(s, sym.dim);
  s->add_option("--plane", sym.plane, "Index into the results (0: most significant)")->capture_default_str();
  s->add_option("--blend", sym.blend, "0 keeps points, 1 moves them to the pair average")->capture_default_str();
  s->add_option("--iterations", sym.iterations, "Averaging sweeps")->capture_default_str();
  s->add_option("--support-eps", sym.support_eps, "Correspondence radius (default 0.02 in 2D, 0.05 in 3D)");

  CompressOpts comp;
  auto* c = app.add_subcommand("compress", "Store a shape as a subset plus mirror planes");
  c->add_option("-i,--input", comp.input, "Input cloud")->required();
  c->add_option("-r,--results", comp.results, "Result JSON")->required();
  c->add_option("-o,--out", comp.out, "Compressed JSON")->required();
  c->add_option("--restored", comp.restored, "Also write the decompressed cloud");
  dim_opt(c, comp.dim);
  c->add_option("--support-eps", comp.support_eps, "Pairing radius (default 0.02 in 2D, 0.05 in 3D)");

  std::string dc_in, dc_out;
  auto* x = app.add_subcommand("decompress", "Rebuild a cloud from compressed JSON");
  x->add_option("-i,--input", dc_in, "Compressed JSON")->required();
  x->add_option("-o,--out", dc_out, "Output cloud")->required();

  SpaceOpts sp;
  auto* v = app.add_subcommand("space", "Write the vote space of a shape");
  v->add_option("-i,--input", sp.input, "Input cloud")->required();
  v->add_option("-o,--out", sp.out, "Space JSON")->required();
  dim_opt(v, sp.dim);
  v->add_option("--kind", sp.kind, "reflective | translational")->capture_default_str();
  v->add_option("--pairs", sp.pairs, "Sampled point pairs")->capture_default_str();
  v->add_option("--k", sp.k, "Embedding radius (default 0.3 in 2D, 0.5 in 3D)");
  v->add_option("--seed", sp.seed, "Seed")->capture_default_str();

  ProposeOpts prop;
  auto* q = app.add_subcommand("propose", "Brute-force ground-truth proposals for review");
  q->add_option("-i,--input", prop.input, "Input cloud")->required();
  q->add_option("-o,--out", prop.out, "Ground truth JSON")->required();
  dim_opt(q, prop.dim);
  q->add_option("--vote-threshold", prop.cfg.vote_threshold, "Smallest supported fraction")->capture_default_str();
  q->add_option("--cluster-eps", prop.cfg.cluster_eps, "Proposal clustering radius")->capture_default_str();
  q->add_option("--support-eps", prop.support_eps, "Association radius (default 0.02 in 2D, 0.05 in 3D)");
  q->add_option("--k", prop.k, "Embedding radius for clustering");
  q->add_option("--max-pairs", prop.cfg.max_pairs, "Pair budget before sampling")->capture_default_str();
  q->add_option("--seed", prop.cfg.seed, "Seed when sampling")->capture_default_str();

  RenderOpts ren;
  auto* r = app.add_subcommand("render", "SVG of the shape, detected planes, votes and walkers");
  r->add_option("-i,--input", ren.input, "Input cloud")->required();
  r->add_option("-r,--results", ren.results, "Result JSON");
  r->add_option("--space", ren.space, "Vote space JSON");
  r->add_option("--trace", ren.trace, "Walker trajectories (JSON lines)");
  r->add_option("-o,--out", ren.out, "Output SVG")->required();
  dim_opt(r, ren.dim);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    set_num_threads(threads);
    if (g->parsed()) return cmd_gen(gen);
    if (d->parsed()) return cmd_detect(det);
    if (b->parsed()) return cmd_baseline(base);
    if (e->parsed()) return cmd_eval(ev);
    if (s->parsed()) return cmd_symmetrize(sym);
    if (c->parsed()) return cmd_compress(comp);
    if (x->parsed()) return cmd_decompress(dc_in, dc_out);
    if (v->parsed()) return cmd_space(sp);
    if (q->parsed()) return cmd_propose(prop);
    if (r->parsed()) return cmd_render(ren);
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    switch (err.kind()) {
      case ErrorKind::invalid_argument: return kUsage;
      case ErrorKind::io:
      case ErrorKind::parse: return kIo;
      case ErrorKind::numerical: return kNumerical;
    }
  } catch (const Json::exception& err) {
    std::cerr << "error: malformed JSON: " << err.what() << "\n";
    return kIo;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}
