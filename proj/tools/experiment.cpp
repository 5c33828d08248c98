#include "experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <utility>

#include "json.hpp"
#include "robdet/errors.hpp"
#include "robdet/fixed_sample.hpp"
#include "robdet/lfd.hpp"
#include "robdet/limits.hpp"
#include "robdet/llr.hpp"
#include "robdet/sequential.hpp"

namespace robdet::cli {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

struct FieldReader {
  const json& obj;
  std::string where;
  std::vector<ConfigError>& errors;

  void complain(const std::string& key, const std::string& message) const {
    errors.push_back({where + key, message});
  }

  double number(const char* key, double fallback, double lo, double hi, bool lo_open = false) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) {
      complain(key, "must be a number");
      return fallback;
    }
    const double v = obj[key].get<double>();
    const bool below = lo_open ? !(v > lo) : !(v >= lo);
    if (below || !(v <= hi)) {
      char msg[128];
      std::snprintf(msg, sizeof msg, "must be in %c%g, %g]", lo_open ? '(' : '[', lo, hi);
      complain(key, msg);
      return fallback;
    }
    return v;
  }

  long integer(const char* key, long fallback, long lo, long hi) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer()) {
      complain(key, "must be an integer");
      return fallback;
    }
    const long v = obj[key].get<long>();
    if (v < lo || v > hi) {
      char msg[128];
      std::snprintf(msg, sizeof msg, "must be in [%ld, %ld]", lo, hi);
      complain(key, msg);
      return fallback;
    }
    return v;
  }

  std::string text(const char* key, const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_string()) {
      complain(key, "must be a string");
      return fallback;
    }
    return obj[key].get<std::string>();
  }

  void reject_unknown(std::initializer_list<const char*> known) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool found = false;
      for (const char* k : known)
        if (it.key() == k) found = true;
      if (!found) complain(it.key(), "unknown key");
    }
  }
};

NominalSpec parse_nominal(const json& j, const std::string& where,
                          std::vector<ConfigError>& errors) {
  NominalSpec spec;
  if (!j.is_object()) {
    errors.push_back({where, "must be an object with family/mean/std"});
    return spec;
  }
  FieldReader r{j, where + ".", errors};
  r.reject_unknown({"family", "mean", "std"});
  spec.family = r.text("family", "gaussian");
  if (spec.family != "gaussian")
    errors.push_back({where + ".family", "unsupported family (expected \"gaussian\")"});
  spec.mean = r.number("mean", 0.0, -1e6, 1e6);
  spec.std_dev = r.number("std", 1.0, 0.0, 1e6, /*lo_open=*/true);
  return spec;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, const std::string& hash, const std::string& header)
      : out_(path) {
    if (!out_) throw Error("cannot open output file: " + path.string());
    out_ << "# config_hash=" << hash << "\n" << header << "\n";
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ",";
      out_ << cells[i];
    }
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

// Solved-test bundle shared by the experiments: the configured statistic
// plus whichever LFD pairs the radii make available.
struct Workbench {
  NominalModel model;
  PiecewiseLLR llr = PiecewiseLLR::nominal();
  bool has_kl = false;
  bool has_contamination = false;
  MTestSolution m;
  CompositeSolution c;
  json details;
};

Workbench make_workbench(const ExperimentConfig& cfg) {
  Workbench w{build_model(cfg)};
  w.has_kl = cfg.eps0 > 0.0 || cfg.eps1 > 0.0;
  w.has_contamination = cfg.eps0_c > 0.0 || cfg.eps1_c > 0.0;
  w.c = solve_c_test(w.model, cfg.eps0, cfg.eps1, cfg.eps0_c, cfg.eps1_c, cfg.quadrature);
  w.m = w.c.inner;
  w.llr = robust_llr(w.model, w.c);
  w.details["m_solution"] = {{"l_l", w.m.l_l},
                             {"l_u", w.m.l_u},
                             {"k", w.m.k},
                             {"z", w.m.z},
                             {"exponent", w.m.exponent},
                             {"residual0", w.m.residual0},
                             {"residual1", w.m.residual1},
                             {"iterations", w.m.iterations}};
  if (w.has_contamination)
    w.details["clip"] = {{"c_l", w.c.c_l}, {"c_u", w.c.c_u}, {"b", w.c.b}};
  if (!w.c.nominal_lr_monotone && w.has_contamination)
    w.details["warnings"].push_back(
        "nominal likelihood ratio is not monotone; clipped-test minimax guarantees assume "
        "monotonicity");
  return w;
}

int grid_points(const ExperimentConfig& cfg, int fallback) {
  return cfg.grid.points > 0 ? cfg.grid.points : fallback;
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

void run_lfd_plot(const ExperimentConfig& cfg, const std::string& hash,
                  const std::filesystem::path& dir, RunOutcome& out, json& manifest) {
  Workbench w = make_workbench(cfg);
  const Density g0 = lfd_density(w.model, w.m, 0);
  const Density g1 = lfd_density(w.model, w.m, 1);
  const Density q0 = lfd_density(w.model, w.c, 0);
  const Density q1 = lfd_density(w.model, w.c, 1);

  CsvFile csv(dir / "lfd.csv", hash, "y,f0,f1,g0_hat,g1_hat,q0_hat,q1_hat");
  const int n = grid_points(cfg, 512);
  for (int i = 0; i <= n; ++i) {
    const double y = w.model.y_min() + (w.model.y_max() - w.model.y_min()) * i / n;
    csv.row({fmt(y), fmt(w.model.f0(y)), fmt(w.model.f1(y)), fmt(g0.pdf(y)), fmt(g1.pdf(y)),
             fmt(q0.pdf(y)), fmt(q1.pdf(y))});
  }
  out.files.push_back("lfd.csv");
  manifest["solver"] = w.details;
}

void run_llr_ratio(const ExperimentConfig& cfg, const std::string& hash,
                   const std::filesystem::path& dir, RunOutcome& out, json& manifest) {
  Workbench w = make_workbench(cfg);
  CsvFile csv(dir / "llr.csv", hash, "y,l,l_hat,ratio");
  const int n = grid_points(cfg, 512);
  for (int i = 0; i <= n; ++i) {
    const double y = w.model.y_min() + (w.model.y_max() - w.model.y_min()) * i / n;
    const double logl = w.model.log_lr(y);
    const double loghat = w.llr.log_eval(logl);
    csv.row({fmt(y), fmt(std::exp(logl)), fmt(std::exp(loghat)), fmt(std::exp(loghat - logl))});
  }
  out.files.push_back("llr.csv");
  manifest["solver"] = w.details;
}

void run_limit_curves(const ExperimentConfig& cfg, const std::string& hash,
                      const std::filesystem::path& dir, RunOutcome& out, json& manifest) {
  const NominalModel model = build_model(cfg);
  const int n = grid_points(cfg, 201);
  const LimitCurve curve = m_limit_curve(model, n, cfg.quadrature);
  CsvFile csv(dir / "limits.csv", hash, "u,eps0,eps1");
  for (const LimitCurvePoint& p : curve.samples)
    csv.row({fmt(p.u), fmt(p.eps0), fmt(p.eps1)});
  out.files.push_back("limits.csv");

  CsvFile hcsv(dir / "h_limits.csv", hash, "eps0,eps1");
  const int hn = std::max(n / 4, 16);
  for (int i = 0; i < hn; ++i) {
    const double e0 = 0.95 * i / (hn - 1);
    hcsv.row({fmt(e0), fmt(h_limit(model, e0, 0, cfg.quadrature))});
  }
  out.files.push_back("h_limits.csv");

  manifest["limits"] = {{"chernoff", chernoff_distance(model, cfg.quadrature)},
                        {"bhattacharyya", bhattacharyya_distance(model, cfg.quadrature)}};
}

void run_rate_curves(const ExperimentConfig& cfg, const std::string& hash,
                     const std::filesystem::path& dir, RunOutcome& out, json& manifest) {
  Workbench w = make_workbench(cfg);
  Quadrature q = cfg.quadrature;
  q.panels = std::max(cfg.quadrature.panels / 4, 64);  // rate sweeps are quadrature heavy

  struct ObsModel {
    std::string tag;
    Density d0, d1;
  };
  std::vector<ObsModel> observations;
  observations.push_back({"n", w.model.density(0), w.model.density(1)});
  if (w.has_kl) {
    observations.push_back({"m", lfd_density(w.model, w.m, 0), lfd_density(w.model, w.m, 1)});
    const ATestSolution a = solve_a_test(w.model, cfg.eps0, cfg.eps1, cfg.quadrature);
    observations.push_back({"a", lfd_density(w.model, a, 0), lfd_density(w.model, a, 1)});
    if (w.has_contamination) {
      // Tilted pair further contaminated: the clip runs on the tilted ratio.
      const PiecewiseLLR a_llr = robust_llr(w.model, a);
      const Density a0 = lfd_density(w.model, a, 0);
      const Density a1 = lfd_density(w.model, a, 1);
      const ClippedPair clip =
          clip_pair(w.model, a_llr, a0, a1, cfg.eps0_c, cfg.eps1_c, cfg.quadrature);
      observations.push_back({"c*", clipped_density(w.model, clip, a_llr, a0, a1, 0),
                              clipped_density(w.model, clip, a_llr, a0, a1, 1)});
    }
  }
  if (w.has_contamination) {
    const HTestSolution h = solve_h_test(w.model, cfg.eps0_c, cfg.eps1_c, cfg.quadrature);
    observations.push_back({"h", lfd_density(w.model, h, 0), lfd_density(w.model, h, 1)});
  }
  if (w.has_kl && w.has_contamination)
    observations.push_back({"c", lfd_density(w.model, w.c, 0), lfd_density(w.model, w.c, 1)});

  CsvFile csv(dir / "rates.csv", hash, "t,I0,I1,source_tag");
  const int points = grid_points(cfg, 25);
  for (const ObsModel& obs : observations) {
    const double t_lo = llr_mean(w.model, w.llr, obs.d0, q);
    const double t_hi = llr_mean(w.model, w.llr, obs.d1, q);
    if (!(t_hi > t_lo)) continue;
    for (int i = 1; i <= points; ++i) {
      const double t = t_lo + (t_hi - t_lo) * i / (points + 1);
      const RateValue i0 = rate_function(w.model, w.llr, obs.d0, t, q);
      const RateValue i1 = rate_function(w.model, w.llr, obs.d1, t, q);
      csv.row({fmt(t), fmt(i0.value), fmt(i1.value), obs.tag});
    }
  }
  out.files.push_back("rates.csv");
  manifest["solver"] = w.details;
}

void run_fss_sweep(const ExperimentConfig& cfg, const std::string& hash,
                   const std::filesystem::path& dir, RunOutcome& out, json& manifest) {
  const NominalModel model = build_model(cfg);
  const double limit = chernoff_distance(model, cfg.quadrature);
  CsvFile csv(dir / "fss.csv", hash, "eps,pe,pe0,pe1,observation_tag");

  for (int i = 1; i <= cfg.fss.eps_count; ++i) {
    const double eps = 0.95 * limit * i / cfg.fss.eps_count;
    const MTestSolution m = solve_m_test(model, eps, eps, cfg.quadrature);
    const ATestSolution a = solve_a_test(model, eps, eps, cfg.quadrature);
    const FixedSampleTest test = make_m_test(model, m, cfg.fss.n);

    const auto sweep = [&](const std::string& tag, const Density& d0, const Density& d1,
                           std::uint64_t salt) {
      const ErrorEstimate fa = empirical_error(test, model, d0, ErrorKind::false_alarm,
                                               cfg.fss.runs, cfg.seed + salt);
      const ErrorEstimate miss = empirical_error(test, model, d1, ErrorKind::miss, cfg.fss.runs,
                                                 cfg.seed + salt + 1);
      csv.row({fmt(eps), fmt(0.5 * (fa.rate + miss.rate)), fmt(fa.rate), fmt(miss.rate), tag});
    };
    sweep("m", lfd_density(model, m, 0), lfd_density(model, m, 1), 1000 + 10 * i);
    sweep("a", lfd_density(model, a, 0), lfd_density(model, a, 1), 2000 + 10 * i);
  }
  out.files.push_back("fss.csv");
  manifest["limits"] = {{"equal_radius_limit", limit}};
}

void run_sprt_scan(const ExperimentConfig& cfg, const std::string& hash,
                   const std::filesystem::path& dir, RunOutcome& out, json& manifest) {
  const NominalModel model = build_model(cfg);
  TestFamily family = TestFamily::m;
  if (cfg.sprt.family == "a") family = TestFamily::a;
  else if (cfg.sprt.family == "h") family = TestFamily::h;
  else if (cfg.sprt.family == "c") family = TestFamily::c;

  EpsParams eps;
  eps.eps0 = cfg.eps0;
  eps.eps1 = cfg.eps1;
  eps.eps0_c = cfg.eps0_c;
  eps.eps1_c = cfg.eps1_c;

  std::vector<double> tls, tus;
  for (double t = cfg.sprt.log_tl_min; t <= cfg.sprt.log_tl_max + 1e-12; t += cfg.sprt.step)
    tls.push_back(t);
  for (double t = cfg.sprt.log_tu_min; t <= cfg.sprt.log_tu_max + 1e-12; t += cfg.sprt.step)
    tus.push_back(t);

  SprtConfig scfg;
  scfg.mc_runs = cfg.sprt.mc_runs;
  scfg.max_n = cfg.sprt.max_n;
  scfg.grid_step = cfg.sprt.grid_step;
  scfg.seed = cfg.seed;

  const auto points = minimax_scan(model, family, eps, tls, tus, scfg);

  CsvFile csv(dir / "sprt.csv", hash, "log_tl,log_tu,alpha,beta,en0,en1,ratio_tag,ratio");
  auto ratio = [](double alt, double own) {
    return own > 0.0 ? alt / own : std::numeric_limits<double>::quiet_NaN();
  };
  for (const ScanPoint& p : points) {
    const std::vector<std::pair<std::string, double>> tags{
        {"alpha", ratio(p.alt0.p_reject, p.own0.p_reject)},
        {"beta", ratio(p.alt1.p_accept, p.own1.p_accept)},
        {"en0", ratio(p.alt0.expected_n, p.own0.expected_n)},
        {"en1", ratio(p.alt1.expected_n, p.own1.expected_n)}};
    for (const auto& [tag, r] : tags)
      csv.row({fmt(p.log_tl), fmt(p.log_tu), fmt(p.own0.p_reject), fmt(p.own1.p_accept),
               fmt(p.own0.expected_n), fmt(p.own1.expected_n), tag, fmt(r)});
  }
  out.files.push_back("sprt.csv");
  manifest["scan"] = {{"family", cfg.sprt.family},
                      {"grid_points", points.size()},
                      {"mc_runs", cfg.sprt.mc_runs}};
}

}  // namespace

ParseResult validate_config(const std::string& raw_json) {
  ParseResult result;
  json root;
  try {
    root = json::parse(raw_json);
  } catch (const json::parse_error& e) {
    result.errors.push_back({"<input>", e.what()});
    return result;
  }
  if (!root.is_object()) {
    result.errors.push_back({"<input>", "top level must be a JSON object"});
    return result;
  }

  ExperimentConfig cfg;
  std::vector<ConfigError>& errors = result.errors;
  FieldReader top{root, "", errors};
  top.reject_unknown(
      {"nominals", "eps", "experiment", "output_dir", "seed", "quadrature", "grid", "fss", "sprt"});

  if (!root.contains("nominals") || !root["nominals"].is_object()) {
    errors.push_back({"nominals", "required: object with f0 and f1"});
  } else {
    const json& nom = root["nominals"];
    FieldReader nr{nom, "nominals.", errors};
    nr.reject_unknown({"f0", "f1"});
    if (!nom.contains("f0"))
      errors.push_back({"nominals.f0", "required"});
    else
      cfg.f0 = parse_nominal(nom["f0"], "nominals.f0", errors);
    if (!nom.contains("f1"))
      errors.push_back({"nominals.f1", "required"});
    else
      cfg.f1 = parse_nominal(nom["f1"], "nominals.f1", errors);
  }

  if (root.contains("eps")) {
    FieldReader er{root["eps"], "eps.", errors};
    er.reject_unknown({"eps0", "eps1", "eps0_c", "eps1_c"});
    cfg.eps0 = er.number("eps0", 0.0, 0.0, std::nextafter(1.0, 0.0));
    cfg.eps1 = er.number("eps1", 0.0, 0.0, std::nextafter(1.0, 0.0));
    cfg.eps0_c = er.number("eps0_c", 0.0, 0.0, std::nextafter(1.0, 0.0));
    cfg.eps1_c = er.number("eps1_c", 0.0, 0.0, std::nextafter(1.0, 0.0));
  }

  cfg.experiment = top.text("experiment", "");
  if (!cfg.experiment.empty()) {
    const auto& ids = experiment_ids();
    if (std::find(ids.begin(), ids.end(), cfg.experiment) == ids.end())
      errors.push_back({"experiment", "unknown experiment id: " + cfg.experiment});
  }
  cfg.output_dir = top.text("output_dir", cfg.output_dir);
  cfg.seed = static_cast<std::uint64_t>(top.integer("seed", 1, 0, 1LL << 62));

  if (root.contains("quadrature")) {
    FieldReader qr{root["quadrature"], "quadrature.", errors};
    qr.reject_unknown({"panels", "nodes", "abs_tol", "rel_tol"});
    cfg.quadrature.panels = static_cast<int>(qr.integer("panels", 512, 1, 1 << 20));
    cfg.quadrature.nodes_per_panel = static_cast<int>(qr.integer("nodes", 8, 1, 64));
    cfg.quadrature.abs_tol = qr.number("abs_tol", 1e-10, 0.0, 1.0, true);
    cfg.quadrature.rel_tol = qr.number("rel_tol", 1e-12, 0.0, 1.0, true);
    if (cfg.quadrature.node_count() < 64)
      errors.push_back({"quadrature", "panels*nodes must be >= 64"});
  }

  if (root.contains("grid")) {
    FieldReader gr{root["grid"], "grid.", errors};
    gr.reject_unknown({"points"});
    cfg.grid.points = static_cast<int>(gr.integer("points", 0, 0, 1 << 20));
    if (cfg.grid.points != 0 && cfg.grid.points < 16)
      errors.push_back({"grid.points", "must be 0 (auto) or >= 16"});
  }

  if (root.contains("fss")) {
    FieldReader fr{root["fss"], "fss.", errors};
    fr.reject_unknown({"eps_count", "runs", "n"});
    cfg.fss.eps_count = static_cast<int>(fr.integer("eps_count", 20, 2, 10000));
    cfg.fss.runs = fr.integer("runs", 100000, 1000, 100000000);
    cfg.fss.n = static_cast<int>(fr.integer("n", 1, 1, 10000));
  }

  if (root.contains("sprt")) {
    FieldReader sr{root["sprt"], "sprt.", errors};
    sr.reject_unknown({"family", "log_tl_min", "log_tl_max", "log_tu_min", "log_tu_max", "step",
                       "mc_runs", "max_n", "grid_step"});
    cfg.sprt.family = sr.text("family", "m");
    if (cfg.sprt.family != "m" && cfg.sprt.family != "a" && cfg.sprt.family != "h" &&
        cfg.sprt.family != "c")
      errors.push_back({"sprt.family", "must be one of m, a, h, c"});
    cfg.sprt.log_tl_min = sr.number("log_tl_min", -6.0, -100.0, 0.0);
    cfg.sprt.log_tl_max = sr.number("log_tl_max", -0.1, -100.0, 0.0);
    cfg.sprt.log_tu_min = sr.number("log_tu_min", 0.1, 0.0, 100.0);
    cfg.sprt.log_tu_max = sr.number("log_tu_max", 6.0, 0.0, 100.0);
    cfg.sprt.step = sr.number("step", 0.1, 0.0, 100.0, true);
    cfg.sprt.mc_runs = sr.integer("mc_runs", 10000, 1000, 100000000);
    cfg.sprt.max_n = static_cast<int>(sr.integer("max_n", 10000, 1, 100000000));
    cfg.sprt.grid_step = sr.number("grid_step", 0.005, 0.0, 1.0, true);
    if (cfg.sprt.log_tl_max < cfg.sprt.log_tl_min)
      errors.push_back({"sprt.log_tl_max", "must be >= log_tl_min"});
    if (cfg.sprt.log_tu_max < cfg.sprt.log_tu_min)
      errors.push_back({"sprt.log_tu_max", "must be >= log_tu_min"});
  }

  if (errors.empty()) result.config = cfg;
  return result;
}

std::string echo_config(const ExperimentConfig& c) {
  json j;
  j["nominals"]["f0"] = {{"family", c.f0.family}, {"mean", c.f0.mean}, {"std", c.f0.std_dev}};
  j["nominals"]["f1"] = {{"family", c.f1.family}, {"mean", c.f1.mean}, {"std", c.f1.std_dev}};
  j["eps"] = {{"eps0", c.eps0}, {"eps1", c.eps1}, {"eps0_c", c.eps0_c}, {"eps1_c", c.eps1_c}};
  j["experiment"] = c.experiment;
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  j["quadrature"] = {{"panels", c.quadrature.panels},
                     {"nodes", c.quadrature.nodes_per_panel},
                     {"abs_tol", c.quadrature.abs_tol},
                     {"rel_tol", c.quadrature.rel_tol}};
  j["grid"] = {{"points", c.grid.points}};
  j["fss"] = {{"eps_count", c.fss.eps_count}, {"runs", c.fss.runs}, {"n", c.fss.n}};
  j["sprt"] = {{"family", c.sprt.family},       {"log_tl_min", c.sprt.log_tl_min},
               {"log_tl_max", c.sprt.log_tl_max}, {"log_tu_min", c.sprt.log_tu_min},
               {"log_tu_max", c.sprt.log_tu_max}, {"step", c.sprt.step},
               {"mc_runs", c.sprt.mc_runs},       {"max_n", c.sprt.max_n},
               {"grid_step", c.sprt.grid_step}};
  return j.dump(2);
}

std::string config_hash(const ExperimentConfig& config) {
  // The digest identifies the experiment inputs; the destination directory
  // does not participate.
  ExperimentConfig keyed = config;
  keyed.output_dir.clear();
  const std::string echo = echo_config(keyed);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : echo) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

NominalModel build_model(const ExperimentConfig& config) {
  return NominalModel::gaussian_pair({config.f0.mean, config.f0.std_dev},
                                     {config.f1.mean, config.f1.std_dev});
}

RunOutcome run_experiment(const ExperimentConfig& config) {
  RunOutcome out;
  const std::filesystem::path dir(config.output_dir);
  std::filesystem::create_directories(dir);
  const std::string hash = config_hash(config);

  json manifest;
  manifest["config"] = json::parse(echo_config(config));
  manifest["config_hash"] = hash;
  manifest["seed"] = config.seed;

  if (config.experiment == "lfd-plot")
    run_lfd_plot(config, hash, dir, out, manifest);
  else if (config.experiment == "llr-ratio")
    run_llr_ratio(config, hash, dir, out, manifest);
  else if (config.experiment == "limit-curves")
    run_limit_curves(config, hash, dir, out, manifest);
  else if (config.experiment == "rate-curves")
    run_rate_curves(config, hash, dir, out, manifest);
  else if (config.experiment == "fss-sweep")
    run_fss_sweep(config, hash, dir, out, manifest);
  else if (config.experiment == "sprt-scan")
    run_sprt_scan(config, hash, dir, out, manifest);
  else
    throw OutOfRange("unknown experiment id: " + config.experiment);

  manifest["files"] = out.files;
  std::ofstream mf(dir / "run_manifest.json");
  mf << manifest.dump(2) << "\n";
  out.files.push_back("run_manifest.json");
  out.message = "wrote " + std::to_string(out.files.size()) + " files to " + dir.string();
  return out;
}

}  // namespace robdet::cli
