#include "kerrq/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <tuple>
#include <utility>

#include "kerrq/entanglement.hpp"
#include "kerrq/errors.hpp"
#include "kerrq/presets.hpp"
#include "kerrq/protocol.hpp"

namespace kerrq::cli {

namespace {

using json = nlohmann::json;

constexpr cplx I{0.0, 1.0};
const double kNaN = std::nan("");

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

// A self-describing output table: parameter echo, free-form notes, rows.
struct Table {
  std::string command;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<std::string> notes;
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;

  void param(const std::string& k, const std::string& v) { params.emplace_back(k, v); }
  void param(const std::string& k, double v) { params.emplace_back(k, num(v)); }
};

std::string cell(const json& v) {
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return num(v.get<double>());
  if (v.is_null()) return "nan";
  return v.get<std::string>();
}

void write_table(const Table& t, const std::string& format, std::ostream& os) {
  if (format == "json") {
    json j;
    j["command"] = t.command;
    j["params"] = json::object();
    for (const auto& [k, v] : t.params) j["params"][k] = v;
    j["notes"] = t.notes;
    j["rows"] = json::array();
    for (const auto& r : t.rows) {
      json row = json::object();
      for (std::size_t i = 0; i < t.columns.size(); ++i) {
        const json& v = r[i];
        row[t.columns[i]] = v.is_number_float() && !std::isfinite(v.get<double>()) ? json() : v;
      }
      j["rows"].push_back(std::move(row));
    }
    os << j.dump(2) << "\n";
    return;
  }
  os << "# kerrq " << t.command << "\n";
  for (const auto& [k, v] : t.params) os << "# " << k << "=" << v << "\n";
  for (const auto& n : t.notes) os << "# " << n << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << cell(r[i]);
    os << "\n";
  }
}

void emit(const Table& t, const RunConfig& cfg, std::ostream& out) {
  if (cfg.out.empty()) {
    write_table(t, cfg.format, out);
    return;
  }
  std::ofstream f(cfg.out);
  if (!f) throw InvalidArgument("cannot open output file '" + cfg.out + "'");
  write_table(t, cfg.format, f);
}

std::vector<cplx> parse_coeffs(const std::string& text) {
  std::vector<cplx> c;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto colon = tok.find(':');
    try {
      std::size_t used = 0;
      const std::string re_s = tok.substr(0, colon);
      const double re = std::stod(re_s, &used);
      if (used != re_s.size()) throw std::invalid_argument(tok);
      double im = 0.0;
      if (colon != std::string::npos) {
        const std::string im_s = tok.substr(colon + 1);
        im = std::stod(im_s, &used);
        if (used != im_s.size()) throw std::invalid_argument(tok);
      }
      c.emplace_back(re, im);
    } catch (const std::logic_error&) {
      throw InvalidArgument("cannot parse coefficient '" + tok + "' (expected re or re:im)");
    }
  }
  if (c.size() < 2) throw InvalidArgument("need at least two coefficients (K >= 1)");
  return c;
}

// The target and main-mode amplitudes named by --preset or --c.
Preset resolve_target(const RunConfig& cfg, bool need_modes) {
  if (!cfg.preset.empty() && !cfg.coeffs.empty()) throw InvalidArgument("give either --preset or --c, not both");
  if (!cfg.preset.empty()) {
    const std::string& n = cfg.preset;
    auto override_x = [&](double a2_def, double x_def) {
      const double a2 = cfg.alpha ? *cfg.alpha * *cfg.alpha : a2_def;
      const double x = cfg.chi ? a2 * *cfg.chi * *cfg.chi : x_def;
      return std::pair{a2, x};
    };
    if (n == "bell-k1") {
      const auto [a2, x] = override_x(10.0, 1.0);
      return bell_k1(a2, x);
    }
    if (n == "maxent-k2-low") {
      const auto [a2, x] = override_x(10.0, 1e-4);
      return qutrit_low(a2, x);
    }
    if (n == "maxent-k2-high") {
      const auto [a2, x] = override_x(1e4, 100.0);
      return qutrit_high(a2, x);
    }
    if (n == "photon-correlated") {
      if (cfg.s < 0 || cfg.K < 1) throw InvalidArgument("photon-correlated needs s >= 0 and K >= 1");
      return photon_correlated(cfg.s, cfg.K, cfg.alpha.value_or(0.1), cfg.chi.value_or(std::numbers::pi / 2));
    }
    return preset_by_name(n);  // throws with the list of names
  }
  if (cfg.coeffs.empty()) throw InvalidArgument("a target is required: --preset or --c");
  Preset p{"explicit", {parse_coeffs(cfg.coeffs)}, cplx(kNaN), cplx(kNaN), kNaN};
  if (cfg.alpha) p.alpha = *cfg.alpha;
  p.beta = cfg.beta ? cplx(*cfg.beta) : p.alpha;
  if (cfg.chi) p.chi = *cfg.chi;
  if (need_modes && (!cfg.alpha || !cfg.chi)) throw InvalidArgument("explicit coefficients need --alpha and --chi");
  return p;
}

void echo_target(Table& t, const Preset& p) {
  t.param("target", p.name);
  std::string cs;
  for (std::size_t i = 0; i < p.target.c.size(); ++i)
    cs += (i ? " " : "") + num(p.target.c[i].real()) + ":" + num(p.target.c[i].imag());
  t.param("c", cs);
  t.param("alpha", num(p.alpha.real()) + ":" + num(p.alpha.imag()));
  t.param("beta", num(p.beta.real()) + ":" + num(p.beta.imag()));
  t.param("chi", p.chi);
}

// ---------------------------------------------------------------- design

int cmd_design(const RunConfig& cfg, std::ostream& out) {
  const Preset p = resolve_target(cfg, false);
  const DetectionScheme s = design_scheme(p.target, cfg.gamma, cfg.delta);
  Table t;
  t.command = "design";
  echo_target(t, p);
  t.param("gamma", cfg.gamma);
  t.param("delta", cfg.delta);
  t.notes.push_back("q=" + num(s.q));
  t.notes.push_back("gtilde_master=" + num(s.ref_net.gtilde_master.real()) + ":" +
                    num(s.ref_net.gtilde_master.imag()));
  t.notes.push_back("reference_residual=" + num(s.ref_net.residual));
  // Root phase relative to 2 |alpha|^2 chi, the phase the Kerr stage imprints.
  const double ref = std::isfinite(p.chi) ? 2.0 * std::norm(p.alpha) * p.chi : 0.0;
  t.columns = {"j", "root_re", "root_im", "root_abs", "root_arg", "arg_rel", "mult", "T",
               "theta", "gtilde_re", "gtilde_im", "Tp", "phi"};
  const auto roots = s.roots.expanded();
  for (int j = 0; j < s.K; ++j) {
    const cplx r = roots[static_cast<std::size_t>(j)];
    int mult = 1;
    for (const auto& rr : s.roots.roots)
      if (std::abs(rr.value - r) == 0.0) mult = rr.mult;
    const std::size_t u = static_cast<std::size_t>(j);
    const double tp = u < s.ref_net.Tp.size() ? s.ref_net.Tp[u] : kNaN;
    const double phi = u < s.ref_net.phi.size() ? s.ref_net.phi[u] : kNaN;
    t.rows.push_back({j + 1, r.real(), r.imag(), std::abs(r), std::arg(r),
                      std::isfinite(p.chi) ? std::arg(r * std::exp(-I * ref)) : kNaN, mult, s.T[u],
                      s.theta[u], s.gtilde[u].real(), s.gtilde[u].imag(), tp, phi});
  }
  write_table(t, cfg.format, out);
  if (!cfg.out.empty()) {
    std::ofstream f(cfg.out);
    if (!f) throw InvalidArgument("cannot open output file '" + cfg.out + "'");
    f << scheme_to_json(s) << "\n";
  }
  return kOk;
}

// -------------------------------------------------------------- simulate

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  ProtocolParams params;
  Preset p;
  if (!cfg.scheme_file.empty()) {
    if (!cfg.alpha || !cfg.chi) throw InvalidArgument("--scheme needs --alpha and --chi");
    std::ifstream f(cfg.scheme_file);
    if (!f) throw InvalidArgument("cannot read scheme file '" + cfg.scheme_file + "'");
    std::stringstream buf;
    buf << f.rdbuf();
    params.scheme = scheme_from_json(buf.str());
    p = {"scheme-file", {params.scheme.c}, *cfg.alpha, cplx(cfg.beta.value_or(*cfg.alpha)), *cfg.chi};
    params.alpha = p.alpha;
    params.beta = p.beta;
    params.chi = p.chi;
    params.gamma = params.scheme.gamma;
    params.target = p.target;
    params.validate();
  } else {
    p = resolve_target(cfg, true);
    params = ProtocolParams::make(p.target, p.alpha, p.beta, cfg.gamma, p.chi, cfg.delta);
  }
  const auto records = run_full_protocol(params);

  Table t;
  t.command = "simulate";
  echo_target(t, p);
  t.param("gamma", num(params.gamma.real()) + ":" + num(params.gamma.imag()));
  t.param("delta", params.scheme.delta);
  t.param("oracle_n_cut", cfg.oracle ? "3" : "off");
  const bool photon = p.name == "photon-correlated";
  t.columns = {"pattern", "clicks", "probability", "fidelity", "entanglement", "oracle_td"};
  if (photon) t.columns.push_back("fidelity_photon_number");

  double total = 0.0;
  for (const auto& rec : records) {
    std::string pat;
    int clicks = 0;
    for (bool b : rec.pattern) {
      pat += b ? '1' : '0';
      clicks += b;
    }
    total += rec.probability;
    double td = kNaN;
    if (cfg.oracle && rec.probability > 1e-300) {
      const DensOp op = operator_path_sum(params, rec.pattern, 3);
      if (op.trace() > 0.0) td = trace_distance(rec.state, op.normalized());
    }
    std::vector<json> row{pat, clicks, rec.probability, rec.fidelity, rec.entanglement, td};
    if (photon) {
      const auto& m = rec.state.modes();
      const auto& d = rec.state.dims();
      const bool fock = m.size() == 2 && m[0] == "a" && m[1] == "b" && d[0] > cfg.s && d[1] > cfg.s;
      row.emplace_back(fock && rec.probability > 1e-300 ? fidelity(rec.state, photon_number_state(cfg.s, d[0], d[1]))
                                                       : kNaN);
    }
    t.rows.push_back(std::move(row));
  }
  t.notes.push_back("probability_sum=" + num(total));
  emit(t, cfg, out);
  return kOk;
}

// --------------------------------------------------------- entangle-scan

std::string missing_label(const std::vector<int>& miss) {
  std::string s = "miss:";
  for (std::size_t i = 0; i < miss.size(); ++i) s += (i ? "+" : "") + std::to_string(miss[i]);
  return s;
}

std::vector<std::vector<json>> scan_point(double x, int K, double alpha, const RunConfig& cfg, bool& all_conv) {
  const double chi = std::sqrt(x) / alpha;
  OptimizerOptions oo;
  oo.restarts = cfg.restarts;
  oo.seed = cfg.seed;
  const EntanglementReport best = optimize_coefficients(K, alpha, alpha, chi, oo);
  all_conv = best.converged;
  std::vector<std::vector<json>> rows;
  rows.push_back({x, K, "all", best.E, best.converged});
  const EliminationRoots roots = solve_roots({best.c_opt}, cplx(1.0));
  // Every nonempty proper subset of silent detectors, in lexicographic order.
  for (int mask = 1; mask < (1 << K) - 1; ++mask) {
    std::vector<int> miss;
    for (int j = 0; j < K; ++j)
      if (mask & (1 << j)) miss.push_back(j + 1);
    const double E = semi_success_entropy(roots, miss, alpha, alpha, chi).E;
    rows.push_back({x, K, missing_label(miss), E, best.converged});
  }
  return rows;
}

int cmd_entangle_scan(const RunConfig& cfg, std::ostream& out) {
  if (!(cfg.x_min > 0.0 && cfg.x_max >= cfg.x_min)) throw InvalidArgument("need 0 < x-min <= x-max");
  if (cfg.points < 1) throw InvalidArgument("points must be >= 1");
  for (int K : cfg.K_list)
    if (K < 1 || K > 4) throw InvalidArgument("scan supports K in 1..4");
  const double alpha = cfg.alpha.value_or(100.0);
  if (!(alpha > 0.0)) throw InvalidArgument("alpha must be positive");

  std::vector<double> xs;
  for (int i = 0; i < cfg.points; ++i) {
    const double f = cfg.points == 1 ? 0.0 : static_cast<double>(i) / (cfg.points - 1);
    xs.push_back(cfg.x_min * std::pow(cfg.x_max / cfg.x_min, f));
  }
  struct Job {
    double x;
    int K;
    std::future<std::pair<std::vector<std::vector<json>>, bool>> fut;
  };
  std::vector<Job> jobs;
  for (int K : cfg.K_list)
    for (double x : xs)
      jobs.push_back({x, K, std::async(std::launch::async, [=, &cfg] {
                        bool conv = true;
                        auto rows = scan_point(x, K, alpha, cfg, conv);
                        return std::pair{std::move(rows), conv};
                      })});

  Table t;
  t.command = "entangle-scan";
  t.param("alpha", alpha);
  t.param("x_min", cfg.x_min);
  t.param("x_max", cfg.x_max);
  t.param("points", std::to_string(cfg.points));
  std::string ks;
  for (std::size_t i = 0; i < cfg.K_list.size(); ++i) ks += (i ? " " : "") + std::to_string(cfg.K_list[i]);
  t.param("K", ks);
  t.param("restarts", std::to_string(cfg.restarts));
  t.param("seed", std::to_string(cfg.seed));
  t.columns = {"x", "K", "class", "E", "converged"};
  bool all_conv = true;
  for (auto& j : jobs) {
    auto [rows, conv] = j.fut.get();
    all_conv = all_conv && conv;
    for (auto& r : rows) t.rows.push_back(std::move(r));
  }
  emit(t, cfg, out);
  return all_conv ? kOk : kNonConvergence;
}

// ----------------------------------------------------------- feasibility

int cmd_feasibility(const RunConfig& cfg, std::ostream& out) {
  NoiseParams noise = cfg.noise;
  if (cfg.detector == "A") {
    if (noise.zeta == 0.0) noise.zeta = 1e-8;
    if (noise.lambda_det == 1.0) noise.lambda_det = 1e-2;
  } else if (cfg.detector == "B") {
    if (noise.zeta == 0.0) noise.zeta = 1e-6;
    if (noise.lambda_det == 1.0) noise.lambda_det = 1e-1;
  } else if (cfg.detector != "custom") {
    throw InvalidArgument("detector must be A, B or custom");
  }
  noise.validate();
  if (cfg.K != 1 && cfg.K != 2) throw InvalidArgument("feasibility supports K = 1 and K = 2");
  if (!(cfg.fidelity > 0.0 && cfg.fidelity < 1.0)) throw InvalidArgument("fidelity must be in (0, 1)");
  if (!(cfg.db_step > 0.0 && cfg.db_max >= cfg.db_min && cfg.db_min >= 0.0))
    throw InvalidArgument("need 0 <= db-min <= db-max and db-step > 0");
  if (!(cfg.gamma2_max > 0.0)) throw InvalidArgument("gamma2-max must be positive");

  const double alpha = cfg.alpha.value_or(std::sqrt(10.0));
  const double a2 = alpha * alpha;
  const double chi = cfg.chi.value_or(0.1 / alpha);
  const double x = a2 * chi * chi;
  const int K = cfg.K;
  const Preset p = K == 1 ? bell_k1(a2, x) : qutrit_low(a2, x);
  const double q = 1.0 / std::sqrt(static_cast<double>(K));
  const double eps_fixed = cfg.epsilon.value_or((1.0 - cfg.fidelity) / 6.0);

  // p_K at the fidelity ceiling for |gamma|^2, zero beyond the dark-count limit.
  auto point = [&](double Lambda, double eps) {
    const double lam_max = 2.0 * eps * eps * noise.lambda_det / noise.zeta;
    const double g2 = std::min(Lambda > 0.0 ? eps / (x * Lambda) : cfg.gamma2_max, cfg.gamma2_max);
    const bool ok = Lambda < lam_max;
    const double pk = ok ? success_probability(p.target, p.alpha, p.beta, p.chi, std::sqrt(g2), noise.lambda_det, q)
                         : 0.0;
    return std::tuple{g2, pk, ok};
  };

  Table t;
  t.command = "feasibility";
  t.param("K", std::to_string(K));
  t.param("detector", cfg.detector);
  t.param("zeta", noise.zeta);
  t.param("lambda_det", noise.lambda_det);
  t.param("alpha", alpha);
  t.param("chi", chi);
  t.param("fidelity", 1.0 - 6.0 * eps_fixed);
  t.param("epsilon", eps_fixed);
  t.param("db_min", cfg.db_min);
  t.param("db_max", cfg.db_max);
  t.param("db_step", cfg.db_step);
  t.param("fixed_db", cfg.fixed_db);
  t.param("gamma2_max", cfg.gamma2_max);
  t.param("p_min", cfg.p_min);
  t.param("db_convention", "10*log10(Lambda+1)");

  NoiseParams at_fixed = noise;
  if (at_fixed.Lambda == 0.0) at_fixed.Lambda = db_to_loss(cfg.fixed_db);
  const double g2_fixed = std::get<0>(point(at_fixed.Lambda, eps_fixed));
  const FeasibilityReport rep = feasibility_check(at_fixed, alpha, chi, std::sqrt(g2_fixed), eps_fixed, K);
  t.notes.push_back("dark_count_cutoff_db=" + num(rep.attenuation_db_max));
  t.notes.push_back("dark_count_cutoff_km=" + num(rep.distance_km_max));
  t.notes.push_back("practical_cutoff_db=" +
                    num(practical_loss_limit_db(p.target, p.alpha, p.beta, p.chi, noise.lambda_det, eps_fixed,
                                                cfg.p_min)));
  for (const auto& in : rep.items)
    t.notes.push_back("check " + in.name + " value=" + num(in.value) + " bound=" + num(in.bound) +
                      " margin=" + num(in.margin) + " pass=" + (in.pass ? "1" : "0"));

  t.columns = {"sweep", "K", "loss_db", "Lambda", "F", "gamma2", "p_K", "within_dark_limit"};
  const int n_db = static_cast<int>(std::floor((cfg.db_max - cfg.db_min) / cfg.db_step + 1e-9)) + 1;
  for (int i = 0; i < n_db; ++i) {
    const double db = cfg.db_min + i * cfg.db_step;
    const double L = db_to_loss(db);
    const auto [g2, pk, ok] = point(L, eps_fixed);
    t.rows.push_back({"loss", K, db, L, 1.0 - 6.0 * eps_fixed, g2, pk, ok});
  }
  const double L_fixed = db_to_loss(cfg.fixed_db);
  for (int i = 0; i <= 19; ++i) {
    const double F = 0.80 + 0.01 * i;
    const auto [g2, pk, ok] = point(L_fixed, (1.0 - F) / 6.0);
    t.rows.push_back({"fidelity", K, cfg.fixed_db, L_fixed, F, g2, pk, ok});
  }
  emit(t, cfg, out);
  return kOk;
}

void add_target_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--preset", cfg.preset, "bell-k1 | maxent-k2-low | maxent-k2-high | photon-correlated");
  sub->add_option("--c", cfg.coeffs, "explicit coefficients c_0..c_K as re:im,re:im,...");
  sub->add_option("--alpha", cfg.alpha, "amplitude of mode a (real)");
  sub->add_option("--beta", cfg.beta, "amplitude of mode b (explicit targets; defaults to alpha)");
  sub->add_option("--chi", cfg.chi, "cross-Kerr phase per photon pair");
  sub->add_option("--s", cfg.s, "photon number of the photon-correlated target")->capture_default_str();
  sub->add_option("--K", cfg.K, "number of detectors of the photon-correlated target")->capture_default_str();
  sub->add_option("--gamma", cfg.gamma, "probe amplitude (real)")->capture_default_str();
  sub->add_option("--delta", cfg.delta, "reference fraction of the probe")->capture_default_str();
}

void add_io_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--out", cfg.out, "output file (default: stdout)");
  sub->add_option("--format", cfg.format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  sub->add_option("--seed", cfg.seed, "optimizer seed")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"kerrq: entangled coherent-pair states from weak cross-Kerr coupling and elimination measurements"};
  app.require_subcommand(1);

  auto* design = app.add_subcommand("design", "design the detection scheme for a target; --out writes it as JSON");
  add_target_options(design, cfg);
  add_io_options(design, cfg);

  auto* sim = app.add_subcommand("simulate", "run the full protocol, one CSV row per click pattern");
  add_target_options(sim, cfg);
  add_io_options(sim, cfg);
  sim->add_option("--scheme", cfg.scheme_file, "scheme JSON from 'design' (needs --alpha, --chi)");
  sim->add_flag("!--no-oracle", cfg.oracle, "skip the operator-path trace distance column");

  auto* scan = app.add_subcommand("entangle-scan", "optimal entanglement vs x = |alpha|^2 chi^2");
  add_io_options(scan, cfg);
  scan->add_option("--alpha", cfg.alpha, "amplitude of modes a and b (default 100)");
  scan->add_option("--K", cfg.K_list, "detector counts, comma separated")->delimiter(',')->capture_default_str();
  scan->add_option("--x-min", cfg.x_min)->capture_default_str();
  scan->add_option("--x-max", cfg.x_max)->capture_default_str();
  scan->add_option("--points", cfg.points, "log-spaced grid points")->capture_default_str();
  scan->add_option("--restarts", cfg.restarts, "optimizer restarts per point")->capture_default_str();

  auto* feas = app.add_subcommand(
      "feasibility",
      "success probability vs channel loss at fixed fidelity and vs fidelity at fixed loss; "
      "attenuation in dB is 10*log10(Lambda+1)");
  add_io_options(feas, cfg);
  feas->add_option("--K", cfg.K, "1 or 2")->capture_default_str();
  feas->add_option("--alpha", cfg.alpha, "amplitude of modes a and b (default sqrt(10))");
  feas->add_option("--chi", cfg.chi, "cross-Kerr phase (default 0.1/alpha)");
  feas->add_option("--detector", cfg.detector, "A: zeta=1e-8, lambda=1e-2; B: zeta=1e-6, lambda=1e-1; custom")
      ->capture_default_str();
  feas->add_option("--fidelity", cfg.fidelity, "target fidelity, eps = (1-F)/6")->capture_default_str();
  feas->add_option("--epsilon", cfg.epsilon, "per-condition infidelity budget (overrides --fidelity)");
  feas->add_option("--Lambda", cfg.noise.Lambda, "channel loss for the condition report (default: --fixed-db)");
  feas->add_option("--Lambda1", cfg.noise.Lambda1);
  feas->add_option("--Lambda2", cfg.noise.Lambda2);
  feas->add_option("--dphi2", cfg.noise.dphi2);
  feas->add_option("--lambda-det", cfg.noise.lambda_det, "detector efficiency (overrides --detector)");
  feas->add_option("--zeta", cfg.noise.zeta, "dark-count probability (overrides --detector)");
  feas->add_option("--eps-ac", cfg.noise.eps_ac);
  feas->add_option("--eps-bc", cfg.noise.eps_bc);
  feas->add_option("--db-min", cfg.db_min)->capture_default_str();
  feas->add_option("--db-max", cfg.db_max)->capture_default_str();
  feas->add_option("--db-step", cfg.db_step)->capture_default_str();
  feas->add_option("--fixed-db", cfg.fixed_db, "loss for the fidelity sweep")->capture_default_str();
  feas->add_option("--gamma2-max", cfg.gamma2_max, "cap on |gamma|^2")->capture_default_str();
  feas->add_option("--p-min", cfg.p_min, "probability floor for the practical cutoff")->capture_default_str();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*design) return cmd_design(cfg, out);
    if (*sim) return cmd_simulate(cfg, out);
    if (*scan) return cmd_entangle_scan(cfg, out);
    return cmd_feasibility(cfg, out);
  } catch (const NoSolution& e) {
    err << "error: scheme synthesis failed: " << e.what() << "\n";
    return kSynthesis;
  } catch (const TruncationOverflow& e) {
    err << "error: truncation overflow: " << e.what() << "\n";
    return kTruncation;
  } catch (const TailTooHeavy& e) {
    err << "error: truncation overflow: " << e.what() << "\n";
    return kTruncation;
  } catch (const NonConvergence& e) {
    err << "error: " << e.what() << "\n";
    return kNonConvergence;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInvalid;
  }
}

}  // namespace kerrq::cli
