#include "mhsplit/experiment.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "mhsplit/theory.hpp"

namespace mhsplit {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ShiftLaw parse_shift(const std::string& s) {
  if (s == "zero") return ShiftLaw::zero;
  if (s == "random") return ShiftLaw::random;
  throw ConfigError("unknown shift law: " + s);
}

std::string shift_name(ShiftLaw s) { return s == ShiftLaw::zero ? "zero" : "random"; }

InitKind parse_init(const std::string& s) {
  if (s == "exact_equilibrium") return InitKind::exact_equilibrium;
  if (s == "importance_resample") return InitKind::importance_resample;
  throw ConfigError("unknown init (use exact_equilibrium or importance_resample): " + s);
}

ChainMode parse_mode(const std::string& s) {
  if (s == "metropolis") return ChainMode::metropolis;
  if (s == "unadjusted") return ChainMode::unadjusted;
  throw ConfigError("unknown chain mode: " + s);
}

AcceptPath parse_accept_path(const std::string& s) {
  if (s == "gaussian_closed_form") return AcceptPath::gaussian_closed_form;
  if (s == "general_density") return AcceptPath::general_density;
  if (s == "surrogate") return AcceptPath::surrogate;
  throw ConfigError("unknown accept_path: " + s);
}

bool known_family(const std::string& f) {
  return f == "sla" || f == "theta_langevin" || f == "lstep" || f == "hmc" || f == "pcn" ||
         f == "cn";
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

template <class T>
void read_opt(const json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

void apply(GridPoint& p, const std::string& name, double v) {
  if (name == "l") { p.proposal.l = v; p.proposal.h.reset(); }
  else if (name == "h") { p.proposal.h = v; p.proposal.l.reset(); }
  else if (name == "L") p.proposal.L = static_cast<int>(std::lround(v));
  else if (name == "theta") p.proposal.theta = v;
  else if (name == "T") p.proposal.T = v;
  else if (name == "dim") p.target.dim = static_cast<int>(std::lround(v));
  else if (name == "t") p.t_phi_cost = v;
  else throw ConfigError("unknown sweep parameter: " + name);
}

std::string num(double v) { return format_double(v); }

std::string opt_num(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::vector<std::string> config_values(const GridPoint& p, const ChainConfig& chain,
                                       const std::string& family, double h, int L,
                                       std::optional<int> optimal) {
  return {std::to_string(p.index),
          family,
          std::to_string(p.target.dim),
          num(p.target.kappa),
          num(p.target.scale),
          p.target.rotate ? "1" : "0",
          std::to_string(p.target.seed),
          shift_name(p.target.shift),
          p.target.phi,
          num(p.target.phi_amplitude),
          num(p.proposal.theta),
          p.proposal.V,
          opt_num(p.proposal.l),
          std::isnan(h) ? "" : num(h),
          std::to_string(L),
          opt_num(p.proposal.T),
          num(p.t_phi_cost),
          optimal ? std::to_string(*optimal) : "",
          std::to_string(p.chain_seed),
          std::to_string(chain.n_steps),
          std::to_string(chain.effective_burn_in())};
}

ResultRow empty_row(int k) {
  ResultRow r;
  r.predicted_acceptance = r.predicted_mean_jump = kNaN;
  r.empirical_acceptance = r.empirical_mean_jump = kNaN;
  r.stderr_acceptance = r.stderr_mean_jump = kNaN;
  r.efficiency = kNaN;
  r.predicted_jump = r.empirical_jump = r.stderr_jump = VectorXd::Constant(k, kNaN);
  return r;
}

int steps_of(const ProposalSpec& spec, double h) {
  if (spec.family == "hmc") {
    HmcSpec hs{h, spec.L, {}, spec.T};
    return hs.steps();
  }
  return spec.family == "lstep" ? spec.L : 1;
}

ResultRow evaluate(const ExperimentConfig& cfg, const GridPoint& p, bool simulate) {
  const int k = cfg.jump_directions;
  ResultRow row = empty_row(k);
  if (cfg.kind == ExperimentKind::lstep_efficiency) {
    const int L = p.proposal.L;
    row.config = config_values(p, cfg.chain, "lstep_efficiency", kNaN, L, optimal_L(p.t_phi_cost));
    row.efficiency = lstep_efficiency(L, p.t_phi_cost);
    return row;
  }

  const BuiltTarget target = build_target(p.target);
  double h = kNaN;
  const BuiltProposal bp = build_proposal(*target.reference, p.proposal, p.target.kappa, &h);
  row.config = config_values(p, cfg.chain, p.proposal.family, h, steps_of(p.proposal, h), {});
  const double cost = bp.matvecs_per_step + p.t_phi_cost;
  const int kk = std::min(k, target.reference->dim());

  if (bp.theory_available) {
    const TheorySummary s = summarize(*target.reference, bp);
    row.predicted_acceptance = s.expected_acceptance;
    const VectorXd pj = s.predicted_jump();
    row.predicted_mean_jump = pj.mean();
    row.predicted_jump.head(kk) = pj.head(kk);
    if (!simulate) row.efficiency = row.predicted_mean_jump / cost;
  } else if (!simulate) {
    throw TheoryUnavailable("family " + p.proposal.family +
                            " with a dense preconditioner has no closed-form prediction");
  }

  if (simulate) {
    ChainConfig chain = cfg.chain;
    chain.seed = p.chain_seed;
    if (target.tilted && chain.init == InitKind::exact_equilibrium)
      chain.init = InitKind::importance_resample;
    const ChainDiagnostics d = target.tilted ? run_chain(*target.tilted, bp, chain)
                                             : run_chain(*target.reference, bp, chain);
    row.config = config_values(p, chain, p.proposal.family, h, steps_of(p.proposal, h), {});
    row.empirical_acceptance = d.acceptance_rate;
    row.stderr_acceptance = d.acceptance_stderr;
    row.empirical_mean_jump = d.mean_jump_sq;
    row.stderr_mean_jump = d.mean_jump_sq_stderr;
    row.empirical_jump.head(kk) = d.jump_sq.head(kk);
    row.stderr_jump.head(kk) = d.jump_sq_stderr.head(kk);
    row.efficiency = d.mean_jump_sq / cost;
    row.matvecs = d.matvec_count;
    if (cfg.timing) row.wall_time_s = d.wall_time_s;
  }
  return row;
}

std::vector<ResultRow> evaluate_all(const ExperimentConfig& cfg, bool simulate) {
  const std::vector<GridPoint> grid = expand_grid(cfg);
  std::vector<ResultRow> rows(grid.size());
  std::vector<std::exception_ptr> errors(grid.size());
  unsigned n_threads = cfg.threads > 0 ? cfg.threads : std::thread::hardware_concurrency();
  n_threads = std::max(1u, std::min<unsigned>(n_threads, grid.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      try {
        rows[i] = evaluate(cfg, grid[i], simulate);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  try {
    std::string kind = "chain";
    read(j, "kind", kind);
    if (kind == "chain") c.kind = ExperimentKind::chain;
    else if (kind == "lstep_efficiency") c.kind = ExperimentKind::lstep_efficiency;
    else throw ConfigError("unknown experiment kind: " + kind);

    if (j.contains("target")) {
      const json& t = j.at("target");
      read(t, "dim", c.target.dim);
      read(t, "kappa", c.target.kappa);
      read(t, "scale", c.target.scale);
      read(t, "rotate", c.target.rotate);
      read(t, "seed", c.target.seed);
      std::string shift = "zero";
      read(t, "shift", shift);
      c.target.shift = parse_shift(shift);
      if (t.contains("phi")) {
        const json& ph = t.at("phi");
        if (ph.is_string()) c.target.phi = ph.get<std::string>();
        else {
          read(ph, "name", c.target.phi);
          read(ph, "amplitude", c.target.phi_amplitude);
        }
      }
      parse_phi_kind(c.target.phi);
    }
    if (j.contains("proposal")) {
      const json& p = j.at("proposal");
      read(p, "family", c.proposal.family);
      read_opt(p, "h", c.proposal.h);
      read_opt(p, "l", c.proposal.l);
      read(p, "theta", c.proposal.theta);
      read(p, "L", c.proposal.L);
      read_opt(p, "T", c.proposal.T);
      if (p.contains("V") && p.at("V").is_array()) {
        c.proposal.V = "dense";
        c.proposal.V_matrix = matrix_from_json(p.at("V"));
      } else {
        read(p, "V", c.proposal.V);
        parse_preconditioner(c.proposal.V);
      }
    }
    if (c.kind == ExperimentKind::chain && !known_family(c.proposal.family))
      throw ConfigError("unknown proposal family: " + c.proposal.family);
    if (j.contains("chain")) {
      const json& ch = j.at("chain");
      read(ch, "n_steps", c.chain.n_steps);
      read_opt(ch, "burn_in", c.chain.burn_in);
      read(ch, "seed", c.chain.seed);
      read(ch, "n_batches", c.chain.n_batches);
      std::string s;
      if (ch.contains("init")) c.chain.init = parse_init(ch.at("init").get<std::string>());
      if (ch.contains("mode")) c.chain.mode = parse_mode(ch.at("mode").get<std::string>());
      if (ch.contains("accept_path"))
        c.chain.accept_path = parse_accept_path(ch.at("accept_path").get<std::string>());
    }
    if (j.contains("sweep")) {
      const json& sw = j.at("sweep");
      const json list = sw.is_array() ? sw : json::array({sw});
      for (const json& s : list) {
        SweepSpec spec;
        spec.parameter = s.at("parameter").get<std::string>();
        spec.values = s.at("values").get<std::vector<double>>();
        if (spec.values.empty()) throw ConfigError("sweep grid for " + spec.parameter + " is empty");
        GridPoint probe;
        apply(probe, spec.parameter, spec.values.front());
        c.sweeps.push_back(std::move(spec));
      }
    }
    read(j, "t_phi_cost", c.t_phi_cost);
    read(j, "threads", c.threads);
    if (j.contains("output")) {
      read(j.at("output"), "jump_directions", c.jump_directions);
      read(j.at("output"), "timing", c.timing);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (c.target.dim < 1) throw ConfigError("target.dim must be >= 1");
  if (c.jump_directions < 0) throw ConfigError("jump_directions must be >= 0");
  if (c.kind == ExperimentKind::chain && !c.proposal.h && !c.proposal.l) {
    bool swept = false;
    for (const auto& s : c.sweeps) swept |= s.parameter == "h" || s.parameter == "l";
    if (!swept) throw ConfigError("proposal needs h or l");
  }
  if (c.kind == ExperimentKind::lstep_efficiency && c.sweeps.empty()) {
    c.sweeps.push_back({"t", {0, 1, 2, 4, 8}});
    c.sweeps.push_back({"L", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16}});
  }
  try {
    c.chain.effective_burn_in();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return ExperimentConfig::from_json(j);
}

std::vector<GridPoint> expand_grid(const ExperimentConfig& cfg) {
  GridPoint base;
  base.target = cfg.target;
  base.proposal = cfg.proposal;
  base.t_phi_cost = cfg.t_phi_cost;
  std::vector<GridPoint> points{base};
  for (const auto& sweep : cfg.sweeps) {
    std::vector<GridPoint> next;
    for (const auto& p : points)
      for (double v : sweep.values) {
        GridPoint q = p;
        apply(q, sweep.parameter, v);
        next.push_back(q);
      }
    points = std::move(next);
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    points[i].index = static_cast<int>(i);
    points[i].chain_seed = derive_seed(cfg.chain.seed, i);
  }
  return points;
}

BuiltTarget build_target(const TargetSpec& spec) {
  BuiltTarget out;
  out.reference = std::make_shared<GaussianTarget>(make_test_target(
      spec.dim, {spec.kappa, spec.scale}, spec.seed, spec.rotate, spec.shift));
  const PhiKind kind = parse_phi_kind(spec.phi);
  if (kind != PhiKind::zero) out.tilted.emplace(out.reference, builtin_phi(kind, spec.phi_amplitude));
  return out;
}

BuiltProposal build_proposal(const GaussianTarget& target, const ProposalSpec& spec, double kappa,
                             double* h_out) {
  const bool hmc = spec.family == "hmc";
  double h = 0.0;
  if (spec.h) h = *spec.h;
  else if (spec.l)
    h = ScalingLaw{hmc ? ScalingKind::hmc : ScalingKind::langevin, *spec.l, kappa}.step(target.dim());
  else throw ConfigError("proposal needs h or l");
  if (h_out) *h_out = h;
  const Preconditioner V = spec.V_matrix ? Preconditioner::dense(*spec.V_matrix)
                                         : parse_preconditioner(spec.V);
  BuiltProposal bp = [&]() -> BuiltProposal {
    if (spec.family == "sla") return sla_proposal(target, h);
    if (spec.family == "theta_langevin") return theta_langevin_proposal(target, {spec.theta, h, V});
    if (spec.family == "pcn") {
      BuiltProposal p = theta_langevin_proposal(target, {0.5, h, Preconditioner::inverse_precision()});
      p.family = "pcn";
      return p;
    }
    if (spec.family == "cn") {
      BuiltProposal p = theta_langevin_proposal(target, {0.5, h, Preconditioner::identity()});
      p.family = "cn";
      return p;
    }
    if (spec.family == "lstep") return l_step_proposal(sla_proposal(target, h), spec.L);
    if (hmc) return hmc_proposal(target, {h, spec.L, V, spec.T});
    throw ConfigError("unknown proposal family: " + spec.family);
  }();
  return bp;
}

std::vector<std::string> config_columns() {
  return {"grid_index", "family", "dim", "kappa", "scale", "rotate", "target_seed",
          "shift", "phi", "phi_amplitude", "theta", "V", "l", "h", "L", "T",
          "t_phi_cost", "optimal_L", "chain_seed", "n_steps", "burn_in"};
}

std::vector<std::string> csv_header(int k) {
  std::vector<std::string> h = config_columns();
  for (const char* kind : {"predicted", "empirical", "stderr"}) {
    h.push_back(std::string(kind) + "_acceptance");
    h.push_back(std::string(kind) + "_mean_jump");
    for (int i = 1; i <= k; ++i) h.push_back(std::string(kind) + "_jump_" + std::to_string(i));
  }
  h.push_back("efficiency");
  h.push_back("wall_time_s");
  h.push_back("matvecs");
  return h;
}

std::string format_csv(const std::vector<ResultRow>& rows, int k) {
  std::ostringstream os;
  const auto header = csv_header(k);
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& r : rows) {
    bool first = true;
    auto put = [&](const std::string& s) {
      os << (first ? "" : ",") << s;
      first = false;
    };
    for (const auto& c : r.config) put(c);
    auto block = [&](double acc, double mean, const VectorXd& jumps) {
      put(format_double(acc));
      put(format_double(mean));
      for (int i = 0; i < k; ++i) put(format_double(i < jumps.size() ? jumps[i] : kNaN));
    };
    block(r.predicted_acceptance, r.predicted_mean_jump, r.predicted_jump);
    block(r.empirical_acceptance, r.empirical_mean_jump, r.empirical_jump);
    block(r.stderr_acceptance, r.stderr_mean_jump, r.stderr_jump);
    put(format_double(r.efficiency));
    put(format_double(r.wall_time_s));
    put(std::to_string(r.matvecs));
    os << '\n';
  }
  return os.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

std::vector<ResultRow> cmd_predict(const ExperimentConfig& config) {
  return evaluate_all(config, false);
}

std::vector<ResultRow> cmd_run(const ExperimentConfig& config) {
  return evaluate_all(config, true);
}

}  // namespace mhsplit
