#include "chainverifier/commands.hpp"

#include <cmath>

#include "chainverifier/errors.hpp"

namespace chainverifier {

namespace {

void say(const Logger& log, const std::string& msg) {
  if (log) log(msg);
}

VerdictReport start(const RunConfig& cfg, const std::string& command) {
  VerdictReport r;
  r.command = command;
  r.config = cfg;
  return r;
}

std::vector<StateVector> origins_of(const RunConfig& cfg) {
  const auto& a = cfg.analysis;
  std::vector<StateVector> out;
  if (a.origin_count > 0) out = halton_origins(cfg.model.n, a.origin_count, a.origin_lo, a.origin_hi);
  out.insert(out.end(), a.extra_origins.begin(), a.extra_origins.end());
  return out;
}

}  // namespace

std::optional<RankWitness> search_rank_witness(const ModelSpec& model, const StateVector& x,
                                               int k_max, int attempts, double rel_tol,
                                               std::uint64_t seed,
                                               std::vector<RankReport>* attempts_out,
                                               std::vector<std::string>* notes) {
  std::optional<RankWitness> best;
  for (int k = 1; k <= k_max; ++k) {
    for (int a = 0; a < attempts; ++a) {
      Rng rng = make_rng(seed, {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(a)});
      ControlSequence ws;
      StateVector y = x;
      for (int i = 0; i < k; ++i) {
        ControlBlock w = model.sample_control(y, rng);
        y = step(model, y, w);
        ws.push_back(std::move(w));
      }
      try {
        RankWitness w = assess_rank(model, x, ws, rel_tol);
        if (attempts_out) attempts_out->push_back(w.report);
        if (!best || w.report.numeric_rank > best->report.numeric_rank) best = std::move(w);
        if (best->report.full_rank) return best;
      } catch (const InvalidWitnessError& e) {
        if (notes) notes->push_back(std::string("rank draw skipped: ") + e.what());
      } catch (const DifferentiationError& e) {
        if (notes) notes->push_back(std::string("rank draw skipped: ") + e.what());
      }
    }
  }
  return best;
}

CommandResult cmd_analyze(const RunConfig& cfg, const Logger& log) {
  validate_config(cfg);
  CommandResult out{start(cfg, "analyze"), 0};
  auto& rep = out.report;
  const ModelSpec model = build_model(cfg);
  const StateVector x_star = resolved_x_star(cfg);
  const SearchBudget budget = search_budget(cfg);
  const auto& a = cfg.analysis;

  say(log, "rank condition at x*");
  const auto rank = search_rank_witness(model, x_star, a.rank_k_max, a.rank_attempts, a.rank_tol,
                                        stream_seed(cfg, SeedStream::kRankWitness),
                                        &rep.rank_attempts, &rep.diagnostics);

  const auto origins = origins_of(cfg);
  say(log, "global attraction over " + std::to_string(origins.size()) + " origins");
  std::optional<AttractivityCertificate> globally =
      certify_globally_attracting(model, x_star, origins, a.epsilon, a.k_max, budget);

  say(log, "steady attraction");
  std::optional<AttractivityCertificate> steadily =
      certify_steadily_attracting(model, x_star, origins, a.epsilon, a.first_length, a.span, budget);
  if (!steadily->certified() && a.fixed_point_tol > 0.0 && globally->certified()) {
    say(log, "fixed-point route to steady attraction");
    if (const auto fp = certify_fixed_point(model, x_star, a.fixed_point_tol, budget)) {
      steadily = steadily_from_fixed_point(*globally, *fp);
    } else {
      rep.diagnostics.push_back("no fixed-point path found at x*");
    }
  }

  say(log, "return lengths");
  const ReturnLengthSet returns = return_lengths(model, x_star, resolved_epsilon_return(cfg), a.return_k_max, budget);

  rep.verdict = assemble_verdict(rank, globally, steadily, returns);

  if (a.empirical_return_steps > 0) {
    say(log, "empirical return periods");
    rep.empirical_returns = empirical_return_periods(model, x_star, resolved_epsilon_return(cfg),
                                                     a.empirical_return_steps,
                                                     stream_seed(cfg, SeedStream::kEmpiricalReturns));
  }
  out.exit_code = rep.verdict->conclusion == Conclusion::kInconclusive ? 2 : 0;
  say(log, std::string("conclusion: ") + std::string(to_string(rep.verdict->conclusion)));
  return out;
}

CommandResult cmd_check_density(const RunConfig& cfg, const Logger& log) {
  validate_config(cfg);
  CommandResult out{start(cfg, "check-density"), 0};
  const ModelSpec model = build_model(cfg);
  const auto& d = cfg.density;
  std::vector<StateVector> states = d.states;
  if (states.empty()) states.push_back(StateVector::Zero(cfg.model.n));
  DensityCheckOptions opts;
  opts.marginal_samples = d.marginal_samples;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto seed = derive_seed(stream_seed(cfg, SeedStream::kDensity), {i});
    DensityVerdict v;
    v.check = empirical_density_check(model, states[i], d.samples, d.bins, d.lo, d.hi, seed, opts);
    v.threshold = d.threshold;
    v.passed = v.check.max_l1() <= d.threshold;
    say(log, "state " + std::to_string(i) + ": L1 " + std::to_string(v.check.max_l1()) +
                 (v.passed ? " PASS" : " FAIL"));
    if (!v.passed) out.exit_code = 2;
    out.report.density.push_back(std::move(v));
  }
  return out;
}

CommandResult cmd_rate(const RunConfig& cfg, const Logger& log) {
  validate_config(cfg);
  if (cfg.model.kind != "xnes") throw ConfigError("model.kind", "rate needs model.kind = xnes");
  CommandResult out{start(cfg, "rate"), 0};
  const XnesParams params = xnes_params_from(cfg);
  const auto& r = cfg.rate;
  Vector x0 = r.x0.value_or(Vector::Unit(cfg.model.n, 0));
  const int burn_in = r.burn_in >= 0 ? r.burn_in : r.iterations / 5;
  say(log, "running both rate routes");
  RateVerdict v;
  v.estimate = xnes_convergence_rate(params, x0, r.sigma0, r.iterations, burn_in,
                                     stream_seed(cfg, SeedStream::kRate), r.batches);
  v.agreement_sigmas = r.agreement_sigmas;
  v.routes_agree = v.estimate.routes_agree(r.agreement_sigmas);
  if (std::abs(v.estimate.route_a) <= r.agreement_sigmas * v.estimate.se_a) {
    v.sign = "indeterminate";
  } else {
    v.sign = v.estimate.route_a < 0.0 ? "convergence" : "divergence";
  }
  v.estimator_note =
      "route_b replaces the stationary expectation and the inner integral by one occupation "
      "average over realized selected steps";
  out.report.rate = v;
  out.exit_code = v.routes_agree ? 0 : 2;
  return out;
}

CommandResult cmd_paths(const RunConfig& cfg, const Logger& log) {
  validate_config(cfg);
  CommandResult out{start(cfg, "paths"), 0};
  const ModelSpec model = build_model(cfg);
  const SearchBudget budget = search_budget(cfg);
  for (std::size_t i = 0; i < cfg.paths.size(); ++i) {
    const auto& q = cfg.paths[i];
    PathQueryResult res;
    res.query = q;
    res.certificate = find_path(model, q.y, q.center, q.radius, q.k, budget, i);
    say(log, "path " + std::to_string(i) + (res.certificate ? ": found" : ": not found"));
    out.report.paths.push_back(std::move(res));
  }
  return out;
}

}  // namespace chainverifier
