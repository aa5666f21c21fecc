#include "chainverifier/report.hpp"

#include <cmath>

#include "chainverifier/errors.hpp"

namespace chainverifier {

using nlohmann::json;

namespace {

// JSON has no inf/nan; encode them as strings so round-trips stay exact.
json real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double real_of(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw InputError("bad real '" + s + "'");
  }
  return j.get<double>();
}

json vec(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(real(v[i]));
  return a;
}

Vector vec_of(const json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = real_of(j[i]);
  return v;
}

json vecs(const std::vector<Vector>& vs) {
  json a = json::array();
  for (const auto& v : vs) a.push_back(vec(v));
  return a;
}

std::vector<Vector> vecs_of(const json& j) {
  std::vector<Vector> out;
  for (const auto& e : j) out.push_back(vec_of(e));
  return out;
}

json mat(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec(m.row(r).transpose()));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Matrix mat_of(const json& j) {
  Matrix m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
  const auto& data = j.at("data");
  for (Eigen::Index r = 0; r < m.rows(); ++r) m.row(r) = vec_of(data.at(r)).transpose();
  return m;
}

json seq(const ControlSequence& s) { return vecs(s.blocks()); }
ControlSequence seq_of(const json& j) { return ControlSequence(vecs_of(j)); }

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> opt_of(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

json opt_vec(const std::optional<Vector>& v) { return v ? vec(*v) : json(nullptr); }
std::optional<Vector> opt_vec_of(const json& j) {
  if (j.is_null()) return std::nullopt;
  return vec_of(j);
}

json reals(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(real(x));
  return a;
}

std::vector<double> reals_of(const json& j) {
  std::vector<double> out;
  for (const auto& e : j) out.push_back(real_of(e));
  return out;
}

}  // namespace

// --- config ---------------------------------------------------------------

void to_json(json& j, const RunConfig& v) {
  const auto& m = v.model;
  const auto& a = v.analysis;
  const auto& s = v.search;
  const auto& d = v.density;
  const auto& r = v.rate;
  json paths = json::array();
  for (const auto& q : v.paths) {
    paths.push_back({{"y", vec(q.y)}, {"center", vec(q.center)}, {"radius", real(q.radius)}, {"k", q.k}});
  }
  j = json{
      {"seed", v.seed},
      {"model",
       {{"kind", m.kind},
        {"n", m.n},
        {"objective", m.objective},
        {"lambda", m.lambda},
        {"mu", m.mu},
        {"weights", reals(m.weights)},
        {"kappa_m", real(m.kappa_m)},
        {"kappa_sigma", real(m.kappa_sigma)},
        {"q_samples", m.q_samples},
        {"q_seed", opt(m.q_seed)},
        {"toy", m.toy},
        {"toy_scale", real(m.toy_scale)}}},
      {"analysis",
       {{"x_star", opt_vec(a.x_star)},
        {"epsilon", real(a.epsilon)},
        {"k_max", a.k_max},
        {"first_length", a.first_length},
        {"span", a.span},
        {"rank_tol", real(a.rank_tol)},
        {"rank_k_max", a.rank_k_max},
        {"rank_attempts", a.rank_attempts},
        {"origin_lo", real(a.origin_lo)},
        {"origin_hi", real(a.origin_hi)},
        {"origin_count", a.origin_count},
        {"extra_origins", vecs(a.extra_origins)},
        {"epsilon_return", a.epsilon_return ? real(*a.epsilon_return) : json(nullptr)},
        {"return_k_max", a.return_k_max},
        {"fixed_point_tol", real(a.fixed_point_tol)},
        {"empirical_return_steps", a.empirical_return_steps}}},
      {"search",
       {{"restarts", s.restarts},
        {"iterations", s.iterations},
        {"shrink", real(s.shrink)},
        {"initial_step", real(s.initial_step)},
        {"use_hints", s.use_hints}}},
      {"density",
       {{"states", vecs(d.states)},
        {"samples", d.samples},
        {"bins", d.bins},
        {"lo", real(d.lo)},
        {"hi", real(d.hi)},
        {"threshold", real(d.threshold)},
        {"marginal_samples", d.marginal_samples}}},
      {"rate",
       {{"x0", opt_vec(r.x0)},
        {"sigma0", real(r.sigma0)},
        {"iterations", r.iterations},
        {"burn_in", r.burn_in},
        {"batches", r.batches},
        {"agreement_sigmas", real(r.agreement_sigmas)},
        {"trajectory_steps", r.trajectory_steps}}},
      {"paths", paths},
  };
}

void from_json(const json& j, RunConfig& v) {
  v.seed = j.at("seed").get<std::uint64_t>();
  const auto& m = j.at("model");
  v.model.kind = m.at("kind").get<std::string>();
  v.model.n = m.at("n").get<int>();
  v.model.objective = m.at("objective").get<std::string>();
  v.model.lambda = m.at("lambda").get<int>();
  v.model.mu = m.at("mu").get<int>();
  v.model.weights = reals_of(m.at("weights"));
  v.model.kappa_m = real_of(m.at("kappa_m"));
  v.model.kappa_sigma = real_of(m.at("kappa_sigma"));
  v.model.q_samples = m.at("q_samples").get<int>();
  v.model.q_seed = opt_of<std::uint64_t>(m.at("q_seed"));
  v.model.toy = m.at("toy").get<std::string>();
  v.model.toy_scale = real_of(m.at("toy_scale"));
  const auto& a = j.at("analysis");
  v.analysis.x_star = opt_vec_of(a.at("x_star"));
  v.analysis.epsilon = real_of(a.at("epsilon"));
  v.analysis.k_max = a.at("k_max").get<int>();
  v.analysis.first_length = a.at("first_length").get<int>();
  v.analysis.span = a.at("span").get<int>();
  v.analysis.rank_tol = real_of(a.at("rank_tol"));
  v.analysis.rank_k_max = a.at("rank_k_max").get<int>();
  v.analysis.rank_attempts = a.at("rank_attempts").get<int>();
  v.analysis.origin_lo = real_of(a.at("origin_lo"));
  v.analysis.origin_hi = real_of(a.at("origin_hi"));
  v.analysis.origin_count = a.at("origin_count").get<int>();
  v.analysis.extra_origins = vecs_of(a.at("extra_origins"));
  if (const auto& e = a.at("epsilon_return"); e.is_null()) {
    v.analysis.epsilon_return.reset();
  } else {
    v.analysis.epsilon_return = real_of(e);
  }
  v.analysis.return_k_max = a.at("return_k_max").get<int>();
  v.analysis.fixed_point_tol = real_of(a.at("fixed_point_tol"));
  v.analysis.empirical_return_steps = a.at("empirical_return_steps").get<int>();
  const auto& s = j.at("search");
  v.search.restarts = s.at("restarts").get<int>();
  v.search.iterations = s.at("iterations").get<int>();
  v.search.shrink = real_of(s.at("shrink"));
  v.search.initial_step = real_of(s.at("initial_step"));
  v.search.use_hints = s.at("use_hints").get<bool>();
  const auto& d = j.at("density");
  v.density.states = vecs_of(d.at("states"));
  v.density.samples = d.at("samples").get<int>();
  v.density.bins = d.at("bins").get<int>();
  v.density.lo = real_of(d.at("lo"));
  v.density.hi = real_of(d.at("hi"));
  v.density.threshold = real_of(d.at("threshold"));
  v.density.marginal_samples = d.at("marginal_samples").get<int>();
  const auto& r = j.at("rate");
  v.rate.x0 = opt_vec_of(r.at("x0"));
  v.rate.sigma0 = real_of(r.at("sigma0"));
  v.rate.iterations = r.at("iterations").get<int>();
  v.rate.burn_in = r.at("burn_in").get<int>();
  v.rate.batches = r.at("batches").get<int>();
  v.rate.agreement_sigmas = real_of(r.at("agreement_sigmas"));
  v.rate.trajectory_steps = r.at("trajectory_steps").get<int>();
  v.paths.clear();
  for (const auto& q : j.at("paths")) {
    v.paths.push_back({vec_of(q.at("y")), vec_of(q.at("center")), real_of(q.at("radius")),
                       q.at("k").get<int>()});
  }
}

// --- diff -----------------------------------------------------------------

void to_json(json& j, const RankReport& v) {
  j = json{{"singular_values", reals(v.singular_values)},
           {"numeric_rank", v.numeric_rank},
           {"tolerance", real(v.tolerance)},
           {"full_rank", v.full_rank},
           {"borderline", v.borderline}};
}

void from_json(const json& j, RankReport& v) {
  v.singular_values = reals_of(j.at("singular_values"));
  v.numeric_rank = j.at("numeric_rank").get<int>();
  v.tolerance = real_of(j.at("tolerance"));
  v.full_rank = j.at("full_rank").get<bool>();
  v.borderline = j.at("borderline").get<bool>();
}

namespace {

DerivativeRoute route_of(const std::string& s) {
  if (s == to_string(DerivativeRoute::kDual)) return DerivativeRoute::kDual;
  if (s == to_string(DerivativeRoute::kFiniteDifference)) return DerivativeRoute::kFiniteDifference;
  throw InputError("unknown derivative route '" + s + "'");
}

}  // namespace

void to_json(json& j, const RankWitness& v) {
  j = json{{"point", vec(v.point)},
           {"sequence", seq(v.sequence)},
           {"controllability", mat(v.controllability)},
           {"report", v.report},
           {"route", std::string(to_string(v.route))}};
}

void from_json(const json& j, RankWitness& v) {
  v.point = vec_of(j.at("point"));
  v.sequence = seq_of(j.at("sequence"));
  v.controllability = mat_of(j.at("controllability"));
  v.report = j.at("report").get<RankReport>();
  v.route = route_of(j.at("route").get<std::string>());
}

// --- attractivity ---------------------------------------------------------

void to_json(json& j, const PathCertificate& v) {
  j = json{{"origin", vec(v.origin)},
           {"sequence", seq(v.sequence)},
           {"target_center", vec(v.target_center)},
           {"radius", real(v.radius)},
           {"achieved_distance", real(v.achieved_distance)},
           {"log_density", real(v.log_density)},
           {"density", real(v.density_value)},
           {"found_by", v.found_by}};
}

void from_json(const json& j, PathCertificate& v) {
  v.origin = vec_of(j.at("origin"));
  v.sequence = seq_of(j.at("sequence"));
  v.target_center = vec_of(j.at("target_center"));
  v.radius = real_of(j.at("radius"));
  v.achieved_distance = real_of(j.at("achieved_distance"));
  v.log_density = real_of(j.at("log_density"));
  v.density_value = real_of(j.at("density"));
  v.found_by = j.at("found_by").get<std::string>();
}

void to_json(json& j, const AttractivityCertificate& v) {
  json failures = json::array();
  for (const auto& f : v.failures) {
    failures.push_back({{"origin_index", f.origin_index}, {"origin", vec(f.origin)}, {"length", f.length}});
  }
  j = json{{"candidate", vec(v.candidate)},
           {"kind", std::string(to_string(v.kind))},
           {"certified", v.certified()},
           {"epsilon", real(v.epsilon)},
           {"tested_origins", vecs(v.tested_origins)},
           {"paths", v.paths},
           {"first_length", v.first_length},
           {"horizon", v.horizon},
           {"failures", failures},
           {"fixed_point", opt(v.fixed_point)}};
}

void from_json(const json& j, AttractivityCertificate& v) {
  v.candidate = vec_of(j.at("candidate"));
  const auto kind = attractivity_kind_from_string(j.at("kind").get<std::string>());
  if (!kind) throw InputError("unknown attractivity kind");
  v.kind = *kind;
  v.epsilon = real_of(j.at("epsilon"));
  v.tested_origins = vecs_of(j.at("tested_origins"));
  v.paths = j.at("paths").get<std::vector<PathCertificate>>();
  v.first_length = j.at("first_length").get<int>();
  v.horizon = j.at("horizon").get<int>();
  v.failures.clear();
  for (const auto& f : j.at("failures")) {
    v.failures.push_back({f.at("origin_index").get<int>(), vec_of(f.at("origin")), f.at("length").get<int>()});
  }
  v.fixed_point = opt_of<PathCertificate>(j.at("fixed_point"));
}

void to_json(json& j, const ReturnLengthSet& v) {
  j = json{{"candidate", vec(v.candidate)},
           {"epsilon_return", real(v.epsilon_return)},
           {"k_max", v.k_max},
           {"lengths", v.lengths},
           {"gcd", v.gcd},
           {"paths", v.paths},
           {"warnings", v.warnings}};
}

void from_json(const json& j, ReturnLengthSet& v) {
  v.candidate = vec_of(j.at("candidate"));
  v.epsilon_return = real_of(j.at("epsilon_return"));
  v.k_max = j.at("k_max").get<int>();
  v.lengths = j.at("lengths").get<std::vector<int>>();
  v.gcd = j.at("gcd").get<int>();
  v.paths = j.at("paths").get<std::vector<PathCertificate>>();
  v.warnings = j.at("warnings").get<std::vector<std::string>>();
}

void to_json(json& j, const StabilityVerdict& v) {
  j = json{{"candidate", vec(v.candidate)},
           {"conclusion", std::string(to_string(v.conclusion))},
           {"rank_ok", v.rank_ok},
           {"rank", opt(v.rank)},
           {"globally", opt(v.globally)},
           {"steadily", opt(v.steadily)},
           {"returns", v.returns},
           {"period_lower_bound", v.period_lower_bound},
           {"caveat", v.caveat},
           {"notes", v.notes}};
}

void from_json(const json& j, StabilityVerdict& v) {
  v.candidate = vec_of(j.at("candidate"));
  const auto c = conclusion_from_string(j.at("conclusion").get<std::string>());
  if (!c) throw InputError("unknown conclusion");
  v.conclusion = *c;
  v.rank_ok = j.at("rank_ok").get<bool>();
  v.rank = opt_of<RankWitness>(j.at("rank"));
  v.globally = opt_of<AttractivityCertificate>(j.at("globally"));
  v.steadily = opt_of<AttractivityCertificate>(j.at("steadily"));
  v.returns = j.at("returns").get<ReturnLengthSet>();
  v.period_lower_bound = j.at("period_lower_bound").get<int>();
  v.caveat = j.at("caveat").get<std::string>();
  v.notes = j.at("notes").get<std::vector<std::string>>();
}

// --- simulate -------------------------------------------------------------

void to_json(json& j, const DensityCheckReport& v) {
  json coords = json::array();
  for (const auto& c : v.coordinates) {
    json bins = json::array();
    for (const auto& b : c.bins) {
      bins.push_back({real(b.lo), real(b.hi), real(b.empirical), real(b.analytic)});
    }
    coords.push_back({{"coordinate", c.coordinate},
                      {"marginal", c.marginal},
                      {"l1", real(c.l1)},
                      {"empty_bins", c.empty_bins},
                      {"outside", c.outside},
                      {"bins", bins}});
  }
  j = json{{"state", vec(v.state)},   {"samples", v.samples}, {"lo", real(v.lo)},
           {"hi", real(v.hi)},        {"seed", v.seed},       {"max_l1", real(v.max_l1())},
           {"coordinates", coords}};
}

void from_json(const json& j, DensityCheckReport& v) {
  v.state = vec_of(j.at("state"));
  v.samples = j.at("samples").get<int>();
  v.lo = real_of(j.at("lo"));
  v.hi = real_of(j.at("hi"));
  v.seed = j.at("seed").get<std::uint64_t>();
  v.coordinates.clear();
  for (const auto& c : j.at("coordinates")) {
    CoordinateDensityCheck out;
    out.coordinate = c.at("coordinate").get<int>();
    out.marginal = c.at("marginal").get<bool>();
    out.l1 = real_of(c.at("l1"));
    out.empty_bins = c.at("empty_bins").get<int>();
    out.outside = c.at("outside").get<int>();
    for (const auto& b : c.at("bins")) {
      out.bins.push_back({real_of(b.at(0)), real_of(b.at(1)), real_of(b.at(2)), real_of(b.at(3))});
    }
    v.coordinates.push_back(std::move(out));
  }
}

void to_json(json& j, const RateEstimate& v) {
  j = json{{"route_a", real(v.route_a)},
           {"se_a", real(v.se_a)},
           {"route_b", real(v.route_b)},
           {"se_b", real(v.se_b)},
           {"combined_se", real(v.combined_se())},
           {"log_norm_rate", real(v.log_norm_rate)},
           {"iterations", v.iterations},
           {"burn_in", v.burn_in},
           {"batches", v.batches},
           {"seed", v.seed}};
}

void from_json(const json& j, RateEstimate& v) {
  v.route_a = real_of(j.at("route_a"));
  v.se_a = real_of(j.at("se_a"));
  v.route_b = real_of(j.at("route_b"));
  v.se_b = real_of(j.at("se_b"));
  v.log_norm_rate = real_of(j.at("log_norm_rate"));
  v.iterations = j.at("iterations").get<int>();
  v.burn_in = j.at("burn_in").get<int>();
  v.batches = j.at("batches").get<int>();
  v.seed = j.at("seed").get<std::uint64_t>();
}

void to_json(json& j, const ReturnPeriods& v) {
  j = json{{"visit_times", v.visit_times}, {"gaps", v.gaps}, {"gcd", v.gcd}, {"warnings", v.warnings}};
}

void from_json(const json& j, ReturnPeriods& v) {
  v.visit_times = j.at("visit_times").get<std::vector<int>>();
  v.gaps = j.at("gaps").get<std::vector<int>>();
  v.gcd = j.at("gcd").get<int>();
  v.warnings = j.at("warnings").get<std::vector<std::string>>();
}

// --- report ---------------------------------------------------------------

void to_json(json& j, const VerdictReport& v) {
  json density = json::array();
  for (const auto& d : v.density) {
    density.push_back({{"check", d.check}, {"threshold", real(d.threshold)}, {"passed", d.passed}});
  }
  json rate = nullptr;
  if (v.rate) {
    rate = {{"estimate", v.rate->estimate},
            {"agreement_sigmas", real(v.rate->agreement_sigmas)},
            {"routes_agree", v.rate->routes_agree},
            {"sign", v.rate->sign},
            {"estimator_note", v.rate->estimator_note}};
  }
  json paths = json::array();
  for (const auto& p : v.paths) {
    paths.push_back({{"y", vec(p.query.y)},
                     {"center", vec(p.query.center)},
                     {"radius", real(p.query.radius)},
                     {"k", p.query.k},
                     {"found", p.certificate.has_value()},
                     {"certificate", opt(p.certificate)}});
  }
  j = json{{"tool_version", v.tool_version},
           {"command", v.command},
           {"config", v.config},
           {"verdict", opt(v.verdict)},
           {"rank_attempts", v.rank_attempts},
           {"empirical_returns", opt(v.empirical_returns)},
           {"density", density},
           {"rate", rate},
           {"paths", paths},
           {"diagnostics", v.diagnostics},
           {"wall_clock_seconds", real(v.wall_clock_seconds)}};
}

void from_json(const json& j, VerdictReport& v) {
  v.tool_version = j.at("tool_version").get<std::string>();
  v.command = j.at("command").get<std::string>();
  v.config = j.at("config").get<RunConfig>();
  v.verdict = opt_of<StabilityVerdict>(j.at("verdict"));
  v.rank_attempts = j.at("rank_attempts").get<std::vector<RankReport>>();
  v.empirical_returns = opt_of<ReturnPeriods>(j.at("empirical_returns"));
  v.density.clear();
  for (const auto& d : j.at("density")) {
    v.density.push_back({d.at("check").get<DensityCheckReport>(), real_of(d.at("threshold")),
                         d.at("passed").get<bool>()});
  }
  v.rate.reset();
  if (const auto& r = j.at("rate"); !r.is_null()) {
    v.rate = RateVerdict{r.at("estimate").get<RateEstimate>(), real_of(r.at("agreement_sigmas")),
                         r.at("routes_agree").get<bool>(), r.at("sign").get<std::string>(),
                         r.at("estimator_note").get<std::string>()};
  }
  v.paths.clear();
  for (const auto& p : j.at("paths")) {
    PathQueryResult out;
    out.query = {vec_of(p.at("y")), vec_of(p.at("center")), real_of(p.at("radius")), p.at("k").get<int>()};
    out.certificate = opt_of<PathCertificate>(p.at("certificate"));
    v.paths.push_back(std::move(out));
  }
  v.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
  v.wall_clock_seconds = real_of(j.at("wall_clock_seconds"));
}

std::string dump_report(const VerdictReport& report) {
  return json(report).dump(2) + "\n";
}

VerdictReport parse_report(const std::string& text) {
  return json::parse(text).get<VerdictReport>();
}

}  // namespace chainverifier
