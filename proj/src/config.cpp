#include "chainverifier/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "chainverifier/errors.hpp"
#include "chainverifier/objectives.hpp"

namespace chainverifier {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_real(const std::string& field, const std::string& raw) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(field, "expected a number, got '" + raw + "'");
  }
  return v;
}

long long parse_int(const std::string& field, const std::string& raw) {
  const std::string s = trim(raw);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(field, "expected an integer, got '" + raw + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& field, const std::string& raw) {
  const std::string s = trim(raw);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(field, "expected a non-negative integer, got '" + raw + "'");
  }
  return v;
}

bool parse_bool(const std::string& field, const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(field, "expected true or false, got '" + raw + "'");
}

/// Comma- or whitespace-separated numbers.
std::vector<double> parse_list(const std::string& field, const std::string& raw) {
  std::string s = raw;
  for (char& c : s) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(s);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_real(field, tok));
  if (out.empty()) throw ConfigError(field, "expected at least one number");
  return out;
}

Vector parse_vector(const std::string& field, const std::string& raw) {
  const auto v = parse_list(field, raw);
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Semicolon-separated list of vectors.
std::vector<Vector> parse_vectors(const std::string& field, const std::string& raw) {
  std::vector<Vector> out;
  std::istringstream in(raw);
  std::string part;
  while (std::getline(in, part, ';')) {
    if (!trim(part).empty()) out.push_back(parse_vector(field, part));
  }
  return out;
}

int to_int(const std::string& field, long long v) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError(field, "out of range");
  }
  return static_cast<int>(v);
}

using Setter = std::function<void(RunConfig&, const std::string& field, const std::string& raw)>;

#define CV_INT(member) \
  [](RunConfig& c, const std::string& f, const std::string& r) { c.member = to_int(f, parse_int(f, r)); }
#define CV_REAL(member) \
  [](RunConfig& c, const std::string& f, const std::string& r) { c.member = parse_real(f, r); }
#define CV_STR(member) \
  [](RunConfig& c, const std::string&, const std::string& r) { c.member = trim(r); }
#define CV_BOOL(member) \
  [](RunConfig& c, const std::string& f, const std::string& r) { c.member = parse_bool(f, r); }
#define CV_VEC(member) \
  [](RunConfig& c, const std::string& f, const std::string& r) { c.member = parse_vector(f, r); }

const std::map<std::string, std::map<std::string, Setter>>& schema() {
  static const std::map<std::string, std::map<std::string, Setter>> s = {
      {"run",
       {{"seed", [](RunConfig& c, const std::string& f, const std::string& r) {
           c.seed = parse_u64(f, r);
         }}}},
      {"model",
       {{"kind", CV_STR(model.kind)},
        {"n", CV_INT(model.n)},
        {"objective", CV_STR(model.objective)},
        {"q_samples", CV_INT(model.q_samples)},
        {"q_seed", [](RunConfig& c, const std::string& f, const std::string& r) {
           c.model.q_seed = parse_u64(f, r);
         }}}},
      {"xnes",
       {{"lambda", CV_INT(model.lambda)},
        {"mu", CV_INT(model.mu)},
        {"weights", [](RunConfig& c, const std::string& f, const std::string& r) {
           c.model.weights = parse_list(f, r);
         }},
        {"kappa_m", CV_REAL(model.kappa_m)},
        {"kappa_sigma", CV_REAL(model.kappa_sigma)}}},
      {"toy", {{"kind", CV_STR(model.toy)}, {"scale", CV_REAL(model.toy_scale)}}},
      {"analysis",
       {{"x_star", CV_VEC(analysis.x_star)},
        {"epsilon", CV_REAL(analysis.epsilon)},
        {"k_max", CV_INT(analysis.k_max)},
        {"first_length", CV_INT(analysis.first_length)},
        {"span", CV_INT(analysis.span)},
        {"rank_tol", CV_REAL(analysis.rank_tol)},
        {"rank_k_max", CV_INT(analysis.rank_k_max)},
        {"rank_attempts", CV_INT(analysis.rank_attempts)},
        {"origin_lo", CV_REAL(analysis.origin_lo)},
        {"origin_hi", CV_REAL(analysis.origin_hi)},
        {"origin_count", CV_INT(analysis.origin_count)},
        {"extra_origins", [](RunConfig& c, const std::string& f, const std::string& r) {
           c.analysis.extra_origins = parse_vectors(f, r);
         }},
        {"epsilon_return", CV_REAL(analysis.epsilon_return)},
        {"return_k_max", CV_INT(analysis.return_k_max)},
        {"fixed_point_tol", CV_REAL(analysis.fixed_point_tol)},
        {"empirical_return_steps", CV_INT(analysis.empirical_return_steps)}}},
      {"search",
       {{"restarts", CV_INT(search.restarts)},
        {"iterations", CV_INT(search.iterations)},
        {"shrink", CV_REAL(search.shrink)},
        {"initial_step", CV_REAL(search.initial_step)},
        {"use_hints", CV_BOOL(search.use_hints)}}},
      {"density",
       {{"states", [](RunConfig& c, const std::string& f, const std::string& r) {
           c.density.states = parse_vectors(f, r);
         }},
        {"samples", CV_INT(density.samples)},
        {"bins", CV_INT(density.bins)},
        {"lo", CV_REAL(density.lo)},
        {"hi", CV_REAL(density.hi)},
        {"threshold", CV_REAL(density.threshold)},
        {"marginal_samples", CV_INT(density.marginal_samples)}}},
      {"rate",
       {{"x0", CV_VEC(rate.x0)},
        {"sigma0", CV_REAL(rate.sigma0)},
        {"iterations", CV_INT(rate.iterations)},
        {"burn_in", CV_INT(rate.burn_in)},
        {"batches", CV_INT(rate.batches)},
        {"agreement_sigmas", CV_REAL(rate.agreement_sigmas)},
        {"trajectory_steps", CV_INT(rate.trajectory_steps)}}},
  };
  return s;
}

#undef CV_INT
#undef CV_REAL
#undef CV_STR
#undef CV_BOOL
#undef CV_VEC

void parse_path_section(const std::string& section, const pt::ptree& body, RunConfig& cfg) {
  PathQuery q;
  bool has_y = false;
  bool has_center = false;
  for (const auto& [key, node] : body) {
    const std::string field = section + "." + key;
    const std::string raw = node.get_value<std::string>();
    if (key == "y") {
      q.y = parse_vector(field, raw);
      has_y = true;
    } else if (key == "center") {
      q.center = parse_vector(field, raw);
      has_center = true;
    } else if (key == "radius") {
      q.radius = parse_real(field, raw);
    } else if (key == "k") {
      q.k = to_int(field, parse_int(field, raw));
    } else {
      throw ConfigError(field, "unknown key");
    }
  }
  if (!has_y) throw ConfigError(section + ".y", "missing");
  if (!has_center) throw ConfigError(section + ".center", "missing");
  cfg.paths.push_back(std::move(q));
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

}  // namespace

RunConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config", e.message() + " at line " + std::to_string(e.line()));
  }
  RunConfig cfg;
  bool has_seed = false;
  std::set<int> path_ids;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(section, "key outside of any section");
    }
    if (section.rfind("path.", 0) == 0) {
      const std::string id = section.substr(5);
      const int n = to_int(section, parse_int(section, id));
      require(path_ids.insert(n).second, section, "duplicate path section");
      parse_path_section(section, body, cfg);
      continue;
    }
    const auto sec = schema().find(section);
    if (sec == schema().end()) throw ConfigError(section, "unknown section");
    for (const auto& [key, node] : body) {
      const std::string field = section + "." + key;
      const auto setter = sec->second.find(key);
      if (setter == sec->second.end()) throw ConfigError(field, "unknown key");
      setter->second(cfg, field, node.get_value<std::string>());
      if (field == "run.seed") has_seed = true;
    }
  }
  if (!has_seed) throw ConfigError("run.seed", "a seed is required");
  validate_config(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  return parse_config(in);
}

void validate_config(const RunConfig& cfg) {
  const auto& m = cfg.model;
  require(m.kind == "random-walk" || m.kind == "selection-walk" || m.kind == "xnes" ||
              m.kind == "toy",
          "model.kind", "expected random-walk, selection-walk, xnes or toy");
  require(m.n >= 1, "model.n", "must be >= 1");
  if (m.kind == "selection-walk") require(m.n == 1, "model.n", "the selection walk is 1-D");
  if (m.kind == "selection-walk" || m.kind == "xnes") {
    try {
      (void)make_objective(m.objective, m.n);
    } catch (const InputError& e) {
      throw ConfigError("model.objective", e.what());
    }
    require(m.q_samples >= 1000, "model.q_samples", "must be >= 1000");
  }
  if (m.kind == "xnes") {
    require(m.lambda >= 2, "xnes.lambda", "must be >= 2");
    require(m.mu >= 1 && m.mu <= m.lambda, "xnes.mu", "must satisfy 1 <= mu <= lambda");
    if (!m.weights.empty()) {
      require(static_cast<int>(m.weights.size()) == m.mu, "xnes.weights", "need mu weights");
    }
    try {
      validate(xnes_params_from(cfg));
    } catch (const InputError& e) {
      throw ConfigError("xnes", e.what());
    }
  }
  if (m.kind == "toy") {
    require(m.toy == "control-ignoring" || m.toy == "period-two" || m.toy == "drift" ||
                m.toy == "flip",
            "toy.kind", "expected control-ignoring, period-two, drift or flip");
    if (m.toy != "control-ignoring") require(m.n == 1, "model.n", "this toy model is 1-D");
    require(m.toy_scale > 0.0, "toy.scale", "must be positive");
  }

  const int n = m.n;
  const auto& a = cfg.analysis;
  if (a.x_star) require(a.x_star->size() == n, "analysis.x_star", "dimension must equal model.n");
  require(a.epsilon > 0.0, "analysis.epsilon", "must be positive");
  require(a.k_max >= 1, "analysis.k_max", "must be >= 1");
  require(a.first_length >= 1, "analysis.first_length", "must be >= 1");
  require(a.span >= 1, "analysis.span", "must be >= 1");
  require(a.rank_tol > 0.0 && a.rank_tol < 1.0, "analysis.rank_tol", "must lie in (0, 1)");
  require(a.rank_k_max >= 1, "analysis.rank_k_max", "must be >= 1");
  require(a.rank_attempts >= 1, "analysis.rank_attempts", "must be >= 1");
  require(a.origin_hi > a.origin_lo, "analysis.origin_hi", "must exceed origin_lo");
  require(a.origin_count >= 0, "analysis.origin_count", "must be >= 0");
  require(n <= 25 || a.origin_count == 0, "analysis.origin_count", "Halton origins need n <= 25");
  require(a.origin_count + static_cast<int>(a.extra_origins.size()) >= 1,
          "analysis.origin_count", "need at least one origin");
  for (const auto& o : a.extra_origins) {
    require(o.size() == n, "analysis.extra_origins", "dimension must equal model.n");
  }
  require(!a.epsilon_return || *a.epsilon_return > 0.0, "analysis.epsilon_return", "must be positive");
  require(a.return_k_max >= 1, "analysis.return_k_max", "must be >= 1");
  require(a.fixed_point_tol >= 0.0, "analysis.fixed_point_tol", "must be >= 0");
  require(a.empirical_return_steps >= 0, "analysis.empirical_return_steps", "must be >= 0");

  const auto& s = cfg.search;
  require(s.restarts >= 1, "search.restarts", "must be >= 1");
  require(s.iterations >= 0, "search.iterations", "must be >= 0");
  require(s.shrink > 0.0 && s.shrink < 1.0, "search.shrink", "must lie in (0, 1)");
  require(s.initial_step > 0.0, "search.initial_step", "must be positive");

  const auto& d = cfg.density;
  for (const auto& z : d.states) require(z.size() == n, "density.states", "dimension must equal model.n");
  require(d.samples >= 10000, "density.samples", "must be >= 10000");
  require(d.bins >= 1, "density.bins", "must be >= 1");
  require(d.hi > d.lo, "density.hi", "must exceed density.lo");
  require(d.threshold > 0.0, "density.threshold", "must be positive");
  require(d.marginal_samples >= 1, "density.marginal_samples", "must be >= 1");

  const auto& r = cfg.rate;
  if (r.x0) require(r.x0->size() == n, "rate.x0", "dimension must equal model.n");
  require(r.sigma0 > 0.0, "rate.sigma0", "must be positive");
  require(r.iterations >= 2, "rate.iterations", "must be >= 2");
  require(r.burn_in >= -1 && r.burn_in < r.iterations, "rate.burn_in",
          "must be -1 (default) or in [0, iterations)");
  require(r.batches >= 2, "rate.batches", "must be >= 2");
  require(r.agreement_sigmas > 0.0, "rate.agreement_sigmas", "must be positive");
  require(r.trajectory_steps >= 0, "rate.trajectory_steps", "must be >= 0");

  for (std::size_t i = 0; i < cfg.paths.size(); ++i) {
    const auto& q = cfg.paths[i];
    const std::string sec = "path." + std::to_string(i);
    require(q.y.size() == n, sec + ".y", "dimension must equal model.n");
    require(q.center.size() == n, sec + ".center", "dimension must equal model.n");
    require(q.radius > 0.0, sec + ".radius", "must be positive");
    require(q.k >= 1, sec + ".k", "must be >= 1");
  }
}

std::uint64_t stream_seed(const RunConfig& cfg, SeedStream stream) {
  return derive_seed(cfg.seed, {static_cast<std::uint64_t>(stream)});
}

XnesParams xnes_params_from(const RunConfig& cfg) {
  const auto& m = cfg.model;
  XnesParams p = xnes_params(m.n, m.lambda, m.mu, make_objective(m.objective, m.n), m.kappa_m,
                             m.kappa_sigma);
  if (!m.weights.empty()) p.weights = m.weights;
  p.q_samples = m.q_samples;
  p.q_seed = m.q_seed.value_or(stream_seed(cfg, SeedStream::kQPool));
  return p;
}

ModelSpec build_model(const RunConfig& cfg) {
  const auto& m = cfg.model;
  if (m.kind == "random-walk") return make_random_walk(m.n);
  if (m.kind == "selection-walk") {
    SelectionWalkOptions opts;
    opts.q_samples = m.q_samples;
    opts.q_seed = m.q_seed.value_or(stream_seed(cfg, SeedStream::kQPool));
    return make_selection_walk(make_objective(m.objective, 1), opts);
  }
  if (m.kind == "xnes") return make_xnes_chain(xnes_params_from(cfg));
  if (m.toy == "control-ignoring") return make_control_ignoring(m.n);
  if (m.toy == "period-two") return make_period_two(m.toy_scale);
  if (m.toy == "drift") return make_drift();
  return make_flip();
}

SearchBudget search_budget(const RunConfig& cfg) {
  SearchBudget b;
  b.restarts = cfg.search.restarts;
  b.iterations = cfg.search.iterations;
  b.shrink = cfg.search.shrink;
  b.initial_step = cfg.search.initial_step;
  b.use_hints = cfg.search.use_hints;
  b.seed = stream_seed(cfg, SeedStream::kSearch);
  return b;
}

StateVector resolved_x_star(const RunConfig& cfg) {
  return cfg.analysis.x_star.value_or(StateVector::Zero(cfg.model.n));
}

}  // namespace chainverifier

namespace chainverifier {

double resolved_epsilon_return(const RunConfig& cfg) {
  return cfg.analysis.epsilon_return.value_or(cfg.analysis.epsilon / 10.0);
}

}  // namespace chainverifier
