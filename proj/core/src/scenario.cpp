#include "mtdiff/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mtdiff/error.hpp"

namespace mtdiff {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError(path + ": " + what);
}

std::string child(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string item(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void check_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) fail(child(path, key), "unknown field");
  }
}

const json& require(const json& obj, const std::string& path, const std::string& key) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(child(path, key), "missing required field");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

std::uint64_t unsigned_int(const json& v, const std::string& path) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    fail(path, "expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

std::size_t positive_int(const json& v, const std::string& path) {
  const std::uint64_t n = unsigned_int(v, path);
  if (n == 0) fail(path, "must be positive");
  return static_cast<std::size_t>(n);
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], item(path, i)));
  return out;
}

int cluster_key(const std::string& key, const std::string& path, const Graph& graph) {
  int label = 0;
  try {
    std::size_t used = 0;
    label = std::stoi(key, &used);
    if (used != key.size()) throw std::invalid_argument(key);
  } catch (const std::exception&) {
    fail(path, "cluster key '" + key + "' is not an integer");
  }
  const auto clusters = graph.distinct_clusters();
  if (!std::binary_search(clusters.begin(), clusters.end(), label)) {
    fail(path, "cluster " + key + " does not exist in the graph");
  }
  return label;
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

GraphBuild parse_graph(const json& g, const std::string& path, const std::filesystem::path& base_dir) {
  check_keys(g, path, {"file", "inline", "ring_with_hub", "random_geometric"});
  if (g.size() != 1) fail(path, "expected exactly one of file, inline, ring_with_hub, random_geometric");
  if (g.contains("file")) {
    std::filesystem::path file = text(g["file"], child(path, "file"));
    if (file.is_relative()) file = base_dir / file;
    try {
      return read_graph_file(file.string());
    } catch (const ValidationError& e) {
      fail(child(path, "file"), e.what());
    }
  }
  if (g.contains("inline")) {
    const std::string p = child(path, "inline");
    const json& in = g["inline"];
    check_keys(in, p, {"agents", "clusters", "edges"});
    EdgeListSpec spec;
    spec.agents = positive_int(require(in, p, "agents"), child(p, "agents"));
    const json& clusters = require(in, p, "clusters");
    if (!clusters.is_array()) fail(child(p, "clusters"), "expected an array of cluster labels");
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      if (!clusters[i].is_number_integer()) fail(item(child(p, "clusters"), i), "expected an integer");
      spec.clusters.push_back(clusters[i].get<int>());
    }
    const json& edges = require(in, p, "edges");
    if (!edges.is_array()) fail(child(p, "edges"), "expected an array of [k, l] pairs");
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const std::string ep = item(child(p, "edges"), i);
      if (!edges[i].is_array() || edges[i].size() != 2) fail(ep, "expected a [k, l] pair");
      const auto k = positive_int(edges[i][0], ep);
      const auto l = positive_int(edges[i][1], ep);
      spec.edges.emplace_back(k - 1, l - 1);
    }
    try {
      return build_graph(spec);
    } catch (const ValidationError& e) {
      fail(p, e.what());
    }
  }
  if (g.contains("ring_with_hub")) {
    const std::string p = child(path, "ring_with_hub");
    const json& in = g["ring_with_hub"];
    check_keys(in, p, {"ring_size", "hub_cluster", "ring_cluster", "ring_edges"});
    RingWithHubSpec spec;
    spec.ring_size = positive_int(require(in, p, "ring_size"), child(p, "ring_size"));
    if (in.contains("hub_cluster")) spec.hub_cluster = static_cast<int>(positive_int(in["hub_cluster"], child(p, "hub_cluster")));
    if (in.contains("ring_cluster")) spec.ring_cluster = static_cast<int>(positive_int(in["ring_cluster"], child(p, "ring_cluster")));
    if (in.contains("ring_edges")) {
      if (!in["ring_edges"].is_boolean()) fail(child(p, "ring_edges"), "expected true or false");
      spec.ring_edges = in["ring_edges"].get<bool>();
    }
    try {
      return build_graph(spec);
    } catch (const ValidationError& e) {
      fail(p, e.what());
    }
  }
  const std::string p = child(path, "random_geometric");
  const json& in = g["random_geometric"];
  check_keys(in, p, {"agents", "radius", "seed", "clusters"});
  RandomGeometricSpec spec;
  spec.agents = positive_int(require(in, p, "agents"), child(p, "agents"));
  spec.radius = number(require(in, p, "radius"), child(p, "radius"));
  spec.seed = unsigned_int(require(in, p, "seed"), child(p, "seed"));
  if (in.contains("clusters")) {
    const std::string rule = text(in["clusters"], child(p, "clusters"));
    if (rule == "single") {
      spec.cluster_rule = GeometricClusterRule::single;
    } else if (rule == "halves") {
      spec.cluster_rule = GeometricClusterRule::halves;
    } else {
      fail(child(p, "clusters"), "expected 'single' or 'halves'");
    }
  }
  try {
    return build_graph(spec);
  } catch (const ValidationError& e) {
    fail(p, e.what());
  }
}

PmfFamily parse_family(const std::string& name, const json& v, const std::string& path) {
  check_keys(v, path, {"probs", "base", "shift", "floor"});
  PmfFamily f;
  f.name = name;
  if (v.contains("probs") == v.contains("base")) fail(path, "expected exactly one of probs or base");
  if (v.contains("probs")) {
    if (v.contains("shift")) fail(child(path, "shift"), "a fixed PMF takes no shift");
    f.base = numbers(v["probs"], child(path, "probs"));
    f.shift.assign(f.base.size(), 0.0);
  } else {
    f.base = numbers(v["base"], child(path, "base"));
    f.shift = v.contains("shift") ? numbers(v["shift"], child(path, "shift")) : std::vector<double>(f.base.size(), 0.0);
    if (f.shift.size() != f.base.size()) fail(child(path, "shift"), "length differs from base");
    const double s = std::accumulate(f.shift.begin(), f.shift.end(), 0.0);
    if (std::abs(s) > 1e-9) fail(child(path, "shift"), "entries must sum to 0");
  }
  if (v.contains("floor")) {
    const double fl = number(v["floor"], child(path, "floor"));
    if (!(fl > 0.0 && fl * static_cast<double>(f.base.size()) < 1.0)) fail(child(path, "floor"), "must lie in (0, 1/M)");
    f.floor = fl;
  }
  const std::string entries = v.contains("probs") ? child(path, "probs") : child(path, "base");
  if (f.base.size() < 2) fail(entries, "need at least 2 entries");
  for (std::size_t a = 0; a < f.base.size(); ++a) {
    if (!f.floor && !(f.base[a] > 0.0)) fail(item(entries, a), "entry is not strictly positive");
  }
  const double sum = std::accumulate(f.base.begin(), f.base.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg.precision(9);
    msg << "entries sum to " << sum << ", not 1";
    fail(entries, msg.str());
  }
  return f;
}

void check_family_at(const PmfFamily& f, double alpha, const std::string& path) {
  if (f.floor) return;
  for (std::size_t a = 0; a < f.base.size(); ++a) {
    const double p = f.base[a] + alpha * f.shift[a];
    if (!(p > 0.0)) {
      std::ostringstream msg;
      msg.precision(9);
      msg << "entry " << a + 1 << " = " << p << " is not strictly positive at alpha = " << alpha;
      fail(path, msg.str());
    }
  }
}

const std::string& family_name(const ScenarioSpec& spec, const json& v, const std::string& path) {
  const std::string name = text(v, path);
  const auto it = spec.pmfs.find(name);
  if (it == spec.pmfs.end()) fail(path, "unknown PMF '" + name + "'");
  return it->first;
}

void parse_engine(ScenarioSpec& spec, const json& e, const std::string& path) {
  check_keys(e, path, {"mu", "self_weight", "self_weights", "rule", "delta", "gamma"});
  EngineConfig& c = spec.engine;
  if (e.contains("mu")) c.mu = number(e["mu"], child(path, "mu"));
  if (e.contains("self_weight") && e.contains("self_weights")) fail(path, "give self_weight or self_weights, not both");
  if (e.contains("self_weight")) {
    c.self_weights.assign(spec.graph.size(), number(e["self_weight"], child(path, "self_weight")));
  }
  if (e.contains("self_weights")) c.self_weights = numbers(e["self_weights"], child(path, "self_weights"));
  if (e.contains("rule")) {
    const std::string rule = text(e["rule"], child(path, "rule"));
    if (rule == "isolated") {
      c.rule = ClusteringRule::isolated;
    } else if (rule == "naive") {
      c.rule = ClusteringRule::naive;
    } else if (rule == "oracle") {
      c.rule = ClusteringRule::oracle;
    } else if (rule == "none") {
      c.rule = ClusteringRule::none;
    } else {
      fail(child(path, "rule"), "expected isolated, naive, oracle or none");
    }
  }
  if (e.contains("delta")) {
    const json& d = e["delta"];
    if (d.is_string() && (d.get<std::string>() == "inf" || d.get<std::string>() == "infinity")) {
      c.delta = std::numeric_limits<double>::infinity();
    } else {
      c.delta = number(d, child(path, "delta"));
    }
  }
  if (e.contains("gamma")) c.gamma = number(e["gamma"], child(path, "gamma"));
  try {
    c.validate(spec.graph.size());
  } catch (const ValidationError& err) {
    fail(path, err.what());
  }
}

void parse_schedule(ScenarioSpec& spec, const json& s, const std::string& path) {
  if (spec.mode == Mode::informed) {
    if (!s.is_object()) fail(path, "expected an object keyed by cluster label");
    IaSchedule schedule;
    for (const auto& [key, segs] : s.items()) {
      const std::string cp = child(path, key);
      const int c = cluster_key(key, cp, spec.graph);
      if (!segs.is_array() || segs.empty()) fail(cp, "expected a nonempty array of segments");
      std::vector<Segment> out;
      std::size_t prev = 0;
      for (std::size_t i = 0; i < segs.size(); ++i) {
        const std::string sp = item(cp, i);
        check_keys(segs[i], sp, {"until", "hypothesis"});
        Segment seg;
        if (segs[i].contains("until")) {
          seg.until = positive_int(segs[i]["until"], child(sp, "until"));
        } else if (i + 1 != segs.size()) {
          fail(child(sp, "until"), "only the last segment may omit it");
        }
        if (seg.until <= prev) fail(child(sp, "until"), "segments must end at increasing steps");
        prev = seg.until;
        const std::size_t h = positive_int(require(segs[i], sp, "hypothesis"), child(sp, "hypothesis"));
        if (h > spec.hypotheses.size()) fail(child(sp, "hypothesis"), "no hypothesis " + std::to_string(h));
        seg.value = h - 1;
        out.push_back(seg);
      }
      schedule.clusters[c] = std::move(out);
    }
    for (int c : spec.graph.distinct_clusters()) {
      if (!schedule.clusters.count(c)) fail(path, "cluster " + std::to_string(c) + " has no schedule");
    }
    spec.ia_schedule = std::move(schedule);
    return;
  }
  if (!s.is_array() || s.empty()) fail(path, "expected a nonempty array of epochs");
  std::size_t prev = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::string ep = item(path, i);
    check_keys(s[i], ep, {"until", "state", "alternatives"});
    PiaEpochSpec epoch;
    if (s[i].contains("until")) {
      epoch.until = positive_int(s[i]["until"], child(ep, "until"));
    } else if (i + 1 != s.size()) {
      fail(child(ep, "until"), "only the last epoch may omit it");
    }
    if (epoch.until <= prev) fail(child(ep, "until"), "epochs must end at increasing steps");
    prev = epoch.until;
    const std::string state = text(require(s[i], ep, "state"), child(ep, "state"));
    if (state == "H1") {
      const std::string ap = child(ep, "alternatives");
      const json& alts = require(s[i], ep, "alternatives");
      if (!alts.is_object()) fail(ap, "expected an object keyed by cluster label");
      for (const auto& [key, name] : alts.items()) {
        epoch.alternatives[cluster_key(key, child(ap, key), spec.graph)] = family_name(spec, name, child(ap, key));
      }
      for (int c : spec.graph.distinct_clusters()) {
        if (!epoch.alternatives.count(c)) fail(ap, "cluster " + std::to_string(c) + " has no alternative");
      }
    } else if (state == "H0") {
      if (s[i].contains("alternatives")) fail(child(ep, "alternatives"), "an H0 epoch takes no alternatives");
    } else {
      fail(child(ep, "state"), "expected H0 or H1");
    }
    spec.pia_schedule.push_back(std::move(epoch));
  }
}

void parse_steady_state(ScenarioSpec& spec, const json& s, const std::string& path) {
  if (!s.is_object()) fail(path, "expected an object keyed by cluster label");
  for (const auto& [key, v] : s.items()) {
    const std::string cp = child(path, key);
    const int c = cluster_key(key, cp, spec.graph);
    if (spec.mode == Mode::informed) {
      const std::size_t h = positive_int(v, cp);
      if (h > spec.hypotheses.size()) fail(cp, "no hypothesis " + std::to_string(h));
      spec.steady_hypothesis[c] = h - 1;
    } else {
      spec.steady_alternative[c] = family_name(spec, v, cp);
    }
  }
  for (int c : spec.graph.distinct_clusters()) {
    const bool has = spec.mode == Mode::informed ? spec.steady_hypothesis.count(c) > 0
                                                 : spec.steady_alternative.count(c) > 0;
    if (!has) fail(path, "cluster " + std::to_string(c) + " is missing");
  }
}

void parse_experiment(ScenarioSpec& spec, const json& e, const std::string& path) {
  check_keys(e, path, {"horizon", "runs", "calibration_runs", "type2_runs", "type1_target", "alphas", "agents"});
  ExperimentDefaults& d = spec.experiment;
  if (e.contains("horizon")) d.horizon = positive_int(e["horizon"], child(path, "horizon"));
  if (e.contains("runs")) d.runs = positive_int(e["runs"], child(path, "runs"));
  if (e.contains("calibration_runs")) d.calibration_runs = positive_int(e["calibration_runs"], child(path, "calibration_runs"));
  if (e.contains("type2_runs")) d.type2_runs = positive_int(e["type2_runs"], child(path, "type2_runs"));
  if (e.contains("type1_target")) {
    d.type1_target = number(e["type1_target"], child(path, "type1_target"));
    if (!(d.type1_target > 0.0 && d.type1_target < 1.0)) fail(child(path, "type1_target"), "must lie in (0, 1)");
  }
  if (e.contains("alphas")) {
    d.alphas = numbers(e["alphas"], child(path, "alphas"));
    for (std::size_t i = 0; i < d.alphas.size(); ++i) {
      if (d.alphas[i] < spec.alpha_min || d.alphas[i] > spec.alpha_max) {
        fail(item(child(path, "alphas"), i), "outside the declared alpha_range");
      }
    }
  }
  if (e.contains("agents")) {
    const json& a = e["agents"];
    const std::string ap = child(path, "agents");
    if (a.is_string() && a.get<std::string>() == "all") {
      d.agents.clear();
    } else if (a.is_array()) {
      for (std::size_t i = 0; i < a.size(); ++i) {
        const std::size_t k = positive_int(a[i], item(ap, i));
        if (k > spec.graph.size()) fail(item(ap, i), "no agent " + std::to_string(k));
        d.agents.push_back(k - 1);
      }
    } else {
      fail(ap, "expected an array of agent ids or \"all\"");
    }
  }
}

}  // namespace

Pmf PmfFamily::at(double alpha) const {
  std::vector<double> p(base.size());
  for (std::size_t a = 0; a < p.size(); ++a) p[a] = base[a] + alpha * shift[a];
  if (floor) {
    for (double& x : p) x = std::max(x, *floor);
    const double sum = std::accumulate(p.begin(), p.end(), 0.0);
    for (double& x : p) x /= sum;
  }
  try {
    return Pmf(std::move(p));
  } catch (const ValidationError& e) {
    throw ValidationError("PMF '" + name + "' at alpha = " + std::to_string(alpha) + ": " + e.what());
  }
}

bool PmfFamily::depends_on_alpha() const {
  return std::any_of(shift.begin(), shift.end(), [](double s) { return s != 0.0; });
}

const PmfFamily& ScenarioSpec::family(const std::string& n) const {
  const auto it = pmfs.find(n);
  if (it == pmfs.end()) throw ValidationError("unknown PMF '" + n + "'");
  return it->second;
}

void ScenarioSpec::check_alpha(double alpha) const {
  if (!(alpha >= alpha_min && alpha <= alpha_max)) {
    throw ValidationError("alpha = " + std::to_string(alpha) + " is outside the declared range [" +
                          std::to_string(alpha_min) + ", " + std::to_string(alpha_max) + "]");
  }
}

std::vector<Pmf> ScenarioSpec::hypotheses_at(double alpha) const {
  check_alpha(alpha);
  std::vector<Pmf> out;
  for (const std::string& h : hypotheses) out.push_back(family(h).at(alpha));
  return out;
}

Pmf ScenarioSpec::null_at() const { return family(null_pmf).at(0.0); }

std::size_t ScenarioSpec::true_hypothesis(AgentId k) const {
  const auto it = steady_hypothesis.find(graph.cluster(k));
  if (it == steady_hypothesis.end()) throw ValidationError("scenario '" + name + "' has no steady_state block");
  return it->second;
}

Pmf ScenarioSpec::alternative_for(AgentId k, double alpha) const {
  check_alpha(alpha);
  const auto it = steady_alternative.find(graph.cluster(k));
  if (it == steady_alternative.end()) throw ValidationError("scenario '" + name + "' has no steady_state block");
  return family(it->second).at(alpha);
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ScenarioSpec parse_scenario(std::string_view source, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(source.begin(), source.end());
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(source, e.byte == 0 ? 0 : e.byte - 1);
    throw ValidationError("line " + std::to_string(line) + ", column " + std::to_string(column) +
                          ": malformed JSON");
  }
  check_keys(doc, "", {"name", "description", "mode", "graph", "pmfs", "hypotheses", "null", "alpha_range",
                       "engine", "schedule", "steady_state", "experiment", "seed"});

  GraphBuild built = parse_graph(require(doc, "", "graph"), "graph", base_dir);
  ScenarioSpec spec(std::move(built.graph));
  spec.warnings = std::move(built.warnings);
  spec.hash = fnv1a(source);
  spec.name = text(require(doc, "", "name"), "name");
  if (doc.contains("description")) spec.description = text(doc["description"], "description");

  const std::string mode = text(require(doc, "", "mode"), "mode");
  if (mode == "IA") {
    spec.mode = Mode::informed;
  } else if (mode == "PIA") {
    spec.mode = Mode::partially_informed;
  } else {
    fail("mode", "expected IA or PIA");
  }
  spec.engine.mode = spec.mode;

  const json& pmfs = require(doc, "", "pmfs");
  if (!pmfs.is_object() || pmfs.empty()) fail("pmfs", "expected a nonempty object of named PMFs");
  for (const auto& [name, v] : pmfs.items()) spec.pmfs.emplace(name, parse_family(name, v, child("pmfs", name)));
  const std::size_t m = spec.pmfs.begin()->second.base.size();
  for (const auto& [name, f] : spec.pmfs) {
    if (f.base.size() != m) fail(child("pmfs", name), "alphabet size differs from the other PMFs");
  }

  if (doc.contains("alpha_range")) {
    const auto r = numbers(doc["alpha_range"], "alpha_range");
    if (r.size() != 2 || !(r[0] >= 0.0) || !(r[1] >= r[0])) fail("alpha_range", "expected [min, max] with 0 <= min <= max");
    spec.alpha_min = r[0];
    spec.alpha_max = r[1];
  }
  for (const auto& [name, f] : spec.pmfs) {
    check_family_at(f, spec.alpha_min, child("pmfs", name));
    check_family_at(f, spec.alpha_max, child("pmfs", name));
  }

  if (spec.mode == Mode::informed) {
    if (doc.contains("null")) fail("null", "only partially-informed scenarios declare a null PMF");
    const json& hyps = require(doc, "", "hypotheses");
    if (!hyps.is_array() || hyps.size() < 2) fail("hypotheses", "expected at least two PMF names");
    for (std::size_t i = 0; i < hyps.size(); ++i) spec.hypotheses.push_back(family_name(spec, hyps[i], item("hypotheses", i)));
  } else {
    if (doc.contains("hypotheses")) fail("hypotheses", "only informed scenarios declare hypotheses");
    spec.null_pmf = family_name(spec, require(doc, "", "null"), "null");
    if (spec.family(spec.null_pmf).depends_on_alpha()) fail("null", "the null PMF must not depend on alpha");
  }

  if (doc.contains("engine")) parse_engine(spec, doc["engine"], "engine");
  spec.engine.mode = spec.mode;
  if (doc.contains("schedule")) parse_schedule(spec, doc["schedule"], "schedule");
  if (doc.contains("steady_state")) parse_steady_state(spec, doc["steady_state"], "steady_state");
  if (!doc.contains("schedule") && !doc.contains("steady_state")) {
    fail("steady_state", "a scenario needs a schedule or a steady_state block");
  }
  if (doc.contains("experiment")) parse_experiment(spec, doc["experiment"], "experiment");
  if (doc.contains("seed")) spec.seed = unsigned_int(doc["seed"], "seed");
  return spec;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario(buf.str(), path.parent_path());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

IaProblem steady_ia_problem(const ScenarioSpec& spec, double alpha) {
  if (spec.mode != Mode::informed) throw ValidationError("scenario '" + spec.name + "' is not informed-agent");
  if (spec.steady_hypothesis.empty()) throw ValidationError("scenario '" + spec.name + "' has no steady_state block");
  IaSchedule schedule;
  for (const auto& [c, h] : spec.steady_hypothesis) schedule.clusters[c] = {Segment{kForever, h}};
  return IaProblem{spec.graph, spec.hypotheses_at(alpha), std::move(schedule), spec.engine};
}

IaProblem ia_problem(const ScenarioSpec& spec, double alpha) {
  if (!spec.ia_schedule) return steady_ia_problem(spec, alpha);
  if (spec.mode != Mode::informed) throw ValidationError("scenario '" + spec.name + "' is not informed-agent");
  return IaProblem{spec.graph, spec.hypotheses_at(alpha), *spec.ia_schedule, spec.engine};
}

PiaProblem null_pia_problem(const ScenarioSpec& spec) {
  if (spec.mode != Mode::partially_informed) {
    throw ValidationError("scenario '" + spec.name + "' is not partially-informed");
  }
  return PiaProblem{spec.graph, spec.null_at(), PiaSchedule{{PiaEpoch{kForever, false, {}}}}, spec.engine};
}

PiaProblem alternative_pia_problem(const ScenarioSpec& spec, double alpha) {
  PiaProblem p = null_pia_problem(spec);
  if (spec.steady_alternative.empty()) throw ValidationError("scenario '" + spec.name + "' has no steady_state block");
  spec.check_alpha(alpha);
  PiaEpoch epoch{kForever, true, {}};
  for (const auto& [c, name] : spec.steady_alternative) epoch.alternatives.emplace(c, spec.family(name).at(alpha));
  p.schedule.epochs = {std::move(epoch)};
  return p;
}

PiaProblem pia_problem(const ScenarioSpec& spec, double alpha) {
  if (spec.pia_schedule.empty()) return alternative_pia_problem(spec, alpha);
  PiaProblem p = null_pia_problem(spec);
  spec.check_alpha(alpha);
  p.schedule.epochs.clear();
  for (const PiaEpochSpec& e : spec.pia_schedule) {
    PiaEpoch epoch{e.until, !e.alternatives.empty(), {}};
    for (const auto& [c, name] : e.alternatives) epoch.alternatives.emplace(c, spec.family(name).at(alpha));
    p.schedule.epochs.push_back(std::move(epoch));
  }
  return p;
}

}  // namespace mtdiff
