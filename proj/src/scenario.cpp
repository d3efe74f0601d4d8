#include "piconsensus/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "piconsensus/errors.hpp"

namespace piconsensus {

namespace {

using nlohmann::json;

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += "\n";
    out += s;
  }
  return out;
}

std::string label(const char* what, std::size_t i) { return std::string(what) + "_" + std::to_string(i + 1); }

// Collects issues while reading an untrusted document.
class Reader {
 public:
  std::vector<std::string> issues;

  const json* field(const json& obj, const char* key, const std::string& where, bool required = true) {
    if (!obj.is_object()) {
      issues.push_back(where + ": expected an object");
      return nullptr;
    }
    const auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) issues.push_back(where + ": missing field '" + key + "'");
      return nullptr;
    }
    return &*it;
  }

  bool number(const json* j, const std::string& where, double& out) {
    if (!j) return false;
    if (!j->is_number()) {
      issues.push_back(where + ": expected a number");
      return false;
    }
    out = j->get<double>();
    return true;
  }

  bool integer(const json* j, const std::string& where, long long& out) {
    if (!j) return false;
    if (!j->is_number_integer()) {
      issues.push_back(where + ": expected an integer");
      return false;
    }
    out = j->get<long long>();
    return true;
  }

  bool vector(const json* j, const std::string& where, Eigen::VectorXd& out) {
    if (!j) return false;
    if (!j->is_array()) {
      issues.push_back(where + ": expected an array of numbers");
      return false;
    }
    out.resize(static_cast<Eigen::Index>(j->size()));
    for (std::size_t k = 0; k < j->size(); ++k) {
      if (!(*j)[k].is_number()) {
        issues.push_back(where + "[" + std::to_string(k) + "]: expected a number");
        return false;
      }
      out(static_cast<Eigen::Index>(k)) = (*j)[k].get<double>();
    }
    return true;
  }
};

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json vector_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) arr.push_back(v(k));
  return arr;
}

// Reads the graph section. Returns false (with issues recorded) on failure.
bool read_graph(Reader& r, const json& doc, DirectedGraph& out) {
  if (const json* g = r.field(doc, "graph", "document")) {
    long long n = 0;
    const bool have_n = r.integer(r.field(*g, "n", "graph"), "graph.n", n);
    std::vector<Edge> edges;
    bool edges_ok = true;
    if (const json* es = r.field(*g, "edges", "graph")) {
      if (!es->is_array()) {
        r.issues.push_back("graph.edges: expected an array");
        edges_ok = false;
      } else {
        for (std::size_t k = 0; k < es->size(); ++k) {
          const std::string where = "graph.edges[" + std::to_string(k) + "]";
          long long from = 0, to = 0;
          double weight = 0.0;
          bool ok = r.integer(r.field((*es)[k], "from", where), where + ".from", from);
          ok = r.integer(r.field((*es)[k], "to", where), where + ".to", to) && ok;
          ok = r.number(r.field((*es)[k], "weight", where), where + ".weight", weight) && ok;
          if (ok && (from < 1 || to < 1)) {
            r.issues.push_back(where + ": node labels start at 1");
            ok = false;
          }
          if (!ok) {
            edges_ok = false;
            continue;
          }
          edges.push_back({static_cast<std::size_t>(from), static_cast<std::size_t>(to), weight});
        }
      }
    } else {
      edges_ok = false;
    }
    if (have_n && n < 2) r.issues.push_back("graph.n: at least 2 agents are required");
    if (have_n && n >= 2 && edges_ok) {
      try {
        out = build_graph(static_cast<std::size_t>(n), edges);
        return true;
      } catch (const GraphError& e) {
        r.issues.push_back(std::string("graph: ") + e.what());
      }
    }
  }
  return false;
}

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> issues)
    : Error("invalid scenario:\n" + join(issues)), issues_(std::move(issues)) {}

std::vector<std::string> regressor_variables(int order) {
  if (order == 2) return {"x", "v"};
  return {"x"};
}

std::vector<Regressor> Scenario::regressors() const {
  std::vector<Regressor> out;
  out.reserve(agents.size());
  for (const auto& a : agents) out.push_back(a.phi);
  return out;
}

std::vector<std::string> Scenario::problems() const {
  std::vector<std::string> p;
  const std::size_t n = graph.size();
  if (order != 1 && order != 2) p.push_back("order must be 1 or 2");
  if (n < 2) {
    p.push_back("at least 2 agents are required");
  } else if (!is_strongly_connected(graph)) {
    p.push_back("graph: topology must be strongly connected");
  }
  if (agents.size() != n) {
    p.push_back("agents: " + std::to_string(agents.size()) + " entries but graph has " +
                std::to_string(n) + " nodes");
  }
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto& a = agents[i];
    if (!std::isfinite(a.b)) p.push_back(label("b", i) + " must be finite");
    if (a.b == 0.0) {
      p.push_back(label("b", i) + " = 0: high-frequency gains must be nonzero");
    }
    if (static_cast<std::size_t>(a.theta.size()) != a.phi.size()) {
      p.push_back(label("agent", i) + ": theta has " + std::to_string(a.theta.size()) +
                  " entries but phi has " + std::to_string(a.phi.size()));
    }
    if (!a.theta.allFinite()) p.push_back(label("theta", i) + " must be finite");
    const auto vars = regressor_variables(order);
    for (const auto& c : a.phi.components()) {
      if (c.variables().size() > vars.size() ||
          !std::equal(c.variables().begin(), c.variables().end(), vars.begin())) {
        p.push_back(label("phi", i) + ": '" + c.source() +
                    "' was parsed for a different agent order");
      }
    }
  }
  if (static_cast<std::size_t>(x0.size()) != n) {
    p.push_back("x0: " + std::to_string(x0.size()) + " entries, expected " + std::to_string(n));
  } else if (!x0.allFinite()) {
    p.push_back("x0 must be finite");
  }
  if (order == 2) {
    if (static_cast<std::size_t>(v0.size()) != n) {
      p.push_back("v0: " + std::to_string(v0.size()) + " entries, expected " + std::to_string(n));
    } else if (!v0.allFinite()) {
      p.push_back("v0 must be finite");
    }
  }
  try {
    gains.validate(n, order);
  } catch (const InvalidArgument& e) {
    p.push_back(std::string("gains: ") + e.what());
  }
  if (xbar_policy == XbarPolicy::Initial && gains.xbar.size() == x0.size() && gains.xbar != x0) {
    p.push_back("gains: xbar policy 'initial' requires xbar == x0");
  }
  if (!(std::isfinite(sim.dt) && sim.dt > 0.0)) p.push_back("sim.dt must be positive");
  if (!(std::isfinite(sim.horizon) && sim.horizon > 0.0)) p.push_back("sim.horizon must be positive");
  if (sim.decimation < 1) p.push_back("sim.decimation must be at least 1");
  if (p.empty() && sim.horizon < sim.dt) p.push_back("sim.horizon must be at least one step");
  return p;
}

void Scenario::validate() const {
  auto p = problems();
  if (!p.empty()) throw ScenarioError(std::move(p));
}

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ScenarioError({"line " + std::to_string(line) + ", column " + std::to_string(col) +
                         ": " + e.what()});
  }

  Reader r;
  Scenario s;
  if (!doc.is_object()) throw ScenarioError({"document: expected an object"});

  if (const json* name = r.field(doc, "name", "document", false)) {
    if (name->is_string()) {
      s.name = name->get<std::string>();
    } else {
      r.issues.push_back("name: expected a string");
    }
  }

  long long order = 1;
  if (r.integer(r.field(doc, "order", "document"), "order", order)) {
    if (order != 1 && order != 2) r.issues.push_back("order: must be 1 or 2");
  }
  s.order = static_cast<int>(order);

  bool graph_ok = read_graph(r, doc, s.graph);
  if (graph_ok && !is_strongly_connected(s.graph)) {
    r.issues.push_back("graph: topology must be strongly connected");
  }
  const std::size_t n = s.graph.size();

  // agents
  const auto vars = regressor_variables(s.order);
  if (const json* agents = r.field(doc, "agents", "document")) {
    if (!agents->is_array()) {
      r.issues.push_back("agents: expected an array");
    } else {
      if (graph_ok && agents->size() != n) {
        r.issues.push_back("agents: " + std::to_string(agents->size()) +
                           " entries but graph has " + std::to_string(n) + " nodes");
      }
      for (std::size_t i = 0; i < agents->size(); ++i) {
        const json& a = (*agents)[i];
        const std::string where = label("agent", i);
        AgentParams p;
        if (r.number(r.field(a, "b", where), where + ".b", p.b) && p.b == 0.0) {
          r.issues.push_back(label("b", i) + " = 0: high-frequency gains must be nonzero");
        }
        r.vector(r.field(a, "theta", where), where + ".theta", p.theta);
        std::vector<Expr> comps;
        if (const json* phi = r.field(a, "phi", where)) {
          if (!phi->is_array()) {
            r.issues.push_back(where + ".phi: expected an array of strings");
          } else {
            for (std::size_t k = 0; k < phi->size(); ++k) {
              const std::string pw = where + ".phi[" + std::to_string(k) + "]";
              if (!(*phi)[k].is_string()) {
                r.issues.push_back(pw + ": expected a string");
                continue;
              }
              const auto src = (*phi)[k].get<std::string>();
              try {
                comps.push_back(Expr::parse(src, vars));
              } catch (const ExprError& e) {
                std::string msg = pw + ": " + e.what();
                if (e.position() != ExprError::npos) msg += " (offset " + std::to_string(e.position()) + ")";
                r.issues.push_back(msg);
              }
            }
            if (static_cast<Eigen::Index>(phi->size()) != p.theta.size()) {
              r.issues.push_back(where + ": theta has " + std::to_string(p.theta.size()) +
                                 " entries but phi has " + std::to_string(phi->size()));
            }
          }
        }
        p.phi = Regressor(std::move(comps));
        s.agents.push_back(std::move(p));
      }
    }
  }

  r.vector(r.field(doc, "x0", "document"), "x0", s.x0);
  if (graph_ok && s.x0.size() > 0 && static_cast<std::size_t>(s.x0.size()) != n) {
    r.issues.push_back("x0: " + std::to_string(s.x0.size()) + " entries, expected " + std::to_string(n));
  }
  if (s.order == 2) {
    if (r.vector(r.field(doc, "v0", "document"), "v0", s.v0) && graph_ok &&
        static_cast<std::size_t>(s.v0.size()) != n) {
      r.issues.push_back("v0: " + std::to_string(s.v0.size()) + " entries, expected " + std::to_string(n));
    }
  }

  // gains
  if (const json* g = r.field(doc, "gains", "document")) {
    r.number(r.field(*g, "rho", "gains"), "gains.rho", s.gains.rho);
    r.number(r.field(*g, "nu", "gains"), "gains.nu", s.gains.nu);
    double lambda = 0.0;
    if (r.number(r.field(*g, "lambda", "gains", s.order == 2), "gains.lambda", lambda)) {
      s.gains.lambda = lambda;
    }
    if (const json* gamma = r.field(*g, "gamma", "gains")) {
      if (gamma->is_number()) {
        s.gains.gamma.assign(n, gamma->get<double>());
      } else {
        Eigen::VectorXd gv;
        if (r.vector(gamma, "gains.gamma", gv)) s.gains.gamma.assign(gv.begin(), gv.end());
      }
    }
    if (const json* xbar = r.field(*g, "xbar", "gains")) {
      if (xbar->is_string()) {
        if (xbar->get<std::string>() == "initial") {
          s.xbar_policy = XbarPolicy::Initial;
          s.gains.xbar = s.x0;
        } else {
          r.issues.push_back("gains.xbar: expected an array or \"initial\"");
        }
      } else {
        r.vector(xbar, "gains.xbar", s.gains.xbar);
      }
    }
  }

  if (const json* sim = r.field(doc, "sim", "document")) {
    r.number(r.field(*sim, "dt", "sim", false), "sim.dt", s.sim.dt);
    r.number(r.field(*sim, "horizon", "sim"), "sim.horizon", s.sim.horizon);
    long long dec = s.sim.decimation;
    if (r.integer(r.field(*sim, "decimation", "sim", false), "sim.decimation", dec)) {
      s.sim.decimation = static_cast<int>(dec);
    }
  }

  if (const json* nf = r.field(doc, "nussbaum", "document", false)) {
    if (!nf->is_string()) {
      r.issues.push_back("nussbaum: expected a string");
    } else {
      try {
        s.nussbaum = NussbaumFunction::from_name(nf->get<std::string>());
      } catch (const InvalidArgument& e) {
        r.issues.push_back(std::string("nussbaum: ") + e.what());
      }
    }
  }

  if (!r.issues.empty()) throw ScenarioError(std::move(r.issues));
  s.validate();
  return s;
}

DirectedGraph parse_scenario_graph(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ScenarioError({"line " + std::to_string(line) + ", column " + std::to_string(col) +
                         ": " + e.what()});
  }
  Reader r;
  DirectedGraph g;
  if (!read_graph(r, doc, g)) throw ScenarioError(std::move(r.issues));
  return g;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scenario file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("cannot read scenario file '" + path.string() + "'");
  return buf.str();
}

}  // namespace

DirectedGraph load_scenario_graph(const std::filesystem::path& path) {
  return parse_scenario_graph(read_file(path));
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_file(path));
}

std::string dump_scenario(const Scenario& s) {
  nlohmann::ordered_json doc;
  doc["name"] = s.name;
  doc["order"] = s.order;
  auto edges = nlohmann::ordered_json::array();
  for (const Edge& e : s.graph.edges()) {
    edges.push_back({{"from", e.source}, {"to", e.target}, {"weight", e.weight}});
  }
  doc["graph"] = {{"n", s.graph.size()}, {"edges", edges}};
  auto agents = nlohmann::ordered_json::array();
  for (const auto& a : s.agents) {
    nlohmann::ordered_json phi = nlohmann::ordered_json::array();
    for (const auto& c : a.phi.components()) phi.push_back(c.source());
    agents.push_back({{"b", a.b}, {"theta", vector_json(a.theta)}, {"phi", phi}});
  }
  doc["agents"] = agents;
  nlohmann::ordered_json gains;
  gains["rho"] = s.gains.rho;
  gains["nu"] = s.gains.nu;
  if (s.gains.lambda) gains["lambda"] = *s.gains.lambda;
  gains["gamma"] = s.gains.gamma;
  if (s.xbar_policy == XbarPolicy::Initial) {
    gains["xbar"] = "initial";
  } else {
    gains["xbar"] = vector_json(s.gains.xbar);
  }
  doc["gains"] = gains;
  doc["x0"] = vector_json(s.x0);
  if (s.order == 2) doc["v0"] = vector_json(s.v0);
  doc["sim"] = {{"dt", s.sim.dt}, {"horizon", s.sim.horizon}, {"decimation", s.sim.decimation}};
  doc["nussbaum"] = s.nussbaum.name();
  return doc.dump(2) + "\n";
}

}  // namespace piconsensus
