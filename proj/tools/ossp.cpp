// ossp: command-line front end for the OSSP toolkit.
//
// Subcommands: solve, check, prune, hjb, route, counterexample.  Every run
// writes a manifest next to its first output; value/policy artifacts are
// byte-deterministic for identical inputs.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ossp/causality.hpp"
#include "ossp/hjb.hpp"
#include "ossp/labelset.hpp"
#include "ossp/model.hpp"
#include "ossp/pruning.hpp"
#include "ossp/routing.hpp"
#include "ossp/solvers.hpp"

using json = nlohmann::json;
using namespace ossp;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt17(Real v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fnv1a(const std::string& bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError("cannot write " + path);
  out << bytes;
}

// Collects run metadata; written exactly once per invocation.
struct Manifest {
  std::string subcommand;
  json params = json::object();
  json inputs = json::object();
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  std::string path;  // resolved at write time when empty

  void input(const std::string& p) { inputs[p] = fnv1a(slurp(p)); }
  void output(const std::string& p) {
    if (!p.empty()) outputs.push_back(p);
  }
  void write() {
    if (path.empty())
      path = outputs.empty() ? "ossp-manifest.json" : outputs.front() + ".manifest.json";
    json j{{"format", 1},
           {"subcommand", subcommand},
           {"version", kVersion},
           {"parameters", params},
           {"inputs", inputs},
           {"outputs", outputs},
           {"wall_ms",
            std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - t0)
                .count()}};
    spit(path, j.dump(2) + "\n");
  }
};

struct ExitWith {
  int code;
  std::string message;
};

Real resolve_delta(const std::string& spec, const OsspModel& m) {
  if (spec != "auto") return std::stod(spec);
  Real d = model_max_delta(m);
  if (is_inf(d)) throw ExitWith{3, "--delta auto: model has no parametric modes"};
  if (d <= 0)
    throw ExitWith{2, "--delta auto: Delta(X) = 0, Dial is not certified"};
  return d;
}

void write_values_csv(const std::string& path, const ValueFunction& u) {
  std::string out = "node,value\n";
  for (size_t i = 0; i < u.values.size(); ++i)
    out += std::to_string(i) + "," + fmt17(u.values[i]) + "\n";
  spit(path, out);
}

json policy_json(const Policy& pol) {
  json ch = json::array();
  for (const auto& c : pol.choices)
    ch.push_back({{"action", c.action}, {"p", c.p}, {"xi", c.xi}});
  return json{{"format", 1}, {"choices", ch}};
}

// ---------------------------------------------------------------- solve

int cmd_solve(const std::string& model_path, const std::string& method,
              const std::string& delta_spec, const std::string& values_path,
              const std::string& policy_path, const std::string& trace_path,
              Manifest& man) {
  man.input(model_path);
  auto m = load_model(model_path);
  ValueFunction u;
  Policy pol;
  SolveTrace trace;
  bool have_trace = false;
  if (method == "vi") {
    auto r = value_iteration(m);
    u = r.values;
    pol = r.policy;
  } else if (method == "gs") {
    auto [acyclic, order] = is_explicitly_causal(m);
    if (!acyclic) {
      order.resize(m.n);
      for (int i = 0; i < m.n; ++i) order[i] = i;
    }
    auto r = gauss_seidel_solve(m, order);
    u = r.values;
    pol = r.policy;
  } else if (method == "dijkstra") {
    auto r = dijkstra_solve(m);
    u = r.values;
    pol = r.policy;
    trace = r.trace;
    have_trace = true;
  } else if (method == "dial") {
    Real d = resolve_delta(delta_spec.empty() ? "auto" : delta_spec, m);
    man.params["delta_used"] = d;
    auto r = dial_solve(m, d);
    u = r.values;
    pol = r.policy;
    trace = r.trace;
    have_trace = true;
  }
  write_values_csv(values_path, u);
  man.output(values_path);
  if (!policy_path.empty()) {
    spit(policy_path, policy_json(pol).dump(2) + "\n");
    man.output(policy_path);
  }
  if (!trace_path.empty() && have_trace) {
    std::string out = "step,node,updates\n";
    for (size_t s = 0; s < trace.acceptance_order.size(); ++s) {
      int node = trace.acceptance_order[s];
      int upd = node < (int)trace.update_count.size() ? trace.update_count[node] : 0;
      out += std::to_string(s) + "," + std::to_string(node) + "," + std::to_string(upd) + "\n";
    }
    spit(trace_path, out);
    man.output(trace_path);
  }
  return 0;
}

// ---------------------------------------------------------------- check

int cmd_check(const std::string& model_path, const std::string& delta_spec,
              const std::string& criterion, const std::string& report_path,
              Manifest& man) {
  man.input(model_path);
  auto m = load_model(model_path);
  Real delta = delta_spec == "auto" ? 0 : std::stod(delta_spec);
  json jd;
  try {
    Real dmax = model_max_delta(m);
    jd = is_inf(dmax) ? json() : json(dmax);
    if (delta_spec == "auto") delta = is_inf(dmax) ? 0 : dmax;
  } catch (const NotMonotoneCausal&) {
    jd = nullptr;
  }
  auto rep = criterion == "simplified" ? check_mc_simplified(m, delta)
                                       : check_mc_improved(m, delta);
  json viols = json::array();
  for (const auto& v : rep.violations)
    viols.push_back({{"node", v.node},
                     {"action", v.action},
                     {"r", v.r},
                     {"p", v.urgency_p},
                     {"gap", v.gap}});
  json j{{"format", 1},     {"criterion", criterion}, {"delta", delta},
         {"satisfied", rep.satisfied}, {"max_delta", jd}, {"violations", viols}};
  if (!report_path.empty()) {
    spit(report_path, j.dump(2) + "\n");
    man.output(report_path);
  }
  if (!rep.satisfied) {
    const auto& v = rep.violations.front();
    std::fprintf(stderr, "not %s-causal at delta=%s: node %d action %d (r=%d, gap %.3g)\n",
                 delta > 0 ? "delta" : "monotone", fmt17(delta).c_str(), v.node, v.action,
                 v.r, v.gap);
    return 2;
  }
  return 0;
}

// ---------------------------------------------------------------- prune

int cmd_prune(const std::string& model_path, const std::string& out_path,
              const std::string& report_path, Manifest& man) {
  man.input(model_path);
  auto m = load_model(model_path);
  PruneReport rep;
  auto pruned = prune_model(m, &rep);
  save_model(pruned, out_path);
  man.output(out_path);
  if (!report_path.empty()) {
    json rm = json::array();
    for (const auto& e : rep.removed) {
      const char* why = e.reason == PruneReason::Duplicate     ? "duplicate"
                        : e.reason == PruneReason::Dominated   ? "dominated"
                        : e.reason == PruneReason::Replaceable ? "replaceable"
                                                               : "useful";
      rm.push_back(
          {{"node", e.node}, {"action", e.action}, {"p", e.urgency_p}, {"reason", why}});
    }
    spit(report_path, json{{"format", 1}, {"removed", rm}}.dump(2) + "\n");
    man.output(report_path);
  }
  return 0;
}

// ---------------------------------------------------------------- hjb

SpeedProfile parse_profile(const std::string& spec, Manifest& man) {
  auto colon = spec.find(':');
  std::string kind = spec.substr(0, colon);
  std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  std::vector<Real> a;
  if (kind != "sampled") {
    std::stringstream ss(rest);
    std::string tok;
    while (std::getline(ss, tok, ',')) a.push_back(std::stod(tok));
  }
  if (kind == "iso" && a.size() == 1) return SpeedProfile::isotropic(a[0]);
  if (kind == "iso3" && a.size() == 1) return SpeedProfile::isotropic(a[0], 3);
  if (kind == "ellipse" && a.size() == 3) return SpeedProfile::ellipse(a[0], a[1], a[2]);
  if (kind == "ellipsoid" && a.size() == 3)
    return SpeedProfile::ellipsoid(a[0], a[1], a[2]);
  if (kind == "sampled") {
    man.input(rest);
    std::stringstream ss(slurp(rest));
    std::vector<std::pair<Real, Real>> table;
    Real ang, sp;
    while (ss >> ang >> sp) table.push_back({ang, sp});
    return SpeedProfile::sampled2d(table);
  }
  throw ExitWith{3, "bad --profile spec: " + spec};
}

int cmd_hjb(int nx, int ny, int nz, Real h, const std::string& profile_spec,
            const std::string& stencil_name, const std::string& target_spec, bool boundary,
            Real q, const std::string& method, const std::string& delta_spec, bool force,
            const std::string& out_path, const std::string& dirs_path, Manifest& man) {
  auto pr = parse_profile(profile_spec, man);
  Stencil st = stencil_name == "4pt"     ? Stencil::four_point()
               : stencil_name == "8pt"   ? Stencil::eight_point()
               : stencil_name == "6pt3d" ? Stencil::six_point_3d()
                                         : throw ExitWith{3, "bad --stencil"};
  Grid grid;
  grid.dim = stencil_name == "6pt3d" || pr.dim == 3 ? 3 : 2;
  grid.nx = nx;
  grid.ny = ny > 0 ? ny : nx;
  grid.nz = grid.dim == 3 ? (nz > 0 ? nz : nx) : 1;
  grid.h = h;
  if (boundary) {
    grid.boundary_exit = true;
    grid.q = q;
  } else {
    std::stringstream ss(target_spec);
    std::string tok;
    std::vector<Real> c;
    while (std::getline(ss, tok, ',')) c.push_back(std::stod(tok));
    if ((int)c.size() < grid.dim) throw ExitWith{3, "--target needs " +
                                                        std::to_string(grid.dim) + " coords"};
    int node = grid.nearest_node(c[0], c[1], grid.dim == 3 ? c[2] : 0.0);
    int i = node % grid.nx, j = (node / grid.nx) % grid.ny, k = node / (grid.nx * grid.ny);
    grid.point_targets.push_back({i, j, k});
  }

  HjbMethod hm = method == "vi"         ? HjbMethod::VI
                 : method == "dial"     ? HjbMethod::Dial
                 : method == "dijkstra" ? HjbMethod::Dijkstra
                                        : throw ExitWith{3, "bad --method"};
  Real delta = 0;
  if (hm == HjbMethod::Dial) {
    if (delta_spec == "auto" || delta_spec.empty()) {
      delta = stencil_max_delta(grid, st, pr);
      if (delta <= 0) throw ExitWith{2, "--delta auto: Delta(X) = 0 for this stencil"};
    } else {
      delta = std::stod(delta_spec);
    }
    man.params["delta_used"] = delta;
  }

  auto res = hjb_solve(grid, st, pr, hm, delta, force);

  bool d3 = grid.dim == 3;
  std::string out = d3 ? "i,j,k,x,y,z,value\n" : "i,j,x,y,value\n";
  std::string dirs = d3 ? "i,j,k,dx,dy,dz\n" : "i,j,dx,dy\n";
  for (int k = 0; k < (d3 ? grid.nz : 1); ++k)
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i) {
        int id = grid.index(i, j, k);
        out += std::to_string(i) + "," + std::to_string(j) + ",";
        if (d3) out += std::to_string(k) + ",";
        out += fmt17(i * h) + "," + fmt17(j * h) + ",";
        if (d3) out += fmt17(k * h) + ",";
        out += fmt17(res.values.values[id]) + "\n";
        const Vec3& d = res.direction[id];
        dirs += std::to_string(i) + "," + std::to_string(j) + ",";
        if (d3) dirs += std::to_string(k) + ",";
        dirs += fmt17(d.x()) + "," + fmt17(d.y());
        if (d3) dirs += "," + fmt17(d.z());
        dirs += "\n";
      }
  spit(out_path, out);
  man.output(out_path);
  if (!dirs_path.empty()) {
    spit(dirs_path, dirs);
    man.output(dirs_path);
  }
  return 0;
}

// ---------------------------------------------------------------- route

void route_outputs(const LaneNetwork& net, const std::string& out_path,
                   const std::string& plot_path, const std::string& dot_path,
                   const std::string& values_path, Manifest& man) {
  auto m = net.compile();
  auto issues = validate_model(m);
  if (!issues.hard_ok()) throw ExitWith{3, "built network fails validation"};
  auto stp = dijkstra_solve(m);
  auto cmp = compare_stp_sp(net);  // headline reductions skip the virtual block

  // optimal urgency per mode under the final values
  std::vector<Real> pstar(net.nodes.size(), -1);
  std::vector<int> swtch(net.nodes.size(), -1);
  for (const auto& md : net.modes) {
    auto [p, val] = minimize_urgency(
        md.curve, md.curve.smooth() ? std::vector<Real>{} : md.curve.support_points(),
        stp.values[md.stay], stp.values[md.swtch]);
    if (p > pstar[md.from]) {
      pstar[md.from] = p;
      swtch[md.from] = md.swtch;
    }
  }

  if (!out_path.empty()) {
    json jn = json::array();
    for (size_t i = 0; i < net.nodes.size(); ++i)
      jn.push_back({{"tag", net.nodes[i].tag},
                    {"lane", net.nodes[i].lane},
                    {"x", net.nodes[i].x},
                    {"segment", net.nodes[i].segment},
                    {"value", stp.values[(int)i]},
                    {"pstar", pstar[i]}});
    json j{{"format", 1},
           {"target", net.target},
           {"nodes", jn},
           {"policy", policy_json(stp.policy)},
           {"reduction",
            {{"median", cmp.median}, {"mean", cmp.mean}, {"max", cmp.max}}}};
    spit(out_path, j.dump(2) + "\n");
    man.output(out_path);
  }
  if (!plot_path.empty()) {
    std::string out = "node,tag,x,lane,value_stp,value_sp,pstar,arrow\n";
    for (size_t i = 0; i < net.nodes.size(); ++i) {
      bool sto = pstar[i] > 1e-12 && pstar[i] < 1 - 1e-12;
      out += std::to_string(i) + "," + net.nodes[i].tag + "," + fmt17(net.nodes[i].x) +
             "," + std::to_string(net.nodes[i].lane) + "," + fmt17(cmp.stp[(int)i]) +
             "," + fmt17(cmp.sp[(int)i]) + "," + fmt17(std::max<Real>(pstar[i], 0)) +
             "," + (sto ? "stochastic" : "deterministic") + "\n";
    }
    spit(plot_path, out);
    man.output(plot_path);
  }
  if (!dot_path.empty()) {
    std::string out = "digraph policy {\n  rankdir=LR;\n";
    for (const auto& a : net.arcs)
      out += "  \"" + net.nodes[a.from].tag + "\" -> \"" + net.nodes[a.to].tag +
             "\" [color=gray];\n";
    for (size_t i = 0; i < net.nodes.size(); ++i)
      if (pstar[i] > 1e-12)
        out += "  \"" + net.nodes[i].tag + "\" -> \"" + net.nodes[swtch[i]].tag +
               "\" [color=blue,label=\"" + fmt17(pstar[i]) + "\"];\n";
    out += "}\n";
    spit(dot_path, out);
    man.output(dot_path);
  }
  if (!values_path.empty()) {
    write_values_csv(values_path, stp.values);
    man.output(values_path);
  }
}

LsmFamily parse_lsm(const std::string& spec, HighwayConfig& cfg) {
  auto colon = spec.find(':');
  std::string kind = spec.substr(0, colon);
  std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "escalating") return LsmFamily::Escalating;
  if (kind == "jones") {
    if (!rest.empty()) cfg.g2 = std::stod(rest);
    return LsmFamily::Jones;
  }
  if (kind == "quadratic") {
    if (!rest.empty()) cfg.beta = std::stod(rest);
    return LsmFamily::Quadratic;
  }
  if (kind == "rbc") {
    if (!rest.empty()) cfg.rbc_delta = std::stod(rest);
    return LsmFamily::Rbc;
  }
  throw ExitWith{3, "bad --lsm spec: " + spec};
}

// ------------------------------------------------------- counterexample

int cmd_counterexample(const std::vector<Real>& xi, Real Ca, Real Ct, Real delta, int r,
                       const std::string& out_path, Manifest& man) {
  auto m = build_sharpness_counterexample((int)xi.size(), xi, Ca, Ct, delta, r);
  save_model(m, out_path);
  man.output(out_path);

  auto vi = value_iteration(m).values;
  auto ls = delta > 0 ? dial_solve(m, delta) : dijkstra_solve(m);
  json note{{"format", 1},
            {"delta", delta},
            {"expected",
             std::string(delta > 0 ? "dial" : "dijkstra") +
                 " disagrees with value iteration at node 0"},
            {"vi_at_x", vi[0]},
            {"label_setting_at_x", ls.values[0]}};
  std::string note_path = out_path + ".note.json";
  spit(note_path, note.dump(2) + "\n");
  man.output(note_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OSSP toolkit: label-setting solvers for opportunistically "
               "stochastic shortest path problems"};
  app.require_subcommand(1);
  bool json_errors = false;
  std::string manifest_path;
  app.add_flag("--json-errors", json_errors, "emit machine-readable errors on stderr");
  app.add_option("--manifest", manifest_path, "manifest output path");

  // solve
  std::string model_path, method = "dijkstra", delta_spec, values_path = "values.csv";
  std::string policy_path, trace_path;
  auto* solve = app.add_subcommand("solve", "solve a model file");
  solve->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  solve->add_option("--method", method)
      ->check(CLI::IsMember({"vi", "gs", "dijkstra", "dial"}));
  solve->add_option("--delta", delta_spec, "bucket width, or 'auto'");
  solve->add_option("--values", values_path);
  solve->add_option("--policy", policy_path);
  solve->add_option("--trace", trace_path);

  // check
  std::string criterion = "improved", report_path;
  auto* check = app.add_subcommand("check", "certify monotone (delta-)causality");
  check->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  check->add_option("--delta", delta_spec, "delta, or 'auto'")->default_val("0");
  check->add_option("--criterion", criterion)
      ->check(CLI::IsMember({"improved", "simplified"}));
  check->add_option("--out", report_path);

  // prune
  std::string out_path = "pruned.json";
  auto* prune = app.add_subcommand("prune", "remove redundant actions");
  prune->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  prune->add_option("--out", out_path);
  prune->add_option("--report", report_path);

  // hjb
  int nx = 0, ny = 0, nz = 0;
  Real h = 0, q = 0;
  std::string profile_spec, stencil_name = "8pt", target_spec, dirs_path;
  std::string hjb_out = "u.csv";
  bool boundary = false, force = false;
  auto* hjb = app.add_subcommand("hjb", "solve an eikonal/HJB grid problem");
  hjb->set_help_flag("--help", "print help");  // frees -h for the grid spacing
  hjb->add_option("--nx", nx)->required();
  hjb->add_option("--ny", ny);
  hjb->add_option("--nz", nz);
  hjb->add_option("--h", h)->required();
  hjb->add_option("--profile", profile_spec, "iso:F | ellipse:a,b,theta | ellipsoid:a,b,c | sampled:file")
      ->required();
  hjb->add_option("--stencil", stencil_name)->check(CLI::IsMember({"4pt", "8pt", "6pt3d"}));
  hjb->add_option("--target", target_spec, "target coordinates x,y[,z]");
  hjb->add_flag("--boundary", boundary, "exit through the whole boundary");
  hjb->add_option("--q", q, "boundary exit cost");
  hjb->add_option("--method", method)->check(CLI::IsMember({"vi", "dijkstra", "dial"}));
  hjb->add_option("--delta", delta_spec, "bucket width, or 'auto'");
  hjb->add_flag("--force", force, "skip the causality certification");
  hjb->add_option("--out", hjb_out);
  hjb->add_option("--dirs", dirs_path);

  // route
  auto* route = app.add_subcommand("route", "lane-level road networks");
  route->require_subcommand(1);
  HighwayConfig hw;
  std::string lsm_spec = "escalating", plot_path, dot_path, route_values;
  std::string route_out = "policy.json", rb_config;
  auto* highway = route->add_subcommand("highway", "straight multi-lane highway");
  highway->add_option("--length", hw.length_m);
  highway->add_option("--lanes", hw.lanes);
  highway->add_option("--D", hw.D);
  highway->add_option("--alpha", hw.alpha);
  highway->add_option("--eps", hw.eps);
  highway->add_option("--g1", hw.g1);
  highway->add_option("--mu", hw.mu);
  highway->add_option("--onramp", hw.onramp_from_target_m, "onramp distance from target");
  highway->add_option("--lsm", lsm_spec, "escalating | jones:g2 | quadratic:b | rbc:d");
  highway->add_option("--out", route_out);
  highway->add_option("--plotdata", plot_path);
  highway->add_option("--dot", dot_path);
  highway->add_option("--values", route_values);
  auto* roundabout = route->add_subcommand("roundabout", "interconnected roundabouts");
  roundabout->add_option("--config", rb_config)->check(CLI::ExistingFile);
  roundabout->add_option("--out", route_out);
  roundabout->add_option("--plotdata", plot_path);
  roundabout->add_option("--dot", dot_path);
  roundabout->add_option("--values", route_values);

  // counterexample
  // defaults chosen so the label-setting solver provably mis-orders the nodes
  // (the midpoint construction needs C_tilde < B + 2 delta to bite)
  std::string xi_spec = "0.8,0.2";
  Real Ca = 0.1, Ct = 1.0, cex_delta = 0;
  int cex_r = -1;
  std::string cex_out = "cex.json";
  auto* cex = app.add_subcommand("counterexample", "Theorem-3.5 sharpness instance");
  cex->add_option("--xi", xi_spec, "stochastic action probabilities");
  cex->add_option("--Ca", Ca);
  cex->add_option("--Ctilde", Ct);
  cex->add_option("--delta", cex_delta);
  cex->add_option("--r", cex_r);
  cex->add_option("--out", cex_out);

  for (auto* s : app.get_subcommands([](const CLI::App*) { return true; })) {
    s->fallthrough();  // allow --json-errors / --manifest after the subcommand
    for (auto* s2 : s->get_subcommands([](const CLI::App*) { return true; }))
      s2->fallthrough();
  }

  CLI11_PARSE(app, argc, argv);

  Manifest man;
  man.path = manifest_path;
  auto sub = app.get_subcommands().front();
  man.subcommand = sub->get_name();
  for (const auto* opt : sub->get_options())
    if (opt->count() && opt->get_name().rfind("--", 0) == 0)
      man.params[opt->get_name().substr(2)] = opt->results().front();

  auto fail = [&](int code, const std::string& msg) {
    if (json_errors)
      std::fprintf(stderr, "%s\n", json{{"error", msg}, {"code", code}}.dump().c_str());
    else
      std::fprintf(stderr, "ossp: %s\n", msg.c_str());
    return code;
  };

  try {
    int rc = 0;
    if (sub == solve) {
      rc = cmd_solve(model_path, method, delta_spec, values_path, policy_path,
                     trace_path, man);
    } else if (sub == check) {
      rc = cmd_check(model_path, delta_spec, criterion, report_path, man);
    } else if (sub == prune) {
      rc = cmd_prune(model_path, out_path, report_path, man);
    } else if (sub == hjb) {
      if (!boundary && target_spec.empty())
        throw ExitWith{3, "hjb needs --target or --boundary"};
      rc = cmd_hjb(nx, ny, nz, h, profile_spec, stencil_name, target_spec, boundary, q,
                   method, delta_spec, force, hjb_out, dirs_path, man);
    } else if (sub == route) {
      auto rsub = route->get_subcommands().front();
      man.subcommand = "route " + rsub->get_name();
      for (const auto* opt : rsub->get_options())
        if (opt->count() && opt->get_name().rfind("--", 0) == 0)
          man.params[opt->get_name().substr(2)] = opt->results().front();
      LaneNetwork net;
      if (rsub == highway) {
        hw.family = parse_lsm(lsm_spec, hw);
        net = build_highway(hw);
      } else {
        RoundaboutConfig cfg;
        if (!rb_config.empty()) {
          man.input(rb_config);
          json j = json::parse(slurp(rb_config));
          if (j.contains("outer")) cfg.outer = j["outer"];
          if (j.contains("inner")) cfg.inner = j["inner"];
          if (j.contains("mini")) cfg.mini = j["mini"];
          if (j.contains("approach_cols")) cfg.approach_cols = j["approach_cols"];
          if (j.contains("gamma_outer")) cfg.gamma_outer = j["gamma_outer"];
          if (j.contains("gamma_inner")) cfg.gamma_inner = j["gamma_inner"];
          if (j.contains("gamma_mini")) cfg.gamma_mini = j["gamma_mini"];
          if (j.contains("gamma_app")) cfg.gamma_app = j["gamma_app"];
          if (j.contains("beta_app")) cfg.beta_app = j["beta_app"];
          if (j.contains("f")) cfg.f = j["f"];
        }
        net = build_roundabout(cfg);
      }
      route_outputs(net, route_out, plot_path, dot_path, route_values, man);
    } else if (sub == cex) {
      std::vector<Real> xi;
      std::stringstream ss(xi_spec);
      std::string tok;
      while (std::getline(ss, tok, ',')) xi.push_back(std::stod(tok));
      rc = cmd_counterexample(xi, Ca, Ct, cex_delta, cex_r, cex_out, man);
    }
    man.write();
    return rc;
  } catch (const ExitWith& e) {
    man.write();
    return fail(e.code, e.message);
  } catch (const CausalityRefused& e) {
    man.write();
    return fail(2, e.what());
  } catch (const ConditionNotViolated& e) {
    man.write();
    return fail(3, e.what());
  } catch (const NonConvergence& e) {
    man.write();
    return fail(4, e.what());
  } catch (const NotMonotoneCausal& e) {
    man.write();
    return fail(2, e.what());
  } catch (const InvalidDelta& e) {
    man.write();
    return fail(3, e.what());
  } catch (const ModelError& e) {
    man.write();
    return fail(3, e.what());
  } catch (const std::exception& e) {
    return fail(3, e.what());
  }
}
