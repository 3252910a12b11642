// fcm: command-line front end for the cognitive-map engine.
//
// Exit codes: 0 success, 1 validation or domain failure, 2 usage error.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fcm/fcm.hpp"
#include "fcm/service.hpp"

namespace {

using fcm::io::Json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

enum class Format { table, json };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fcm::CognitiveMap read_map(const std::string& path) { return fcm::io::load_map(fcm::io::read_file(path)); }

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

void print_matrix(std::ostream& out, const std::string& title, const fcm::CognitiveMap& map, const fcm::Matrix& m) {
  std::size_t width = 8;
  for (const auto& f : map.factors()) width = std::max(width, f.id.size() + 1);
  out << title << "\n" << pad("", width);
  for (const auto& f : map.factors()) out << pad(f.id, width);
  out << "\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << pad(map.factors()[i].id, width);
    for (double v : m.row(i)) out << pad(fcm::io::format_real(std::round(v * 1e4) / 1e4), width);
    out << "\n";
  }
}

// "factor=value" or "factor@t=value".
std::pair<int, std::pair<std::string, double>> parse_impulse(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("impulse must be factor=value or factor@t=value: " + spec);
  std::string lhs = spec.substr(0, eq);
  int t = 0;
  if (const auto at = lhs.find('@'); at != std::string::npos) {
    try {
      t = std::stoi(lhs.substr(at + 1));
    } catch (const std::exception&) {
      throw UsageError("bad impulse step in: " + spec);
    }
    lhs = lhs.substr(0, at);
  }
  try {
    return {t, {lhs, fcm::io::parse_real(spec.substr(eq + 1), "impulse " + spec)}};
  } catch (const fcm::Error&) {
    throw UsageError("bad impulse value in: " + spec);
  }
}

std::pair<std::string, std::string> parse_edge(const std::string& spec) {
  const auto arrow = spec.find("->");
  if (arrow == std::string::npos || arrow == 0 || arrow + 2 >= spec.size())
    throw UsageError("edge must be source->target: " + spec);
  return {spec.substr(0, arrow), spec.substr(arrow + 2)};
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    fcm::io::write_file_atomic(out_path, text);
  }
}

int cmd_validate(const std::string& path, Format format) {
  const auto text = fcm::io::read_file(path);
  fcm::ValidationReport report;
  try {
    fcm::io::load_map(text);
  } catch (const fcm::ValidationFailed& e) {
    report = e.report();
  }
  if (format == Format::json) {
    std::cout << fcm::io::dump(Json{{"valid", report.empty()}, {"violations", fcm::io::violations_to_json(report)}});
  } else if (report.empty()) {
    std::cout << path << ": valid\n";
  } else {
    for (const auto& v : report) std::cout << path << ": " << v.invariant << " (" << v.element << ")\n";
  }
  return report.empty() ? kExitOk : kExitFailure;
}

struct SimulateArgs {
  std::string map;
  std::vector<std::string> impulses;
  int horizon = 0;
  bool clamp = false;
  std::string out;
  std::string indicators;
  std::string period;
  std::string municipality;
};

int cmd_simulate(const SimulateArgs& args, Format format) {
  const auto map = read_map(args.map);
  fcm::StateVector base{std::vector<double>(map.size(), 0.0)};
  if (!args.indicators.empty()) {
    if (args.period.empty()) throw UsageError("--indicators requires --period");
    fcm::io::IngestOptions opts;
    if (!args.municipality.empty()) opts.municipality = args.municipality;
    auto ingested = fcm::io::ingest_indicators(fcm::io::parse_indicator_series(fcm::io::read_file(args.indicators)),
                                               map, args.period, opts);
    for (const auto& w : ingested.warnings) std::cerr << "warning: " << w << "\n";
    base = std::move(ingested.state);
  }
  std::map<int, std::map<fcm::FactorId, double>> named;
  for (const auto& spec : args.impulses) {
    auto [t, fv] = parse_impulse(spec);
    named[t][fv.first] += fv.second;
  }
  const auto traj = fcm::simulate(map, base, fcm::io::resolve_schedule(map, named), {args.horizon, args.clamp});
  const auto fmt = format == Format::json ? fcm::io::TrajectoryFormat::document : fcm::io::TrajectoryFormat::tabular;
  emit(fcm::io::export_trajectory(map, traj, fmt), args.out);
  return kExitOk;
}

int cmd_analyze(const std::string& path, double tol, Format format) {
  const auto map = read_map(path);
  const auto result = fcm::io::analyze(map, tol);
  if (format == Format::json) {
    std::cout << fcm::io::dump(fcm::io::analysis_to_json(map, result));
    return kExitOk;
  }
  print_matrix(std::cout, "positive path influence", map, result.closure.positive);
  std::cout << "\n";
  print_matrix(std::cout, "negative path influence", map, result.closure.negative);
  std::cout << "\n";
  print_matrix(std::cout, "influence", map, result.influence.influence);
  std::cout << "\n";
  print_matrix(std::cout, "consonance", map, result.influence.consonance);
  std::cout << "\n";
  std::cout << pad("factor", 24) << pad("influence", 14) << pad("susceptibility", 16) << "consonance\n";
  for (std::size_t i = 0; i < map.size(); ++i) {
    const auto& a = result.influence.per_factor[i];
    std::cout << pad(map.factors()[i].id, 24) << pad(fcm::io::format_real(a.influence_on_system), 14)
              << pad(fcm::io::format_real(a.susceptibility), 16) << fcm::io::format_real(a.consonance_on_system)
              << "\n";
  }
  std::cout << "\nspectral radius " << fcm::io::format_real(result.stability.spectral_radius) << " ("
            << fcm::to_string(result.stability.classification) << ", tol " << tol << ")\n";
  return kExitOk;
}

int cmd_stabilize(const std::string& path, const std::vector<std::string>& locks, double tol, Format format) {
  const auto map = read_map(path);
  std::set<fcm::EdgeKey> locked;
  for (const auto& l : locks) locked.insert(parse_edge(l));
  const auto plan = fcm::stabilize_search(map, locked, tol);
  if (format == Format::json) {
    std::cout << fcm::io::dump(fcm::io::plan_to_json(plan));
  } else {
    for (const auto& m : plan.modifications)
      std::cout << m.source << "->" << m.target << ": " << fcm::io::format_real(m.old_weight) << " -> "
                << fcm::io::format_real(m.new_weight) << "\n";
    std::cout << (plan.success ? "stable" : "not stabilized") << ", spectral radius "
              << fcm::io::format_real(plan.resulting_radius) << "\n";
  }
  return plan.success ? kExitOk : kExitFailure;
}

int cmd_scenario(const std::string& op, const std::string& map_path, const std::string& scenario_path, Format format) {
  const auto map = read_map(map_path);
  const auto set = fcm::io::load_scenario_set(fcm::io::read_file(scenario_path));
  const auto base = fcm::io::base_from_json(map, set.base.is_null() ? nullptr : &set.base);
  if (op == "run") {
    Json results = Json::array();
    for (const auto& s : set.scenarios) {
      const auto r = fcm::run_scenario(map, base, s);
      if (format == Format::json) {
        results.push_back(fcm::io::scenario_result_to_json(map, s.name, r));
      } else {
        std::cout << s.name << ": target delta " << fcm::io::format_real(r.target_delta) << "\n";
      }
    }
    if (format == Format::json) std::cout << fcm::io::dump(Json{{"results", std::move(results)}});
    return kExitOk;
  }
  if (op == "compare") {
    const auto ranking = fcm::compare_scenarios(map, base, set.scenarios, set.target);
    if (format == Format::json) {
      std::cout << fcm::io::dump(fcm::io::ranking_to_json(ranking));
    } else {
      std::cout << pad("rank", 6) << pad("scenario", 20) << pad("target delta", 16) << "distance\n";
      for (std::size_t i = 0; i < ranking.size(); ++i)
        std::cout << pad(std::to_string(i + 1), 6) << pad(ranking[i].name, 20)
                  << pad(fcm::io::format_real(ranking[i].target_delta), 16)
                  << fcm::io::format_real(ranking[i].distance) << "\n";
    }
    return kExitOk;
  }
  if (op == "invert") {
    if (!set.inversion) throw UsageError("scenario file has no \"invert\" section");
    const auto inv = fcm::invert_scenario(map, set.inversion->controls, set.target, set.inversion->ridge);
    if (format == Format::json) {
      std::cout << fcm::io::dump(fcm::io::inversion_to_json(inv));
    } else {
      for (std::size_t k = 0; k < inv.controls.size(); ++k)
        std::cout << inv.controls[k] << " = " << fcm::io::format_real(inv.impulse[k]) << " (gain "
                  << fcm::io::format_real(inv.gains[k]) << ")\n";
      std::cout << "achieved delta " << fcm::io::format_real(inv.achieved_delta) << ", residual "
                << fcm::io::format_real(inv.residual) << "\n";
    }
    return kExitOk;
  }
  throw UsageError("scenario operation must be run, compare or invert");
}

int cmd_template(const std::string& path, const std::string& climate, std::uint64_t population,
                 const std::string& specialization, Format format) {
  const auto kb = fcm::io::load_knowledge(fcm::io::read_file(path));
  const auto type = fcm::resolve_type(kb.registry, climate, population, specialization);
  const auto indicators = fcm::indicators_for_type(kb.indicators, type);
  if (format == Format::json) {
    std::cout << fcm::io::dump(Json{{"type", fcm::io::type_to_json(type)}, {"indicators", indicators}});
  } else {
    std::cout << "type " << fcm::to_string(type) << "\n";
    for (const auto& id : indicators)
      std::cout << "  " << id << (kb.indicators.general.contains(id) ? " (general)" : " (special)") << "\n";
  }
  return kExitOk;
}

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : std::move(fallback);
}

int cmd_serve(int port, const std::string& data_dir, std::vector<std::string> cors) {
  if (cors.empty()) {
    std::stringstream ss(env_or("FCM_CORS", ""));
    for (std::string origin; std::getline(ss, origin, ',');)
      if (!origin.empty()) cors.push_back(origin);
  }
  fcm::service::Service service({data_dir, std::move(cors)});
  httplib::Server server;
  fcm::service::bind(server, service);
  std::cerr << "serving on port " << port << ", data " << data_dir << "\n";
  if (!server.listen("0.0.0.0", port)) {
    std::cerr << "error: cannot listen on port " << port << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fuzzy cognitive maps for municipal development planning"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string format_name = "table";
  app.add_option("--format", format_name, "Output format")->check(CLI::IsMember({"table", "json"}));
  double tol = 1e-6;

  std::string map_path;
  auto* validate = app.add_subcommand("validate", "Check a map document against all invariants");
  validate->add_option("map", map_path)->required();

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run an impulse process");
  simulate->add_option("map", sim.map)->required();
  simulate->add_option("--impulse", sim.impulses, "factor=value (t = 0) or factor@t=value");
  simulate->add_option("--horizon", sim.horizon)->required()->check(CLI::NonNegativeNumber);
  simulate->add_flag("--clamp", sim.clamp, "Clip Y to [0, 1]");
  simulate->add_option("--out", sim.out, "Write the export to a file");
  simulate->add_option("--indicators", sim.indicators, "Indicator CSV providing the base state");
  simulate->add_option("--period", sim.period);
  simulate->add_option("--municipality", sim.municipality);

  auto* analyze = app.add_subcommand("analyze", "Closure, influence indicators and stability");
  analyze->add_option("map", map_path)->required();
  analyze->add_option("--tol", tol)->check(CLI::PositiveNumber);

  std::vector<std::string> locks;
  auto* stabilize = app.add_subcommand("stabilize", "Search for weight reductions that stabilize the map");
  stabilize->add_option("map", map_path)->required();
  stabilize->add_option("--lock", locks, "source->target, may repeat");
  stabilize->add_option("--tol", tol)->check(CLI::PositiveNumber);

  std::string scenario_op, scenario_path;
  auto* scenario = app.add_subcommand("scenario", "Run, compare or invert what-if scenarios");
  scenario->add_option("op", scenario_op)->required()->check(CLI::IsMember({"run", "compare", "invert"}));
  scenario->add_option("map", map_path)->required();
  scenario->add_option("scenario-file", scenario_path)->required();

  std::string registry_path, climate, specialization;
  std::uint64_t population = 0;
  auto* tmpl = app.add_subcommand("template", "Resolve a municipality type and its indicators");
  tmpl->add_option("registry", registry_path)->required();
  tmpl->add_option("--climate", climate)->required();
  tmpl->add_option("--population", population)->required();
  tmpl->add_option("--specialization", specialization)->required();

  int port = std::stoi(env_or("FCM_PORT", "8080"));
  std::string data_dir = env_or("FCM_DATA", "data");
  std::vector<std::string> cors;
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  serve->add_option("--port", port)->check(CLI::Range(0, 65535));
  serve->add_option("--data", data_dir);
  serve->add_option("--cors", cors, "Allowed origin, may repeat (env FCM_CORS, comma separated)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const Format format = format_name == "json" ? Format::json : Format::table;
  try {
    if (*validate) return cmd_validate(map_path, format);
    if (*simulate) return cmd_simulate(sim, format);
    if (*analyze) return cmd_analyze(map_path, tol, format);
    if (*stabilize) return cmd_stabilize(map_path, locks, tol, format);
    if (*scenario) return cmd_scenario(scenario_op, map_path, scenario_path, format);
    if (*tmpl) return cmd_template(registry_path, climate, population, specialization, format);
    if (*serve) return cmd_serve(port, data_dir, cors);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fcm::Error& e) {
    std::cerr << "error [" << fcm::to_string(e.code()) << "]: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
