#pragma once

// HTTP facade over the engine, backed by a directory of map documents.
//
// `Service::handle` is transport independent: it maps (method, path, body)
// to a status and a JSON body. `bind` attaches it to a cpp-httplib server.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "httplib.h"

#include "fcm/analysis.hpp"
#include "fcm/dynamics.hpp"
#include "fcm/io.hpp"
#include "fcm/knowledge.hpp"
#include "fcm/map.hpp"
#include "fcm/scenario.hpp"

namespace fcm::service {

using io::Json;

struct StoredMap {
  std::string id;
  long revision = 0;
  CognitiveMap map;
  std::string document;  // canonical save of `map`
};

using Snapshot = std::shared_ptr<const StoredMap>;

/// File-backed map store: `<dir>/maps/<id>.json` plus `<dir>/index.json`.
///
/// Readers take an immutable snapshot under a short shared lock; writers
/// for the same id are serialized and publish a new snapshot only after the
/// document is durably renamed into place.
class MapStore {
 public:
  explicit MapStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_ / "maps");
    load_index();
  }

  Snapshot get(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = maps_.find(id);
    return it == maps_.end() ? nullptr : it->second;
  }

  std::vector<Snapshot> list() const {
    std::shared_lock lock(mutex_);
    std::vector<Snapshot> out;
    for (const auto& [_, s] : maps_) out.push_back(s);
    return out;
  }

  Snapshot create(const CognitiveMap& map) {
    std::string id;
    {
      std::unique_lock lock(mutex_);
      id = "m" + std::to_string(next_id_++);
    }
    auto writer = writer_for(id);
    std::lock_guard guard(*writer);
    return publish(id, 1, map);
  }

  /// Replaces an existing map; nullptr when the id is unknown.
  Snapshot put(const std::string& id, const CognitiveMap& map) {
    auto writer = writer_for(id);
    std::lock_guard guard(*writer);
    auto current = get(id);
    if (!current) return nullptr;
    return publish(id, current->revision + 1, map);
  }

  /// Idempotent.
  void remove(const std::string& id) {
    auto writer = writer_for(id);
    std::lock_guard guard(*writer);
    {
      std::unique_lock lock(mutex_);
      if (maps_.erase(id) == 0) return;
    }
    std::error_code ec;
    std::filesystem::remove(document_path(id), ec);
    save_index();
  }

 private:
  std::filesystem::path document_path(const std::string& id) const { return dir_ / "maps" / (id + ".json"); }

  std::shared_ptr<std::mutex> writer_for(const std::string& id) {
    std::lock_guard lock(writers_mutex_);
    auto& w = writers_[id];
    if (!w) w = std::make_shared<std::mutex>();
    return w;
  }

  Snapshot publish(const std::string& id, long revision, const CognitiveMap& map) {
    auto stored = std::make_shared<StoredMap>(StoredMap{id, revision, map, io::save_map(map)});
    io::write_file_atomic(document_path(id), stored->document);
    {
      std::unique_lock lock(mutex_);
      maps_[id] = stored;
    }
    save_index();
    return stored;
  }

  void save_index() {
    std::lock_guard index_lock(index_mutex_);
    Json index;
    Json entries = Json::object();
    {
      std::shared_lock lock(mutex_);
      index["nextId"] = next_id_;
      for (const auto& [id, s] : maps_) entries[id] = s->revision;
    }
    index["maps"] = std::move(entries);
    io::write_file_atomic(dir_ / "index.json", io::dump(index));
  }

  void load_index() {
    const auto path = dir_ / "index.json";
    if (!std::filesystem::exists(path)) return;
    const Json index = io::parse_document(io::read_file(path));
    next_id_ = index.value("nextId", 1L);
    for (const auto& [id, rev] : index.at("maps").items()) {
      auto map = io::load_map(io::read_file(document_path(id)));
      maps_[id] = std::make_shared<StoredMap>(StoredMap{id, rev.get<long>(), map, io::save_map(map)});
    }
  }

  std::filesystem::path dir_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, Snapshot> maps_;
  long next_id_ = 1;
  std::mutex writers_mutex_;
  std::map<std::string, std::shared_ptr<std::mutex>> writers_;
  std::mutex index_mutex_;
};

struct Response {
  int status = 200;
  std::string body;
  std::map<std::string, std::string> headers;
};

inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::not_found: return 404;
    case ErrorCode::invalid_map:
    case ErrorCode::unreachable: return 422;
    case ErrorCode::locked: return 409;
    default: return 400;
  }
}

inline Response error_response(ErrorCode code, const std::string& message, const ValidationReport* violations = nullptr) {
  Json err{{"code", to_string(code)}, {"message", message}};
  if (violations) err["violations"] = io::violations_to_json(*violations);
  return {http_status(code), io::dump(Json{{"error", std::move(err)}}), {}};
}

inline Response json_response(const Json& doc, int status = 200) { return {status, io::dump(doc), {}}; }

struct ServiceConfig {
  std::filesystem::path data_dir = "data";
  std::vector<std::string> cors_allow;  // origins; "*" allows any
};

class Service {
 public:
  explicit Service(ServiceConfig config) : config_(std::move(config)), store_(config_.data_dir / "store") {
    const auto registry = config_.data_dir / "registry.json";
    if (std::filesystem::exists(registry)) knowledge_ = io::load_knowledge(io::read_file(registry));
  }

  MapStore& store() noexcept { return store_; }
  const ServiceConfig& config() const noexcept { return config_; }

  Response handle(std::string_view method, std::string_view path, std::string_view body) {
    try {
      return route(method, path, body);
    } catch (const ValidationFailed& e) {
      return error_response(e.code(), e.what(), &e.report());
    } catch (const Error& e) {
      return error_response(e.code(), e.what());
    } catch (const nlohmann::json::exception& e) {
      return error_response(ErrorCode::schema_error, e.what());
    }
  }

  /// Access-Control-Allow-Origin value for a request origin, if allowed.
  std::optional<std::string> allowed_origin(const std::string& origin) const {
    for (const auto& o : config_.cors_allow)
      if (o == "*" || o == origin) return o == "*" ? std::string("*") : origin;
    return std::nullopt;
  }

 private:
  static std::vector<std::string_view> segments(std::string_view path) {
    std::vector<std::string_view> out;
    while (!path.empty()) {
      const auto slash = path.find('/');
      auto seg = path.substr(0, slash);
      if (!seg.empty()) out.push_back(seg);
      if (slash == std::string_view::npos) break;
      path.remove_prefix(slash + 1);
    }
    return out;
  }

  static Json body_json(std::string_view body) {
    if (body.find_first_not_of(" \t\r\n") == std::string_view::npos) return Json::object();
    Json j = io::parse_document(body);
    if (!j.is_object()) throw Error(ErrorCode::schema_error, "request body: expected an object");
    if (auto v = j.find("formatVersion"); v != j.end() && *v != io::kFormatVersion)
      throw Error(ErrorCode::unsupported, "unsupported version: " + v->dump());
    return j;
  }

  Snapshot require_map(std::string_view id) const {
    auto snap = store_.get(std::string(id));
    if (!snap) throw Error(ErrorCode::not_found, "unknown map: " + std::string(id));
    return snap;
  }

  static double tol_from(const Json& body) {
    if (auto t = body.find("tol"); t != body.end()) {
      if (!t->is_number()) throw Error(ErrorCode::schema_error, "tol: expected a number");
      return t->get<double>();
    }
    return 1e-6;
  }

  Response route(std::string_view method, std::string_view path, std::string_view body) {
    const auto seg = segments(path);
    if (seg.size() < 2 || seg[0] != "v1") return error_response(ErrorCode::not_found, "no route: " + std::string(path));

    if (seg[1] == "registry" && seg.size() == 2 && method == "GET") {
      if (!knowledge_) return error_response(ErrorCode::not_found, "no registry configured");
      return json_response(io::knowledge_to_json(*knowledge_));
    }
    if (seg[1] != "maps") return error_response(ErrorCode::not_found, "no route: " + std::string(path));

    auto& store = store_;
    if (seg.size() == 2) {
      if (method == "POST") {
        auto snap = store.create(io::load_map(body));
        return json_response({{"id", snap->id}, {"revision", snap->revision}}, 201);
      }
      if (method == "GET") {
        Json maps = Json::array();
        for (const auto& s : store.list())
          maps.push_back({{"id", s->id}, {"revision", s->revision}, {"name", s->map.metadata().name}});
        return json_response({{"maps", std::move(maps)}});
      }
      return error_response(ErrorCode::invalid_argument, "method not allowed");
    }

    const std::string id(seg[2]);
    if (seg.size() == 3) {
      if (method == "GET") {
        auto snap = require_map(id);
        return {200, snap->document, {{"X-Revision", std::to_string(snap->revision)}}};
      }
      if (method == "PUT") {
        auto map = io::load_map(body);
        auto snap = store.put(id, map);
        if (!snap) return error_response(ErrorCode::not_found, "unknown map: " + id);
        return json_response({{"id", snap->id}, {"revision", snap->revision}});
      }
      if (method == "DELETE") {
        store.remove(id);
        return {204, "", {}};
      }
      return error_response(ErrorCode::invalid_argument, "method not allowed");
    }

    if (method != "POST") return error_response(ErrorCode::invalid_argument, "method not allowed");
    const auto snap = require_map(id);
    const CognitiveMap& map = snap->map;
    const Json req = body_json(body);
    const std::string_view action = seg[3];

    if (seg.size() == 4 && action == "simulate") {
      const Json* base = req.contains("base") ? &req.at("base") : nullptr;
      const auto schedule = req.contains("schedule")
                                ? io::resolve_schedule(map, io::named_schedule_from_json(req.at("schedule"), "schedule"))
                                : ImpulseSchedule{};
      SimulateOptions opts;
      if (req.contains("horizon")) {
        if (!req.at("horizon").is_number_integer()) throw Error(ErrorCode::schema_error, "horizon: expected an integer");
        opts.horizon = req.at("horizon").get<int>();
      }
      if (req.contains("clamp")) opts.clamp = req.at("clamp").get<bool>();
      const auto traj = simulate(map, io::base_from_json(map, base), schedule, opts);
      return json_response(io::trajectory_to_json(map, traj));
    }
    if (seg.size() == 4 && action == "analyze") {
      return json_response(io::analysis_to_json(map, io::analyze(map, tol_from(req))));
    }
    if (seg.size() == 4 && action == "stabilize") {
      std::set<EdgeKey> locked;
      if (auto l = req.find("locked"); l != req.end()) {
        for (std::size_t i = 0; i < l->size(); ++i) {
          const std::string p = "locked[" + std::to_string(i) + "]";
          locked.insert({io::detail::string_field((*l)[i], p, "source"), io::detail::string_field((*l)[i], p, "target")});
        }
      }
      return json_response(io::plan_to_json(stabilize_search(map, locked, tol_from(req))));
    }
    if (seg.size() == 5 && action == "scenarios") {
      const std::string_view op = seg[4];
      const Json* base_json = req.contains("base") ? &req.at("base") : nullptr;
      const StateVector base = io::base_from_json(map, base_json);
      if (op == "run") {
        const auto scenario = io::scenario_from_json(io::detail::field(req, "body", "scenario"), "scenario");
        return json_response(io::scenario_result_to_json(map, scenario.name, run_scenario(map, base, scenario)));
      }
      if (op == "compare") {
        const auto spec = io::target_from_json(io::detail::field(req, "body", "target"), "target");
        std::vector<Scenario> scenarios;
        const Json& arr = io::detail::array_field(req, "body", "scenarios");
        for (std::size_t i = 0; i < arr.size(); ++i)
          scenarios.push_back(io::scenario_from_json(arr[i], "scenarios[" + std::to_string(i) + "]"));
        return json_response(io::ranking_to_json(compare_scenarios(map, base, scenarios, spec)));
      }
      if (op == "invert") {
        const auto spec = io::target_from_json(io::detail::field(req, "body", "target"), "target");
        const auto inv_req = io::inversion_from_json(req, "body");
        return json_response(io::inversion_to_json(invert_scenario(map, inv_req.controls, spec, inv_req.ridge)));
      }
    }
    return error_response(ErrorCode::not_found, "no route: " + std::string(path));
  }

  ServiceConfig config_;
  MapStore store_;
  std::optional<KnowledgeBase> knowledge_;
};

/// Registers catch-all handlers on `server` that forward to `service`.
inline void bind(httplib::Server& server, Service& service) {
  auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    const auto out = service.handle(req.method, req.path, req.body);
    res.status = out.status;
    for (const auto& [k, v] : out.headers) res.set_header(k, v);
    if (!out.body.empty()) res.set_content(out.body, "application/json");
    if (auto origin = service.allowed_origin(req.get_header_value("Origin"))) {
      res.set_header("Access-Control-Allow-Origin", *origin);
    }
  };
  server.Get(".*", forward);
  server.Post(".*", forward);
  server.Put(".*", forward);
  server.Delete(".*", forward);
  server.Options(".*", [&service](const httplib::Request& req, httplib::Response& res) {
    if (auto origin = service.allowed_origin(req.get_header_value("Origin"))) {
      res.set_header("Access-Control-Allow-Origin", *origin);
      res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, DELETE, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    }
    res.status = 204;
  });
}

}  // namespace fcm::service
