#include <charconv>

#include <httplib.h>

#include "vibeguard/detect.hpp"
#include "vibeguard/sidecar.hpp"

namespace vibeguard::sidecar {

using nlohmann::json;

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnknownId: return 404;
    case ErrorCode::InvalidArgument: return 400;
    case ErrorCode::IllegalTransition:
    case ErrorCode::StaleSnapshot:
    case ErrorCode::RegressionDetected:
    case ErrorCode::PostEditParseFailure: return 409;
    case ErrorCode::UnfixableScope:
    case ErrorCode::AmbiguousFix: return 422;
    default: return 500;
  }
}

std::pair<std::string, int> parse_address(std::string_view address) {
  const auto colon = address.rfind(':');
  if (colon == std::string_view::npos || colon == 0)
    throw Error(ErrorCode::InvalidArgument, "address must be HOST:PORT");
  int port = -1;
  const auto digits = address.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || port < 0 || port > 65535)
    throw Error(ErrorCode::InvalidArgument, "invalid port in " + std::string(address));
  return {std::string(address.substr(0, colon)), port};
}

namespace {

json verdict_json(const verify::Verdict& v) {
  json diags = json::array();
  for (const auto& d : v.diagnostics)
    diags.push_back({{"path", d.path},
                     {"line", d.span.line},
                     {"col", d.span.col},
                     {"message", d.message},
                     {"severity", verify::to_string(d.severity)}});
  return {{"record_id", v.record_id},
          {"tier", verify::to_string(v.tier)},
          {"outcome", verify::to_string(v.outcome)},
          {"needs_compile", v.needs_compile},
          {"missing_members", v.missing_members},
          {"diagnostics", std::move(diags)}};
}

json record_json(const Snapshot& snap, const SpecRecord& r) {
  json j = r;
  const auto loc = locate(*snap.index, r);
  j["location"] = {{"path", loc.path}, {"line", loc.line}, {"col", loc.col}};
  j["missing_members"] = verify::check_spec(*snap.index, r).missing_members;
  for (const auto& v : snap.verification.verdicts)
    if (v.record_id == r.id) j["verdict"] = verdict_json(v);
  return j;
}

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(2), "application/json");
}

void send_error(httplib::Response& res, int status, ErrorCode code, const std::string& message,
                const std::vector<std::string>& records = {}) {
  json body = {{"error", to_string(code)}, {"message", message}};
  if (!records.empty()) body["records"] = records;
  send(res, status, body);
}

}  // namespace

struct Server::Impl {
  Sidecar& sidecar;
  ServeOptions options;
  httplib::Server http;

  Impl(Sidecar& s, ServeOptions o) : sidecar(s), options(std::move(o)) {}

  std::shared_ptr<const Snapshot> current() {
    if (auto snap = sidecar.snapshot()) return snap;
    sidecar.handle({EventKind::Manual, {}, "serve"});
    return sidecar.snapshot();
  }

  // Maps library errors to JSON error responses.
  template <typename Fn>
  httplib::Server::Handler guarded(Fn fn) {
    return [this, fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const fix::FixError& e) {
        send_error(res, http_status(e.code()), e.code(), e.message(), e.records());
      } catch (const Error& e) {
        send_error(res, http_status(e.code()), e.code(), e.message());
      } catch (const std::exception& e) {
        send(res, 500, {{"error", "Internal"}, {"message", e.what()}});
      }
    };
  }

  void routes() {
    http.Get("/specs", guarded([this](const httplib::Request&, httplib::Response& res) {
      auto snap = current();
      json specs = json::array();
      for (const auto& r : snap->store.records()) specs.push_back(record_json(*snap, r));
      send(res, 200, {{"snapshot", snap->counter}, {"specs", std::move(specs)}});
    }));

    http.Get(R"(/specs/([0-9A-Za-z_-]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto snap = current();
      const SpecRecord* r = snap->store.find(req.matches[1].str());
      if (!r) throw Error(ErrorCode::UnknownId, "no record " + req.matches[1].str());
      send(res, 200, record_json(*snap, *r));
    }));

    http.Post(R"(/specs/([0-9A-Za-z_-]+)/decision)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                json body = json::parse(req.body, nullptr, false);
                if (body.is_discarded() || !body.is_object() || !body.contains("status") ||
                    !body["status"].is_string())
                  throw Error(ErrorCode::InvalidArgument, R"(body must be {"status": "accepted"|"rejected"|"soft"})");
                const auto status = parse_status(body["status"].get<std::string>());
                if (!status || (*status != Status::Accepted && *status != Status::Rejected && *status != Status::Soft))
                  throw Error(ErrorCode::InvalidArgument, "status must be accepted, rejected or soft");
                const std::string actor = body.value("actor", std::string("review-ui"));
                const std::string id = req.matches[1].str();
                auto report = sidecar.decide(id, *status, actor);
                auto snap = sidecar.snapshot();
                const SpecRecord* r = snap->store.find(id);
                send(res, 200, {{"snapshot", snap->counter}, {"record", record_json(*snap, *r)},
                                {"exit_code", report.exit_code}});
              }));

    http.Get("/verdicts", guarded([this](const httplib::Request&, httplib::Response& res) {
      auto snap = current();
      json verdicts = json::array();
      for (const auto& v : snap->verification.verdicts) verdicts.push_back(verdict_json(v));
      const auto& vr = snap->verification;
      send(res, 200, {{"snapshot", snap->counter},
                      {"verdicts", std::move(verdicts)},
                      {"passed", vr.passed},
                      {"failed", vr.failed},
                      {"not_applicable", vr.not_applicable},
                      {"budget_exceeded", vr.budget_exceeded},
                      {"hard_failures", vr.hard_failures},
                      {"warnings", vr.warnings}});
    }));

    http.Get(R"(/fixes/([0-9A-Za-z_-]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto snap = current();
      try {
        auto plan = sidecar.plan_for(req.matches[1].str());
        send(res, 200, {{"snapshot", snap->counter},
                        {"snapshot_id", detect::snapshot_id(*snap->index)},
                        {"plan", fix::plan_to_json(plan)},
                        {"diff", fix::plan_diff(*snap->index, plan)}});
      } catch (const Error& e) {
        // No plan: the panel disables its Apply button and shows the reason.
        send_error(res, 404, e.code(), e.message());
      }
    }));

    http.Post(R"(/fixes/([0-9A-Za-z_-]+)/apply)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      current();
      std::string expected;
      if (!req.body.empty()) {
        json body = json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.is_object()) throw Error(ErrorCode::InvalidArgument, "body must be a JSON object");
        expected = body.value("snapshot_id", std::string());
      }
      auto report = sidecar.apply(req.matches[1].str(), expected);
      send(res, 200, {{"applied", req.matches[1].str()}, {"report", report_to_json(report)}});
    }));

    http.Get("/events", guarded([this](const httplib::Request& req, httplib::Response& res) {
      std::uint64_t since = 0;
      if (req.has_param("since")) {
        const auto s = req.get_param_value("since");
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), since);
        if (ec != std::errc{} || ptr != s.data() + s.size())
          throw Error(ErrorCode::InvalidArgument, "since must be a snapshot counter");
      }
      auto snap = sidecar.wait_for_change(since, options.long_poll);
      const std::uint64_t counter = snap ? snap->counter : 0;
      send(res, 200, {{"snapshot", counter}, {"changed", counter > since}});
    }));

    http.Get("/report", guarded([this](const httplib::Request&, httplib::Response& res) {
      send(res, 200, report_to_json(current()->report));
    }));

    if (!options.static_dir.empty()) {
      http.set_mount_point("/", options.static_dir.string());
    } else {
      http.Get("/", [](const httplib::Request&, httplib::Response& res) {
        send(res, 200, {{"endpoints", {"GET /specs", "GET /specs/{id}", "POST /specs/{id}/decision", "GET /verdicts",
                                       "GET /fixes/{record_id}", "POST /fixes/{record_id}/apply", "GET /events",
                                       "GET /report"}}});
      });
    }
  }
};

Server::Server(Sidecar& sidecar, ServeOptions options) : impl_(std::make_unique<Impl>(sidecar, std::move(options))) {
  impl_->routes();
}

Server::~Server() { stop(); }

int Server::bind() {
  auto& o = impl_->options;
  if (o.port == 0) {
    const int port = impl_->http.bind_to_any_port(o.host);
    if (port <= 0) throw Error(ErrorCode::BindFailure, "cannot bind " + o.host);
    o.port = port;
  } else if (!impl_->http.bind_to_port(o.host, o.port)) {
    throw Error(ErrorCode::BindFailure, "cannot bind " + o.host + ":" + std::to_string(o.port));
  }
  impl_->current();
  return o.port;
}

void Server::listen() { impl_->http.listen_after_bind(); }

void Server::stop() {
  if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

}  // namespace vibeguard::sidecar
