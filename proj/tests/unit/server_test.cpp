#include <gtest/gtest.h>

#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "test_support.hpp"
#include "vibeguard/sidecar.hpp"

namespace {

using namespace std::chrono_literals;
using namespace vibeguard::sidecar;
using nlohmann::json;

class ServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_.copy_corpus("listing1");
    Config c;
    c.oracle_cmd = "none";
    sidecar_ = std::make_unique<Sidecar>(dir_.path(), c);
    ServeOptions o;
    o.port = 0;
    o.long_poll = 500ms;
    server_ = std::make_unique<Server>(*sidecar_, o);
    port_ = server_->bind();
    thread_ = std::thread([this] { server_->listen(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    client_->set_read_timeout(10, 0);
  }
  void TearDown() override {
    server_->stop();
    thread_.join();
  }

  json get(const std::string& path, int expect = 200) {
    auto res = client_->Get(path);
    EXPECT_TRUE(res) << path;
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << path << " " << res->body;
    return json::parse(res->body);
  }
  json post(const std::string& path, const std::string& body, int expect = 200) {
    auto res = client_->Post(path, body, "application/json");
    EXPECT_TRUE(res) << path;
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << path << " " << res->body;
    return json::parse(res->body);
  }
  std::vector<std::string> accept_all() {
    std::vector<std::string> ids;
    const auto specs = get("/specs");
    for (const auto& s : specs["specs"]) ids.push_back(s["id"]);
    for (const auto& id : ids) post("/specs/" + id + "/decision", R"({"status":"accepted"})");
    return ids;
  }

  vgtest::TempDir dir_;
  std::unique_ptr<Sidecar> sidecar_;
  std::unique_ptr<Server> server_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = 0;
};

TEST_F(ServerTest, SpecsListing) {
  EXPECT_GT(port_, 0);
  const auto j = get("/specs");
  ASSERT_EQ(j["specs"].size(), 2u);
  for (const auto& s : j["specs"]) {
    EXPECT_EQ(s["status"], "proposed");
    EXPECT_EQ(s["missing_members"].size(), 1u);
    EXPECT_GE(s["location"]["line"].get<int>(), 1);
    const auto one = get("/specs/" + s["id"].get<std::string>());
    EXPECT_EQ(one["id"], s["id"]);
  }
  get("/specs/ffffffffffffffff", 404);
  EXPECT_TRUE(get("/").contains("endpoints"));
}

TEST_F(ServerTest, Decisions) {
  const auto id = get("/specs")["specs"][0]["id"].get<std::string>();
  post("/specs/" + id + "/decision", R"({"status":"retired"})", 400);
  post("/specs/" + id + "/decision", R"({"state":"accepted"})", 400);
  post("/specs/" + id + "/decision", "nope", 400);
  post("/specs/ffffffffffffffff/decision", R"({"status":"accepted"})", 404);
  const auto ok = post("/specs/" + id + "/decision", R"({"status":"accepted","actor":"reviewer"})");
  EXPECT_EQ(ok["record"]["status"], "accepted");
  EXPECT_EQ(ok["record"]["decided_by"], "reviewer");
  EXPECT_EQ(ok["exit_code"], 2);
  post("/specs/" + id + "/decision", R"({"status":"rejected"})", 409);
  const auto v = get("/verdicts");
  EXPECT_EQ(v["hard_failures"], 1);
}

TEST_F(ServerTest, FixesAndApply) {
  const auto ids = accept_all();
  ASSERT_EQ(ids.size(), 2u);
  const auto plan = get("/fixes/" + ids[0]);
  EXPECT_FALSE(plan["diff"].get<std::string>().empty());
  EXPECT_EQ(plan["plan"]["record_id"], ids[0]);
  get("/fixes/ffffffffffffffff", 404);
  post("/fixes/" + ids[0] + "/apply", R"({"snapshot_id":"0123456789abcdef"})", 409);
  const auto applied = post("/fixes/" + ids[0] + "/apply",
                            json{{"snapshot_id", plan["snapshot_id"]}}.dump());
  EXPECT_EQ(applied["applied"], ids[0]);
  // The applied record now passes; no plan remains.
  get("/fixes/" + ids[0], 404);
  const auto second = post("/fixes/" + ids[1] + "/apply", "");
  EXPECT_EQ(second["report"]["exit_code"], 0);
  EXPECT_EQ(get("/report")["failures"].size(), 0u);
}

TEST_F(ServerTest, EventsLongPoll) {
  const auto first = get("/specs")["snapshot"].get<std::uint64_t>();
  const auto idle = get("/events?since=" + std::to_string(first));
  EXPECT_EQ(idle["changed"], false);
  get("/events?since=abc", 400);
  std::thread later([&] {
    std::this_thread::sleep_for(100ms);
    sidecar_->handle({EventKind::Manual, {}, "t"});
  });
  httplib::Client other("127.0.0.1", port_);
  auto res = other.Get("/events?since=" + std::to_string(first));
  later.join();
  ASSERT_TRUE(res);
  const auto j = json::parse(res->body);
  EXPECT_EQ(j["changed"], true);
  EXPECT_GT(j["snapshot"].get<std::uint64_t>(), first);
}

TEST(HttpStatus, Mapping) {
  using vibeguard::ErrorCode;
  EXPECT_EQ(http_status(ErrorCode::UnknownId), 404);
  EXPECT_EQ(http_status(ErrorCode::InvalidArgument), 400);
  EXPECT_EQ(http_status(ErrorCode::StaleSnapshot), 409);
  EXPECT_EQ(http_status(ErrorCode::AmbiguousFix), 422);
  EXPECT_EQ(http_status(ErrorCode::StorageFailure), 500);
}

}  // namespace
