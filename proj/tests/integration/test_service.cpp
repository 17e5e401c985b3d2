#include <gtest/gtest.h>

#include <httplib.h>

#include <random>
#include <thread>

#include "fixtures.hpp"
#include "octlayers/grid_io.hpp"
#include "octlayers/measure.hpp"
#include "octlayers/service.hpp"
#include "octlayers/stats_io.hpp"

using namespace octlayers;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const DefectSpec kDefect{1.8, 0.0, 0.6, 5, -15.0};

class ServiceTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = new octtest::TempDir("svc");
    auto ps = octtest::small_spec(6);
    ps.id_prefix = "pat";
    ps.defects.push_back(kDefect);
    ps.with_volume = true;
    octtest::write_cohort(generate_synthetic_cohort(ps, 1), root_->path() / "patients");
    auto cs = octtest::small_spec(6);
    cs.id_prefix = "ctl";
    octtest::write_cohort(generate_synthetic_cohort(cs, 2), root_->path() / "controls");
    api_ = new ApiService(root_->path());
  }
  static void TearDownTestSuite() {
    delete api_;
    delete root_;
  }

  static std::vector<AttributeMap> maps(const std::string& prefix, std::uint64_t seed, bool defect) {
    auto s = octtest::small_spec(6);
    s.id_prefix = prefix;
    if (defect) s.defects.push_back(kDefect);
    std::vector<AttributeMap> out;
    for (const auto& d : generate_synthetic_cohort(s, seed))
      out.push_back(compute_attribute_map(d, 5, AttributeKind::thickness()));
    return out;
  }

  static int status_of(const std::function<void()>& f) {
    try {
      f();
    } catch (const ApiError& e) {
      return e.status();
    } catch (const Error& e) {
      return ApiError::from(e).status();
    }
    return 200;
  }

  static octtest::TempDir* root_;
  static ApiService* api_;
};

octtest::TempDir* ServiceTest::root_ = nullptr;
ApiService* ServiceTest::api_ = nullptr;

}  // namespace

TEST(ServiceEmpty, EmptyCatalog) {
  octtest::TempDir dir;
  ApiService api(dir.path());
  const auto c = api.catalog();
  EXPECT_TRUE(c["datasets"].empty());
  EXPECT_TRUE(c["cohorts"].empty());
}

TEST_F(ServiceTest, Catalog) {
  const auto c = api_->catalog();
  ASSERT_EQ(c["datasets"].size(), 12u);
  EXPECT_EQ(c["datasets"][0]["id"], "ctl-000");
  EXPECT_EQ(c["datasets"][0]["layers"].size(), 11u);
  EXPECT_EQ(c["datasets"][0]["attributes"].size(), 3u);  // no volume
  EXPECT_EQ(c["datasets"][6]["attributes"].size(), 5u);
  EXPECT_EQ(c["cohorts"][1]["name"], "patients");
  ApiService again(root_->path());
  EXPECT_EQ(again.catalog(), c);
}

TEST_F(ServiceTest, DatasetAndErrors) {
  const auto d = api_->dataset("pat-002");
  EXPECT_EQ(d["cohort"], "patients");
  EXPECT_EQ(d["boundary_coverage"].size(), 12u);
  try {
    api_->dataset("nope");
    FAIL();
  } catch (const ApiError& e) {
    EXPECT_EQ(e.status(), 404);
    EXPECT_EQ(e.body()["code"], "not_found");
    EXPECT_TRUE(e.body().contains("message"));
    EXPECT_TRUE(e.body().contains("detail"));
  }
}

TEST_F(ServiceTest, MapPayload) {
  const auto j = api_->map("ctl-001", "ONL", "thickness");
  EXPECT_EQ(j["shape"], json({64, 128}));
  EXPECT_EQ(j["unit"], "um");
  const auto m = attribute_map_from_json(j);
  EXPECT_EQ(m, maps("ctl", 2, false)[1]);
  EXPECT_LT(j["range"]["min"].get<double>(), j["range"]["max"].get<double>());
  EXPECT_EQ(status_of([&] { api_->map("ctl-001", "ONL", "reflectivity"); }), 422);
  EXPECT_EQ(status_of([&] { api_->map("ctl-001", "ZZZ", "thickness"); }), 404);
  EXPECT_EQ(status_of([&] { api_->map("ctl-001", "ONL", "volume"); }), 400);
  EXPECT_NO_THROW(api_->map("pat-001", "ONL", "reflectivity"));
}

TEST_F(ServiceTest, DeviationPayload) {
  const auto j = api_->map("pat-000", "ONL", "thickness", std::string("controls"));
  const auto dev = deviation_map_from_json(j);
  const auto model = build_control_model(maps("ctl", 2, false));
  const auto oracle = deviation_map(maps("pat", 1, true)[0], model);
  EXPECT_TRUE(dev.z == oracle.z);
  EXPECT_TRUE(dev.flag == oracle.flag);
  EXPECT_EQ(status_of([&] { api_->map("pat-000", "ONL", "thickness", std::string("nobody")); }), 404);
}

TEST_F(ServiceTest, BscanPayload) {
  const auto j = api_->bscan("pat-000", 10, std::string("ONL"), std::string("thickness"));
  EXPECT_EQ(j["boundaries"].size(), 12u);
  EXPECT_EQ(j["boundaries"][0].size(), 128u);
  EXPECT_FALSE(j["intensity"].is_null());
  const auto m = maps("pat", 1, true)[0];
  for (int ix = 0; ix < 128; ix += 9) EXPECT_EQ(j["profile"]["values"][ix].get<double>(), m.values(ix, 10));
  const auto k = api_->bscan("ctl-000", 0, std::nullopt, std::nullopt);
  EXPECT_TRUE(k["intensity"].is_null());
  EXPECT_TRUE(k["profile"].is_null());
  EXPECT_EQ(status_of([&] { api_->bscan("ctl-000", 64, std::nullopt, std::nullopt); }), 404);
}

TEST_F(ServiceTest, GridFitMatchesLibrary) {
  const auto s = api_->create_session()["session_id"].get<std::string>();
  const auto g = api_->create_grid(s, {{"dataset", "ctl-003"}, {"layer", "ONL"}, {"attribute", "thickness"},
                                       {"sd_threshold", 2.0}, {"max_depth", 3}});
  EXPECT_EQ(g["version"], 1);
  const auto lib = fit_grid(maps("ctl", 2, false)[3], 2.0, 3);
  EXPECT_EQ(g["grid"], grid_to_json(lib));
  const auto listed = api_->list_grids(s);
  EXPECT_EQ(listed["grids"].size(), 1u);
  EXPECT_EQ(api_->get_grid(s, g["grid_id"])["grid"], g["grid"]);

  const auto common = api_->create_grid(s, {{"cohort", "controls"}, {"layer", "ONL"}, {"attribute", "thickness"},
                                            {"sd_threshold", 2.0}, {"max_depth", 2}});
  EXPECT_EQ(common["grid"], grid_to_json(fit_common_grid(maps("ctl", 2, false), 2.0, 2)));
  EXPECT_EQ(status_of([&] { api_->create_grid(s, {{"layer", "ONL"}, {"attribute", "thickness"}}); }), 400);
  EXPECT_EQ(status_of([&] { api_->create_grid(s, {{"dataset", "ctl-003"}, {"layer", "ONL"},
                                                  {"attribute", "thickness"}, {"sd_threshold", -1}}); }),
            400);
  EXPECT_EQ(status_of([&] { api_->list_grids("nope"); }), 404);
}

TEST_F(ServiceTest, SplitMergeAndConflicts) {
  const auto s = api_->create_session()["session_id"].get<std::string>();
  const auto g0 = api_->create_grid(s, {{"dataset", "ctl-000"}, {"layer", "ONL"}, {"attribute", "thickness"}});
  const std::string gid = g0["grid_id"];
  EXPECT_EQ(g0["grid"]["leaf_count"], 9);
  const auto g1 = api_->edit_grid(s, gid, "outer-nasal", "split", json{{"version", 1}});
  EXPECT_EQ(g1["version"], 2);
  EXPECT_EQ(g1["grid"]["leaf_count"], 12);
  EXPECT_EQ(status_of([&] { api_->edit_grid(s, gid, "outer-nasal", "split", json{{"version", 1}}); }), 409);
  EXPECT_EQ(status_of([&] { api_->edit_grid(s, gid, "outer-nasal", "split", json{{"version", 2}}); }), 409);
  EXPECT_EQ(status_of([&] { api_->edit_grid(s, gid, "center", "merge", json{{"version", 2}}); }), 409);
  EXPECT_EQ(status_of([&] { api_->edit_grid(s, gid, "nowhere", "split", json{{"version", 2}}); }), 404);
  EXPECT_EQ(status_of([&] { api_->edit_grid(s, gid, "center", "split", json::object()); }), 400);
  const auto g2 = api_->edit_grid(s, gid, "outer-nasal", "merge", json{{"version", 2}});
  EXPECT_EQ(g2["grid"]["cells"], g0["grid"]["cells"]);
  EXPECT_EQ(g2["version"], 3);
}

TEST_F(ServiceTest, RandomEditSequencesKeepInvariants) {
  const auto s = api_->create_session()["session_id"].get<std::string>();
  const std::string gid =
      api_->create_grid(s, {{"cohort", "controls"}, {"layer", "2"}, {"attribute", "thickness"}})["grid_id"];
  std::mt19937_64 rng(5);
  std::uint64_t version = 1;
  for (int step = 0; step < 150; ++step) {
    const auto grid = grid_from_json(api_->get_grid(s, gid)["grid"]);
    ASSERT_NO_THROW(grid.check_invariants());
    std::vector<std::string> ids;
    for (const auto& [id, _] : grid.cells()) ids.push_back(id);
    const std::string id = ids[rng() % ids.size()];
    const std::string op = rng() % 3 ? "split" : "merge";
    try {
      const auto r = api_->edit_grid(s, gid, id, op, json{{"version", version}});
      version = r["version"];
    } catch (const ApiError& e) {
      EXPECT_EQ(e.status(), 409) << e.what();
      EXPECT_EQ(e.code(), "illegal_edit");
    }
  }
  EXPECT_GT(version, 20u);
}

TEST_F(ServiceTest, CompareCachedAndDelegated) {
  const json req = {{"patients", "patients"}, {"controls", "controls"}, {"layer", "ONL"},
                    {"attribute", "thickness"}, {"mode", "both"}, {"sd_threshold", 2.0}, {"max_depth", 2}};
  const std::size_t before = api_->compare_cache_size();
  const std::string a = api_->compare(req);
  const std::string b = api_->compare(req);
  EXPECT_EQ(a, b);
  EXPECT_EQ(api_->compare_cache_size(), before + 1);
  const auto doc = json::parse(a);
  const auto pm = maps("pat", 1, true), cm = maps("ctl", 2, false);
  const auto lib = compare_pointwise(pm, cm, {});
  EXPECT_EQ(doc["map"]["layers"], comparison_map_to_json(lib)["layers"]);
  EXPECT_EQ(doc["regions"].size(), extract_significant_regions(lib).size());
  EXPECT_GT(doc["regions"].size(), 0u);
  const CompareConfig grid_cfg{TestKind::WelchT, 0.05, Correction::None, 3};
  EXPECT_EQ(doc["grid"], cell_comparison_to_json(compare_gridwise(fit_common_grid(cm, 2.0, 2), pm, cm, grid_cfg)));

  json swapped = req;
  swapped["patients"] = "controls";
  swapped["controls"] = "patients";
  const auto sw = comparison_map_from_json(json::parse(api_->compare(swapped))["map"]);
  for (std::size_t i = 0; i < lib.records.size(); i += 13) EXPECT_EQ(sw.records[i].diff, -lib.records[i].diff);

  json bad = req;
  bad["alpha"] = 0.0;
  EXPECT_EQ(status_of([&] { api_->compare(bad); }), 400);
  bad = req;
  bad["patients"] = "nobody";
  EXPECT_EQ(status_of([&] { api_->compare(bad); }), 404);
}

TEST_F(ServiceTest, GridComparisonMode) {
  const auto s = api_->create_session()["session_id"].get<std::string>();
  const auto g = api_->create_grid(s, {{"cohort", "controls"}, {"layer", "ONL"}, {"attribute", "thickness"},
                                       {"compare", {{"patients", "patients"}, {"controls", "controls"}}}});
  ASSERT_TRUE(g.contains("comparison"));
  EXPECT_EQ(g["comparison"]["cells"].size(), 9u);
  const auto pm = maps("pat", 1, true), cm = maps("ctl", 2, false);
  const auto lib = compare_gridwise(grid_from_json(g["grid"]), pm, cm, {TestKind::WelchT, 0.05, Correction::None, 3});
  EXPECT_EQ(g["comparison"]["cells"][4]["p"].get<double>(), lib.records[4].p);
}

TEST_F(ServiceTest, Measure) {
  const auto s = api_->create_session()["session_id"].get<std::string>();
  const auto g = api_->create_grid(s, {{"dataset", "ctl-002"}, {"layer", "ONL"}, {"attribute", "thickness"},
                                       {"sd_threshold", 2.5}, {"max_depth", 2}});
  const std::string leaf = g["grid"]["leaves"][0];
  const auto m = api_->measure(s, {{"dataset", "ctl-002"}, {"layer", "ONL"}, {"attribute", "thickness"},
                                   {"selection", {{"grid", g["grid_id"]}, {"cells", {leaf}}}}});
  const auto grid = grid_from_json(g["grid"]);
  EXPECT_EQ(m["n"], grid.cell(leaf).summary->n_valid);
  EXPECT_EQ(m["mean"].get<double>(), grid.cell(leaf).summary->mean);
  EXPECT_EQ(m["sd"].get<double>(), grid.cell(leaf).summary->sd);

  const json square = {{-9, -9}, {9, -9}, {9, 9}, {-9, 9}};
  const auto whole = api_->measure(s, {{"dataset", "ctl-002"}, {"layer", "ONL"}, {"attribute", "thickness"},
                                       {"selection", {{"polygon", square}}}});
  const auto map = maps("ctl", 2, false)[2];
  CellSummary oracle;
  describe_values(map.values.values(), oracle);
  EXPECT_EQ(whole["mean"].get<double>(), oracle.mean);
  EXPECT_EQ(whole["n"], 128 * 64);

  json disc = json::array();
  for (int k = 0; k < 64; ++k) {
    const double a = 2 * std::numbers::pi * k / 64;
    disc.push_back({kDefect.center_x_mm + kDefect.radius_mm * std::cos(a), kDefect.center_y_mm + kDefect.radius_mm * std::sin(a)});
  }
  const auto two = api_->measure(s, {{"patients", "patients"}, {"controls", "controls"}, {"layer", "ONL"},
                                     {"attribute", "thickness"}, {"selection", {{"polygon", disc}}}});
  EXPECT_NEAR(two["mean_diff"].get<double>(), -15.0, 3.0);
  EXPECT_LT(two["p"].get<double>(), 1e-3);

  EXPECT_EQ(status_of([&] {
              api_->measure(s, {{"dataset", "ctl-002"}, {"layer", "ONL"}, {"attribute", "thickness"},
                                {"selection", {{"polygon", {{20, 20}, {20.1, 20}, {20.1, 20.1}}}}}});
            }),
            400);
  EXPECT_EQ(status_of([&] {
              api_->measure(s, {{"dataset", "ctl-002"}, {"layer", "ONL"}, {"attribute", "thickness"},
                                {"selection", {{"grid", g["grid_id"]}, {"cells", {"nowhere"}}}}});
            }),
            404);
}

TEST_F(ServiceTest, HttpRoutes) {
  HttpServer server(*api_);
  const int port = server.bind("127.0.0.1", 0);
  std::thread t([&] { server.listen(); });
  httplib::Client cli("127.0.0.1", port);
  cli.set_read_timeout(30);
  for (int i = 0; i < 100 && !cli.Get("/catalog"); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(20));

  auto r = cli.Get("/catalog");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(json::parse(r->body), api_->catalog());
  r = cli.Get("/datasets/nope");
  EXPECT_EQ(r->status, 404);
  EXPECT_EQ(json::parse(r->body)["code"], "not_found");
  r = cli.Get("/datasets/ctl-000/layers/ONL/attributes/thickness/map");
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(json::parse(r->body)["shape"], json({64, 128}));
  r = cli.Get("/datasets/pat-000/layers/ONL/attributes/thickness/map?deviation=controls");
  EXPECT_EQ(json::parse(r->body)["kind"], "deviation_map");
  r = cli.Get("/datasets/ctl-000/bscans/3?layer=ONL&attribute=thickness");
  EXPECT_EQ(json::parse(r->body)["boundaries"].size(), 12u);
  r = cli.Get("/datasets/ctl-000/bscans/99");
  EXPECT_EQ(r->status, 404);
  r = cli.Get("/no/such/route");
  EXPECT_EQ(r->status, 404);

  r = cli.Post("/sessions", "", "application/json");
  EXPECT_EQ(r->status, 201);
  const std::string s = json::parse(r->body)["session_id"];
  r = cli.Post("/sessions/" + s + "/grids",
               json{{"dataset", "ctl-000"}, {"layer", "ONL"}, {"attribute", "thickness"}}.dump(), "application/json");
  EXPECT_EQ(r->status, 201);
  const std::string g = json::parse(r->body)["grid_id"];
  r = cli.Get("/sessions/" + s + "/grids");
  EXPECT_EQ(json::parse(r->body)["grids"].size(), 1u);
  r = cli.Post("/sessions/" + s + "/grids/" + g + "/cells/center/split", R"({"version": 1})", "application/json");
  EXPECT_EQ(r->status, 200);
  r = cli.Post("/sessions/" + s + "/grids/" + g + "/cells/center/1/split", R"({"version": 2})", "application/json");
  EXPECT_EQ(r->status, 200) << r->body;
  EXPECT_TRUE(json::parse(r->body)["grid"]["leaves"].dump().find("center/1/3") != std::string::npos);
  r = cli.Post("/sessions/" + s + "/grids/" + g + "/cells/center/split", "not json", "application/json");
  EXPECT_EQ(r->status, 400);
  const json creq = {{"patients", "patients"}, {"controls", "controls"}, {"layer", "3"}, {"attribute", "thickness"}};
  auto c1 = cli.Post("/compare", creq.dump(), "application/json");
  auto c2 = cli.Post("/compare", creq.dump(), "application/json");
  EXPECT_EQ(c1->status, 200);
  EXPECT_EQ(c1->body, c2->body);
  r = cli.Post("/sessions/" + s + "/measure",
               json{{"dataset", "ctl-000"}, {"layer", "ONL"}, {"attribute", "thickness"},
                    {"selection", {{"grid", g}, {"cells", {"center/0"}}}}}.dump(),
               "application/json");
  EXPECT_EQ(r->status, 200) << r->body;
  EXPECT_GT(json::parse(r->body)["n"].get<int>(), 0);

  server.stop();
  t.join();
}

TEST_F(ServiceTest, TwoClientsConflictingSplits) {
  HttpServer server(*api_);
  const int port = server.bind("127.0.0.1", 0);
  std::thread t([&] { server.listen(); });
  httplib::Client setup("127.0.0.1", port);
  for (int i = 0; i < 100 && !setup.Get("/catalog"); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(20));
  for (int round = 0; round < 10; ++round) {
    const std::string s = json::parse(setup.Post("/sessions", "", "application/json")->body)["session_id"];
    const std::string g = json::parse(setup.Post("/sessions/" + s + "/grids",
                                                 json{{"dataset", "ctl-001"}, {"layer", "ONL"},
                                                      {"attribute", "thickness"}}.dump(),
                                                 "application/json")
                                          ->body)["grid_id"];
    std::atomic<int> ok{0}, conflict{0};
    auto client = [&](const std::string& cell) {
      httplib::Client cli("127.0.0.1", port);
      auto r = cli.Post("/sessions/" + s + "/grids/" + g + "/cells/" + cell + "/split", R"({"version": 1})",
                        "application/json");
      if (r && r->status == 200) ++ok;
      if (r && r->status == 409) {
        ++conflict;
        EXPECT_EQ(json::parse(r->body)["code"], "version_conflict");
      }
    };
    std::thread a(client, "inner-nasal"), b(client, "outer-temporal");
    a.join();
    b.join();
    EXPECT_EQ(ok.load(), 1);
    EXPECT_EQ(conflict.load(), 1);
    const auto state = json::parse(setup.Get("/sessions/" + s + "/grids/" + g)->body);
    EXPECT_EQ(state["version"], 2);
    EXPECT_EQ(state["grid"]["leaf_count"], 12);
  }
  server.stop();
  t.join();
}
